#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "flm/grid_fourier.hpp"
#include "flm/weights.hpp"

namespace flm {

// Symbol a(x, xi). When `separable` is nonempty it must equal
// sum_k space_k(x) * freq_k(xi) and enables the fast quantization path;
// `x_independent` marks pure Fourier multipliers.
struct Symbol {
  int n = 1;
  std::function<complex(std::span<const double>, std::span<const double>)> eval;
  double order = 0.0;   // r
  double rho = 1.0;     // decay per derivative in (0, 1/mu]
  Weight reference;     // lambda
  struct Term {
    std::function<complex(std::span<const double>)> space;
    std::function<complex(std::span<const double>)> freq;
  };
  std::vector<Term> separable;
  bool x_independent = false;

  complex operator()(std::span<const double> x, std::span<const double> xi) const {
    return eval(x, xi);
  }
};

Symbol multiplier_symbol(int n, std::function<complex(std::span<const double>)> m);
Symbol function_symbol(int n, std::function<complex(std::span<const double>)> v);

struct EstimateReport {
  double lhs = 0.0;
  double rhs_bound = 0.0;
  double constant_used = 0.0;
  double ratio = 0.0;    // lhs / rhs_bound
  bool passed = false;   // ratio <= 1 + slack
  double slack = 0.01;
};

// a(x,D)f = (2 pi)^{-n} int e^{i x.xi} a(x,xi) fhat(xi) dxi, by direct grid
// summation, with fast paths for multipliers and separable symbols.
Field quantize(const Symbol& a, const Field& f);

// sup over grid frequencies xi of || phi(.) a(., xi) ||_{FL^p_w} / gamma(xi).
double symbol_fl_seminorm(const Symbol& a, const Field& phi, const Weight& w,
                          const Weight& gamma, double p);

struct EllipticityReport {
  bool passed = false;
  double c_K = 0.0;              // min |a| / lambda^r over the probe set
  double refinement_ratio = 1.0; // c at doubled probe density / c
};

// Box K in space (per-axis [lo, hi]); probes x in K and grid xi with
// |xi| >= R for the lower bound |a(x,xi)| >= c_K lambda(xi)^r.
struct SpaceBox {
  std::vector<double> lo, hi;
};
EllipticityReport check_elliptic(const Symbol& a, const Weight& lambda, double r,
                                 const SpaceBox& K, double R, const GridSpec& grid,
                                 double threshold = 1e-6);

// lhs = ||phi . a(x,D)u||_{FL^p_{omega2}} against
// (2 pi)^{-n} C_q ||a||_{FL^p_omega S_gamma} ||u||_{FL^p_{omega1}}, with
// C_q = sup_xi || omega2(xi) gamma(.) / (omega1(.) omega(xi - .)) ||_{L^q}.
EstimateReport verify_continuity(const Symbol& a, const Weight& omega, const Weight& omega1,
                                 const Weight& omega2, const Weight& gamma, double p,
                                 const Field& u, const Field& phi, const SamplingPlan& plan);

EstimateReport product_estimate(const Field& f1, const Field& f2, const Weight& omega,
                                const Weight& omega1, const Weight& omega2, double p,
                                const SamplingPlan& plan);

// Entire function F(x, z) = sum_{k>=1} c_k(x) z^k applied to u by repeated
// grid products. `coefficient` returns c_k (an x-dependent Field or a
// constant lifted to one); `majorant(k)` bounds sup_x |c_k(x)|.
struct EntireSeries {
  std::function<Field(int, const GridSpec&)> coefficient;
  std::function<double(int)> majorant;
  int max_terms = 64;
  bool zero_constant_term = true;  // F(x, 0) = 0 must hold
};
struct ComposeResult {
  Field value;
  EstimateReport report;  // realized ||F(u)|| <= C ||u|| constant
  int terms_used = 0;
};
ComposeResult compose_entire(const Field& u, const EntireSeries& F, const Weight& w, double p,
                             const SamplingPlan& plan);

// Reciprocal-symbol parametrix b = chi(xi) / a(x,xi) with chi a smooth radial
// cutoff: 0 for |xi| <= R, 1 for |xi| >= 2R.
Symbol approx_parametrix(const Symbol& a, const Weight& lambda, double r, const SpaceBox& K,
                         double R, const GridSpec& grid, double threshold = 1e-6);

}  // namespace flm
