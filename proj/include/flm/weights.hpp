#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "flm/common.hpp"
#include "flm/newton_polyhedron.hpp"

namespace flm {

// Moderate weight on R^n. `eval` must be positive everywhere. The growth
// metadata records a valid polynomial sandwich
//   (1/growth_const) (1+|xi|)^{growth_lower} <= w(xi) <= growth_const (1+|xi|)^{growth_upper}
// and `temperance_N` an exponent for which w(xi) <= temperance_C (1+|xi-eta|)^N w(eta).
struct Weight {
  int n = 1;
  std::function<double(std::span<const double>)> eval;
  std::string family;  // "homogeneous", "quasi_homogeneous", "multi_quasi_elliptic",
                       // "log_type", "constant", "derived"
  double growth_lower = 0.0;
  double growth_upper = 0.0;
  double growth_const = 1.0;
  double temperance_N = 0.0;
  double temperance_C = 1.0;

  double operator()(std::span<const double> xi) const { return eval(xi); }
  double operator()(double a) const {
    double b[1] = {a};
    return eval(std::span<const double>(b, 1));
  }
  double operator()(double a, double b) const {
    double c[2] = {a, b};
    return eval(std::span<const double>(c, 2));
  }
};

Weight make_homogeneous(int n, double m);                       // <xi>^m
Weight make_quasi_homogeneous(std::vector<long long> M, double s);  // <xi>_M^s
Weight make_multi_quasi_elliptic(const CompletePolyhedron& p, double s);  // lambda_P^s
Weight make_log_type(int n, double r, double s);                // <xi>^s log(2+<xi>)^r
Weight make_constant(int n, double c);

Weight weight_product(const Weight& a, const Weight& b);
Weight weight_power(const Weight& a, double s);
Weight weight_inverse(const Weight& a);

enum class Condition {
  temperate,        // w(xi) <= C (1+|xi-eta|)^N w(eta)
  slowly_varying,   // ratio pinched near xi on balls of radius ~ w(xi)^{1/N}
  subadditive,      // w(xi) <= C (w(xi-eta) + w(eta))
  submultiplicative,// w(xi) <= C w(xi-eta) w(eta)
  delta_split,      // w(xi) <= C { w(eta) w(xi-eta)^d + w(eta)^d w(xi-eta) }
  beurling,         // sup_xi int w(xi) / (w(xi-eta) w(eta)) d eta < inf
  polynomial_growth,
  scale_bounded     // w(t xi) <= C w(xi) for |t| <= 1
};

struct SamplingPlan {
  int shells = 15;           // dyadic radii 2^0 .. 2^{shells-1}
  int directions = 64;       // per shell (n >= 2); n = 1 uses +-
  int random_pairs = 10000;
  double truncation = 256.0; // initial radius for Beurling quadrature
  int quad_per_axis = 512;   // quadrature resolution for integral conditions
  int levels = 2;            // refinement levels; must be >= 2
  double fd_step = 0.0;      // fixed finite-difference step; 0 = automatic
  std::uint64_t seed = 20260826;
};

struct ConditionReport {
  Condition condition;
  bool passed = false;
  double constant = 0.0;          // empirical best constant at the finest level
  double refinement_ratio = 1.0;  // finest-level constant / previous-level constant
  double parameter = 0.0;         // delta for delta_split, N for temperate, q for beurling
  std::vector<double> witness_xi; // arg-max pair (xi then eta, concatenated)
  std::vector<double> witness_eta;
};

ConditionReport check_condition(const Weight& w, Condition c, const SamplingPlan& plan);

// sup_xi || w(xi) / (w1(xi - .) w2(.)) ||_{L^q(d eta)}; q may be infinity.
// Returns +inf when doubling the truncation radius grows the value by > 10%.
double estimate_Cq(const Weight& w, const Weight& w1, const Weight& w2, double q,
                   const SamplingPlan& plan);

// Checks |D^alpha (w^s)| <= C w^{s - decay_per_order . alpha} by central
// differences on dyadic probe shells; `decay_per_order[j]` is the regularity
// gained per derivative in direction j (e.g. 1/m_j for <.>_M).
struct DerivativeDecayReport {
  bool passed = false;
  double constant = 0.0;
  double refinement_ratio = 1.0;
};
DerivativeDecayReport check_derivative_decay(const Weight& w, double s,
                                             const std::vector<int>& alpha,
                                             const std::vector<double>& decay_per_order,
                                             const SamplingPlan& plan);

}  // namespace flm
