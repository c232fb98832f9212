#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "flm/grid_fourier.hpp"
#include "flm/pdo.hpp"
#include "flm/weights.hpp"

namespace flm {

// Boolean set of frequency samples on a grid; all set algebra is exact.
struct FrequencyMask {
  GridSpec grid;
  std::vector<std::uint8_t> bits;

  bool test(std::size_t i) const { return bits[i] != 0; }
  void set(std::size_t i, bool v) { bits[i] = v ? 1 : 0; }
  std::size_t count() const;
  bool any() const;
  bool subset_of(const FrequencyMask& o) const;  // throws GridMismatch
  FrequencyMask operator&(const FrequencyMask& o) const;
  FrequencyMask operator|(const FrequencyMask& o) const;
  FrequencyMask complement() const;
  bool operator==(const FrequencyMask& o) const;
};

using FrequencyPredicate = std::function<bool(std::span<const double>)>;

FrequencyMask empty_mask(const GridSpec& g);
FrequencyMask full_mask(const GridSpec& g);
FrequencyMask mask_from_predicate(const GridSpec& g, const FrequencyPredicate& pred);

// Union over generators xi0 in X of { xi : w(xi - xi0) < eps w(xi0) }.
// Generators with w(xi0) <= (min_grid w) / eps cannot contribute and are
// skipped. Requires w to be nondecreasing in each |zeta_j| (all built-in
// families are); a monotonicity scan falls back to the exhaustive pairing
// when the assumption fails on the difference lattice.
FrequencyMask bracket_neighborhood(const FrequencyMask& X, const Weight& w, double eps);

// Union over generators xi0 of { xi : |xi - xi0| < eps lambda(xi0)^{1/mu} }.
FrequencyMask euclid_neighborhood(const FrequencyMask& X, const Weight& lambda, double eps,
                                  double mu);

enum class InclusionMode {
  bracket_bracket,  // (X_[e'w])_[e'w]                  subset of X_[ew]
  complement,       // (C X_[ew])_[e'w]                 subset of C X_[e'w]
  euclid,           // (X_{e'l})_{e'l}                  subset of X_{el}
  mixed,            // (X cap {l>c/e'})_{e'l}           subset of X_[el] cap {l>c/e}
  corollary,        // (X_[e'l])_{e'l}                  subset of X_[el]
  masked_weight_bound  // reports c_hat with w > c_hat / eps on X_[ew]
};

struct InclusionReport {
  InclusionMode mode;
  double eps = 0.0;
  double eps_prime = 0.0;   // largest verified value from the schedule; 0 if none
  bool verified = false;
  double c_hat = 0.0;       // min over X_[ew] of eps * w (masked_weight_bound)
  std::vector<double> schedule;  // the candidates tried, in order
};

// Searches eps' over eps/2, eps/4, ..., eps/2^10 and returns the largest
// value for which the requested inclusion holds exactly on the grid. A failed
// search is reported (verified = false), not thrown.
InclusionReport find_inclusion_eps(const FrequencyMask& X, const Weight& w, double eps,
                                   InclusionMode mode, double mu = 1.0, double c = 1.0);

// Anisotropic norm |xi|_M = (sum xi_j^{2 m_j})^{1/2} and the cone generated
// by the M-ball around eta: xi != 0 with t^{-1/M} xi in B_M(eta; R) for some
// t > 0.
double m_norm(std::span<const double> xi, const std::vector<long long>& M);

struct MCone {
  std::vector<long long> M;
  std::vector<double> eta;
  double R = 1.0;
};

// min over t > 0 of |t^{-1/M} xi - eta|_M, by 64 log-spaced seeds refined
// with golden-section descent to 1e-6.
double m_cone_distance(std::span<const double> xi, const std::vector<long long>& M,
                       std::span<const double> eta);
bool m_cone_contains(std::span<const double> xi, const MCone& cone);

struct ConeEquivalenceReport {
  bool verified = false;
  bool forward = false;   // X_[e'<.>_M] subset of union of cones, truncated
  bool backward = false;  // truncated cone union at e' subset of X_[e<.>_M]
  double eps = 0.0;
  double eps_prime = 0.0;
  double c_hat = 0.0;
  std::size_t sphere_generators = 0;  // |X cap S_M| among the samples
};

// Prop-style equivalence between [<.>_M]-neighborhoods of an M-conic set and
// truncated unions of M-cones with apertures from the descending schedule.
// X must be given as an analytic predicate (closed under t^{1/M} scaling,
// checked on samples; NotMConic otherwise). n = 2 only.
ConeEquivalenceReport check_cone_equivalence(const FrequencyPredicate& X,
                                             const std::vector<long long>& M, double eps,
                                             const GridSpec& grid,
                                             std::size_t sphere_samples = 512,
                                             std::size_t angle_bins = 2048);

struct CutoffReport {
  double eps = 0.0;
  double eps_prime = 0.0;
  bool range_ok = false;    // 0 <= sigma <= 1
  bool support_ok = false;  // supp sigma inside X_{eps lambda}
  bool plateau_ok = false;  // sigma = 1 on X_{eps' lambda}
  double seminorm1 = 0.0;   // sup |D_j sigma| lambda^{1/mu}
  double seminorm2 = 0.0;   // sup |D_j D_k sigma| lambda^{2/mu}
};

// Frequency cutoff sigma(xi) in [0, 1] supported in X_{eps lambda} and equal
// to 1 on X_{eps' lambda} (eps' = eps/2), built by composing a quintic ramp
// with the scaled distance e(xi) = min_{xi0 in X} |xi - xi0| / lambda(xi0)^{1/mu}.
// All three contract clauses are checked a posteriori on the grid;
// ConstructionFailed otherwise.
Symbol cutoff_symbol(const FrequencyMask& X, double eps, const Weight& lambda, double mu,
                     CutoffReport* report = nullptr);

// Weighted L^p norm of the spectrum of phi*u restricted to a mask, or to the
// bracket neighborhood X_[eps w].
double mcl_fl_norm(const Field& u, const Field& phi, const FrequencyMask& mask, const Weight& w,
                   double p);
double mcl_fl_norm(const Field& u, const Field& phi, const FrequencyMask& X, double eps,
                   const Weight& w, double p);

struct MclEllipticReport {
  bool passed = false;
  double c0 = 0.0;        // min over the mask of |a(x0, xi)| / lambda(xi)^r
  double eps_used = 0.0;  // largest scheduled eps that passes
  double ball_c0 = 0.0;   // two-sided variant: min over a small x-ball
};

// Largest eps in eps0/2^k (k = 0..10) for which |a(x0, xi)| >= c0 lambda^r
// with c0 > threshold holds on X_[eps lambda]; EmptyMask if every scheduled
// mask is empty.
MclEllipticReport mcl_elliptic(const Symbol& a, std::span<const double> x0,
                               const FrequencyMask& X, double r, const Weight& lambda,
                               double eps0 = 0.5, double threshold = 1e-3);

// sup over grid xi of || Lambda(.) chi(.) F_x(phi a)(., xi) ||_{L^p} / gamma(xi),
// the masked companion of symbol_fl_seminorm.
double symbol_mcl_seminorm(const Symbol& a, const Field& phi, const FrequencyMask& mask,
                           const Weight& Lambda, const Weight& gamma, double p);

struct MclContinuityReport {
  double lhs = 0.0;        // masked Lambda-norm of phi * a(x,D)u at eps'
  double rhs_bound = 0.0;  // (1/eps') ||1/sigma||_q (|a|_mcl + ||a||) (|u|_mcl + ||u||)
  double ratio = 0.0;
  double eps = 0.0;
  double eps_prime = 0.0;
  double sigma_inv_q = 0.0;
  double seminorm_plain = 0.0;
  double seminorm_mcl = 0.0;
  double u_norm_global = 0.0;
  double u_norm_mcl = 0.0;
  bool passed = false;  // lhs and bound both finite (the constant is not claimed)
};

// Structured microlocal continuity estimate: the operator norm factors are
// assembled exactly as in the boundedness proof; pass means the left side is
// finite and dominated by a finite structured bound, not that the untracked
// constant is 1. PreconditionChainBroken when the pointwise chain
// sigma <= C lambda <= C Lambda <= C lambda^2 / sigma fails to be
// refinement-stable on probe shells.
MclContinuityReport verify_mcl_continuity(const Symbol& a, const Field& u, const Field& phi,
                                          const FrequencyMask& X, const Weight& lambda,
                                          const Weight& Lambda, const Weight& gamma,
                                          const Weight& sigma, double p, double eps);

struct FilterReport {
  bool member = false;
  bool indeterminate = false;  // growth in (10%, 50%]
  double coarse = 0.0;         // complement-mask norm at the base resolution
  double fine = 0.0;           // same at doubled resolution
  double growth = 0.0;         // fine/coarse - 1
};

// Realizes "X belongs to the singularity filter" as a finite query: the
// microlocal norm over the complement of X must stay finite, operationalized
// as growth below 10% when the grid resolution doubles (above 50% counts as
// divergent; in between is reported as indeterminate).
FilterReport filter_membership(const std::function<Field(const GridSpec&)>& make_u,
                               const std::function<Field(const GridSpec&)>& make_phi,
                               const FrequencyPredicate& X, const Weight& w, double p, double eps,
                               const GridSpec& grid);

}  // namespace flm
