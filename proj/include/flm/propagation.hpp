#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "flm/microlocal.hpp"
#include "flm/pdo.hpp"

namespace flm {

// Exponent bookkeeping for the linear-order / gain / integrability data that
// the regularity formulas consume.  `r` is the operator order in weight
// exponent units, `eps_gain` the per-step gain (0 < eps_gain < r), `tau` the
// integrability exponent of the reciprocal damping weight, `t_tilde` the
// starting regularity, `s` the target, `q` the conjugate Lebesgue exponent.
struct RegularityLedger {
  double r = 1.0;
  double eps_gain = 0.5;
  double tau = 1.0;
  double t_tilde = 0.0;
  double s = 0.0;
  double q = 2.0;
  std::vector<double> schedule;
};

// Orders visited by the iterative regularity improvement: [t, t+eps, ...,
// t+N eps] with N minimal such that t+N eps >= s.  t == s returns {t}.
std::vector<double> bootstrap_schedule(double t, double s, double r, double eps);

// Best order reachable by the semilinear gain formula:
//   t_max = min{ s, t_tilde + (floor((t_tilde - r - tau)/eps) + 2) eps }.
// Requires 0 < eps < r and tau + r - eps <= t_tilde < s.
double semilinear_gain(const RegularityLedger& ledger);

// The anisotropic model symbol P(x, xi) = i x1 xi1 - xi1 + xi2^2 in two
// dimensions, with separable structure for fast quantization.  It is
// quasi-homogeneous of degree one for the weight vector M = (1, 2):
// P(x, t xi1, t^{1/2} xi2) = t P(x, xi).
Symbol example_symbol();

// The two-sided parabolic sector X_k = { xi1 <= (1-k) xi2^2  or
// xi1 >= xi2^2 / (1-k) }, 0 < k < 1, closed under the M = (1, 2) scaling.
FrequencyPredicate example_Xk(double k);

// Regularity thresholds for the model operator with conjugate exponent q.
// Case a applies when 2 t_tilde - 2 - 4/q is not an integer and yields
// min{s, t_tilde + 1 + floor(2 t_tilde - 2 - 4/q)/2}; case b applies at
// integer values and yields min{s, t_tilde + 1/2 + floor(...)/2}.  Requires
// s > t_tilde > 2/q + 1/2.
enum class ThresholdCase { a, b };
double example_thresholds(double t_tilde, double s, double q, ThresholdCase which);

// End-to-end demonstration: manufacture a field whose spectrum is a smooth
// decaying part plus a singular ridge along the characteristic parabola,
// localized in space near x1 = 0; apply the model operator; measure the
// microlocal norms of u and f = Pu inside X_k and inside the complementary
// parabola cone at each probe point, at the configured resolution and at
// half resolution.  The report records the norms, their refinement ratios,
// and the measured separation pattern.
struct DemoScenario {
  GridSpec grid{2, 3.0, 256};
  double k = 0.5;
  double p = 2.0;
  double t_tilde = 1.0;
  double s = 10.0;
  double ridge_width = 0.05;       // ridge half-width in units of the M weight
  double ridge_amplitude = 30.0;   // 0 disables the singular part entirely
  double smooth_amplitude = 300.0; // scale of the smooth background spectrum
  double eps = 0.05;               // size of the characteristic neighborhood
  double chi_sigma = 0.45;         // spatial width of the singular localizer
  double phi_sigma = 0.8;          // width of the probe window
  double weight_floor = 60.0;      // masks keep only frequencies above this weight
  double separation = 10.0;   // required singular/elliptic norm ratio
  std::vector<std::array<double, 2>> probes{{0.0, 0.0}, {1.0, 0.0}};
  std::uint64_t seed = 20260826;
};

nlohmann::json run_propagation_demo(const DemoScenario& config);

}  // namespace flm
