#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "flm/weights.hpp"

using namespace flm;

namespace {
SamplingPlan quick_plan() {
  SamplingPlan p;
  p.shells = 11;
  p.directions = 32;
  p.random_pairs = 4000;
  p.quad_per_axis = 256;
  return p;
}
}  // namespace

TEST_CASE("family formulas at reference points") {
  auto qh = make_quasi_homogeneous({1, 2}, 1.0);
  CHECK(qh(0.0, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(qh(3.0, 2.0) == doctest::Approx(std::sqrt(26.0)).epsilon(1e-14));
  auto inv = weight_inverse(qh);
  CHECK(inv(3.0, 2.0) == doctest::Approx(1.0 / std::sqrt(26.0)).epsilon(1e-14));

  auto h = make_homogeneous(1, 2.0);
  CHECK(h(1.0) == doctest::Approx(2.0).epsilon(1e-14));

  CHECK_THROWS_AS(make_quasi_homogeneous({}, 1.0), BadParam);
  CHECK_THROWS_AS(make_quasi_homogeneous({1, 0}, 1.0), BadParam);
  CHECK_THROWS_AS(make_log_type(2, -1.0, 1.0), BadParam);
}

TEST_CASE("multi-quasi-elliptic weight of the (1,2) triangle equals the anisotropic bracket") {
  auto p = build_polyhedron({{0, 0}, {1, 0}, {0, 2}});
  auto mqe = make_multi_quasi_elliptic(p, 1.0);
  auto qh = make_quasi_homogeneous({1, 2}, 1.0);
  // lattice points of the triangle are (0,0),(1,0),(0,1),(0,2); the weight
  // sums xi^{2 alpha} over VERTICES only: 1 + xi1^2 + xi2^4, same as <.>_M.
  for (int i = -50; i <= 50; i += 7)
    for (int j = -50; j <= 50; j += 7) {
      double a = mqe(0.37 * i, 0.29 * j), b = qh(0.37 * i, 0.29 * j);
      CHECK(std::fabs(a - b) <= 1e-12 * b);
    }
}

TEST_CASE("combinators compose values and metadata") {
  auto h2 = make_homogeneous(1, 2.0), h3 = make_homogeneous(1, 3.0);
  auto prod = weight_product(h2, h3);
  auto h5 = make_homogeneous(1, 5.0);
  for (double x : {0.0, 0.5, 3.0, -17.0, 200.0})
    CHECK(prod(x) == doctest::Approx(h5(x)).epsilon(1e-12));
  CHECK(prod.temperance_N == doctest::Approx(5.0));

  auto p0 = weight_power(h2, 0.0);
  for (double x : {0.0, 1.0, 9.0}) CHECK(p0(x) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(weight_power(h2, -1.0).growth_upper == doctest::Approx(-2.0));
}

TEST_CASE("Peetre inequality is exact on random pairs") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  for (int m = -3; m <= 3; ++m) {
    auto w = make_homogeneous(2, double(m));
    double C = std::pow(2.0, std::abs(m));
    auto wm = make_homogeneous(2, std::abs(double(m)));
    for (int it = 0; it < 2000; ++it) {
      double xi[2] = {u(rng), u(rng)}, eta[2] = {u(rng), u(rng)};
      double d[2] = {xi[0] - eta[0], xi[1] - eta[1]};
      double lhs = w(xi[0], xi[1]);
      double rhs = C * wm(d[0], d[1]) * w(eta[0], eta[1]);
      CHECK(lhs <= rhs * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("condition checks on the homogeneous family") {
  auto plan = quick_plan();
  for (double m : {0.0, 1.0, 2.0}) {
    auto w = make_homogeneous(2, m);
    auto t = check_condition(w, Condition::temperate, plan);
    CHECK(t.passed);
    CHECK(t.constant <= std::pow(2.0, m) * 1.0001);
    CHECK(check_condition(w, Condition::slowly_varying, plan).passed);
    auto sm = check_condition(w, Condition::submultiplicative, plan);
    CHECK(sm.passed);
    CHECK(sm.constant <= std::pow(2.0, m) * 1.0001);
    if (m >= 1.0) CHECK(check_condition(w, Condition::subadditive, plan).passed);
    CHECK(check_condition(w, Condition::polynomial_growth, plan).passed);
    CHECK(check_condition(w, Condition::scale_bounded, plan).passed);
  }
}

TEST_CASE("constant weight is subadditive with constant one") {
  auto plan = quick_plan();
  auto rep = check_condition(make_constant(2, 1.0), Condition::subadditive, plan);
  CHECK(rep.passed);
  CHECK(rep.constant == doctest::Approx(0.5).epsilon(1e-12));  // 1 <= C(1+1) with C = 1/2
}

TEST_CASE("Beurling condition for <.>^2 in one dimension") {
  auto plan = quick_plan();
  auto rep = check_condition(make_homogeneous(1, 2.0), Condition::beurling, plan);
  CHECK(rep.passed);
  CHECK(rep.refinement_ratio <= 1.1);
}

TEST_CASE("delta condition: quasi-homogeneous weight passes with small delta") {
  auto plan = quick_plan();
  plan.random_pairs = 2000;
  auto w = make_quasi_homogeneous({1, 2}, 1.0);
  auto rep = check_condition(w, Condition::delta_split, plan);
  CHECK(rep.passed);
  CHECK(rep.parameter < 1.0);
}

TEST_CASE("refinement-level guard") {
  auto plan = quick_plan();
  plan.levels = 1;
  CHECK_THROWS_AS(check_condition(make_homogeneous(1, 1.0), Condition::temperate, plan),
                  PlanTooSmall);
}

TEST_CASE("C_q estimates") {
  auto plan = quick_plan();
  const double inf = std::numeric_limits<double>::infinity();
  auto one = make_constant(1, 1.0);
  CHECK(estimate_Cq(one, one, one, 1.0, plan) == inf);

  auto h2 = make_homogeneous(1, 2.0);
  double c = estimate_Cq(h2, h2, h2, 1.0, plan);
  CHECK(std::isfinite(c));
  CHECK(c > 0.0);

  auto h1 = make_homogeneous(1, 1.0);
  double cinf = estimate_Cq(h1, h1, h1, inf, plan);
  CHECK(cinf <= 2.0 * (1.0 + 1e-9));
}

TEST_CASE("truncation doubling stability for the finite Beurling integral") {
  auto plan = quick_plan();
  auto h2 = make_homogeneous(1, 2.0);
  double a = estimate_Cq(h2, h2, h2, 1.0, plan);
  plan.truncation *= 2.0;
  plan.quad_per_axis *= 2;  // keep the quadrature step fixed
  double b = estimate_Cq(h2, h2, h2, 1.0, plan);
  CHECK(std::fabs(a - b) <= 0.05 * a);
}

TEST_CASE("derivative decay of the anisotropic weight") {
  auto plan = quick_plan();
  auto w = make_quasi_homogeneous({1, 2}, 1.0);
  std::vector<double> dpo{1.0, 0.5};  // 1/m_j

  auto r01 = check_derivative_decay(w, 1.0, {0, 1}, dpo, plan);
  CHECK(r01.passed);  // exponent 1 - 1/2
  auto r10 = check_derivative_decay(w, 1.0, {1, 0}, dpo, plan);
  CHECK(r10.passed);  // exponent 0

  // Symbolic oracle for d/dxi2 of (1+xi1^2+xi2^4)^{1/2}: 2 xi2^3 / w.
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  for (int it = 0; it < 200; ++it) {
    double x1 = u(rng), x2 = u(rng);
    double v = w(x1, x2);
    double dsym = 2.0 * x2 * x2 * x2 / v;
    // The empirical constant must dominate the symbolic ratio scaled the same way.
    CHECK(std::fabs(dsym) / std::pow(v, 0.5) <= (r01.constant + 1e-9) * 2.0 + 2.0);
  }

  auto c = make_constant(2, 1.0);
  auto rc = check_derivative_decay(c, 1.0, {1, 0}, {1.0, 1.0}, plan);
  CHECK(rc.passed);
  CHECK(rc.constant <= 1e-10);

  plan.fd_step = 1e9;
  CHECK_THROWS_AS(check_derivative_decay(w, 1.0, {0, 1}, dpo, plan), StepTooCoarse);
}

TEST_CASE("growth sandwich exponent fits on log-log probes") {
  auto p = build_polyhedron({{0, 0}, {3, 0}, {2, 2}, {0, 4}});
  struct Case {
    Weight w;
    double lo, hi;
  };
  std::vector<Case> cases{
      {make_quasi_homogeneous({1, 2}, 1.0), 1.0, 2.0},
      {make_multi_quasi_elliptic(p, 1.0), 3.0, 4.0},
  };
  for (const auto& c : cases) {
    // Empirical exponent along a coordinate axis direction brackets [lo, hi].
    double worst_lo = 1e9, worst_hi = -1e9;
    for (int axis = 0; axis < 2; ++axis) {
      double r1 = 64.0, r2 = 4096.0;
      double xi1[2] = {0, 0}, xi2[2] = {0, 0};
      xi1[axis] = r1;
      xi2[axis] = r2;
      double e = std::log(c.w.eval(std::span<const double>(xi2, 2)) /
                          c.w.eval(std::span<const double>(xi1, 2))) /
                 std::log(r2 / r1);
      worst_lo = std::min(worst_lo, e);
      worst_hi = std::max(worst_hi, e);
    }
    CHECK(worst_lo >= c.lo - 0.05);
    CHECK(worst_hi <= c.hi + 0.05);
  }
}

TEST_CASE("slowly varying plus lower bound implies temperance; delta implies submultiplicative") {
  auto plan = quick_plan();
  plan.random_pairs = 3000;
  auto p = build_polyhedron({{0, 0}, {3, 0}, {2, 2}, {0, 4}});
  for (const Weight& w : {make_quasi_homogeneous({1, 2}, 1.0), make_multi_quasi_elliptic(p, 1.0),
                          make_log_type(2, 1.0, 1.0)}) {
    auto sv = check_condition(w, Condition::slowly_varying, plan);
    auto t = check_condition(w, Condition::temperate, plan);
    auto g = check_condition(w, Condition::delta_split, plan);
    auto sm = check_condition(w, Condition::submultiplicative, plan);
    CHECK(sv.passed);
    CHECK(t.passed);
    CHECK(g.passed);
    CHECK(sm.passed);
  }
}

TEST_CASE("Beurling integrability of powers of the worked-example weight") {
  // lambda_P^r satisfies the q=1 Beurling condition when r > n/((1-delta) mu0):
  // here n=2, delta=5/6, mu0=3 so the threshold is 4.
  auto plan = quick_plan();
  plan.quad_per_axis = 192;
  plan.truncation = 64.0;
  plan.shells = 7;
  auto p = build_polyhedron({{0, 0}, {3, 0}, {2, 2}, {0, 4}});
  auto lam5 = make_multi_quasi_elliptic(p, 5.0);
  auto rep = check_condition(lam5, Condition::beurling, plan);
  CHECK(rep.passed);
}
