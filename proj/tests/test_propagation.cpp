#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "flm/propagation.hpp"

using namespace flm;

TEST_CASE("bootstrap schedule covers the target in minimal steps") {
  CHECK(bootstrap_schedule(2.0, 2.0, 1.0, 0.5) == std::vector<double>{2.0});
  CHECK(bootstrap_schedule(1.0, 3.0, 1.0, 0.5) ==
        std::vector<double>{1.0, 1.5, 2.0, 2.5, 3.0});
  auto sch = bootstrap_schedule(1.0, 3.1, 1.0, 0.5);
  CHECK(sch.size() == 6);
  CHECK(sch.back() == doctest::Approx(3.5));
  CHECK(sch.back() >= 3.1);
  CHECK_THROWS_AS(bootstrap_schedule(1.0, 3.0, 1.0, 0.0), BadStep);
  CHECK_THROWS_AS(bootstrap_schedule(1.0, 3.0, 1.0, -0.5), BadStep);
  CHECK_THROWS_AS(bootstrap_schedule(3.0, 1.0, 1.0, 0.5), BadStep);
}

TEST_CASE("bootstrap schedule length matches the closed form") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> ud(0.1, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const double t = ud(rng);
    const double s = t + ud(rng);
    const double eps = 0.05 + 0.5 * ud(rng);
    auto sch = bootstrap_schedule(t, s, 1.0, eps);
    CHECK(sch.size() ==
          static_cast<std::size_t>(std::ceil((s - t) / eps)) + 1);
    CHECK(sch.front() == t);
    CHECK(sch.back() >= s);
    CHECK(sch.back() - eps < s);  // minimality of the step count
  }
}

TEST_CASE("semilinear gain formula") {
  RegularityLedger lg;
  lg.r = 1.0;
  lg.eps_gain = 0.5;
  lg.tau = 1.6;
  lg.t_tilde = 3.0;
  lg.s = 10.0;
  CHECK(semilinear_gain(lg) == doctest::Approx(4.0).epsilon(1e-12));

  lg.tau = 1.1;
  lg.s = 3.2;
  CHECK(semilinear_gain(lg) == doctest::Approx(3.2).epsilon(1e-12));

  lg.s = 3.0;  // t_tilde == s clamps
  lg.t_tilde = 3.0;
  CHECK(semilinear_gain(lg) == 3.0);

  lg.s = 10.0;
  lg.eps_gain = 1.5;  // gain must stay below the operator order
  CHECK_THROWS_AS(semilinear_gain(lg), ConstraintViolated);
  lg.eps_gain = 0.5;
  lg.tau = 5.0;  // tau + r - eps > t_tilde
  CHECK_THROWS_AS(semilinear_gain(lg), ConstraintViolated);
}

TEST_CASE("semilinear gain is monotone in the starting order and capped") {
  RegularityLedger lg;
  lg.r = 1.0;
  lg.eps_gain = 0.5;
  lg.tau = 1.3;
  lg.s = 6.0;
  double prev = 0.0;
  for (double tt = 1.8; tt < 6.0; tt += 0.07) {
    lg.t_tilde = tt;
    const double t = semilinear_gain(lg);
    CHECK(t <= lg.s);
    CHECK(t >= std::min(lg.s, tt + lg.eps_gain) - 1e-12);
    CHECK(t >= prev - 1e-12);
    prev = t;
  }
}

TEST_CASE("model symbol values and quasi-homogeneity") {
  Symbol P = example_symbol();
  auto at = [&](double x1, double x2, double k1, double k2) {
    double x[2] = {x1, x2}, xi[2] = {k1, k2};
    return P.eval(std::span<const double>(x, 2), std::span<const double>(xi, 2));
  };
  CHECK(std::abs(at(0.0, 5.0, 4.0, 2.0)) == 0.0);          // characteristic point
  CHECK(at(1.0, 0.0, 0.0, 1.0) == complex(1.0, 0.0));      // elliptic sample
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ud(-10.0, 10.0);
  for (int i = 0; i < 10000; ++i) {
    const double x[2] = {ud(rng), ud(rng)}, xi[2] = {ud(rng), ud(rng)};
    const double t = i % 2 == 0 ? 2.0 : 10.0;
    const complex lhs = at(x[0], x[1], t * xi[0], std::sqrt(t) * xi[1]);
    const complex rhs = t * at(x[0], x[1], xi[0], xi[1]);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(rhs)));
  }
}

TEST_CASE("parabolic sector membership and scaling closure") {
  for (double k : {0.25, 0.5, 0.75}) {
    auto X = example_Xk(k);
    double p[2] = {0.0, 1.0};
    CHECK(X(std::span<const double>(p, 2)));
  }
  auto X = example_Xk(0.5);
  double q[2] = {1.0, 1.0};
  CHECK(!X(std::span<const double>(q, 2)));

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ud(-20.0, 20.0);
  for (int i = 0; i < 10000; ++i) {
    const double xi[2] = {ud(rng), ud(rng)};
    const bool base = X(std::span<const double>(xi, 2));
    for (double t : {0.25, 4.0}) {
      const double sc[2] = {t * xi[0], std::sqrt(t) * xi[1]};
      CHECK(X(std::span<const double>(sc, 2)) == base);
    }
  }
  CHECK_THROWS_AS(example_Xk(0.0), BadK);
  CHECK_THROWS_AS(example_Xk(1.0), BadK);
  CHECK_THROWS_AS(example_Xk(-0.5), BadK);
}

TEST_CASE("regularity thresholds for the model operator") {
  CHECK(example_thresholds(2.6, 10.0, 2.0, ThresholdCase::a) ==
        doctest::Approx(4.1).epsilon(1e-12));
  CHECK(example_thresholds(2.5, 10.0, 2.0, ThresholdCase::b) ==
        doctest::Approx(3.5).epsilon(1e-12));
  CHECK(example_thresholds(2.6, 2.7, 2.0, ThresholdCase::a) ==
        doctest::Approx(2.7).epsilon(1e-12));  // clamp to the target
  CHECK_THROWS_AS(example_thresholds(1.5, 10.0, 2.0, ThresholdCase::a),
                  HypothesisViolated);
  CHECK_THROWS_AS(example_thresholds(2.6, 2.5, 2.0, ThresholdCase::a),
                  HypothesisViolated);
  CHECK_THROWS_AS(example_thresholds(2.6, 10.0, 2.0, ThresholdCase::b), CaseMismatch);
  CHECK_THROWS_AS(example_thresholds(2.5, 10.0, 2.0, ThresholdCase::a), CaseMismatch);
}

TEST_CASE("model operator is microlocally elliptic on the sector at the origin") {
  GridSpec g{2, 2.0, 128};
  auto lam = make_quasi_homogeneous({1, 2}, 1.0);
  auto Xk = mask_from_predicate(g, example_Xk(0.5));
  double x0[2] = {0.0, 0.0};
  auto rep = mcl_elliptic(example_symbol(), std::span<const double>(x0, 2), Xk, 1.0, lam,
                          0.5, 1e-2);
  CHECK(rep.passed);
}

TEST_CASE("propagation demo separates the characteristic directions") {
  DemoScenario sc;  // defaults: 256 points, probes (0,0) and (1,0)
  auto rep = run_propagation_demo(sc);
  CHECK(rep["passed"].get<bool>());
  const auto& fine = rep["levels"][1]["probes"];
  for (const auto& p : fine) {
    CHECK(p["u_char"].get<double>() > 0.0);
    CHECK(std::isfinite(p["u_char"].get<double>()));
    CHECK(std::isfinite(p["u_sector"].get<double>()));
    CHECK(std::isfinite(p["f_char"].get<double>()));
    CHECK(std::isfinite(p["f_sector"].get<double>()));
  }
  const double r0 = fine[0]["u_ratio"].get<double>();
  const double r1 = fine[1]["u_ratio"].get<double>();
  CHECK(r0 >= sc.separation);
  CHECK(r1 < sc.separation);
  // The operator improves decay in the regular directions at the singular
  // probe: f's separation is far below u's.
  CHECK(fine[0]["f_ratio"].get<double>() <= 0.5 * r0);
  // The singular norm keeps growing under refinement, the regular one not.
  const auto& ref0 = rep["refinement"][0];
  CHECK(ref0["u_char"].get<double>() > ref0["u_sector"].get<double>());
}

TEST_CASE("propagation demo on a purely smooth field shows no separation") {
  DemoScenario sc;
  sc.grid.points = 128;
  sc.ridge_amplitude = 0.0;
  auto rep = run_propagation_demo(sc);
  for (const auto& p : rep["levels"][1]["probes"]) {
    CHECK(std::isfinite(p["u_ratio"].get<double>()));
    CHECK(p["u_ratio"].get<double>() < sc.separation);
  }
}

TEST_CASE("propagation demo reports are deterministic") {
  DemoScenario sc;
  sc.grid.points = 128;
  auto a = run_propagation_demo(sc).dump();
  auto b = run_propagation_demo(sc).dump();
  CHECK(a == b);
}
