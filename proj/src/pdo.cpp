#include "flm/pdo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

namespace flm {

Symbol multiplier_symbol(int n, std::function<complex(std::span<const double>)> m) {
  Symbol s;
  s.n = n;
  s.eval = [m](std::span<const double>, std::span<const double> xi) { return m(xi); };
  s.separable.push_back({[](std::span<const double>) { return complex(1.0); }, m});
  s.x_independent = true;
  return s;
}

Symbol function_symbol(int n, std::function<complex(std::span<const double>)> v) {
  Symbol s;
  s.n = n;
  s.eval = [v](std::span<const double> x, std::span<const double>) { return v(x); };
  s.separable.push_back({v, [](std::span<const double>) { return complex(1.0); }});
  return s;
}

Field quantize(const Symbol& a, const Field& f) {
  const GridSpec& g = f.grid;
  g.validate();
  if (a.n != g.n) throw GridMismatch("symbol dimension does not match grid");
  if (f.values.size() != g.size()) throw GridMismatch("value count does not match grid");
  Spectrum fh = dft(f);

  if (!a.separable.empty()) {
    Field out{g, std::vector<complex>(g.size(), complex(0))};
    for (const auto& term : a.separable) {
      Spectrum part{g, std::vector<complex>(g.size())};
      double p[3];
      for (std::size_t k = 0; k < g.size(); ++k) {
        g.point_xi(k, p);
        complex m = term.freq(std::span<const double>(p, g.n));
        if (!std::isfinite(m.real()) || !std::isfinite(m.imag()))
          throw UnboundedSymbol("non-finite symbol value on the grid");
        part.values[k] = m * fh.values[k];
      }
      Field pf = idft(part);
      for (std::size_t i = 0; i < g.size(); ++i) {
        g.point_x(i, p);
        out.values[i] += term.space(std::span<const double>(p, g.n)) * pf.values[i];
      }
    }
    return out;
  }

  // Direct summation over the frequency grid for every space sample.
  Field out{g, std::vector<complex>(g.size())};
  double norm = std::pow(2.0 * M_PI, -g.n) * g.cell_volume_xi();
  std::size_t total = g.size();
  // Precompute frequency points once.
  std::vector<double> xs(total * g.n), xis(total * g.n);
  {
    double p[3];
    for (std::size_t i = 0; i < total; ++i) {
      g.point_x(i, p);
      for (int j = 0; j < g.n; ++j) xs[i * g.n + j] = p[j];
      g.point_xi(i, p);
      for (int j = 0; j < g.n; ++j) xis[i * g.n + j] = p[j];
    }
  }
  std::atomic<bool> bad{false};
  parallel_for(total, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      std::span<const double> x(&xs[i * g.n], g.n);
      complex acc = 0;
      for (std::size_t k = 0; k < total; ++k) {
        std::span<const double> xi(&xis[k * g.n], g.n);
        double phase = 0;
        for (int j = 0; j < g.n; ++j) phase += x[j] * xi[j];
        complex av = a.eval(x, xi);
        if (!std::isfinite(av.real()) || !std::isfinite(av.imag())) {
          bad = true;
          return;
        }
        acc += std::polar(1.0, phase) * av * fh.values[k];
      }
      out.values[i] = acc * norm;
    }
  });
  if (bad) throw UnboundedSymbol("non-finite symbol value on the grid");
  return out;
}

double symbol_fl_seminorm(const Symbol& a, const Field& phi, const Weight& w,
                          const Weight& gamma, double p) {
  const GridSpec& g = phi.grid;
  g.validate();
  if (a.n != g.n) throw GridMismatch("symbol dimension does not match grid");
  if (phi.values.size() != g.size()) throw GridMismatch("cutoff does not match grid");
  std::size_t total = g.size();
  double sup = 0;
  double pt[3];
  for (std::size_t k = 0; k < total; ++k) {
    g.point_xi(k, pt);
    std::vector<double> xi(pt, pt + g.n);
    Field slice{g, std::vector<complex>(total)};
    double px[3];
    for (std::size_t i = 0; i < total; ++i) {
      g.point_x(i, px);
      slice.values[i] =
          phi.values[i] * a.eval(std::span<const double>(px, g.n),
                                 std::span<const double>(xi.data(), g.n));
    }
    double v = fl_norm(slice, w, p) / gamma.eval(std::span<const double>(xi.data(), g.n));
    sup = std::max(sup, v);
  }
  return sup;
}

EllipticityReport check_elliptic(const Symbol& a, const Weight& lambda, double r,
                                 const SpaceBox& K, double R, const GridSpec& grid,
                                 double threshold) {
  grid.validate();
  if (int(K.lo.size()) != grid.n || int(K.hi.size()) != grid.n)
    throw BadParam("box dimension does not match grid");
  if (R >= grid.max_xi()) throw EmptyProbeSet("R at or beyond the grid's maximal frequency");

  auto min_ratio = [&](int x_per_axis) {
    double best = std::numeric_limits<double>::infinity();
    // Space probes: uniform lattice in K.
    std::vector<std::vector<double>> xpts;
    std::vector<double> cur(grid.n, 0.0);
    std::function<void(int)> rec = [&](int j) {
      if (j == grid.n) {
        xpts.push_back(cur);
        return;
      }
      for (int i = 0; i < x_per_axis; ++i) {
        cur[j] = K.lo[j] + (K.hi[j] - K.lo[j]) * (x_per_axis == 1 ? 0.5 : double(i) / (x_per_axis - 1));
        rec(j + 1);
      }
    };
    rec(0);
    bool any = false;
    double pt[3];
    for (std::size_t k = 0; k < grid.size(); ++k) {
      grid.point_xi(k, pt);
      double nn = 0;
      for (int j = 0; j < grid.n; ++j) nn += pt[j] * pt[j];
      if (std::sqrt(nn) < R) continue;
      any = true;
      std::span<const double> xi(pt, grid.n);
      double lam = std::pow(lambda.eval(xi), r);
      for (const auto& x : xpts) {
        double v = std::abs(a.eval(std::span<const double>(x.data(), grid.n), xi)) / lam;
        best = std::min(best, v);
      }
    }
    if (!any) throw EmptyProbeSet("no grid frequency with |xi| >= R");
    return best;
  };

  EllipticityReport rep;
  double c1 = min_ratio(3);
  double c2 = min_ratio(7);
  rep.c_K = c2;
  rep.refinement_ratio = c1 > 0 ? c2 / c1 : 1.0;
  rep.passed = c2 > threshold && rep.refinement_ratio >= 0.9;
  return rep;
}

EstimateReport verify_continuity(const Symbol& a, const Weight& omega, const Weight& omega1,
                                 const Weight& omega2, const Weight& gamma, double p,
                                 const Field& u, const Field& phi, const SamplingPlan& plan) {
  double q = std::isinf(p) ? 1.0
                           : (p == 1.0 ? std::numeric_limits<double>::infinity() : p / (p - 1.0));
  // C_q = sup_xi || omega2(xi) gamma / (omega1 . omega(xi - .)) ||_q.
  Weight denom2 = weight_product(omega1, weight_inverse(gamma));
  double Cq = estimate_Cq(omega2, omega, denom2, q, plan);
  if (!std::isfinite(Cq)) throw DivergentConstant("C_q quadrature diverges");

  EstimateReport rep;
  rep.constant_used = Cq;
  Field au = quantize(a, u);
  rep.lhs = local_fl_norm(au, phi, omega2, p);
  double semi = symbol_fl_seminorm(a, phi, omega, gamma, p);
  double unorm = fl_norm(u, omega1, p);
  rep.rhs_bound = std::pow(2.0 * M_PI, -u.grid.n) * Cq * semi * unorm;
  rep.ratio = rep.rhs_bound > 0 ? rep.lhs / rep.rhs_bound : (rep.lhs > 0 ? 1e300 : 0.0);
  rep.passed = rep.ratio <= 1.0 + rep.slack;
  return rep;
}

EstimateReport product_estimate(const Field& f1, const Field& f2, const Weight& omega,
                                const Weight& omega1, const Weight& omega2, double p,
                                const SamplingPlan& plan) {
  if (!(f1.grid == f2.grid)) throw GridMismatch("factors live on different grids");
  // The grid product only represents f1 f2 faithfully when each factor keeps
  // a 2x spectral support margin (and both fit the box).
  auto margin_defect = [&](const Field& f) {
    Spectrum s = dft(f);
    double peak = 0, outer = 0;
    const GridSpec& g = f.grid;
    double pt[3];
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      g.point_xi(i, pt);
      double m = std::abs(s.values[i]);
      peak = std::max(peak, m);
      for (int j = 0; j < g.n; ++j)
        if (std::fabs(pt[j]) > 0.5 * g.max_xi()) {
          outer = std::max(outer, m);
          break;
        }
    }
    return peak > 0 ? outer / peak : 0.0;
  };
  if (margin_defect(f1) > 1e-10 || margin_defect(f2) > 1e-10)
    throw AliasRisk("factor spectrum exceeds half the grid bandwidth");

  double q = std::isinf(p) ? 1.0
                           : (p == 1.0 ? std::numeric_limits<double>::infinity() : p / (p - 1.0));
  double Cq = estimate_Cq(omega, omega1, omega2, q, plan);
  if (!std::isfinite(Cq)) throw DivergentConstant("C_q quadrature diverges");

  EstimateReport rep;
  rep.constant_used = Cq;
  rep.lhs = fl_norm(pointwise_product(f1, f2), omega, p);
  rep.rhs_bound = Cq * fl_norm(f1, omega1, p) * fl_norm(f2, omega2, p);
  rep.ratio = rep.rhs_bound > 0 ? rep.lhs / rep.rhs_bound : (rep.lhs > 0 ? 1e300 : 0.0);
  rep.passed = rep.ratio <= 1.0 + rep.slack;
  return rep;
}

ComposeResult compose_entire(const Field& u, const EntireSeries& F, const Weight& w, double p,
                             const SamplingPlan& plan) {
  if (!F.zero_constant_term) throw MissingZeroConstantTerm("series must have F(x,0) = 0");
  const GridSpec& g = u.grid;
  double q = std::isinf(p) ? 1.0
                           : (p == 1.0 ? std::numeric_limits<double>::infinity() : p / (p - 1.0));
  double Cq = estimate_Cq(w, w, w, q, plan);
  if (!std::isfinite(Cq)) throw DivergentConstant("algebra constant diverges for this weight");
  double unorm = fl_norm(u, w, p);

  // Term k contributes at most majorant(k) Cq^{k-1} ||u||^k; the series is
  // summable iff the geometric factor Cq ||u|| stays inside the majorant's
  // radius. A crude root test over the provided majorants supplies the proxy.
  double x = Cq * unorm;
  double root = 0;
  for (int k = 2; k <= F.max_terms; ++k) {
    double m = F.majorant(k);
    if (m > 0) root = std::max(root, std::pow(m, 1.0 / double(k)));
  }
  if (root > 0 && x * root >= 1.0)
    throw SeriesDiverges("C_q ||u|| reaches the majorant radius proxy");

  // Per-term algebra bound: || c_k u^k || <= majorant(k) Cq^{k-1} ||u||^k.
  std::vector<double> term_bound(F.max_terms + 1, 0.0);
  for (int k = 1; k <= F.max_terms; ++k)
    term_bound[k] = F.majorant(k) * std::pow(Cq, k - 1) * std::pow(unorm, k);

  ComposeResult res;
  res.value = Field{g, std::vector<complex>(g.size(), complex(0))};
  Field upow = u;  // u^k on the grid
  double partial_bound = 0;
  for (int k = 1; k <= F.max_terms; ++k) {
    Field ck = F.coefficient(k, g);
    if (!(ck.grid == g)) throw GridMismatch("coefficient field on wrong grid");
    for (std::size_t i = 0; i < g.size(); ++i)
      res.value.values[i] += ck.values[i] * upow.values[i];
    res.terms_used = k;
    partial_bound += term_bound[k];
    double tail = 0;
    for (int j = k + 1; j <= F.max_terms; ++j) tail += term_bound[j];
    if (partial_bound > 0 && tail < 1e-12 * partial_bound) break;
    if (k < F.max_terms) upow = pointwise_product(upow, u);
  }

  res.report.constant_used = Cq;
  res.report.lhs = fl_norm(res.value, w, p);
  res.report.rhs_bound = partial_bound > 0 ? partial_bound : res.report.lhs;
  res.report.ratio =
      res.report.rhs_bound > 0 ? res.report.lhs / res.report.rhs_bound : 0.0;
  res.report.passed = res.report.ratio <= 1.0 + res.report.slack;
  return res;
}

Symbol approx_parametrix(const Symbol& a, const Weight& lambda, double r, const SpaceBox& K,
                         double R, const GridSpec& grid, double threshold) {
  auto rep = check_elliptic(a, lambda, r, K, R, grid, threshold);
  if (!rep.passed) throw NotElliptic("symbol is not elliptic on the requested region");
  auto aeval = a.eval;
  Symbol b;
  b.n = a.n;
  b.order = -a.order;
  b.rho = a.rho;
  b.reference = lambda;
  b.eval = [aeval, R](std::span<const double> x, std::span<const double> xi) {
    double nn = 0;
    for (double c : xi) nn += c * c;
    double rad = std::sqrt(nn);
    double chi;
    if (rad <= R)
      chi = 0.0;
    else if (rad >= 2.0 * R)
      chi = 1.0;
    else {
      double t = (rad - R) / R;
      chi = t * t * (3.0 - 2.0 * t);  // smoothstep
    }
    if (chi == 0.0) return complex(0.0);
    return chi / aeval(x, xi);
  };
  return b;
}

}  // namespace flm
