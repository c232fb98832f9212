#include "flm/microlocal.hpp"

#include <algorithm>
#include <cmath>
#include <array>
#include <cstring>
#include <limits>
#include <memory>
#include <numeric>

namespace flm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_same_grid(const GridSpec& a, const GridSpec& b) {
  if (!(a == b)) throw GridMismatch("operands live on different grids");
}

std::size_t int_pow(std::size_t b, int e) {
  std::size_t r = 1;
  while (e-- > 0) r *= b;
  return r;
}

// Weight sampled on the frequency lattice of g.
std::vector<double> weight_on_grid(const GridSpec& g, const Weight& w) {
  std::vector<double> vals(g.size());
  parallel_for(g.size(), [&](std::size_t lo, std::size_t hi) {
    double xi[3];
    for (std::size_t i = lo; i < hi; ++i) {
      g.point_xi(i, xi);
      vals[i] = w.eval(std::span<const double>(xi, static_cast<std::size_t>(g.n)));
    }
  });
  return vals;
}

// Weight sampled on the difference lattice {xi - eta} of g: per axis the
// offsets d run over [-(N-1), N-1] in steps of dxi.
struct OffsetTable {
  std::size_t per_axis = 0;  // 2N - 1
  std::size_t center = 0;    // N - 1
  std::vector<double> vals;
  std::vector<std::size_t> stride;

  double at_axis(int axis, std::size_t d) const {  // offset +d along one axis
    std::size_t idx = 0;
    for (std::size_t j = 0; j < stride.size(); ++j) idx += center * stride[j];
    return vals[idx + d * stride[axis]];
  }
};

OffsetTable offset_table(const GridSpec& g, const Weight& w) {
  OffsetTable t;
  t.per_axis = 2 * g.points - 1;
  t.center = g.points - 1;
  t.stride.resize(g.n);
  t.stride[g.n - 1] = 1;
  for (int j = g.n - 2; j >= 0; --j) t.stride[j] = t.stride[j + 1] * t.per_axis;
  t.vals.resize(int_pow(t.per_axis, g.n));
  const double dxi = g.dxi();
  parallel_for(t.vals.size(), [&](std::size_t lo, std::size_t hi) {
    double z[3];
    for (std::size_t i = lo; i < hi; ++i) {
      std::size_t rest = i;
      for (int j = g.n - 1; j >= 0; --j) {
        z[j] = (static_cast<double>(rest % t.per_axis) - static_cast<double>(t.center)) * dxi;
        rest /= t.per_axis;
      }
      t.vals[i] = w.eval(std::span<const double>(z, static_cast<std::size_t>(g.n)));
    }
  });
  return t;
}

// True when the table is nondecreasing in |d| along every coordinate axis
// through the center; the box pruning in bracket_neighborhood relies on it.
bool axis_monotone(const OffsetTable& t, int n, std::size_t npoints) {
  for (int j = 0; j < n; ++j) {
    for (std::size_t d = 0; d + 1 < npoints; ++d) {
      if (t.at_axis(j, d + 1) < t.at_axis(j, d) * (1.0 - 1e-9)) return false;
    }
  }
  return true;
}

}  // namespace

std::size_t FrequencyMask::count() const {
  std::size_t c = 0;
  for (auto b : bits) c += (b != 0);
  return c;
}

bool FrequencyMask::any() const {
  for (auto b : bits)
    if (b) return true;
  return false;
}

bool FrequencyMask::subset_of(const FrequencyMask& o) const {
  require_same_grid(grid, o.grid);
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i] && !o.bits[i]) return false;
  return true;
}

FrequencyMask FrequencyMask::operator&(const FrequencyMask& o) const {
  require_same_grid(grid, o.grid);
  FrequencyMask r{grid, std::vector<std::uint8_t>(bits.size())};
  for (std::size_t i = 0; i < bits.size(); ++i) r.bits[i] = bits[i] & o.bits[i];
  return r;
}

FrequencyMask FrequencyMask::operator|(const FrequencyMask& o) const {
  require_same_grid(grid, o.grid);
  FrequencyMask r{grid, std::vector<std::uint8_t>(bits.size())};
  for (std::size_t i = 0; i < bits.size(); ++i) r.bits[i] = bits[i] | o.bits[i];
  return r;
}

FrequencyMask FrequencyMask::complement() const {
  FrequencyMask r{grid, std::vector<std::uint8_t>(bits.size())};
  for (std::size_t i = 0; i < bits.size(); ++i) r.bits[i] = bits[i] ? 0 : 1;
  return r;
}

bool FrequencyMask::operator==(const FrequencyMask& o) const {
  if (!(grid == o.grid)) return false;
  for (std::size_t i = 0; i < bits.size(); ++i)
    if ((bits[i] != 0) != (o.bits[i] != 0)) return false;
  return true;
}

FrequencyMask empty_mask(const GridSpec& g) {
  g.validate();
  return FrequencyMask{g, std::vector<std::uint8_t>(g.size(), 0)};
}

FrequencyMask full_mask(const GridSpec& g) {
  g.validate();
  return FrequencyMask{g, std::vector<std::uint8_t>(g.size(), 1)};
}

FrequencyMask mask_from_predicate(const GridSpec& g, const FrequencyPredicate& pred) {
  g.validate();
  FrequencyMask m{g, std::vector<std::uint8_t>(g.size(), 0)};
  parallel_for(g.size(), [&](std::size_t lo, std::size_t hi) {
    double xi[3];
    for (std::size_t i = lo; i < hi; ++i) {
      g.point_xi(i, xi);
      m.bits[i] = pred(std::span<const double>(xi, static_cast<std::size_t>(g.n))) ? 1 : 0;
    }
  });
  return m;
}

FrequencyMask bracket_neighborhood(const FrequencyMask& X, const Weight& w, double eps) {
  const GridSpec& g = X.grid;
  g.validate();
  if (eps <= 0.0) throw BadParam("neighborhood size must be positive");
  if (w.n != g.n) throw GridMismatch("weight dimension differs from the grid");

  const int n = g.n;
  const std::size_t N = g.points;
  const std::size_t total = g.size();
  const std::vector<double> wgrid = weight_on_grid(g, w);
  const double wmin = *std::min_element(wgrid.begin(), wgrid.end());
  const OffsetTable table = offset_table(g, w);
  const bool monotone = axis_monotone(table, n, N);
  std::size_t ccenter = 0;
  for (int j = 0; j < n; ++j) ccenter += table.center * table.stride[j];
  const double w0 = table.vals[ccenter];

  FrequencyMask out{g, std::vector<std::uint8_t>(total, 0)};
  std::size_t gidx[3], tidx[3], lo_box[3], hi_box[3];
  for (std::size_t i = 0; i < total; ++i) {
    if (!X.test(i)) continue;
    if (wgrid[i] <= wmin / eps) continue;  // cannot reach any grid point
    const double T = eps * wgrid[i];
    g.unflatten(i, gidx);
    if (monotone) {
      // Per-axis reach: largest |d| with w(d e_j) < T; beyond it coordinate
      // monotonicity rules out membership.
      bool empty_box = (w0 >= T);
      if (empty_box) continue;
      for (int j = 0; j < n; ++j) {
        std::size_t lo = 0, hi = N - 1;  // invariant: at_axis(lo) < T
        if (table.at_axis(j, hi) < T) {
          lo = hi;
        } else {
          while (hi - lo > 1) {
            std::size_t mid = (lo + hi) / 2;
            (table.at_axis(j, mid) < T ? lo : hi) = mid;
          }
        }
        const std::size_t b = lo;
        lo_box[j] = gidx[j] > b ? gidx[j] - b : 0;
        hi_box[j] = std::min(gidx[j] + b, N - 1);
      }
      for (int j = 0; j < n; ++j) tidx[j] = lo_box[j];
      while (true) {
        std::size_t flat = 0, off = 0;
        for (int j = 0; j < n; ++j) {
          flat = flat * N + tidx[j];
          off += (tidx[j] - gidx[j] + table.center) * table.stride[j];
        }
        if (!out.bits[flat] && table.vals[off] < T) out.bits[flat] = 1;
        int j = n - 1;
        while (j >= 0 && tidx[j] == hi_box[j]) tidx[j--] = lo_box[j];
        if (j < 0) break;
        ++tidx[j];
      }
    } else {
      // Exhaustive pairing for weights without coordinate monotonicity.
      std::size_t midx[3];
      for (std::size_t k = 0; k < total; ++k) {
        if (out.bits[k]) continue;
        g.unflatten(k, midx);
        std::size_t off = 0;
        for (int j = 0; j < n; ++j) off += (midx[j] - gidx[j] + table.center) * table.stride[j];
        if (table.vals[off] < T) out.bits[k] = 1;
      }
    }
  }
  return out;
}

FrequencyMask euclid_neighborhood(const FrequencyMask& X, const Weight& lambda, double eps,
                                  double mu) {
  const GridSpec& g = X.grid;
  g.validate();
  if (eps <= 0.0 || mu <= 0.0) throw BadParam("neighborhood size and mu must be positive");
  if (lambda.n != g.n) throw GridMismatch("weight dimension differs from the grid");

  const int n = g.n;
  const std::size_t N = g.points;
  const double dxi = g.dxi();
  const std::vector<double> lgrid = weight_on_grid(g, lambda);
  FrequencyMask out{g, std::vector<std::uint8_t>(g.size(), 0)};
  std::size_t gidx[3], tidx[3], lo_box[3], hi_box[3];
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!X.test(i)) continue;
    const double r0 = eps * std::pow(lgrid[i], 1.0 / mu);
    const double r2 = r0 * r0;
    const std::size_t b = static_cast<std::size_t>(std::floor(r0 / dxi)) + 1;
    g.unflatten(i, gidx);
    for (int j = 0; j < n; ++j) {
      lo_box[j] = gidx[j] > b ? gidx[j] - b : 0;
      hi_box[j] = std::min(gidx[j] + b, N - 1);
    }
    for (int j = 0; j < n; ++j) tidx[j] = lo_box[j];
    while (true) {
      std::size_t flat = 0;
      double d2 = 0.0;
      for (int j = 0; j < n; ++j) {
        flat = flat * N + tidx[j];
        const double dj = (static_cast<double>(tidx[j]) - static_cast<double>(gidx[j])) * dxi;
        d2 += dj * dj;
      }
      if (!out.bits[flat] && d2 < r2) out.bits[flat] = 1;
      int j = n - 1;
      while (j >= 0 && tidx[j] == hi_box[j]) tidx[j--] = lo_box[j];
      if (j < 0) break;
      ++tidx[j];
    }
  }
  return out;
}

InclusionReport find_inclusion_eps(const FrequencyMask& X, const Weight& w, double eps,
                                   InclusionMode mode, double mu, double c) {
  X.grid.validate();
  if (eps <= 0.0) throw BadParam("eps must be positive");
  InclusionReport rep;
  rep.mode = mode;
  rep.eps = eps;

  if (mode == InclusionMode::masked_weight_bound) {
    FrequencyMask m = bracket_neighborhood(X, w, eps);
    const std::vector<double> wgrid = weight_on_grid(X.grid, w);
    double wmin = kInf;
    for (std::size_t i = 0; i < m.bits.size(); ++i)
      if (m.bits[i]) wmin = std::min(wmin, wgrid[i]);
    rep.verified = m.any();
    rep.c_hat = rep.verified ? 0.999 * eps * wmin : 0.0;
    rep.eps_prime = eps;
    return rep;
  }

  const std::vector<double> wgrid =
      (mode == InclusionMode::mixed) ? weight_on_grid(X.grid, w) : std::vector<double>{};

  // Right side depends only on eps; build it once.
  FrequencyMask rhs = empty_mask(X.grid);
  switch (mode) {
    case InclusionMode::bracket_bracket:
    case InclusionMode::complement:
    case InclusionMode::corollary:
      rhs = bracket_neighborhood(X, w, eps);
      break;
    case InclusionMode::euclid:
      rhs = euclid_neighborhood(X, w, eps, mu);
      break;
    case InclusionMode::mixed: {
      rhs = bracket_neighborhood(X, w, eps);
      for (std::size_t i = 0; i < rhs.bits.size(); ++i)
        if (rhs.bits[i] && !(wgrid[i] > c / eps)) rhs.bits[i] = 0;
      break;
    }
    default:
      break;
  }

  for (int k = 1; k <= 10; ++k) {
    const double ep = eps / std::pow(2.0, k);
    rep.schedule.push_back(ep);
    FrequencyMask lhs = empty_mask(X.grid);
    bool ok = false;
    switch (mode) {
      case InclusionMode::bracket_bracket: {
        FrequencyMask inner = bracket_neighborhood(X, w, ep);
        lhs = bracket_neighborhood(inner, w, ep);
        ok = lhs.subset_of(rhs);
        break;
      }
      case InclusionMode::complement: {
        // (complement of X_[eps w])_[ep w] inside complement of X_[ep w].
        FrequencyMask inner = bracket_neighborhood(rhs.complement(), w, ep);
        ok = inner.subset_of(bracket_neighborhood(X, w, ep).complement());
        break;
      }
      case InclusionMode::euclid: {
        FrequencyMask inner = euclid_neighborhood(X, w, ep, mu);
        lhs = euclid_neighborhood(inner, w, ep, mu);
        ok = lhs.subset_of(rhs);
        break;
      }
      case InclusionMode::mixed: {
        FrequencyMask trunc = X;
        for (std::size_t i = 0; i < trunc.bits.size(); ++i)
          if (trunc.bits[i] && !(wgrid[i] > c / ep)) trunc.bits[i] = 0;
        lhs = euclid_neighborhood(trunc, w, ep, mu);
        ok = lhs.subset_of(rhs);
        break;
      }
      case InclusionMode::corollary: {
        FrequencyMask inner = bracket_neighborhood(X, w, ep);
        lhs = euclid_neighborhood(inner, w, ep, mu);
        ok = lhs.subset_of(rhs);
        break;
      }
      default:
        break;
    }
    if (ok) {
      rep.verified = true;
      rep.eps_prime = ep;
      return rep;
    }
  }
  return rep;  // verified = false; reported, not fatal
}

double m_norm(std::span<const double> xi, const std::vector<long long>& M) {
  double s = 0.0;
  for (std::size_t j = 0; j < M.size(); ++j)
    s += std::pow(xi[j] * xi[j], static_cast<double>(M[j]));
  return std::sqrt(s);
}

double m_cone_distance(std::span<const double> xi, const std::vector<long long>& M,
                       std::span<const double> eta) {
  const std::size_t n = M.size();
  const double xm = m_norm(xi, M);
  if (xm == 0.0) return kInf;
  auto f = [&](double t) {
    double z[3];
    for (std::size_t j = 0; j < n; ++j)
      z[j] = std::pow(t, -1.0 / static_cast<double>(M[j])) * xi[j] - eta[j];
    return m_norm(std::span<const double>(z, n), M);
  };
  // 64 log-spaced seeds around the natural scale t = |xi|_M.
  int best = 0;
  double fbest = kInf;
  std::vector<double> ts(64);
  for (int i = 0; i < 64; ++i) {
    ts[i] = xm * std::exp2(-16.0 + 32.0 * static_cast<double>(i) / 63.0);
    const double v = f(ts[i]);
    if (v < fbest) {
      fbest = v;
      best = i;
    }
  }
  double a = ts[std::max(best - 1, 0)];
  double b = ts[std::min(best + 1, 63)];
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > 1e-9 * b && std::fabs(f1 - f2) > 1e-8) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = f(x2);
    }
  }
  return std::min({fbest, f1, f2});
}

bool m_cone_contains(std::span<const double> xi, const MCone& cone) {
  if (cone.R <= 0.0) throw BadParam("cone aperture must be positive");
  return m_cone_distance(xi, cone.M, cone.eta) < cone.R;
}

namespace {

// Inverse of the coordinate map phi_j(xi) = sign(xi_j) |xi_j|^{m_j} that
// carries the M-sphere onto the Euclidean unit circle (n = 2).
void sphere_point(double theta, const std::vector<long long>& M, double out[2]) {
  const double p[2] = {std::cos(theta), std::sin(theta)};
  for (int j = 0; j < 2; ++j)
    out[j] = (p[j] < 0 ? -1.0 : 1.0) *
             std::pow(std::fabs(p[j]), 1.0 / static_cast<double>(M[j]));
}

double direction_angle(std::span<const double> xi, const std::vector<long long>& M) {
  const double u = (xi[0] < 0 ? -1.0 : 1.0) * std::pow(std::fabs(xi[0]), (double)M[0]);
  const double v = (xi[1] < 0 ? -1.0 : 1.0) * std::pow(std::fabs(xi[1]), (double)M[1]);
  return std::atan2(v, u);
}

}  // namespace

ConeEquivalenceReport check_cone_equivalence(const FrequencyPredicate& X,
                                             const std::vector<long long>& M, double eps,
                                             const GridSpec& grid, std::size_t sphere_samples,
                                             std::size_t angle_bins) {
  grid.validate();
  if (grid.n != 2 || M.size() != 2) throw RejectDimension("cone equivalence is implemented in 2-D");
  if (eps <= 0.0) throw BadParam("eps must be positive");
  ConeEquivalenceReport rep;
  rep.eps = eps;

  // Scaling closure on grid samples: membership must be invariant under
  // xi -> t^{1/M} xi for an analytic M-conic set.
  {
    const std::size_t stride = std::max<std::size_t>(1, grid.size() / 512);
    double xi[2], sc[2];
    for (std::size_t i = 0; i < grid.size(); i += stride) {
      grid.point_xi(i, xi);
      if (xi[0] == 0.0 && xi[1] == 0.0) continue;
      const bool in = X(std::span<const double>(xi, 2));
      for (double t : {0.25, 0.5, 2.0, 4.0}) {
        for (int j = 0; j < 2; ++j)
          sc[j] = std::pow(t, 1.0 / static_cast<double>(M[j])) * xi[j];
        if (X(std::span<const double>(sc, 2)) != in)
          throw NotMConic("set is not closed under anisotropic scaling");
      }
    }
  }

  const Weight wM = make_quasi_homogeneous(M, 1.0);
  const FrequencyMask Xm = mask_from_predicate(grid, X);

  // Generators on the M-sphere.
  std::vector<std::array<double, 2>> gens;
  for (std::size_t i = 0; i < sphere_samples; ++i) {
    const double theta = 2.0 * M_PI * (static_cast<double>(i) + 0.5) /
                         static_cast<double>(sphere_samples);
    double eta[2];
    sphere_point(theta, M, eta);
    if (X(std::span<const double>(eta, 2))) gens.push_back({eta[0], eta[1]});
  }
  rep.sphere_generators = gens.size();

  if (!Xm.any() && gens.empty()) {
    rep.verified = rep.forward = rep.backward = true;
    rep.eps_prime = eps / 2.0;
    return rep;
  }

  const FrequencyMask Xeps = bracket_neighborhood(Xm, wM, eps);
  const std::vector<double> wgrid = weight_on_grid(grid, wM);
  double wmin_mask = kInf;
  for (std::size_t i = 0; i < Xeps.bits.size(); ++i)
    if (Xeps.bits[i]) wmin_mask = std::min(wmin_mask, wgrid[i]);
  rep.c_hat = Xeps.any() ? 0.999 * eps * wmin_mask : 0.0;

  // Cone-union membership depends only on the direction; resolve per angle
  // bin against the sphere generators.
  std::vector<double> bin_dist(angle_bins, kInf);
  parallel_for(angle_bins, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t b = lo; b < hi; ++b) {
      const double theta = -M_PI + 2.0 * M_PI * (static_cast<double>(b) + 0.5) /
                                       static_cast<double>(angle_bins);
      double dir[2];
      sphere_point(theta, M, dir);
      double dmin = kInf;
      for (const auto& eta : gens) {
        const double d = m_cone_distance(std::span<const double>(dir, 2), M,
                                         std::span<const double>(eta.data(), 2));
        dmin = std::min(dmin, d);
      }
      bin_dist[b] = dmin;
    }
  });
  std::vector<std::uint32_t> bin_of(grid.size(), 0);
  std::vector<std::uint8_t> nonzero(grid.size(), 0);
  {
    double xi[2];
    for (std::size_t i = 0; i < grid.size(); ++i) {
      grid.point_xi(i, xi);
      if (xi[0] == 0.0 && xi[1] == 0.0) continue;
      nonzero[i] = 1;
      double ang = direction_angle(std::span<const double>(xi, 2), M);
      double pos = (ang + M_PI) / (2.0 * M_PI) * static_cast<double>(angle_bins);
      std::size_t b = std::min<std::size_t>(static_cast<std::size_t>(pos), angle_bins - 1);
      bin_of[i] = static_cast<std::uint32_t>(b);
    }
  }
  auto cone_mask = [&](double aperture, double wcut) {
    FrequencyMask m = empty_mask(grid);
    for (std::size_t i = 0; i < grid.size(); ++i)
      m.bits[i] = (nonzero[i] && bin_dist[bin_of[i]] < aperture && wgrid[i] > wcut) ? 1 : 0;
    return m;
  };

  const FrequencyMask cones_eps = cone_mask(eps, rep.c_hat / eps);
  for (int k = 1; k <= 10; ++k) {
    const double ep = eps / std::pow(2.0, k);
    const FrequencyMask Xep = bracket_neighborhood(Xm, wM, ep);
    const bool fwd = Xep.subset_of(cones_eps);
    const bool bwd = cone_mask(ep, rep.c_hat / ep).subset_of(Xeps);
    if (fwd && bwd) {
      rep.verified = true;
      rep.forward = rep.backward = true;
      rep.eps_prime = ep;
      return rep;
    }
    if (k == 10) {  // report the last attempt's partial results
      rep.forward = fwd;
      rep.backward = bwd;
      rep.eps_prime = 0.0;
    }
  }
  return rep;
}

Symbol cutoff_symbol(const FrequencyMask& X, double eps, const Weight& lambda, double mu,
                     CutoffReport* report) {
  const GridSpec& g = X.grid;
  g.validate();
  if (eps <= 0.0 || mu <= 0.0) throw BadParam("eps and mu must be positive");
  const double eps_prime = eps / 2.0;
  const int n = g.n;
  const std::size_t N = g.points;
  const double dxi = g.dxi();
  const std::vector<double> lgrid = weight_on_grid(g, lambda);

  // Scaled distance e(xi) = min over generators of |xi - xi0| / lambda(xi0)^{1/mu},
  // computed only where it can fall below eps (sigma vanishes elsewhere).
  std::vector<double> e(g.size(), kInf);
  std::size_t gidx[3], tidx[3], lo_box[3], hi_box[3];
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!X.test(i)) continue;
    const double scale = std::pow(lgrid[i], 1.0 / mu);
    const double r0 = eps * scale;
    const std::size_t b = static_cast<std::size_t>(std::floor(r0 / dxi)) + 1;
    g.unflatten(i, gidx);
    for (int j = 0; j < n; ++j) {
      lo_box[j] = gidx[j] > b ? gidx[j] - b : 0;
      hi_box[j] = std::min(gidx[j] + b, N - 1);
    }
    for (int j = 0; j < n; ++j) tidx[j] = lo_box[j];
    while (true) {
      std::size_t flat = 0;
      double d2 = 0.0;
      for (int j = 0; j < n; ++j) {
        flat = flat * N + tidx[j];
        const double dj = (static_cast<double>(tidx[j]) - static_cast<double>(gidx[j])) * dxi;
        d2 += dj * dj;
      }
      const double val = std::sqrt(d2) / scale;
      if (val < e[flat]) e[flat] = val;
      int j = n - 1;
      while (j >= 0 && tidx[j] == hi_box[j]) tidx[j--] = lo_box[j];
      if (j < 0) break;
      ++tidx[j];
    }
  }

  auto values = std::make_shared<std::vector<double>>(g.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double s = (eps - e[i]) / (eps - eps_prime);
    double v;
    if (s <= 0.0)
      v = 0.0;
    else if (s >= 1.0)
      v = 1.0;
    else
      v = s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
    (*values)[i] = v;
  }

  CutoffReport rep;
  rep.eps = eps;
  rep.eps_prime = eps_prime;
  rep.range_ok = true;
  for (double v : *values)
    if (!(v >= 0.0 && v <= 1.0)) rep.range_ok = false;

  const FrequencyMask supp_bound = euclid_neighborhood(X, lambda, eps, mu);
  const FrequencyMask plateau = euclid_neighborhood(X, lambda, eps_prime, mu);
  rep.support_ok = true;
  rep.plateau_ok = true;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if ((*values)[i] > 0.0 && !supp_bound.test(i)) rep.support_ok = false;
    if (plateau.test(i) && (*values)[i] != 1.0) rep.plateau_ok = false;
  }

  // Finite-difference decay seminorms of the smooth class of order zero.
  double s1 = 0.0, s2 = 0.0;
  std::size_t midx[3];
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.unflatten(i, midx);
    const double l1 = std::pow(lgrid[i], 1.0 / mu);
    for (int j = 0; j < n; ++j) {
      std::size_t stride = 1;
      for (int t = n - 1; t > j; --t) stride *= N;
      if (midx[j] + 1 < N) {
        const double d1 = std::fabs((*values)[i + stride] - (*values)[i]) / dxi;
        s1 = std::max(s1, d1 * l1);
        if (midx[j] >= 1) {
          const double d2 =
              std::fabs((*values)[i + stride] - 2.0 * (*values)[i] + (*values)[i - stride]) /
              (dxi * dxi);
          s2 = std::max(s2, d2 * l1 * l1);
        }
      }
    }
  }
  rep.seminorm1 = s1;
  rep.seminorm2 = s2;
  if (report) *report = rep;
  if (!(rep.range_ok && rep.support_ok && rep.plateau_ok))
    throw ConstructionFailed("cutoff contract failed; adjust the mollification radius");

  GridSpec gcopy = g;
  auto lookup = [gcopy, values](std::span<const double> xi) -> complex {
    const double dxi_l = gcopy.dxi();
    std::size_t flat = 0;
    for (int j = 0; j < gcopy.n; ++j) {
      const double pos = xi[j] / dxi_l + static_cast<double>(gcopy.points / 2);
      const long k = std::lround(pos);
      if (k < 0 || k >= static_cast<long>(gcopy.points)) return complex(0.0);
      flat = flat * gcopy.points + static_cast<std::size_t>(k);
    }
    return complex((*values)[flat], 0.0);
  };
  Symbol s = multiplier_symbol(g.n, lookup);
  s.order = 0.0;
  s.rho = 1.0 / mu;
  s.reference = lambda;
  return s;
}

double mcl_fl_norm(const Field& u, const Field& phi, const FrequencyMask& mask, const Weight& w,
                   double p) {
  require_same_grid(u.grid, phi.grid);
  require_same_grid(u.grid, mask.grid);
  Spectrum s = dft(pointwise_product(phi, u));
  for (std::size_t i = 0; i < s.values.size(); ++i)
    if (!mask.test(i)) s.values[i] = complex(0.0);
  return weighted_lp_norm(s, w, p);
}

double mcl_fl_norm(const Field& u, const Field& phi, const FrequencyMask& X, double eps,
                   const Weight& w, double p) {
  return mcl_fl_norm(u, phi, bracket_neighborhood(X, w, eps), w, p);
}

MclEllipticReport mcl_elliptic(const Symbol& a, std::span<const double> x0,
                               const FrequencyMask& X, double r, const Weight& lambda,
                               double eps0, double threshold) {
  const GridSpec& g = X.grid;
  g.validate();
  const std::vector<double> lgrid = weight_on_grid(g, lambda);
  MclEllipticReport rep;
  bool saw_mask = false;
  double xball[3];
  double wmin = kInf, wmax_gen = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    wmin = std::min(wmin, lgrid[i]);
    if (X.test(i)) wmax_gen = std::max(wmax_gen, lgrid[i]);
  }
  for (int k = 0; k <= 10; ++k) {
    const double eps = eps0 / std::pow(2.0, k);
    // Once only generators in the top dyadic weight octave can contribute,
    // the grid no longer resolves their neighborhoods and the infimum over
    // the surviving handful of points is a quantization artifact, not an
    // ellipticity certificate.  Stop the schedule there.
    if (wmax_gen > 0.0 && eps < 2.0 * wmin / wmax_gen) break;
    FrequencyMask m = bracket_neighborhood(X, lambda, eps);
    if (!m.any()) continue;
    saw_mask = true;
    double c0 = kInf, cball = kInf;
    double xi[3];
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!m.test(i)) continue;
      g.point_xi(i, xi);
      const double lr = std::pow(lgrid[i], r);
      const double v =
          std::abs(a.eval(x0, std::span<const double>(xi, static_cast<std::size_t>(g.n)))) / lr;
      c0 = std::min(c0, v);
      if (v < 2.0 * threshold || v == c0) {
        // Two-sided variant: probe a small ball of base points.
        double vb = v;
        for (int j = 0; j < g.n && vb > 0.0; ++j) {
          for (double h : {-0.05, 0.05}) {
            for (int t = 0; t < g.n; ++t) xball[t] = x0[t];
            xball[j] += h;
            vb = std::min(vb, std::abs(a.eval(std::span<const double>(xball,
                                                                      static_cast<std::size_t>(g.n)),
                                              std::span<const double>(
                                                  xi, static_cast<std::size_t>(g.n)))) /
                                  lr);
          }
        }
        cball = std::min(cball, vb);
      }
    }
    if (c0 > threshold) {
      rep.passed = true;
      rep.c0 = c0;
      rep.ball_c0 = cball;
      rep.eps_used = eps;
      return rep;
    }
    if (c0 > rep.c0) {
      rep.c0 = c0;
      rep.ball_c0 = cball;
      rep.eps_used = eps;
    }
  }
  if (!saw_mask) throw EmptyMask("no scheduled neighborhood meets the grid");
  return rep;
}

namespace {

// Common core of the plain and masked symbol seminorms. For large grids the
// sup over the second argument is taken over a strided sublattice (the
// quantity enters reported bounds, not pass/fail inequalities with sharp
// constants).
double symbol_seminorm_core(const Symbol& a, const Field& phi, const FrequencyMask* mask,
                            const Weight& w, const Weight& gamma, double p) {
  const GridSpec& g = phi.grid;
  g.validate();
  const std::size_t max_probes = 4096;
  std::size_t stride = 1;
  while (g.size() / stride > max_probes) stride *= 2;

  // Spectra of phi * (space factors): one per separable term, or per xi slice.
  std::vector<Spectrum> term_spec;
  const bool separable = !a.separable.empty() || a.x_independent;
  if (a.x_independent) {
    term_spec.push_back(dft(phi));
  } else if (separable) {
    for (const auto& t : a.separable) {
      Field f = phi;
      double x[3];
      for (std::size_t i = 0; i < f.values.size(); ++i) {
        g.point_x(i, x);
        f.values[i] *= t.space(std::span<const double>(x, static_cast<std::size_t>(g.n)));
      }
      term_spec.push_back(dft(f));
    }
  }

  double sup = 0.0;
  double xi[3];
  std::vector<complex> slice(g.size());
  for (std::size_t k = 0; k < g.size(); k += stride) {
    g.point_xi(k, xi);
    const std::span<const double> xis(xi, static_cast<std::size_t>(g.n));
    Spectrum s{g, std::vector<complex>(g.size())};
    if (a.x_independent) {
      const complex m = a.eval(xi, xis);
      for (std::size_t i = 0; i < g.size(); ++i) s.values[i] = m * term_spec[0].values[i];
    } else if (separable) {
      for (std::size_t t = 0; t < a.separable.size(); ++t) {
        const complex c = a.separable[t].freq(xis);
        for (std::size_t i = 0; i < g.size(); ++i) s.values[i] += c * term_spec[t].values[i];
      }
    } else {
      Field f = phi;
      double x[3];
      for (std::size_t i = 0; i < f.values.size(); ++i) {
        g.point_x(i, x);
        f.values[i] *= a.eval(std::span<const double>(x, static_cast<std::size_t>(g.n)), xis);
      }
      s = dft(f);
    }
    if (mask)
      for (std::size_t i = 0; i < s.values.size(); ++i)
        if (!mask->test(i)) s.values[i] = complex(0.0);
    const double norm = weighted_lp_norm(s, w, p) / gamma.eval(xis);
    sup = std::max(sup, norm);
  }
  return sup;
}

}  // namespace

double symbol_mcl_seminorm(const Symbol& a, const Field& phi, const FrequencyMask& mask,
                           const Weight& Lambda, const Weight& gamma, double p) {
  require_same_grid(phi.grid, mask.grid);
  return symbol_seminorm_core(a, phi, &mask, Lambda, gamma, p);
}

MclContinuityReport verify_mcl_continuity(const Symbol& a, const Field& u, const Field& phi,
                                          const FrequencyMask& X, const Weight& lambda,
                                          const Weight& Lambda, const Weight& gamma,
                                          const Weight& sigma, double p, double eps) {
  require_same_grid(u.grid, phi.grid);
  require_same_grid(u.grid, X.grid);
  const GridSpec& g = u.grid;

  // Pointwise chain sigma <= C lambda <= C Lambda <= C lambda^2 / sigma: the
  // three ratio sups must be refinement-stable on dyadic probe shells.
  {
    auto ratio_sup = [&](auto&& f, int shells) {
      double s = 0.0;
      double xi[3];
      for (int sh = 0; sh < shells; ++sh) {
        const double rad = std::exp2(sh);
        const int dirs = g.n == 1 ? 2 : 32;
        for (int d = 0; d < dirs; ++d) {
          if (g.n == 1) {
            xi[0] = d == 0 ? rad : -rad;
          } else {
            const double th = 2.0 * M_PI * d / dirs;
            xi[0] = rad * std::cos(th);
            xi[1] = rad * std::sin(th);
            if (g.n == 3) xi[2] = 0.0;
          }
          s = std::max(s, f(std::span<const double>(xi, static_cast<std::size_t>(g.n))));
        }
      }
      return s;
    };
    auto r1 = [&](std::span<const double> xi) { return sigma.eval(xi) / lambda.eval(xi); };
    auto r2 = [&](std::span<const double> xi) { return lambda.eval(xi) / Lambda.eval(xi); };
    auto r3 = [&](std::span<const double> xi) {
      return Lambda.eval(xi) * sigma.eval(xi) / (lambda.eval(xi) * lambda.eval(xi));
    };
    const double c1 = ratio_sup(r1, 8), f1 = ratio_sup(r1, 15);
    const double c2 = ratio_sup(r2, 8), f2 = ratio_sup(r2, 15);
    const double c3 = ratio_sup(r3, 8), f3 = ratio_sup(r3, 15);
    if (f1 > 1.1 * c1 || f2 > 1.1 * c2 || f3 > 1.1 * c3)
      throw PreconditionChainBroken("weight chain ratios grow along probe shells");
  }

  MclContinuityReport rep;
  rep.eps = eps;

  InclusionReport inc = find_inclusion_eps(X, Lambda, eps, InclusionMode::complement);
  rep.eps_prime = inc.verified ? inc.eps_prime : eps / std::pow(2.0, 10);

  const FrequencyMask chi = bracket_neighborhood(X, Lambda, rep.eps_prime);
  const Weight Lg = weight_product(Lambda, gamma);
  const FrequencyMask chi_eps_Lg = bracket_neighborhood(X, Lg, eps);
  const FrequencyMask chi_eps_L = bracket_neighborhood(X, Lambda, eps);

  const double q = (p == 1.0) ? kInf
                   : std::isinf(p) ? 1.0
                                   : p / (p - 1.0);
  {
    Spectrum ones{g, std::vector<complex>(g.size())};
    double xi[3];
    for (std::size_t i = 0; i < g.size(); ++i) {
      g.point_xi(i, xi);
      ones.values[i] =
          complex(1.0 / sigma.eval(std::span<const double>(xi, static_cast<std::size_t>(g.n))), 0.0);
    }
    const Weight unit = make_constant(g.n, 1.0);
    rep.sigma_inv_q = weighted_lp_norm(ones, unit, q);
  }

  Field au = quantize(a, u);
  rep.lhs = mcl_fl_norm(au, phi, chi, Lambda, p);
  rep.seminorm_plain = symbol_seminorm_core(a, phi, nullptr, lambda, gamma, p);
  rep.seminorm_mcl = symbol_mcl_seminorm(a, phi, chi_eps_L, Lambda, gamma, p);
  rep.u_norm_global = fl_norm(u, weight_product(lambda, gamma), p);
  {
    Spectrum s = dft(u);
    for (std::size_t i = 0; i < s.values.size(); ++i)
      if (!chi_eps_Lg.test(i)) s.values[i] = complex(0.0);
    rep.u_norm_mcl = weighted_lp_norm(s, Lg, p);
  }
  rep.rhs_bound = (1.0 / rep.eps_prime) * rep.sigma_inv_q *
                  (rep.seminorm_mcl + rep.seminorm_plain) * (rep.u_norm_mcl + rep.u_norm_global);
  rep.ratio = rep.rhs_bound > 0.0 ? rep.lhs / rep.rhs_bound : (rep.lhs > 0.0 ? kInf : 0.0);
  rep.passed = std::isfinite(rep.lhs) && std::isfinite(rep.rhs_bound) &&
               (rep.lhs == 0.0 || rep.rhs_bound > 0.0);
  return rep;
}

FilterReport filter_membership(const std::function<Field(const GridSpec&)>& make_u,
                               const std::function<Field(const GridSpec&)>& make_phi,
                               const FrequencyPredicate& X, const Weight& w, double p, double eps,
                               const GridSpec& grid) {
  grid.validate();
  FilterReport rep;
  double norms[2];
  for (int level = 0; level < 2; ++level) {
    GridSpec g = grid;
    if (level == 1) g.points *= 2;
    const Field u = make_u(g);
    const Field phi = make_phi(g);
    const FrequencyMask comp = mask_from_predicate(g, X).complement();
    const FrequencyMask m = bracket_neighborhood(comp, w, eps);
    norms[level] = mcl_fl_norm(u, phi, m, w, p);
  }
  rep.coarse = norms[0];
  rep.fine = norms[1];
  rep.growth = rep.coarse > 0.0 ? rep.fine / rep.coarse - 1.0 : 0.0;
  if (rep.growth < 0.10) {
    rep.member = true;
  } else if (rep.growth > 0.50) {
    rep.member = false;
  } else {
    rep.member = false;
    rep.indeterminate = true;
  }
  return rep;
}

}  // namespace flm
