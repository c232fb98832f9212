#include "flm/grid_fourier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

namespace flm {

void GridSpec::validate() const {
  if (n < 1 || n > 3) throw BadParam("grid dimension must be 1..3");
  if (extent <= 0) throw BadParam("grid extent must be positive");
  if (points < 8 || (points & (points - 1)) != 0)
    throw BadParam("points per axis must be a power of two >= 8");
}

namespace {

void check_same(const GridSpec& a, const GridSpec& b) {
  if (!(a == b)) throw GridMismatch("operands live on different grids");
}

// One-axis transform table: out_k = sum_j T[k*N+j] in_j. sign = -1 maps
// space -> frequency (weighted by dx), sign = +1 the inverse (weighted by
// dxi; the (2 pi)^{-n} factor is applied by the caller).
std::vector<complex> axis_table(const GridSpec& g, int sign) {
  std::size_t N = g.points;
  std::vector<complex> T(N * N);
  double scale = sign < 0 ? g.dx() : g.dxi();
  for (std::size_t k = 0; k < N; ++k)
    for (std::size_t j = 0; j < N; ++j) {
      double phase = double(sign) * g.xi(k) * g.x(j);
      T[k * N + j] = std::polar(scale, phase);
    }
  return T;
}

// Apply the one-axis table along every axis of a row-major n-D array.
std::vector<complex> apply_separable(const GridSpec& g, const std::vector<complex>& in,
                                     const std::vector<complex>& T) {
  std::size_t N = g.points;
  std::vector<complex> cur = in;
  std::vector<complex> next(cur.size());
  for (int axis = 0; axis < g.n; ++axis) {
    // Stride of the axis in row-major order.
    std::size_t stride = 1;
    for (int a = axis + 1; a < g.n; ++a) stride *= N;
    std::size_t lines = cur.size() / N;
    parallel_for(lines, [&](std::size_t lo, std::size_t hi) {
      std::vector<complex> line(N);
      for (std::size_t l = lo; l < hi; ++l) {
        // Base offset of line l for this axis.
        std::size_t outer = l / stride;
        std::size_t inner = l % stride;
        std::size_t base = outer * stride * N + inner;
        for (std::size_t j = 0; j < N; ++j) line[j] = cur[base + j * stride];
        for (std::size_t k = 0; k < N; ++k) {
          complex acc = 0;
          const complex* row = &T[k * N];
          for (std::size_t j = 0; j < N; ++j) acc += row[j] * line[j];
          next[base + k * stride] = acc;
        }
      }
    });
    std::swap(cur, next);
  }
  return cur;
}

}  // namespace

Spectrum dft(const Field& f) {
  f.grid.validate();
  if (f.values.size() != f.grid.size()) throw GridMismatch("value count does not match grid");
  Spectrum s;
  s.grid = f.grid;
  s.values = apply_separable(f.grid, f.values, axis_table(f.grid, -1));
  return s;
}

Field idft(const Spectrum& s) {
  s.grid.validate();
  if (s.values.size() != s.grid.size()) throw GridMismatch("value count does not match grid");
  Field f;
  f.grid = s.grid;
  f.values = apply_separable(s.grid, s.values, axis_table(s.grid, +1));
  double norm = std::pow(2.0 * M_PI, -s.grid.n);
  for (auto& v : f.values) v *= norm;
  return f;
}

Field sample_space(const GridSpec& g, const std::function<complex(std::span<const double>)>& f) {
  g.validate();
  Field out;
  out.grid = g;
  out.values.resize(g.size());
  parallel_for(out.values.size(), [&](std::size_t lo, std::size_t hi) {
    double p[3];
    for (std::size_t i = lo; i < hi; ++i) {
      g.point_x(i, p);
      out.values[i] = f(std::span<const double>(p, g.n));
    }
  });
  return out;
}

Spectrum sample_frequency(const GridSpec& g,
                          const std::function<complex(std::span<const double>)>& f) {
  g.validate();
  Spectrum out;
  out.grid = g;
  out.values.resize(g.size());
  parallel_for(out.values.size(), [&](std::size_t lo, std::size_t hi) {
    double p[3];
    for (std::size_t i = lo; i < hi; ++i) {
      g.point_xi(i, p);
      out.values[i] = f(std::span<const double>(p, g.n));
    }
  });
  return out;
}

double band_limit_defect(const Field& f) {
  const GridSpec& g = f.grid;
  double peak = 0;
  for (const auto& v : f.values) peak = std::max(peak, std::abs(v));
  if (peak == 0) return 0.0;
  auto edge_mass = [&](const std::vector<complex>& vals) {
    double worst = 0;
    std::size_t m[3];
    std::size_t margin = g.points / 16;
    for (std::size_t i = 0; i < vals.size(); ++i) {
      g.unflatten(i, m);
      bool edge = false;
      for (int j = 0; j < g.n; ++j)
        if (m[j] < margin || m[j] + margin >= g.points) edge = true;
      if (edge) worst = std::max(worst, std::abs(vals[i]));
    }
    return worst;
  };
  Spectrum s = dft(f);
  double speak = 0;
  for (const auto& v : s.values) speak = std::max(speak, std::abs(v));
  double d1 = edge_mass(f.values) / peak;
  double d2 = speak > 0 ? edge_mass(s.values) / speak : 0.0;
  return std::max(d1, d2);
}

namespace {

double weighted_lp(const std::vector<complex>& vals, const GridSpec& g, bool freq_side,
                   const Weight& w, double p) {
  if (p < 1) throw BadParam("p must be >= 1");
  if (w.n != g.n) throw GridMismatch("weight dimension does not match grid");
  double cell = freq_side ? g.cell_volume_xi() : g.cell_volume_x();
  bool pinf = std::isinf(p);
  double acc = 0;
  double pt[3];
  for (std::size_t i = 0; i < vals.size(); ++i) {
    if (freq_side)
      g.point_xi(i, pt);
    else
      g.point_x(i, pt);
    double v = w.eval(std::span<const double>(pt, g.n)) * std::abs(vals[i]);
    if (pinf)
      acc = std::max(acc, v);
    else
      acc += std::pow(v, p);
  }
  return pinf ? acc : std::pow(acc * cell, 1.0 / p);
}

}  // namespace

double weighted_lp_norm(const Spectrum& s, const Weight& w, double p) {
  return weighted_lp(s.values, s.grid, true, w, p);
}

double weighted_lp_norm_space(const Field& f, const Weight& w, double p) {
  return weighted_lp(f.values, f.grid, false, w, p);
}

double fl_norm(const Field& f, const Weight& w, double p) {
  return weighted_lp_norm(dft(f), w, p);
}

Field pointwise_product(const Field& a, const Field& b) {
  check_same(a.grid, b.grid);
  Field out;
  out.grid = a.grid;
  out.values.resize(a.values.size());
  for (std::size_t i = 0; i < a.values.size(); ++i) out.values[i] = a.values[i] * b.values[i];
  return out;
}

double local_fl_norm(const Field& u, const Field& phi, const Weight& w, double p) {
  return fl_norm(pointwise_product(phi, u), w, p);
}

double mixed_norm(const std::vector<complex>& table, std::size_t rows, std::size_t cols,
                  double cell_zeta, double cell_eta, MixedKind kind, double p, double q) {
  if (table.size() != rows * cols) throw GridMismatch("table size does not match rows*cols");
  bool pinf = std::isinf(p), qinf = std::isinf(q);
  if ((!pinf && p < 1) || (!qinf && q < 1)) throw BadParam("exponents must be >= 1");
  auto reduce = [](const std::vector<double>& v, double e, double cell, bool einf) {
    if (einf) return *std::max_element(v.begin(), v.end());
    double acc = 0;
    for (double x : v) acc += std::pow(x, e);
    return std::pow(acc * cell, 1.0 / e);
  };
  if (kind == MixedKind::L1pq) {
    // Inner over zeta (rows) with p, outer over eta (cols) with q.
    std::vector<double> inner(cols);
    std::vector<double> col(rows);
    for (std::size_t j = 0; j < cols; ++j) {
      for (std::size_t i = 0; i < rows; ++i) col[i] = std::abs(table[i * cols + j]);
      inner[j] = reduce(col, p, cell_zeta, pinf);
    }
    return reduce(inner, q, cell_eta, qinf);
  }
  // L2pq: inner over eta (cols) with q, outer over zeta (rows) with p.
  std::vector<double> inner(rows);
  std::vector<double> row(cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) row[j] = std::abs(table[i * cols + j]);
    inner[i] = reduce(row, q, cell_eta, qinf);
  }
  return reduce(inner, p, cell_zeta, pinf);
}

KernelApplyResult kernel_apply(const Kernel2& F, const Kernel2& f, const Spectrum& g, double p) {
  g.grid.validate();
  if (g.values.size() != g.grid.size()) throw GridMismatch("value count does not match grid");
  if (p < 1) throw BadParam("p must be >= 1");
  bool pinf = std::isinf(p);
  double q = pinf ? 1.0 : (p == 1.0 ? std::numeric_limits<double>::infinity() : p / (p - 1.0));
  const GridSpec& gr = g.grid;
  std::size_t total = gr.size();
  double cell = gr.cell_volume_xi();

  KernelApplyResult res;
  res.out.grid = gr;
  res.out.values.assign(total, complex(0));

  parallel_for(total, [&](std::size_t lo, std::size_t hi) {
    double xi[3], eta[3], zeta[3];
    for (std::size_t i = lo; i < hi; ++i) {
      gr.point_xi(i, xi);
      complex acc = 0;
      for (std::size_t j = 0; j < total; ++j) {
        gr.point_xi(j, eta);
        for (int a = 0; a < gr.n; ++a) zeta[a] = xi[a] - eta[a];
        acc += F(std::span<const double>(xi, gr.n), std::span<const double>(eta, gr.n)) *
               f(std::span<const double>(zeta, gr.n), std::span<const double>(eta, gr.n)) *
               g.values[j];
      }
      res.out.values[i] = acc * cell;
    }
  });

  // The three factors of the discrete Schur bound, computed with the same
  // quadrature as the operator itself. The zeta-argument of f ranges over the
  // shifted grids {xi_i - eta_j}, so the L1^{p,inf} norm is taken there.
  Weight one = make_constant(gr.n, 1.0);
  res.lhs_norm = weighted_lp_norm(res.out, one, p);
  res.g_norm = weighted_lp_norm(g, one, p);

  double fsup = 0, Fsup = 0;
  double xi[3], eta[3], zeta[3];
  for (std::size_t j = 0; j < total; ++j) {
    gr.point_xi(j, eta);
    double acc = 0, m = 0;
    for (std::size_t i = 0; i < total; ++i) {
      gr.point_xi(i, xi);
      for (int a = 0; a < gr.n; ++a) zeta[a] = xi[a] - eta[a];
      double v = std::abs(
          f(std::span<const double>(zeta, gr.n), std::span<const double>(eta, gr.n)));
      if (pinf)
        m = std::max(m, v);
      else
        acc += std::pow(v, p);
    }
    fsup = std::max(fsup, pinf ? m : std::pow(acc * cell, 1.0 / p));
  }
  bool qinf = std::isinf(q);
  for (std::size_t i = 0; i < total; ++i) {
    gr.point_xi(i, xi);
    double acc = 0, m = 0;
    for (std::size_t j = 0; j < total; ++j) {
      gr.point_xi(j, eta);
      double v = std::abs(
          F(std::span<const double>(xi, gr.n), std::span<const double>(eta, gr.n)));
      if (qinf)
        m = std::max(m, v);
      else
        acc += std::pow(v, q);
    }
    Fsup = std::max(Fsup, qinf ? m : std::pow(acc * cell, 1.0 / q));
  }
  res.f_norm = fsup;
  res.F_norm = Fsup;
  return res;
}

void write_flgr(const std::string& path, const GridSpec& g, Side side,
                const std::vector<complex>& values) {
  if (values.size() != g.size()) throw GridMismatch("value count does not match grid");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw BadParam("cannot open " + path + " for writing");
  out.write("FLGR", 4);
  std::uint32_t n = std::uint32_t(g.n);
  std::uint64_t pts = g.points;
  double ext = g.extent;
  std::uint8_t sd = side == Side::space ? 0 : 1;
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(reinterpret_cast<const char*>(&pts), sizeof pts);
  out.write(reinterpret_cast<const char*>(&ext), sizeof ext);
  out.write(reinterpret_cast<const char*>(&sd), sizeof sd);
  for (const auto& v : values) {
    double re = v.real(), im = v.imag();
    out.write(reinterpret_cast<const char*>(&re), sizeof re);
    out.write(reinterpret_cast<const char*>(&im), sizeof im);
  }
  if (!out) throw BadParam("write failed for " + path);
}

FlgrData read_flgr(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BadParam("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != "FLGR") throw BadParam("bad magic in " + path);
  std::uint32_t n;
  std::uint64_t pts;
  double ext;
  std::uint8_t sd;
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  in.read(reinterpret_cast<char*>(&pts), sizeof pts);
  in.read(reinterpret_cast<char*>(&ext), sizeof ext);
  in.read(reinterpret_cast<char*>(&sd), sizeof sd);
  if (!in) throw BadParam("truncated header in " + path);
  FlgrData d;
  d.grid.n = int(n);
  d.grid.points = std::size_t(pts);
  d.grid.extent = ext;
  d.grid.validate();
  d.side = sd == 0 ? Side::space : Side::frequency;
  d.values.resize(d.grid.size());
  for (auto& v : d.values) {
    double re, im;
    in.read(reinterpret_cast<char*>(&re), sizeof re);
    in.read(reinterpret_cast<char*>(&im), sizeof im);
    v = complex(re, im);
  }
  if (!in) throw BadParam("truncated payload in " + path);
  return d;
}

void write_csv(const std::string& path, const GridSpec& g, Side side,
               const std::vector<complex>& values) {
  if (g.n > 2) throw BadParam("CSV export supports 1-D and 2-D only");
  if (values.size() != g.size()) throw GridMismatch("value count does not match grid");
  std::ofstream out(path);
  if (!out) throw BadParam("cannot open " + path + " for writing");
  out << (g.n == 1 ? "c0,re,im\n" : "c0,c1,re,im\n");
  out << std::setprecision(17);
  double p[3];
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (side == Side::space)
      g.point_x(i, p);
    else
      g.point_xi(i, p);
    for (int j = 0; j < g.n; ++j) out << p[j] << ',';
    out << values[i].real() << ',' << values[i].imag() << '\n';
  }
}

}  // namespace flm
