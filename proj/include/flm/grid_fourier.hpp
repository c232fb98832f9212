#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "flm/common.hpp"
#include "flm/weights.hpp"

namespace flm {

// Uniform periodic sampling of the box [-extent, extent)^n together with the
// DFT-compatible frequency grid of spacing pi/extent.
struct GridSpec {
  int n = 1;
  double extent = 1.0;       // half-width L per axis
  std::size_t points = 8;    // samples per axis, power of two

  std::size_t size() const {
    std::size_t s = 1;
    for (int j = 0; j < n; ++j) s *= points;
    return s;
  }
  double dx() const { return 2.0 * extent / static_cast<double>(points); }
  double dxi() const { return M_PI / extent; }
  double cell_volume_x() const { return std::pow(dx(), n); }
  double cell_volume_xi() const { return std::pow(dxi(), n); }
  double x(std::size_t j) const { return -extent + static_cast<double>(j) * dx(); }
  double xi(std::size_t k) const {
    return (static_cast<double>(k) - static_cast<double>(points / 2)) * dxi();
  }
  double max_xi() const { return static_cast<double>(points / 2) * dxi(); }

  void validate() const;
  bool operator==(const GridSpec& o) const {
    return n == o.n && extent == o.extent && points == o.points;
  }

  // Row-major multi-index of flat index i, written into out[0..n).
  void unflatten(std::size_t i, std::size_t* out) const {
    for (int j = n - 1; j >= 0; --j) {
      out[j] = i % points;
      i /= points;
    }
  }
  void point_x(std::size_t i, double* out) const {
    std::size_t m[3];
    unflatten(i, m);
    for (int j = 0; j < n; ++j) out[j] = x(m[j]);
  }
  void point_xi(std::size_t i, double* out) const {
    std::size_t m[3];
    unflatten(i, m);
    for (int j = 0; j < n; ++j) out[j] = xi(m[j]);
  }
};

enum class Side { space, frequency };

struct Field {
  GridSpec grid;
  std::vector<complex> values;  // row-major
};

struct Spectrum {
  GridSpec grid;
  std::vector<complex> values;
};

// Discrete stand-ins for the continuous transform pair
//   F(xi) = int e^{-i xi.x} f(x) dx,   f(x) = (2 pi)^{-n} int e^{i x.xi} F(xi) dxi.
Spectrum dft(const Field& f);
Field idft(const Spectrum& s);

Field sample_space(const GridSpec& g, const std::function<complex(std::span<const double>)>& f);
Spectrum sample_frequency(const GridSpec& g,
                          const std::function<complex(std::span<const double>)>& f);

// Largest relative magnitude of f near the box boundary plus of its spectrum
// near the Nyquist shell; inputs to inequality checks must keep this tiny.
double band_limit_defect(const Field& f);

double weighted_lp_norm(const Spectrum& s, const Weight& w, double p);
double weighted_lp_norm_space(const Field& f, const Weight& w, double p);

double fl_norm(const Field& f, const Weight& w, double p);
double local_fl_norm(const Field& u, const Field& phi, const Weight& w, double p);

Field pointwise_product(const Field& a, const Field& b);

enum class MixedKind { L1pq, L2pq };

// Iterated Riemann sums over a sampled two-argument table F(zeta_i, eta_j);
// cell_zeta / cell_eta are the quadrature cell volumes of the two axes.
double mixed_norm(const std::vector<complex>& table, std::size_t rows, std::size_t cols,
                  double cell_zeta, double cell_eta, MixedKind kind, double p, double q);

using Kernel2 = std::function<complex(std::span<const double>, std::span<const double>)>;

struct KernelApplyResult {
  Spectrum out;
  double lhs_norm;      // ||Tg||_p
  double f_norm;        // ||f||_{L1^{p,inf}} on the shifted grid
  double F_norm;        // ||F||_{L2^{inf,q}}
  double g_norm;        // ||g||_p
  double bound() const { return f_norm * F_norm * g_norm; }
};

// Tg(xi) = int F(xi, eta) f(xi - eta, eta) g(eta) d eta, with the discrete
// Schur bound ||Tg||_p <= ||f||_{L1^{p,inf}} ||F||_{L2^{inf,q}} ||g||_p
// evaluated with the same quadrature.
KernelApplyResult kernel_apply(const Kernel2& F, const Kernel2& f, const Spectrum& g, double p);

// Little-endian binary container: header {magic "FLGR", u32 n, u64 points,
// f64 extent, u8 side} followed by row-major interleaved f64 (re, im) pairs.
void write_flgr(const std::string& path, const GridSpec& g, Side side,
                const std::vector<complex>& values);
struct FlgrData {
  GridSpec grid;
  Side side;
  std::vector<complex> values;
};
FlgrData read_flgr(const std::string& path);

// CSV export of 1-D data or a 2-D slice: columns are the grid coordinates
// followed by re and im.
void write_csv(const std::string& path, const GridSpec& g, Side side,
               const std::vector<complex>& values);

}  // namespace flm
