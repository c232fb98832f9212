#include "flm/newton_polyhedron.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

namespace flm {
namespace {

using Vec = std::vector<long long>;

long long dot(const Vec& a, const Vec& b) {
  long long s = 0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
  return s;
}

// Integer normal of the hyperplane through the given n points (affinely
// independent), together with its offset b so the plane is {a . xi = b}.
// Returns false when the points are affinely dependent.
bool hyperplane(const std::vector<Vec>& pts, Vec& a, long long& b) {
  int n = static_cast<int>(pts[0].size());
  if (n == 1) {
    a = {1};
    b = pts[0][0];
    return true;
  }
  if (n == 2) {
    Vec d = {pts[1][0] - pts[0][0], pts[1][1] - pts[0][1]};
    if (d[0] == 0 && d[1] == 0) return false;
    a = {-d[1], d[0]};
    b = dot(a, pts[0]);
    return true;
  }
  // n == 3: cross product of the two edge vectors.
  Vec u = {pts[1][0] - pts[0][0], pts[1][1] - pts[0][1], pts[1][2] - pts[0][2]};
  Vec v = {pts[2][0] - pts[0][0], pts[2][1] - pts[0][1], pts[2][2] - pts[0][2]};
  a = {u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
  if (a[0] == 0 && a[1] == 0 && a[2] == 0) return false;
  b = dot(a, pts[0]);
  return true;
}

void canonicalize(Vec& a, long long& b) {
  long long g = std::abs(b);
  for (long long c : a) g = std::gcd(g, std::abs(c));
  if (g > 1) {
    for (auto& c : a) c /= g;
    b /= g;
  }
}

// Rank over the rationals of a small matrix of row vectors.
int rank(std::vector<std::vector<Rational>> rows) {
  int r = 0;
  std::size_t cols = rows.empty() ? 0 : rows[0].size();
  for (std::size_t c = 0; c < cols && r < static_cast<int>(rows.size()); ++c) {
    std::size_t pivot = rows.size();
    for (std::size_t i = r; i < rows.size(); ++i)
      if (rows[i][c] != Rational(0)) {
        pivot = i;
        break;
      }
    if (pivot == rows.size()) continue;
    std::swap(rows[r], rows[pivot]);
    for (std::size_t i = r + 1; i < rows.size(); ++i) {
      if (rows[i][c] == Rational(0)) continue;
      Rational f = rows[i][c] / rows[r][c];
      for (std::size_t j = c; j < cols; ++j) rows[i][j] -= f * rows[r][j];
    }
    ++r;
  }
  return r;
}

int affine_rank(const std::vector<Vec>& pts) {
  if (pts.size() < 2) return 0;
  std::vector<std::vector<Rational>> rows;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    std::vector<Rational> row;
    for (std::size_t j = 0; j < pts[0].size(); ++j) row.emplace_back(pts[i][j] - pts[0][j]);
    rows.push_back(std::move(row));
  }
  return rank(std::move(rows));
}

// Oriented supporting hyperplane in <= form: a . xi <= b holds on all points
// with equality on at least n of them.
struct Halfspace {
  Vec a;
  long long b;
  bool operator<(const Halfspace& o) const { return std::tie(a, b) < std::tie(o.a, o.b); }
};

}  // namespace

CompletePolyhedron build_polyhedron(const std::vector<LatticePoint>& points) {
  if (points.empty()) throw RejectNotComplete("empty vertex list");
  const int n = static_cast<int>(points[0].size());
  if (n < 1 || n > 3) throw RejectDimension("dimension must be 1, 2 or 3");

  std::set<Vec> uniq;
  for (const auto& p : points) {
    if (static_cast<int>(p.size()) != n) throw RejectNotComplete("mixed point dimensions");
    for (long long c : p)
      if (c < 0) throw RejectNotComplete("point outside the nonnegative orthant");
    uniq.insert(p);
  }
  std::vector<Vec> pts(uniq.begin(), uniq.end());  // lexicographically sorted

  const Vec origin(n, 0);
  if (!uniq.count(origin)) throw RejectNotComplete("origin missing from vertex set");
  if (pts.size() < 2) throw RejectNotComplete("vertex set is {0}");
  if (affine_rank(pts) < n)
    throw RejectNotComplete("vertex set does not span the space; coordinate facets degenerate");

  // Enumerate supporting hyperplanes from all n-subsets.
  std::set<Halfspace> halfspaces;
  std::vector<std::size_t> idx(n);
  std::function<void(std::size_t, int)> choose = [&](std::size_t start, int k) {
    if (k == n) {
      std::vector<Vec> sel;
      for (int i = 0; i < n; ++i) sel.push_back(pts[idx[i]]);
      Vec a;
      long long b;
      if (!hyperplane(sel, a, b)) return;
      bool above = false, below = false;
      for (const auto& p : pts) {
        long long s = dot(a, p) - b;
        above |= s > 0;
        below |= s < 0;
      }
      if (above && below) return;
      if (above) {
        for (auto& c : a) c = -c;
        b = -b;
      }
      canonicalize(a, b);
      halfspaces.insert({a, b});
      return;
    }
    for (std::size_t i = start; i < pts.size(); ++i) {
      idx[k] = i;
      choose(i + 1, k + 1);
    }
  };
  choose(0, 0);

  // Classify facets: coordinate hyperplanes (b = 0, a = -e_j) vs inner
  // facets (b > 0, all a_j > 0, giving nu = a / b).
  std::vector<Halfspace> inner;
  for (const auto& h : halfspaces) {
    if (h.b == 0) {
      int nonzero = 0, axis = -1;
      for (int j = 0; j < n; ++j)
        if (h.a[j] != 0) {
          ++nonzero;
          axis = j;
        }
      if (nonzero != 1 || h.a[axis] > 0)
        throw RejectNotComplete("facet through the origin is not a coordinate hyperplane");
      continue;
    }
    if (h.b < 0) throw RejectNotComplete("supporting hyperplane with negative offset");
    for (int j = 0; j < n; ++j)
      if (h.a[j] <= 0)
        throw RejectNotComplete("inner facet normal has a non-positive component");
    inner.push_back(h);
  }
  if (inner.empty()) throw RejectNotComplete("no inner facet found");

  // A point is an extreme vertex iff its tight facet normals span R^n.
  CompletePolyhedron result;
  result.dim_ = n;
  std::vector<Facet> facets;
  for (const auto& h : inner) {
    Facet f;
    for (int j = 0; j < n; ++j) f.normal.emplace_back(Rational(h.a[j], h.b));
    facets.push_back(std::move(f));
  }
  for (const auto& p : pts) {
    std::vector<std::vector<Rational>> tight;
    for (const auto& h : halfspaces)
      if (dot(h.a, p) == h.b) {
        std::vector<Rational> row;
        for (int j = 0; j < n; ++j) row.emplace_back(h.a[j]);
        tight.push_back(std::move(row));
      }
    if (rank(std::move(tight)) == n) result.vertices_.push_back(p);
  }
  if (std::find(result.vertices_.begin(), result.vertices_.end(), origin) ==
      result.vertices_.end())
    throw RejectNotComplete("origin is not extreme");

  for (std::size_t vi = 0; vi < result.vertices_.size(); ++vi) {
    const auto& v = result.vertices_[vi];
    bool on_inner = false;
    for (std::size_t fi = 0; fi < inner.size(); ++fi) {
      if (dot(inner[fi].a, v) == inner[fi].b) {
        facets[fi].vertices.push_back(vi);
        on_inner = true;
      }
    }
    if (v != origin && !on_inner)
      throw RejectNotComplete("non-origin vertex off every inner facet");
  }
  result.facets_ = std::move(facets);

  result.mu0_ = 0;
  result.mu1_ = 0;
  for (const auto& v : result.vertices_) {
    long long s = std::accumulate(v.begin(), v.end(), 0LL);
    if (s > 0 && (result.mu0_ == 0 || s < result.mu0_)) result.mu0_ = s;
    result.mu1_ = std::max(result.mu1_, s);
  }
  result.mu_ = Rational(0);
  for (const auto& f : result.facets_)
    for (const auto& c : f.normal) result.mu_ = std::max(result.mu_, Rational(1) / c);

  result.delta_ = Rational(0);
  for (const auto& beta : lattice_points(result, true))
    for (const auto& f : result.facets_) {
      Rational s(0);
      for (int j = 0; j < n; ++j) s += f.normal[j] * beta[j];
      result.delta_ = std::max(result.delta_, s);
    }
  return result;
}

Orders orders(const CompletePolyhedron& p) { return {p.mu0(), p.mu1(), p.mu()}; }

Rational delta(const CompletePolyhedron& p) { return p.delta(); }

std::vector<LatticePoint> lattice_points(const CompletePolyhedron& p, bool interior_only) {
  const int n = p.dim();
  // beta_j <= min over nu of 1/nu_j on every constraint.
  std::vector<long long> bound(n, 0);
  for (int j = 0; j < n; ++j) {
    Rational m(-1);
    for (const auto& f : p.inner_facets()) {
      Rational inv = Rational(1) / f.normal[j];
      if (m < Rational(0) || inv < m) m = inv;
    }
    bound[j] = m.numerator() / m.denominator();
  }
  std::vector<LatticePoint> out;
  LatticePoint beta(n, 0);
  std::function<void(int)> rec = [&](int j) {
    if (j == n) {
      for (const auto& f : p.inner_facets()) {
        Rational s(0);
        for (int k = 0; k < n; ++k) s += f.normal[k] * beta[k];
        if (interior_only ? !(s < Rational(1)) : s > Rational(1)) return;
      }
      out.push_back(beta);
      return;
    }
    for (long long c = interior_only ? 1 : 0; c <= bound[j]; ++c) {
      beta[j] = c;
      rec(j + 1);
    }
  };
  rec(0);
  return out;
}

}  // namespace flm
