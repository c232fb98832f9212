#pragma once

#include <boost/rational.hpp>
#include <vector>

#include "flm/common.hpp"

namespace flm {

using Rational = boost::rational<long long>;
using LatticePoint = std::vector<long long>;

// One non-coordinate facet of the polyhedron: the hyperplane nu . xi = 1,
// with all components of nu strictly positive, and the vertices lying on it.
struct Facet {
  std::vector<Rational> normal;
  std::vector<std::size_t> vertices;  // indices into CompletePolyhedron::vertices()
};

// Complete polyhedron in the Volevich-Gindikin sense: convex lattice
// polyhedron in the nonnegative orthant, origin among the vertices, and
// every inner facet normal strictly positive.
class CompletePolyhedron {
 public:
  int dim() const { return dim_; }
  const std::vector<LatticePoint>& vertices() const { return vertices_; }
  const std::vector<Facet>& inner_facets() const { return facets_; }

  long long mu0() const { return mu0_; }  // min |gamma| over nonzero vertices
  long long mu1() const { return mu1_; }  // max |gamma| over vertices
  Rational mu() const { return mu_; }     // formal order: max 1/nu_j
  Rational delta() const { return delta_; }

 private:
  friend CompletePolyhedron build_polyhedron(const std::vector<LatticePoint>& points);

  int dim_ = 0;
  std::vector<LatticePoint> vertices_;
  std::vector<Facet> facets_;
  long long mu0_ = 0;
  long long mu1_ = 0;
  Rational mu_;
  Rational delta_;
};

// Exact convex hull over the input lattice points; drops non-extreme points,
// derives the inner facet normals normalized to nu . xi = 1, and computes the
// order invariants. Throws RejectDimension for n > 3 and RejectNotComplete
// when the vertex set violates completeness (i)-(iv).
CompletePolyhedron build_polyhedron(const std::vector<LatticePoint>& points);

struct Orders {
  long long mu0;
  long long mu1;
  Rational mu;
};

Orders orders(const CompletePolyhedron& p);

// delta of the (G) condition: max of nu . beta over lattice points strictly
// interior to every constraint (beta_j >= 1, nu . beta < 1); 0 when the
// interior lattice set is empty.
Rational delta(const CompletePolyhedron& p);

// Nonnegative lattice points with nu . beta <= 1 for all inner normals;
// interior_only tightens to beta_j >= 1 and nu . beta < 1.
std::vector<LatticePoint> lattice_points(const CompletePolyhedron& p, bool interior_only);

}  // namespace flm
