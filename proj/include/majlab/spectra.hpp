#pragma once

// Finite atomic probability measures on R^n and the convex geometry around them.

#include <vector>

#include "majlab/scalar.hpp"

namespace majlab {

// Joint spectral distribution of a commuting hermitian tuple with finite
// joint spectrum. Atoms are distinct, weights positive and summing to one.
struct Measure {
  std::size_t n = 0;
  std::vector<Point> atoms;
  std::vector<Scalar> weights;

  std::size_t size() const { return atoms.size(); }
  Backend backend() const;
};

// Validates and merges duplicate atoms (first occurrence keeps its slot).
Measure make_measure(std::vector<Point> atoms, std::vector<Scalar> weights, double tol = kDefaultTol);
Measure to_float(const Measure& m);

Point barycenter(const Measure& m);

struct HullCertificate {
  bool member = false;
  // member: convex coefficients over the atoms reproducing the point
  std::vector<Scalar> coefficients;
  // not member: normal.x <= bound on every atom, normal.p > bound
  Point normal;
  Scalar bound;
  Backend backend = Backend::Exact;
};

HullCertificate hull_membership(const Point& p, const std::vector<Point>& atoms, double tol = kDefaultTol);
inline HullCertificate hull_membership(const Point& p, const Measure& m, double tol = kDefaultTol) {
  return hull_membership(p, m.atoms, tol);
}
bool verify_hull_certificate(const Point& p, const std::vector<Point>& atoms, const HullCertificate& c,
                             double tol = kDefaultTol);

// Rank of the span of {atoms[i] - atoms[0]}.
std::size_t affine_rank(const std::vector<Point>& atoms, double tol = kDefaultTol);
// Rank of a dense matrix given as rows.
std::size_t matrix_rank(std::vector<std::vector<Scalar>> rows, double tol = kDefaultTol);

bool simplex_test(const std::vector<Point>& atoms, double tol = kDefaultTol);
inline bool simplex_test(const Measure& m, double tol = kDefaultTol) { return simplex_test(m.atoms, tol); }

}  // namespace majlab
