#pragma once

// Approximate diagonals of finite-spectrum commuting tuples in B(H), truncated
// to M x M, and the integer index obstruction for exact diagonals.

#include <optional>
#include <string>
#include <vector>

#include "majlab/ii1sim.hpp"
#include "majlab/matrixlab.hpp"
#include "majlab/spectra.hpp"

namespace majlab {

// Convex coefficients of d over X maximising the smallest one; nullopt if d is
// outside conv(X). margin > 0 means d is in the relative interior.
struct InteriorCoefficients {
  std::vector<Scalar> c;
  Scalar margin;
};
std::optional<InteriorCoefficients> interior_coefficients(const Point& d, const std::vector<Point>& x,
                                                          double tol = kDefaultTol);
bool is_interior(const Point& d, const std::vector<Point>& x, double tol = kDefaultTol);
// Throws DegenerateHull unless every point of x is an extreme point and |x| >= 2.
void require_vertex_set(const std::vector<Point>& x, double tol = kDefaultTol);

struct EdgeTerm {
  std::size_t i = 0, j = 0;  // zero-based vertex indices
  Scalar q;                  // rational mass of the term
  Scalar alpha;              // weight of vertex i; vertex j gets 1 - alpha
};

struct EdgeDecomposition {
  std::vector<EdgeTerm> terms;
  std::vector<Scalar> coefficients;  // the interior coefficients that were peeled
  Point reconstruction;
};

EdgeDecomposition pair_decompose_interior(const Point& d, const std::vector<Point>& x, double tol = kDefaultTol);

struct QuantizedTarget {
  std::vector<Point> entries;
  std::vector<Point> values;  // distinct entries, first-appearance order
  std::vector<std::size_t> counts;
  Scalar grid;    // spacing of the rounding grid
  Scalar shrink;  // eta: entries pulled toward the vertex barycenter by this factor
  double sup_distance = 0;
};

QuantizedTarget quantize_target(const std::vector<Point>& seq, const std::vector<Point>& x, double eps,
                                double tol = kDefaultTol);

// One independently synthesised piece of the truncation.
struct SynthRegion {
  std::string kind;  // "constant", "exceptional", "compensation"
  std::vector<std::size_t> cells;
  Point target;
  std::vector<EdgeTerm> terms;
  std::size_t base = 0;    // common denominator N of the term masses
  std::size_t groups = 0;  // regrouping cells of size N
  bool fallback = false;   // single Fourier block instead of the two-stage layout
  double bound = 0;
};

struct SynthesisResult {
  std::size_t m = 0;
  UnitaryMatrix u;
  CellTuple source;   // vertex value of every cell
  CellTuple target;   // requested diagonal
  CellTuple achieved; // diagonal of U S U* from exact bookkeeping
  std::vector<std::vector<double>> readout;  // numeric diagonal of U S U*
  double sup_error = 0;      // max |readout - target|
  double readout_error = 0;  // max |readout - achieved|
  double bound = 0;
  double constant = 0;  // C with bound = C / M (constant targets)
  std::vector<std::size_t> vertex_counts;
  std::size_t min_multiplicity = 0;  // ceil(M / 4k)
  bool multiplicity_ok = false;
  std::vector<SynthRegion> regions;
};

SynthesisResult synthesize_constant_diagonal(const std::vector<Point>& x, const Point& d, std::size_t m,
                                             double tol = kDefaultTol);
SynthesisResult synthesize_finite_diagonal(const std::vector<Point>& x, const std::vector<Point>& target,
                                           double tol = kDefaultTol);

// Integer solution of A v = b, or nullopt.
std::optional<std::vector<mpz_class>> integer_solution(const std::vector<std::vector<mpz_class>>& a,
                                                       const std::vector<mpz_class>& b);

struct IndexVerdict {
  Point deviation_sum;
  std::optional<std::vector<mpz_class>> nu;
  bool irrational = false;  // vertices were rationalised before the lattice solve
  double residual = 0;      // |sum nu_j lambda_j - s| with the original data
};

// phi[m] is the zero-based vertex assigned to prefix entry m.
IndexVerdict arveson_index_check(const std::vector<Point>& x, const std::vector<std::size_t>& phi,
                                 const std::vector<Point>& prefix, double tol = kDefaultTol);

}  // namespace majlab
