#pragma once

// Joint majorization of finite atomic measures, transport witnesses and
// canonical majorants.

#include <cstdint>
#include <optional>
#include <vector>

#include "majlab/lp.hpp"
#include "majlab/spectra.hpp"

namespace majlab {

using Matrix = std::vector<std::vector<Scalar>>;

// Row i <-> target atom beta_i (mass q_i), column j <-> source atom alpha_j (mass p_j).
struct TransportMatrix {
  Matrix entries;
  std::vector<Scalar> p;
  std::vector<Scalar> q;
  std::size_t rows() const { return entries.size(); }
  std::size_t cols() const { return entries.empty() ? 0 : entries.front().size(); }
};

struct MajorizationVerdict {
  bool feasible = false;
  std::optional<TransportMatrix> witness;
  // Farkas vector over [row sums | column sums | moments].
  std::vector<Scalar> certificate;
  Backend backend = Backend::Exact;
};

// The linear system D >= 0, D 1 = 1, q^T D = p^T, D alpha = beta.
LpProblem transport_lp(const Measure& target, const Measure& source);

MajorizationVerdict check_majorization(const Measure& target, const Measure& source, double tol = kDefaultTol);
bool verify_witness(const Measure& target, const Measure& source, const TransportMatrix& d,
                    double tol = kDefaultTol);
bool verify_certificate(const Measure& target, const Measure& source, const std::vector<Scalar>& y,
                        double tol = kDefaultTol);

// Hull test plus barycenter test; source atoms must be affinely independent.
bool simplex_majorization(const Measure& target, const Measure& source, double tol = kDefaultTol);

// partition[t][i] = mass that the t-th piece puts on target atom i.
// Returns nu[t][j] = sum_i d_ij * partition[t][i].
Matrix choquet_witness(const Measure& target, const Measure& source, const TransportMatrix& d,
                       const Matrix& partition, double tol = kDefaultTol);

// f(x) = max_r (grads[r] . x + offsets[r])
struct AffineMax {
  std::vector<Point> grads;
  std::vector<Scalar> offsets;
  Scalar operator()(const Point& x) const;
};

// sum_j p_j f(alpha_j) - sum_i q_i f(beta_i); nonnegative when target < source.
Scalar convex_gap(const Measure& target, const Measure& source, const AffineMax& f);
AffineMax random_affine_max(std::size_t n, std::uint64_t& state_seed, std::size_t max_pieces = 5);

struct ProbeReport {
  std::size_t samples = 0;
  std::size_t violations = 0;
  Scalar min_slack;
  Scalar max_slack;
};

ProbeReport convex_inequality_probe(const Measure& target, const Measure& source, const TransportMatrix& d,
                                    std::size_t samples, std::uint64_t seed, double tol = kDefaultTol);

struct MajorantResult {
  Measure measure;           // the majorant
  TransportMatrix transport; // witnesses input < measure
};

MajorantResult carpenter_majorant(const Measure& a);
MajorantResult unitary_majorant(const Measure& a, double tol = kDefaultTol);

struct OrthoProjResult {
  bool feasible = false;
  // (n+1)-column transport onto e_1, ..., e_n, 0 (zero-mass columns kept)
  std::optional<TransportMatrix> transport;
  // the projection tuple measure, zero-mass atoms dropped
  std::optional<Measure> measure;
};

OrthoProjResult orthoproj_diagonal_feasible(const Measure& a);

TransportMatrix compose(const TransportMatrix& first, const TransportMatrix& second);

}  // namespace majlab
