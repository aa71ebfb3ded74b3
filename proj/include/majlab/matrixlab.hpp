#pragma once

// Dense complex matrices: conditional expectations, Fourier and dilation
// unitaries, Birkhoff decomposition and small obstruction certificates.

#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "majlab/majorization.hpp"

namespace majlab {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

struct UnitaryMatrix {
  CMatrix u;
  double defect = 0;  // ||U*U - I||_max
};

double max_abs(const CMatrix& m);
double unitarity_defect(const CMatrix& u);
UnitaryMatrix make_unitary(CMatrix u);
CMatrix to_complex(const Matrix& m);
CMatrix diag_matrix(const CVector& v);

CMatrix expect_diagonal(const CMatrix& m);
CMatrix expect_block(const CMatrix& m, std::size_t blocks, std::size_t block_size);

// exp(2 pi i k / n); quarter turns are exact.
Complex root_of_unity(std::int64_t k, std::int64_t n);
UnitaryMatrix fourier_unitary(std::size_t n);

CMatrix random_unitary(std::size_t n, std::mt19937_64& rng);
CMatrix random_hermitian(std::size_t n, std::mt19937_64& rng);

// W with E(W S_i W*) = tr(S_i)/n for every coordinate.
UnitaryMatrix constant_diagonal_unitary(const std::vector<CMatrix>& tuple,
                                        const std::optional<CMatrix>& diagonalizer = std::nullopt,
                                        double tol = kDefaultTol);

// perm[i] = column of the 1 in row i
using Permutation = std::vector<std::size_t>;

struct BirkhoffTerm {
  Scalar weight;
  Permutation perm;
};

bool is_doubly_stochastic(const Matrix& d, double tol = kDefaultTol);
Matrix permutation_matrix(const Permutation& p);
CMatrix permutation_cmatrix(const Permutation& p);
std::vector<BirkhoffTerm> birkhoff_decompose(const Matrix& d, double tol = kDefaultTol);
Matrix birkhoff_sum(const std::vector<BirkhoffTerm>& terms, std::size_t d);

// (1/sqrt m) sum_{j,k} w^{jk} E_jk (x) U_k, indices from 1.
CMatrix dilation_unitary(const std::vector<double>& alpha, const std::vector<CMatrix>& ops);

struct Inflation {
  std::size_t m = 0;
  UnitaryMatrix u;
  std::vector<BirkhoffTerm> terms;  // the (possibly rounded) decomposition used
  std::vector<std::size_t> counts;  // copies of each term, summing to m
  double bound = 0;                 // certified operator deviation per unit ||beta||
};

Inflation inflate_rational_ds(const Matrix& d);
Inflation inflate_approx_ds(const Matrix& d, double eps);

// max |E_{md}(U (I_m (x) diag b) U*) - I_m (x) diag(D b)|
double inflation_residual(const Matrix& d, const Inflation& inf, const CVector& beta);

struct OverlapCertificate {
  std::size_t row1 = 0, row2 = 0, column = 0;  // zero-based
  Scalar product;                              // d[row1][column] * d[row2][column]
};

std::optional<OverlapCertificate> unistochastic_obstruction(const Matrix& d, double tol = kDefaultTol);

struct PartialIsometryReport {
  bool hypotheses = false;
  double a_defect = 0, b_defect = 0;  // ||X X* X - X||_max, only when hypotheses hold
};

PartialIsometryReport partial_isometry_check(const CMatrix& a, const CMatrix& b);

struct IrrationalObstruction {
  double a = 0;
  std::size_t m = 0;
  double distance = 0;  // dist(m a, Z)
  bool obstructed = false;
};

IrrationalObstruction irrational_inflation_obstruction(double a, std::size_t m);

}  // namespace majlab
