#include "majlab/matrixlab.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>

#include "majlab/error.hpp"

namespace majlab {

double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double unitarity_defect(const CMatrix& u) {
  if (u.rows() != u.cols()) fail(ErrorCode::NotSquare, "unitarity defect of a non-square matrix");
  return max_abs(u.adjoint() * u - CMatrix::Identity(u.rows(), u.cols()));
}

UnitaryMatrix make_unitary(CMatrix u) {
  UnitaryMatrix r;
  r.defect = unitarity_defect(u);
  r.u = std::move(u);
  return r;
}

CMatrix to_complex(const Matrix& m) {
  const std::size_t r = m.size(), c = r ? m[0].size() : 0;
  CMatrix out(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out(i, j) = m[i][j].to_double();
  return out;
}

CMatrix diag_matrix(const CVector& v) { return v.asDiagonal(); }

CMatrix expect_diagonal(const CMatrix& m) {
  if (m.rows() != m.cols()) fail(ErrorCode::NotSquare, "conditional expectation needs a square matrix");
  return m.diagonal().asDiagonal();
}

CMatrix expect_block(const CMatrix& m, std::size_t blocks, std::size_t block_size) {
  if (m.rows() != m.cols()) fail(ErrorCode::NotSquare, "conditional expectation needs a square matrix");
  if (blocks == 0 || block_size == 0 || static_cast<std::size_t>(m.rows()) != blocks * block_size)
    fail(ErrorCode::BadBlockStructure, "dimension is not blocks * block_size");
  CMatrix out = CMatrix::Zero(m.rows(), m.cols());
  const auto b = static_cast<Eigen::Index>(block_size);
  for (std::size_t k = 0; k < blocks; ++k) {
    const auto o = static_cast<Eigen::Index>(k) * b;
    out.block(o, o, b, b) = m.block(o, o, b, b);
  }
  return out;
}

Complex root_of_unity(std::int64_t k, std::int64_t n) {
  if (n <= 0) fail(ErrorCode::InvalidInput, "root of unity order must be positive");
  k %= n;
  if (k < 0) k += n;
  // Reduce to an exact fraction of a turn before calling sin/cos.
  const std::int64_t g = std::gcd(k, n);
  k /= g;
  n /= g;
  if (4 % n == 0) {
    static const Complex quarter[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    return quarter[k * (4 / n)];
  }
  if (n == 8) {
    const double h = std::numbers::sqrt2 / 2;
    const double re = (k == 1 || k == 7) ? h : -h;
    const double im = (k == 1 || k == 3) ? h : -h;
    return {re, im};
  }
  const double angle = 2 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
  return {std::cos(angle), std::sin(angle)};
}

UnitaryMatrix fourier_unitary(std::size_t n) {
  if (n == 0) fail(ErrorCode::InvalidInput, "fourier size must be positive");
  const auto nn = static_cast<std::int64_t>(n);
  std::vector<Complex> roots(n);
  for (std::size_t k = 0; k < n; ++k) roots[k] = root_of_unity(static_cast<std::int64_t>(k), nn);
  const double s = 1.0 / std::sqrt(static_cast<double>(n));
  CMatrix v(nn, nn);
  for (std::int64_t i = 0; i < nn; ++i)
    for (std::int64_t j = 0; j < nn; ++j) v(i, j) = s * roots[static_cast<std::size_t>((i * j) % nn)];
  return make_unitary(std::move(v));
}

CMatrix random_unitary(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CMatrix z(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) z(i, j) = Complex(g(rng), g(rng));
  Eigen::HouseholderQR<CMatrix> qr(z);
  CMatrix q = qr.householderQ();
  CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (std::size_t j = 0; j < n; ++j) {
    const double a = std::abs(r(j, j));
    if (a > 0) q.col(j) *= r(j, j) / a;
  }
  return q;
}

CMatrix random_hermitian(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CMatrix z(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) z(i, j) = Complex(g(rng), g(rng));
  return (z + z.adjoint()) / 2.0;
}

UnitaryMatrix constant_diagonal_unitary(const std::vector<CMatrix>& tuple, const std::optional<CMatrix>& diagonalizer,
                                        double tol) {
  if (tuple.empty()) fail(ErrorCode::InvalidInput, "empty tuple");
  const auto n = tuple[0].rows();
  for (const auto& s : tuple)
    if (s.rows() != n || s.cols() != n) fail(ErrorCode::NotSquare, "tuple coordinates must be square of equal size");
  for (std::size_t i = 0; i < tuple.size(); ++i)
    for (std::size_t j = i + 1; j < tuple.size(); ++j)
      if (max_abs(tuple[i] * tuple[j] - tuple[j] * tuple[i]) > tol)
        fail(ErrorCode::NotCommuting, "coordinates " + std::to_string(i) + " and " + std::to_string(j) +
                                          " do not commute");
  const CMatrix f = fourier_unitary(static_cast<std::size_t>(n)).u;
  auto diagonalizes = [&](const CMatrix& v) {
    for (const auto& s : tuple) {
      CMatrix d = v.adjoint() * s * v;
      d.diagonal().setZero();
      if (max_abs(d) > 1e-8 * std::max(1.0, max_abs(s))) return false;
    }
    return true;
  };
  if (diagonalizer) {
    if (!diagonalizes(*diagonalizer)) fail(ErrorCode::InvalidInput, "supplied diagonalizer does not diagonalize");
    return make_unitary(f * diagonalizer->adjoint());
  }
  // A generic real combination separates the joint eigenspaces.
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  for (int attempt = 0; attempt < 8; ++attempt) {
    CMatrix h = CMatrix::Zero(n, n);
    for (const auto& s : tuple) h += u(rng) * s;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
    const CMatrix& v = es.eigenvectors();
    if (diagonalizes(v)) return make_unitary(f * v.adjoint());
  }
  fail(ErrorCode::InternalInconsistency, "joint diagonalization failed");
}

bool is_doubly_stochastic(const Matrix& d, double tol) {
  const std::size_t n = d.size();
  if (n == 0) return false;
  for (const auto& row : d)
    if (row.size() != n) return false;
  for (std::size_t i = 0; i < n; ++i) {
    Scalar r(0), c(0);
    for (std::size_t j = 0; j < n; ++j) {
      if (sign(d[i][j], tol) < 0) return false;
      r += d[i][j];
      c += d[j][i];
    }
    if (!approx_equal(r, Scalar(1), tol) || !approx_equal(c, Scalar(1), tol)) return false;
  }
  return true;
}

Matrix permutation_matrix(const Permutation& p) {
  Matrix m(p.size(), std::vector<Scalar>(p.size(), Scalar(0)));
  for (std::size_t i = 0; i < p.size(); ++i) m[i][p[i]] = Scalar(1);
  return m;
}

CMatrix permutation_cmatrix(const Permutation& p) {
  const auto n = static_cast<Eigen::Index>(p.size());
  CMatrix m = CMatrix::Zero(n, n);
  for (std::size_t i = 0; i < p.size(); ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p[i])) = 1.0;
  return m;
}

namespace {

// Kuhn's augmenting paths on the positivity pattern.
std::optional<Permutation> perfect_matching(const std::vector<std::vector<bool>>& pos) {
  const std::size_t n = pos.size();
  std::vector<std::size_t> col_owner(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    std::vector<bool> seen(n, false);
    std::function<bool(std::size_t)> augment = [&](std::size_t row) {
      for (std::size_t c = 0; c < n; ++c) {
        if (!pos[row][c] || seen[c]) continue;
        seen[c] = true;
        if (col_owner[c] == n || augment(col_owner[c])) {
          col_owner[c] = row;
          return true;
        }
      }
      return false;
    };
    if (!augment(r)) return std::nullopt;
  }
  Permutation p(n);
  for (std::size_t c = 0; c < n; ++c) p[col_owner[c]] = c;
  return p;
}

// Null vector of the columns [1; vec(P_k)], or nothing if independent.
std::optional<std::vector<Scalar>> affine_dependence(const std::vector<BirkhoffTerm>& terms, std::size_t d) {
  const std::size_t k = terms.size(), rows = 1 + d * d;
  Matrix a(rows, std::vector<Scalar>(k, Scalar(0)));
  for (std::size_t t = 0; t < k; ++t) {
    a[0][t] = Scalar(1);
    for (std::size_t i = 0; i < d; ++i) a[1 + i * d + terms[t].perm[i]][t] = Scalar(1);
  }
  std::vector<std::size_t> pivot_of_row;
  std::vector<bool> is_pivot(k, false);
  std::size_t r = 0;
  for (std::size_t c = 0; c < k && r < rows; ++c) {
    std::size_t p = r;
    while (p < rows && is_zero(a[p][c])) ++p;
    if (p == rows) continue;
    std::swap(a[p], a[r]);
    Scalar inv = Scalar(1) / a[r][c];
    for (auto& x : a[r]) x *= inv;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || is_zero(a[i][c])) continue;
      Scalar f = a[i][c];
      for (std::size_t j = 0; j < k; ++j) a[i][j] -= f * a[r][j];
    }
    pivot_of_row.push_back(c);
    is_pivot[c] = true;
    ++r;
  }
  std::size_t free_col = k;
  for (std::size_t c = 0; c < k; ++c)
    if (!is_pivot[c]) {
      free_col = c;
      break;
    }
  if (free_col == k) return std::nullopt;
  std::vector<Scalar> v(k, Scalar(0));
  v[free_col] = Scalar(1);
  for (std::size_t i = 0; i < pivot_of_row.size(); ++i) v[pivot_of_row[i]] = -a[i][free_col];
  return v;
}

}  // namespace

std::vector<BirkhoffTerm> birkhoff_decompose(const Matrix& d, double tol) {
  if (!is_doubly_stochastic(d, tol)) fail(ErrorCode::NotDoublyStochastic, "matrix is not doubly stochastic");
  const std::size_t n = d.size();
  const bool exact = backend_of(d) == Backend::Exact;
  const double thr = exact ? 0.0 : 1e-12;
  Matrix rem = d;
  std::vector<BirkhoffTerm> terms;
  while (true) {
    std::vector<std::vector<bool>> pos(n, std::vector<bool>(n));
    bool any = false;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        pos[i][j] = sign(rem[i][j], thr) > 0;
        any = any || pos[i][j];
      }
    if (!any) break;
    auto perm = perfect_matching(pos);
    if (!perm) {
      if (exact) fail(ErrorCode::InternalInconsistency, "no perfect matching on an exact doubly stochastic remainder");
      // Float leftovers below the matching threshold are dropped.
      Scalar left(0);
      for (const auto& row : rem)
        for (const auto& x : row) left = max(left, abs(x));
      if (left.to_double() < 1e-9) break;
      fail(ErrorCode::NoPerfectMatching, "numerically degenerate doubly stochastic matrix");
    }
    Scalar w = rem[0][(*perm)[0]];
    for (std::size_t i = 1; i < n; ++i) w = min(w, rem[i][(*perm)[i]]);
    for (std::size_t i = 0; i < n; ++i) {
      rem[i][(*perm)[i]] -= w;
      if (!exact && std::abs(rem[i][(*perm)[i]].to_double()) <= thr) rem[i][(*perm)[i]] = Scalar::from_double(0);
    }
    terms.push_back({w, *perm});
  }
  // Caratheodory: permutation matrices span an affine space of dimension (n-1)^2.
  const std::size_t cap = (n - 1) * (n - 1) + 1;
  while (terms.size() > cap) {
    auto c = affine_dependence(terms, n);
    if (!c) break;
    std::size_t best = terms.size();
    Scalar t;
    for (std::size_t k = 0; k < terms.size(); ++k) {
      if (sign((*c)[k], 0.0) <= 0) continue;
      Scalar r = terms[k].weight / (*c)[k];
      if (best == terms.size() || r < t) {
        best = k;
        t = r;
      }
    }
    std::vector<BirkhoffTerm> next;
    for (std::size_t k = 0; k < terms.size(); ++k) {
      if (k == best) continue;
      Scalar w = terms[k].weight - t * (*c)[k];
      if (sign(w, thr) > 0) next.push_back({w, terms[k].perm});
    }
    terms = std::move(next);
  }
  std::sort(terms.begin(), terms.end(), [](const BirkhoffTerm& a, const BirkhoffTerm& b) { return a.perm < b.perm; });
  return terms;
}

Matrix birkhoff_sum(const std::vector<BirkhoffTerm>& terms, std::size_t d) {
  Matrix m(d, std::vector<Scalar>(d, Scalar(0)));
  for (const auto& t : terms)
    for (std::size_t i = 0; i < d; ++i) m[i][t.perm[i]] += t.weight;
  return m;
}

CMatrix dilation_unitary(const std::vector<double>& alpha, const std::vector<CMatrix>& ops) {
  const std::size_t m = ops.size();
  if (m == 0 || alpha.size() != m) fail(ErrorCode::BadWeights, "need one weight per operator");
  double s = 0;
  for (double a : alpha) {
    if (a < -1e-12) fail(ErrorCode::BadWeights, "negative weight");
    s += a;
  }
  if (std::abs(s - 1) > 1e-12) fail(ErrorCode::BadWeights, "weights do not sum to 1");
  const auto d = ops[0].rows();
  for (const auto& u : ops) {
    if (u.rows() != d || u.cols() != d) fail(ErrorCode::DimensionMismatch, "operators must share a square size");
    Eigen::JacobiSVD<CMatrix> svd(u);
    if (svd.singularValues()(0) > 1 + 1e-12) fail(ErrorCode::NormTooLarge, "operator norm exceeds 1");
  }
  const auto mm = static_cast<std::int64_t>(m);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  CMatrix u = CMatrix::Zero(mm * d, mm * d);
  for (std::int64_t j = 0; j < mm; ++j)
    for (std::int64_t k = 0; k < mm; ++k)
      u.block(j * d, k * d, d, d) = (scale * root_of_unity((j + 1) * (k + 1), mm)) * ops[static_cast<std::size_t>(k)];
  return u;
}

namespace {

Inflation assemble_inflation(std::vector<BirkhoffTerm> terms, std::vector<std::size_t> counts) {
  Inflation inf;
  std::vector<CMatrix> ops;
  for (std::size_t t = 0; t < terms.size(); ++t)
    for (std::size_t c = 0; c < counts[t]; ++c) ops.push_back(permutation_cmatrix(terms[t].perm));
  inf.m = ops.size();
  std::vector<double> alpha(inf.m, 1.0 / static_cast<double>(inf.m));
  if (ops.empty()) fail(ErrorCode::InternalInconsistency, "empty inflation");
  inf.u = make_unitary(dilation_unitary(alpha, ops));
  inf.terms = std::move(terms);
  inf.counts = std::move(counts);
  return inf;
}

}  // namespace

Inflation inflate_rational_ds(const Matrix& d) {
  if (backend_of(d) != Backend::Exact) fail(ErrorCode::NotRational, "exact inflation needs rational entries");
  auto terms = birkhoff_decompose(d);
  std::vector<Scalar> w;
  for (const auto& t : terms) w.push_back(t.weight);
  const mpz_class m = lcm_of_denominators(w);
  std::vector<std::size_t> counts;
  for (const auto& t : terms) {
    mpq_class c = t.weight.rational() * m;
    counts.push_back(c.get_num().get_ui());
  }
  return assemble_inflation(std::move(terms), std::move(counts));
}

Inflation inflate_approx_ds(const Matrix& d, double eps) {
  if (!(eps > 0)) fail(ErrorCode::InvalidInput, "eps must be positive");
  if (backend_of(d) == Backend::Exact) return inflate_rational_ds(d);
  const std::size_t n = d.size();
  auto terms = birkhoff_decompose(d);
  // Reconstruction slack of the float decomposition, as an l_inf operator norm.
  Matrix recon = birkhoff_sum(terms, n);
  double slack = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0;
    for (std::size_t j = 0; j < n; ++j) row += std::abs((d[i][j] - recon[i][j]).to_double());
    slack = std::max(slack, row);
  }
  std::vector<double> w;
  for (const auto& t : terms) w.push_back(t.weight.to_double());
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) x /= total;
  for (std::size_t m = 1; m <= 1000000; ++m) {
    // Largest-remainder apportionment of m copies.
    std::vector<std::size_t> c(w.size());
    std::vector<std::pair<double, std::size_t>> frac;
    std::size_t used = 0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double x = w[k] * static_cast<double>(m);
      c[k] = static_cast<std::size_t>(std::floor(x));
      used += c[k];
      frac.push_back({x - std::floor(x), k});
    }
    std::stable_sort(frac.begin(), frac.end(), [](auto& a, auto& b) { return a.first > b.first; });
    for (std::size_t r = 0; used < m; ++r, ++used) ++c[frac[r].second];
    double dev = 0;
    for (std::size_t k = 0; k < w.size(); ++k)
      dev += std::abs(w[k] - static_cast<double>(c[k]) / static_cast<double>(m));
    if (dev + slack <= eps) {
      std::vector<BirkhoffTerm> kept;
      std::vector<std::size_t> counts;
      for (std::size_t k = 0; k < w.size(); ++k)
        if (c[k] > 0) {
          kept.push_back(terms[k]);
          counts.push_back(c[k]);
        }
      auto inf = assemble_inflation(std::move(kept), std::move(counts));
      inf.bound = dev + slack;
      return inf;
    }
  }
  fail(ErrorCode::InternalInconsistency, "apportionment did not reach the requested accuracy");
}

double inflation_residual(const Matrix& d, const Inflation& inf, const CVector& beta) {
  const auto n = static_cast<Eigen::Index>(d.size());
  if (beta.size() != n) fail(ErrorCode::DimensionMismatch, "beta length differs from D");
  const auto m = static_cast<Eigen::Index>(inf.m);
  CVector big(m * n);
  for (Eigen::Index b = 0; b < m; ++b) big.segment(b * n, n) = beta;
  CMatrix conj = inf.u.u * big.asDiagonal() * inf.u.u.adjoint();
  CVector target = to_complex(d) * beta;
  double r = 0;
  for (Eigen::Index i = 0; i < m * n; ++i) r = std::max(r, std::abs(conj(i, i) - target(i % n)));
  return r;
}

std::optional<OverlapCertificate> unistochastic_obstruction(const Matrix& d, double tol) {
  const std::size_t n = d.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = i + 1; k < n; ++k) {
      std::size_t shared = 0, col = 0;
      for (std::size_t j = 0; j < d[i].size(); ++j)
        if (sign(d[i][j], tol) > 0 && sign(d[k][j], tol) > 0) {
          ++shared;
          col = j;
        }
      if (shared == 1) return OverlapCertificate{i, k, col, d[i][col] * d[k][col]};
    }
  return std::nullopt;
}

PartialIsometryReport partial_isometry_check(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols()) fail(ErrorCode::NotSquare, "operands must be square");
  if (a.rows() != b.rows()) fail(ErrorCode::DimensionMismatch, "operands differ in size");
  PartialIsometryReport r;
  const CMatrix id = CMatrix::Identity(a.rows(), a.cols());
  r.hypotheses = max_abs(a.adjoint() * a + b.adjoint() * b - id) <= 1e-9 && max_abs(a * b.adjoint()) <= 1e-9;
  if (!r.hypotheses) return r;
  r.a_defect = max_abs(a * a.adjoint() * a - a);
  r.b_defect = max_abs(b * b.adjoint() * b - b);
  if (r.a_defect > 1e-7 || r.b_defect > 1e-7)
    fail(ErrorCode::InternalInconsistency, "hypotheses hold but an operand is not a partial isometry");
  return r;
}

IrrationalObstruction irrational_inflation_obstruction(double a, std::size_t m) {
  if (!(a > 0 && a < 1)) fail(ErrorCode::OutOfRange, "a must lie in (0,1)");
  if (m == 0) fail(ErrorCode::OutOfRange, "m must be positive");
  IrrationalObstruction r;
  r.a = a;
  r.m = m;
  const double x = a * static_cast<double>(m);
  r.distance = std::abs(x - std::round(x));
  r.obstructed = r.distance > 1e-12;
  return r;
}

}  // namespace majlab
