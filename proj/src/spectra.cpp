#include "majlab/spectra.hpp"

#include <algorithm>
#include <cmath>

#include "majlab/error.hpp"
#include "majlab/lp.hpp"

namespace majlab {

Backend Measure::backend() const { return combine(backend_of(atoms), backend_of(weights)); }

Measure make_measure(std::vector<Point> atoms, std::vector<Scalar> weights, double tol) {
  if (atoms.empty()) fail(ErrorCode::InvalidInput, "measure needs at least one atom");
  if (atoms.size() != weights.size())
    fail(ErrorCode::DimensionMismatch, "atom and weight counts differ");
  Measure m;
  m.n = atoms.front().size();
  if (m.n == 0) fail(ErrorCode::InvalidInput, "ambient dimension must be positive");
  Scalar total(0);
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (atoms[i].size() != m.n) fail(ErrorCode::DimensionMismatch, "atoms have different dimensions");
    if (sign(weights[i], tol) <= 0) fail(ErrorCode::InvalidInput, "weights must be strictly positive");
    total += weights[i];
    std::size_t slot = m.atoms.size();
    for (std::size_t j = 0; j < m.atoms.size(); ++j) {
      if (approx_equal(m.atoms[j], atoms[i], tol)) {
        slot = j;
        break;
      }
    }
    if (slot == m.atoms.size()) {
      m.atoms.push_back(std::move(atoms[i]));
      m.weights.push_back(weights[i]);
    } else {
      m.weights[slot] += weights[i];
    }
  }
  if (!approx_equal(total, Scalar(1), tol))
    fail(ErrorCode::InvalidInput, "weights sum to " + total.str() + ", not 1");
  return m;
}

Measure to_float(const Measure& m) {
  Measure r = m;
  for (auto& a : r.atoms) a = to_float(a);
  for (auto& w : r.weights) w = w.to_float();
  return r;
}

Point barycenter(const Measure& m) {
  Point b = zero_point(m.n);
  for (std::size_t i = 0; i < m.size(); ++i) b = b + m.weights[i] * m.atoms[i];
  return b;
}

HullCertificate hull_membership(const Point& p, const std::vector<Point>& atoms, double tol) {
  if (atoms.empty()) fail(ErrorCode::InvalidInput, "empty atom list");
  const std::size_t n = p.size(), k = atoms.size();
  LpProblem lp;
  lp.A.assign(n + 1, std::vector<Scalar>(k));
  lp.b.assign(n + 1, Scalar(0));
  for (std::size_t i = 0; i < k; ++i) {
    if (atoms[i].size() != n) fail(ErrorCode::DimensionMismatch, "point and atoms differ in dimension");
    lp.A[0][i] = Scalar(1);
    for (std::size_t d = 0; d < n; ++d) lp.A[d + 1][i] = atoms[i][d];
  }
  lp.b[0] = Scalar(1);
  for (std::size_t d = 0; d < n; ++d) lp.b[d + 1] = p[d];
  auto r = solve_lp(lp, tol);
  HullCertificate c;
  c.backend = r.backend;
  if (r.status == LpStatus::Optimal) {
    c.member = true;
    c.coefficients = r.x;
    return c;
  }
  c.member = false;
  c.bound = r.farkas[0];
  c.normal.resize(n);
  for (std::size_t d = 0; d < n; ++d) c.normal[d] = -r.farkas[d + 1];
  return c;
}

bool verify_hull_certificate(const Point& p, const std::vector<Point>& atoms, const HullCertificate& c,
                             double tol) {
  if (c.member) {
    if (c.coefficients.size() != atoms.size()) return false;
    Scalar s(0);
    Point acc = zero_point(p.size());
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      if (sign(c.coefficients[i], tol) < 0) return false;
      s += c.coefficients[i];
      acc = acc + c.coefficients[i] * atoms[i];
    }
    return approx_equal(s, Scalar(1), tol) && approx_equal(acc, p, tol);
  }
  auto dot = [&](const Point& x) {
    Scalar s(0);
    for (std::size_t d = 0; d < x.size(); ++d) s += c.normal[d] * x[d];
    return s;
  };
  for (const auto& a : atoms)
    if (sign(dot(a) - c.bound, tol) > 0) return false;
  return sign(dot(p) - c.bound, tol) > 0;
}

std::size_t matrix_rank(std::vector<std::vector<Scalar>> rows, double tol) {
  if (rows.empty()) return 0;
  const std::size_t cols = rows.front().size();
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < rows.size(); ++c) {
    // Partial pivoting by magnitude keeps the float path stable.
    std::size_t piv = rows.size();
    double best = 0;
    for (std::size_t r = rank; r < rows.size(); ++r) {
      if (sign(rows[r][c], tol) == 0) continue;
      double mag = std::abs(rows[r][c].to_double());
      if (piv == rows.size() || mag > best) {
        piv = r;
        best = mag;
      }
    }
    if (piv == rows.size()) continue;
    std::swap(rows[rank], rows[piv]);
    for (std::size_t r = rank + 1; r < rows.size(); ++r) {
      if (sign(rows[r][c], 0.0) == 0) continue;
      Scalar f = rows[r][c] / rows[rank][c];
      for (std::size_t j = c; j < cols; ++j) rows[r][j] -= f * rows[rank][j];
    }
    ++rank;
  }
  return rank;
}

std::size_t affine_rank(const std::vector<Point>& atoms, double tol) {
  if (atoms.size() <= 1) return 0;
  std::vector<std::vector<Scalar>> rows;
  for (std::size_t i = 1; i < atoms.size(); ++i) rows.push_back(atoms[i] - atoms[0]);
  return matrix_rank(std::move(rows), tol);
}

bool simplex_test(const std::vector<Point>& atoms, double tol) {
  if (atoms.empty()) return false;
  return affine_rank(atoms, tol) + 1 == atoms.size();
}

}  // namespace majlab
