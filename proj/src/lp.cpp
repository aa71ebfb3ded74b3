#include "majlab/lp.hpp"

#include <cmath>

#include "majlab/error.hpp"

namespace majlab {

namespace {

inline int raw_sgn(double v) { return (v > 0) - (v < 0); }
inline int raw_sgn(const mpq_class& v) { return sgn(v); }

struct ExactOps {
  using T = mpq_class;
  double tol = 0;
  int sgn(const T& v) const { return ::sgn(v); }
  static T from(const Scalar& s) { return s.rational(); }
  static Scalar to(const T& v) { return Scalar(v); }
};

struct FloatOps {
  using T = double;
  double tol = kDefaultTol;
  int sgn(double v) const { return v > tol ? 1 : (v < -tol ? -1 : 0); }
  static double from(const Scalar& s) { return s.to_double(); }
  static Scalar to(double v) { return Scalar::from_double(v); }
};

template <class Ops>
class Tableau {
 public:
  using T = typename Ops::T;

  Tableau(const LpProblem& lp, Ops ops) : ops_(ops) {
    m_ = lp.A.size();
    n_ = lp.vars();
    width_ = n_ + m_ + 1;
    t_.assign(m_ * width_, T(0));
    flip_.assign(m_, false);
    for (std::size_t i = 0; i < m_; ++i) {
      if (lp.A[i].size() != n_) fail(ErrorCode::DimensionMismatch, "ragged constraint matrix");
      T rhs = Ops::from(lp.b[i]);
      flip_[i] = rhs < 0;
      for (std::size_t j = 0; j < n_; ++j) {
        T v = Ops::from(lp.A[i][j]);
        at(i, j) = flip_[i] ? T(-v) : v;
      }
      at(i, n_ + i) = 1;
      at(i, width_ - 1) = flip_[i] ? T(-rhs) : rhs;
    }
    basis_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) basis_[i] = n_ + i;
  }

  LpResult run(const LpProblem& lp) {
    LpResult res;
    // Phase 1: minimize the sum of artificials.
    std::vector<T> cost(n_ + m_, T(0));
    for (std::size_t i = 0; i < m_; ++i) cost[n_ + i] = 1;
    price(cost);
    if (!iterate(/*allow_artificial=*/true, res.pivots)) {
      fail(ErrorCode::InternalInconsistency, "phase 1 reported unbounded");
    }
    T phase1 = -obj_[width_ - 1];
    if (ops_.sgn(phase1) > 0) {
      res.status = LpStatus::Infeasible;
      // y'_i = 1 - reduced cost of artificial i;  y = -flip * y'
      res.farkas.resize(m_);
      for (std::size_t i = 0; i < m_; ++i) {
        T yp = T(1) - obj_[n_ + i];
        T y = flip_[i] ? yp : T(-yp);
        res.farkas[i] = Ops::to(y);
      }
      return res;
    }
    drive_out_artificials(res.pivots);
    // Phase 2.
    std::vector<T> c2(n_ + m_, T(0));
    for (std::size_t j = 0; j < n_ && j < lp.c.size(); ++j) c2[j] = Ops::from(lp.c[j]);
    price(c2);
    if (!iterate(/*allow_artificial=*/false, res.pivots)) {
      res.status = LpStatus::Unbounded;
      return res;
    }
    res.status = LpStatus::Optimal;
    res.x.assign(n_, Scalar(0));
    std::vector<T> x(n_, T(0));
    for (std::size_t i = 0; i < m_; ++i)
      if (basis_[i] < n_) x[basis_[i]] = at(i, width_ - 1);
    T val = 0;
    for (std::size_t j = 0; j < n_; ++j) {
      res.x[j] = Ops::to(x[j]);
      val += c2[j] * x[j];
    }
    res.objective = Ops::to(val);
    return res;
  }

 private:
  T& at(std::size_t i, std::size_t j) { return t_[i * width_ + j]; }

  void price(const std::vector<T>& cost) {
    obj_.assign(width_, T(0));
    for (std::size_t j = 0; j < n_ + m_; ++j) obj_[j] = cost[j];
    for (std::size_t i = 0; i < m_; ++i) {
      const T& cb = cost[basis_[i]];
      if (raw_sgn(cb) == 0) continue;
      for (std::size_t j = 0; j < width_; ++j) obj_[j] -= cb * at(i, j);
    }
  }

  void pivot(std::size_t r, std::size_t c) {
    T inv = T(1) / at(r, c);
    std::vector<std::size_t> nz;
    for (std::size_t j = 0; j < width_; ++j) {
      if (raw_sgn(at(r, j)) != 0) {
        at(r, j) *= inv;
        nz.push_back(j);
      }
    }
    at(r, c) = 1;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      T f = at(i, c);
      if (raw_sgn(f) == 0) continue;
      for (std::size_t j : nz) at(i, j) -= f * at(r, j);
      at(i, c) = 0;
    }
    T f = obj_[c];
    if (raw_sgn(f) != 0) {
      for (std::size_t j : nz) obj_[j] -= f * at(r, j);
      obj_[c] = 0;
    }
    basis_[r] = c;
  }

  // Returns false on unboundedness.
  bool iterate(bool allow_artificial, std::size_t& pivots) {
    const std::size_t limit = allow_artificial ? n_ + m_ : n_;
    // Dantzig pricing; Bland's rule after a run of degenerate pivots.
    bool bland = false;
    std::size_t stall = 0;
    for (;;) {
      std::size_t enter = limit;
      for (std::size_t j = 0; j < limit; ++j) {
        if (ops_.sgn(obj_[j]) >= 0) continue;
        if (bland) {
          enter = j;
          break;
        }
        if (enter == limit || obj_[j] < obj_[enter]) enter = j;
      }
      if (enter == limit) return true;
      std::size_t leave = m_;
      T best = 0;
      for (std::size_t i = 0; i < m_; ++i) {
        if (ops_.sgn(at(i, enter)) <= 0) continue;
        T ratio = at(i, width_ - 1) / at(i, enter);
        if (leave == m_ || ratio < best || (ratio == best && basis_[i] < basis_[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave == m_) return false;
      if (ops_.sgn(best) == 0) {
        if (++stall > 50) bland = true;
      } else {
        stall = 0;
      }
      pivot(leave, enter);
      ++pivots;
    }
  }

  void drive_out_artificials(std::size_t& pivots) {
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < n_) continue;
      for (std::size_t j = 0; j < n_; ++j) {
        if (ops_.sgn(at(i, j)) != 0) {
          pivot(i, j);
          ++pivots;
          break;
        }
      }
      // Otherwise the row is redundant; its artificial stays basic at zero.
    }
  }

  Ops ops_;
  std::size_t m_ = 0, n_ = 0, width_ = 0;
  std::vector<T> t_;
  std::vector<T> obj_;
  std::vector<std::size_t> basis_;
  std::vector<bool> flip_;
};

bool all_exact(const LpProblem& lp) {
  for (const auto& row : lp.A)
    if (backend_of(row) == Backend::Float) return false;
  return backend_of(lp.b) == Backend::Exact && backend_of(lp.c) == Backend::Exact;
}

}  // namespace

LpResult solve_lp(const LpProblem& lp, double tol) {
  if (lp.b.size() != lp.A.size()) fail(ErrorCode::DimensionMismatch, "rhs length differs from row count");
  if (!lp.c.empty() && !lp.A.empty() && lp.c.size() != lp.vars())
    fail(ErrorCode::DimensionMismatch, "cost length differs from variable count");
  if (all_exact(lp)) {
    Tableau<ExactOps> t(lp, ExactOps{});
    auto r = t.run(lp);
    r.backend = Backend::Exact;
    return r;
  }
  FloatOps ops;
  ops.tol = tol;
  Tableau<FloatOps> t(lp, ops);
  auto r = t.run(lp);
  r.backend = Backend::Float;
  return r;
}

bool verify_farkas(const LpProblem& lp, const std::vector<Scalar>& y, double tol) {
  if (y.size() != lp.A.size()) return false;
  const std::size_t n = lp.vars();
  for (std::size_t j = 0; j < n; ++j) {
    Scalar s(0);
    for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * lp.A[i][j];
    if (sign(s, tol) < 0) return false;
  }
  Scalar yb(0);
  for (std::size_t i = 0; i < y.size(); ++i) yb += y[i] * lp.b[i];
  return sign(yb, tol) < 0;
}

bool verify_primal(const LpProblem& lp, const std::vector<Scalar>& x, double tol) {
  if (x.size() != lp.vars()) return false;
  for (const auto& v : x)
    if (sign(v, tol) < 0) return false;
  for (std::size_t i = 0; i < lp.A.size(); ++i) {
    Scalar s(0);
    for (std::size_t j = 0; j < x.size(); ++j) s += lp.A[i][j] * x[j];
    if (!approx_equal(s, lp.b[i], tol)) return false;
  }
  return true;
}

}  // namespace majlab
