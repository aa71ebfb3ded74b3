#pragma once

// Two-phase dense simplex for  min c.x  s.t.  A x = b, x >= 0.
// Exact when every input is rational, otherwise plain doubles with a
// feasibility tolerance. Dantzig pricing with a Bland fallback against cycling.

#include <vector>

#include "majlab/scalar.hpp"

namespace majlab {

struct LpProblem {
  std::vector<std::vector<Scalar>> A;  // rows x vars
  std::vector<Scalar> b;
  std::vector<Scalar> c;  // empty = pure feasibility
  std::size_t vars() const { return A.empty() ? c.size() : A.front().size(); }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  std::vector<Scalar> x;
  Scalar objective;
  // Infeasible only: y with y^T A >= 0 and y^T b < 0.
  std::vector<Scalar> farkas;
  Backend backend = Backend::Exact;
  std::size_t pivots = 0;
};

LpResult solve_lp(const LpProblem& lp, double tol = kDefaultTol);

// Checks y^T A >= 0 and y^T b < 0 (exactly for rational data).
bool verify_farkas(const LpProblem& lp, const std::vector<Scalar>& y, double tol = kDefaultTol);
// Checks x >= 0 and A x = b.
bool verify_primal(const LpProblem& lp, const std::vector<Scalar>& x, double tol = kDefaultTol);

}  // namespace majlab
