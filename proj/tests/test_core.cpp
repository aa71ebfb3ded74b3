#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "majlab/error.hpp"
#include "majlab/lp.hpp"
#include "majlab/scalar.hpp"

using namespace majlab;

TEST_CASE("scalar parsing is exact") {
  CHECK(Scalar::parse("1/3") == Scalar(mpq_class(1, 3)));
  CHECK(Scalar::parse("0.1") == Scalar(mpq_class(1, 10)));
  CHECK(Scalar::parse("-2.5e-1") == Scalar(mpq_class(-1, 4)));
  CHECK(Scalar::parse("12") == Scalar(12));
  CHECK(Scalar::parse(" 6/4 ") == Scalar(mpq_class(3, 2)));
  CHECK_THROWS_AS(Scalar::parse("1/0"), Error);
  CHECK_THROWS_AS(Scalar::parse("abc"), Error);
}

TEST_CASE("mixed arithmetic promotes to float") {
  Scalar a = Scalar::parse("1/2");
  Scalar b = Scalar::from_double(0.25);
  CHECK((a + a).is_exact());
  CHECK_FALSE((a + b).is_exact());
  CHECK((a + b).to_double() == doctest::Approx(0.75));
  CHECK(is_zero(Scalar::from_double(1e-12)));
  CHECK_FALSE(is_zero(Scalar::parse("1/1000000000000")));
}

TEST_CASE("simplest rational between two bounds") {
  CHECK(simplest_between(mpq_class(1, 3), mpq_class(1, 2)) == mpq_class(2, 5));
  CHECK(simplest_between(mpq_class(0), mpq_class(1)) == mpq_class(1, 2));
  CHECK(simplest_between(mpq_class(3, 2), mpq_class(7, 2)) == mpq_class(2));
  CHECK(simplest_between(mpq_class(-1, 2), mpq_class(1, 3)) == mpq_class(0));
  CHECK(simplest_between(mpq_class(-3, 4), mpq_class(-2, 3)) == mpq_class(-5, 7));
  CHECK(rationalize(0.333333333333, 1e-9) == mpq_class(1, 3));
}

TEST_CASE("lp optimum and infeasibility certificate") {
  // min -x - y  s.t. x + y + s = 1
  LpProblem lp;
  lp.A = {{Scalar(1), Scalar(1), Scalar(1)}};
  lp.b = {Scalar(1)};
  lp.c = {Scalar(-1), Scalar(-1), Scalar(0)};
  auto r = solve_lp(lp);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.objective == Scalar(-1));
  CHECK(verify_primal(lp, r.x));

  // x + y = 1, x + y = 2 is infeasible
  LpProblem bad;
  bad.A = {{Scalar(1), Scalar(1)}, {Scalar(1), Scalar(1)}};
  bad.b = {Scalar(1), Scalar(2)};
  auto rb = solve_lp(bad);
  REQUIRE(rb.status == LpStatus::Infeasible);
  CHECK(verify_farkas(bad, rb.farkas));

  // negative right-hand side: x - y = -3, x + y = 1 has x=-1: infeasible
  LpProblem neg;
  neg.A = {{Scalar(1), Scalar(-1)}, {Scalar(1), Scalar(1)}};
  neg.b = {Scalar(-3), Scalar(1)};
  auto rn = solve_lp(neg);
  REQUIRE(rn.status == LpStatus::Infeasible);
  CHECK(verify_farkas(neg, rn.farkas));
}

TEST_CASE("lp redundant rows and float backend") {
  LpProblem lp;
  lp.A = {{Scalar(1), Scalar(1)}, {Scalar(2), Scalar(2)}};
  lp.b = {Scalar(1), Scalar(2)};
  lp.c = {Scalar(1), Scalar(0)};
  auto r = solve_lp(lp);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.x[1] == Scalar(1));
  lp.b[0] = Scalar::from_double(1.0);
  auto rf = solve_lp(lp);
  CHECK(rf.backend == Backend::Float);
  CHECK(rf.status == LpStatus::Optimal);
  CHECK(rf.x[1].to_double() == doctest::Approx(1.0));
}

TEST_CASE("lp unbounded") {
  LpProblem lp;
  lp.A = {{Scalar(1), Scalar(-1)}};
  lp.b = {Scalar(0)};
  lp.c = {Scalar(-1), Scalar(0)};
  CHECK(solve_lp(lp).status == LpStatus::Unbounded);
}
