#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "majlab/error.hpp"
#include "majlab/matrixlab.hpp"
#include "oracles.hpp"

using namespace majlab;

namespace {

Scalar q(long a, long b = 1) { return Scalar(mpq_class(a, b)); }

Matrix arveson_d() {
  return {{q(1, 2), q(1, 2), q(0)}, {q(0), q(1, 2), q(1, 2)}, {q(1, 2), q(0), q(1, 2)}};
}

CVector random_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CVector v(n);
  for (std::size_t i = 0; i < n; ++i) v(i) = Complex(g(rng), g(rng));
  return v;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix r(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) r.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return r;
}

}  // namespace

TEST_CASE("diagonal expectation") {
  CMatrix m(2, 2);
  m << 1, 2, 3, 4;
  CMatrix e = expect_diagonal(m);
  CHECK(e(0, 0) == Complex(1));
  CHECK(e(1, 1) == Complex(4));
  CHECK(e(0, 1) == Complex(0));
  CHECK(max_abs(expect_diagonal(e) - e) == 0);
  std::mt19937_64 rng(1);
  for (int it = 0; it < 10; ++it) {
    CMatrix u = random_unitary(5, rng), a = random_hermitian(5, rng);
    CHECK(std::abs(expect_diagonal(u * a * u.adjoint()).trace() - a.trace()) < 1e-10);
  }
  CHECK_THROWS_AS(expect_diagonal(CMatrix::Zero(2, 3)), Error);
}

TEST_CASE("block expectation") {
  CMatrix a(2, 2);
  a << 1, 1, 1, 1;
  CMatrix b = CMatrix::Identity(2, 2);
  CMatrix e = expect_block(kron(a, b), 2, 2);
  CHECK(max_abs(e - kron(CMatrix::Identity(2, 2), b)) == 0);
  CHECK(max_abs(expect_block(e, 2, 2) - e) == 0);
  std::mt19937_64 rng(2);
  for (int it = 0; it < 10; ++it) {
    CMatrix c = random_hermitian(6, rng);
    CHECK(max_abs(expect_diagonal(expect_block(c, 3, 2)) - expect_diagonal(c)) == 0);
    CHECK(std::abs(expect_block(c, 2, 3).trace() - c.trace()) < 1e-12);
    // positivity on a 2x2 compression
    CMatrix p = c * c.adjoint();
    CMatrix eb = expect_block(p, 3, 2);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(eb.block(0, 0, 2, 2));
    CHECK(es.eigenvalues().minCoeff() >= -1e-12);
  }
  CHECK(max_abs(expect_block(CMatrix::Identity(6, 6), 3, 2) - CMatrix::Identity(6, 6)) == 0);
  CHECK_THROWS_AS(expect_block(CMatrix::Identity(6, 6), 4, 2), Error);
}

TEST_CASE("fourier unitaries") {
  CHECK(fourier_unitary(1).u(0, 0) == Complex(1));
  auto f2 = fourier_unitary(2).u;
  const double h = 1 / std::sqrt(2.0);
  CHECK(std::abs(f2(1, 1) - Complex(-h)) < 1e-15);
  CHECK(root_of_unity(1, 4) == Complex(0, 1));
  CHECK(root_of_unity(6, 8) == Complex(0, -1));
  CHECK(root_of_unity(-1, 2) == Complex(-1, 0));
  CMatrix d = CMatrix::Zero(3, 3);
  d(0, 0) = 1;
  auto f3 = fourier_unitary(3).u;
  CMatrix c = f3 * d * f3.adjoint();
  for (int i = 0; i < 3; ++i) CHECK(std::abs(c(i, i) - Complex(1.0 / 3)) < 1e-15);
  std::mt19937_64 rng(3);
  for (std::size_t n : {4, 7, 64, 255, 512}) {
    auto f = fourier_unitary(n);
    CHECK(f.defect <= 1e-12);
    CVector v = random_vector(n, rng);
    CMatrix e = f.u * v.asDiagonal() * f.u.adjoint();
    const Complex mean = v.mean();
    double dev = 0;
    for (std::size_t i = 0; i < n; ++i) dev = std::max(dev, std::abs(e(i, i) - mean));
    CHECK(dev <= 1e-10);
  }
}

TEST_CASE("constant diagonal unitary") {
  CMatrix s = CMatrix::Zero(2, 2);
  s(0, 0) = 1;
  auto w = constant_diagonal_unitary({s});
  CMatrix c = w.u * s * w.u.adjoint();
  CHECK(std::abs(c(0, 0) - 0.5) < 1e-12);
  CHECK(std::abs(c(1, 1) - 0.5) < 1e-12);

  CMatrix a = CMatrix::Zero(3, 3), b = CMatrix::Zero(3, 3);
  a(0, 0) = 1;
  b(1, 1) = 1;
  std::mt19937_64 rng(4);
  CMatrix v = random_unitary(3, rng);
  std::vector<CMatrix> tuple{v * a * v.adjoint(), v * b * v.adjoint()};
  auto w2 = constant_diagonal_unitary(tuple);
  CHECK(w2.defect < 1e-12);
  for (const auto& t : tuple) {
    CMatrix e = w2.u * t * w2.u.adjoint();
    for (int i = 0; i < 3; ++i) CHECK(std::abs(e(i, i) - 1.0 / 3) < 1e-9);
  }
  auto w3 = constant_diagonal_unitary(tuple, v);
  CMatrix e3 = w3.u * tuple[0] * w3.u.adjoint();
  CHECK(std::abs(e3(2, 2) - 1.0 / 3) < 1e-9);

  CMatrix scalar = 2.0 * CMatrix::Identity(3, 3);
  auto w4 = constant_diagonal_unitary({scalar});
  CHECK(max_abs(expect_diagonal(w4.u * scalar * w4.u.adjoint()) - scalar) < 1e-12);

  CMatrix x(2, 2), z(2, 2);
  x << 0, 1, 1, 0;
  z << 1, 0, 0, -1;
  CHECK_THROWS_AS(constant_diagonal_unitary({x, z}), Error);
}

TEST_CASE("birkhoff decomposition") {
  auto terms = birkhoff_decompose(arveson_d());
  REQUIRE(terms.size() == 2);
  CHECK(terms[0].weight == q(1, 2));
  CHECK(terms[0].perm == Permutation{0, 1, 2});
  CHECK(terms[1].weight == q(1, 2));
  CHECK(terms[1].perm == Permutation{1, 2, 0});

  auto p = birkhoff_decompose(permutation_matrix({2, 0, 1}));
  REQUIRE(p.size() == 1);
  CHECK(p[0].weight == q(1));

  Matrix bad{{q(1), q(1)}, {q(0), q(0)}};
  CHECK_THROWS_AS(birkhoff_decompose(bad), Error);

  std::mt19937_64 rng(5);
  for (int it = 0; it < 100; ++it) {
    const std::size_t d = 2 + it % 4;
    auto m = oracle::rand_ds(rng, d, 3 + it % 9);
    auto t = birkhoff_decompose(m);
    CHECK(t.size() <= (d - 1) * (d - 1) + 1);
    CHECK(birkhoff_sum(t, d) == m);
  }
}

TEST_CASE("float birkhoff decomposition") {
  const double a = 1 / std::sqrt(2.0);
  Matrix d{{Scalar::from_double(a), Scalar::from_double(1 - a)}, {Scalar::from_double(1 - a), Scalar::from_double(a)}};
  auto t = birkhoff_decompose(d);
  REQUIRE(t.size() == 2);
  CHECK(t[0].weight.to_double() == doctest::Approx(a));
}

TEST_CASE("dilation unitary") {
  std::mt19937_64 rng(6);
  auto id = dilation_unitary({1.0}, {CMatrix::Identity(2, 2)});
  CHECK(max_abs(id - CMatrix::Identity(2, 2)) == 0);

  CMatrix swap(2, 2);
  swap << 0, 1, 1, 0;
  CMatrix u = dilation_unitary({0.5, 0.5}, {CMatrix::Identity(2, 2), swap});
  CMatrix b = CMatrix::Zero(2, 2);
  b(0, 0) = 1;
  CMatrix alpha_b = kron(CMatrix(Eigen::Vector2cd(0.5, 0.5).asDiagonal()), b);
  CMatrix got = expect_block(u * alpha_b * u.adjoint(), 2, 2);
  CMatrix want = kron(CMatrix::Identity(2, 2), CMatrix(Eigen::Vector2cd(0.25, 0.25).asDiagonal()));
  CHECK(max_abs(got - want) < 1e-15);

  for (int it = 0; it < 5; ++it) {
    std::vector<CMatrix> ops;
    for (int k = 0; k < 3; ++k) ops.push_back(random_unitary(3, rng));
    std::vector<double> al{0.2, 0.3, 0.5};
    CMatrix dil = dilation_unitary(al, ops);
    CHECK(unitarity_defect(dil) <= 1e-10);
    CMatrix bb = random_hermitian(3, rng);
    CMatrix lhs = expect_block(dil * kron(CMatrix(Eigen::Vector3cd(0.2, 0.3, 0.5).asDiagonal()), bb) * dil.adjoint(), 3, 3);
    CMatrix mix = CMatrix::Zero(3, 3);
    for (int k = 0; k < 3; ++k) mix += al[k] * ops[k] * bb * ops[k].adjoint();
    CHECK(max_abs(lhs - kron(CMatrix::Identity(3, 3), mix / 3.0)) <= 1e-10);
  }
  // U*U = sum_k E_kk (x) U_k* U_k for contractions.
  std::vector<CMatrix> contractions{0.5 * random_unitary(2, rng), 0.8 * random_unitary(2, rng)};
  CMatrix dc = dilation_unitary({0.5, 0.5}, contractions);
  CMatrix gram = dc.adjoint() * dc;
  CMatrix want2 = CMatrix::Zero(4, 4);
  for (int k = 0; k < 2; ++k) want2.block(2 * k, 2 * k, 2, 2) = contractions[k].adjoint() * contractions[k];
  CHECK(max_abs(gram - want2) <= 1e-10);
  CHECK_THROWS_AS(dilation_unitary({0.5, 0.6}, {swap, swap}), Error);
  CHECK_THROWS_AS(dilation_unitary({1.0}, {2.0 * swap}), Error);
}

TEST_CASE("exact inflation") {
  auto d = arveson_d();
  auto inf = inflate_rational_ds(d);
  CHECK(inf.m == 2);
  CHECK(inf.u.u.rows() == 6);
  CHECK(inf.u.defect <= 1e-12);
  CVector beta(3);
  beta << Complex(1), Complex(0), Complex(0, 1);
  CMatrix big = CMatrix::Zero(6, 6);
  for (int i = 0; i < 6; ++i) big(i, i) = beta(i % 3);
  CMatrix e = expect_diagonal(inf.u.u * big * inf.u.u.adjoint());
  const Complex want[3] = {{0.5, 0}, {0, 0.5}, {0.5, 0.5}};
  for (int i = 0; i < 6; ++i) CHECK(std::abs(e(i, i) - want[i % 3]) < 1e-12);

  Matrix id = permutation_matrix({0, 1, 2});
  auto one = inflate_rational_ds(id);
  CHECK(one.m == 1);
  CHECK(max_abs(one.u.u - CMatrix::Identity(3, 3)) == 0);

  std::mt19937_64 rng(7);
  for (int it = 0; it < 5; ++it) {
    auto m = oracle::rand_ds(rng, 3, 3);
    auto r = inflate_rational_ds(m);
    for (int k = 0; k < 10; ++k) CHECK(inflation_residual(m, r, random_vector(3, rng)) <= 1e-9);
  }
  Matrix fl{{Scalar::from_double(0.5), Scalar::from_double(0.5)}, {Scalar::from_double(0.5), Scalar::from_double(0.5)}};
  CHECK_THROWS_AS(inflate_rational_ds(fl), Error);
}

TEST_CASE("approximate inflation") {
  CHECK(inflate_approx_ds(arveson_d(), 0.01).bound == 0);
  const double a = 1 / std::sqrt(2.0);
  auto fa = Scalar::from_double(a), fb = Scalar::from_double(1 - a), z = Scalar::from_double(0);
  Matrix d{{fa, fb, z}, {z, fa, fb}, {fb, z, fa}};
  auto inf = inflate_approx_ds(d, 0.01);
  CHECK(inf.m == 17);
  CHECK(inf.bound <= 0.01);
  CHECK(inf.u.defect <= 1e-10);
  std::mt19937_64 rng(8);
  for (int k = 0; k < 20; ++k) {
    CVector beta = random_vector(3, rng);
    CHECK(inflation_residual(d, inf, beta) <= inf.bound * beta.cwiseAbs().maxCoeff() + 1e-12);
  }
  for (int it = 0; it < 5; ++it) {
    auto m = oracle::rand_ds(rng, 3, 4);
    for (auto& row : m)
      for (auto& x : row) x = x.to_float();
    auto r = inflate_approx_ds(m, 0.5);
    CHECK(r.bound <= 0.5);
    CHECK(r.m <= 8);
    CVector beta = random_vector(3, rng);
    CHECK(inflation_residual(m, r, beta) <= r.bound * beta.cwiseAbs().maxCoeff() + 1e-12);
  }
}

TEST_CASE("single-overlap obstruction") {
  auto c = unistochastic_obstruction(arveson_d());
  REQUIRE(c);
  CHECK(c->row1 == 0);
  CHECK(c->row2 == 1);
  CHECK(c->column == 1);
  CHECK(c->product == q(1, 4));
  Matrix flat(3, std::vector<Scalar>(3, q(1, 3)));
  CHECK_FALSE(unistochastic_obstruction(flat));
  CHECK_FALSE(unistochastic_obstruction(permutation_matrix({1, 2, 0})));
  std::mt19937_64 rng(9);
  for (int it = 0; it < 50; ++it) {
    // Block unitaries scrambled by permutations have structured zeros.
    CMatrix v = CMatrix::Zero(5, 5);
    v.block(0, 0, 2, 2) = random_unitary(2, rng);
    v.block(2, 2, 3, 3) = random_unitary(3, rng);
    std::vector<std::size_t> p{0, 1, 2, 3, 4}, s{0, 1, 2, 3, 4};
    std::shuffle(p.begin(), p.end(), rng);
    std::shuffle(s.begin(), s.end(), rng);
    v = permutation_cmatrix(p) * v * permutation_cmatrix(s);
    Matrix d(5, std::vector<Scalar>(5));
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) d[i][j] = Scalar::from_double(std::norm(v(i, j)));
    CHECK_FALSE(unistochastic_obstruction(d));
  }
}

TEST_CASE("partial isometries") {
  CMatrix a = CMatrix::Zero(2, 2), b = CMatrix::Zero(2, 2);
  a(0, 0) = 1;
  b(1, 1) = 1;
  auto r = partial_isometry_check(a, b);
  CHECK(r.hypotheses);
  CHECK(r.a_defect == 0);
  const double h = 1 / std::sqrt(2.0);
  CHECK_FALSE(partial_isometry_check(h * CMatrix::Identity(2, 2), h * CMatrix::Identity(2, 2)).hypotheses);
  std::mt19937_64 rng(10);
  for (int it = 0; it < 20; ++it) {
    CMatrix w = random_unitary(4, rng);
    CMatrix e = CMatrix::Zero(4, 4);
    for (int i = 0; i < 1 + it % 3; ++i) e(i, i) = 1;
    CMatrix hh = w * e * w.adjoint(), kk = CMatrix::Identity(4, 4) - hh;
    auto rr = partial_isometry_check(random_unitary(4, rng) * hh, random_unitary(4, rng) * kk);
    CHECK(rr.hypotheses);
    CHECK(rr.a_defect <= 1e-7);
    CHECK(rr.b_defect <= 1e-7);
  }
}

TEST_CASE("irrational inflation obstruction") {
  auto half = irrational_inflation_obstruction(0.5, 2);
  CHECK(half.distance == 0);
  CHECK_FALSE(half.obstructed);
  auto r = irrational_inflation_obstruction(1 / std::sqrt(2.0), 10);
  CHECK(r.distance == doctest::Approx(0.0711).epsilon(1e-3));
  CHECK(r.obstructed);
  for (std::size_t m = 1; m < 200; ++m) CHECK(irrational_inflation_obstruction(std::sqrt(2.0) - 1, m).obstructed);
  CHECK_THROWS_AS(irrational_inflation_obstruction(1.5, 2), Error);
}
