#include "majlab/majorization.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "majlab/error.hpp"

namespace majlab {

namespace {

void require_same_dim(const Measure& a, const Measure& b) {
  if (a.n != b.n) fail(ErrorCode::DimensionMismatch, "target and source live in different dimensions");
}

}  // namespace

LpProblem transport_lp(const Measure& target, const Measure& source) {
  require_same_dim(target, source);
  const std::size_t m = target.size(), k = source.size(), n = target.n;
  const std::size_t vars = m * k;
  LpProblem lp;
  auto row = [&] { return std::vector<Scalar>(vars, Scalar(0)); };
  for (std::size_t i = 0; i < m; ++i) {
    auto r = row();
    for (std::size_t j = 0; j < k; ++j) r[i * k + j] = Scalar(1);
    lp.A.push_back(std::move(r));
    lp.b.push_back(Scalar(1));
  }
  for (std::size_t j = 0; j < k; ++j) {
    auto r = row();
    for (std::size_t i = 0; i < m; ++i) r[i * k + j] = target.weights[i];
    lp.A.push_back(std::move(r));
    lp.b.push_back(source.weights[j]);
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t d = 0; d < n; ++d) {
      auto r = row();
      for (std::size_t j = 0; j < k; ++j) r[i * k + j] = source.atoms[j][d];
      lp.A.push_back(std::move(r));
      lp.b.push_back(target.atoms[i][d]);
    }
  }
  return lp;
}

MajorizationVerdict check_majorization(const Measure& target, const Measure& source, double tol) {
  auto lp = transport_lp(target, source);
  auto r = solve_lp(lp, tol);
  MajorizationVerdict v;
  v.backend = r.backend;
  if (r.status != LpStatus::Optimal) {
    v.feasible = false;
    v.certificate = r.farkas;
    return v;
  }
  v.feasible = true;
  TransportMatrix d;
  const std::size_t m = target.size(), k = source.size();
  d.entries.assign(m, std::vector<Scalar>(k));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < k; ++j) d.entries[i][j] = r.x[i * k + j];
  d.p = source.weights;
  d.q = target.weights;
  v.witness = std::move(d);
  return v;
}

bool verify_witness(const Measure& target, const Measure& source, const TransportMatrix& d, double tol) {
  if (target.n != source.n) return false;
  const std::size_t m = target.size(), k = source.size();
  if (d.rows() != m || d.cols() != k) return false;
  for (std::size_t i = 0; i < m; ++i) {
    Scalar s(0);
    Point mom = zero_point(target.n);
    for (std::size_t j = 0; j < k; ++j) {
      if (sign(d.entries[i][j], tol) < 0) return false;
      s += d.entries[i][j];
      mom = mom + d.entries[i][j] * source.atoms[j];
    }
    if (!approx_equal(s, Scalar(1), tol) || !approx_equal(mom, target.atoms[i], tol)) return false;
  }
  for (std::size_t j = 0; j < k; ++j) {
    Scalar s(0);
    for (std::size_t i = 0; i < m; ++i) s += target.weights[i] * d.entries[i][j];
    if (!approx_equal(s, source.weights[j], tol)) return false;
  }
  return true;
}

bool verify_certificate(const Measure& target, const Measure& source, const std::vector<Scalar>& y,
                        double tol) {
  return verify_farkas(transport_lp(target, source), y, tol);
}

bool simplex_majorization(const Measure& target, const Measure& source, double tol) {
  require_same_dim(target, source);
  if (!simplex_test(source, tol)) fail(ErrorCode::NotASimplex, "source atoms are affinely dependent");
  if (!approx_equal(barycenter(target), barycenter(source), tol)) return false;
  for (const auto& b : target.atoms)
    if (!hull_membership(b, source.atoms, tol).member) return false;
  return true;
}

Matrix choquet_witness(const Measure& target, const Measure& source, const TransportMatrix& d,
                       const Matrix& partition, double tol) {
  if (!verify_witness(target, source, d, tol)) fail(ErrorCode::InvalidWitness, "transport does not witness the pair");
  const std::size_t m = target.size(), k = source.size();
  if (partition.empty()) fail(ErrorCode::InvalidPartition, "empty partition");
  std::vector<Scalar> sum(m, Scalar(0));
  for (const auto& piece : partition) {
    if (piece.size() != m) fail(ErrorCode::InvalidPartition, "piece length differs from target atom count");
    for (std::size_t i = 0; i < m; ++i) {
      if (sign(piece[i], tol) < 0) fail(ErrorCode::InvalidPartition, "negative mass in partition");
      sum[i] += piece[i];
    }
  }
  for (std::size_t i = 0; i < m; ++i)
    if (!approx_equal(sum[i], target.weights[i], tol))
      fail(ErrorCode::InvalidPartition, "pieces do not add up to the target measure");
  Matrix nu(partition.size(), std::vector<Scalar>(k, Scalar(0)));
  for (std::size_t t = 0; t < partition.size(); ++t)
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t i = 0; i < m; ++i) nu[t][j] += d.entries[i][j] * partition[t][i];
  return nu;
}

Scalar AffineMax::operator()(const Point& x) const {
  Scalar best;
  for (std::size_t r = 0; r < grads.size(); ++r) {
    Scalar v = offsets[r];
    for (std::size_t d = 0; d < x.size(); ++d) v += grads[r][d] * x[d];
    if (r == 0 || best < v) best = v;
  }
  return best;
}

Scalar convex_gap(const Measure& target, const Measure& source, const AffineMax& f) {
  Scalar s(0);
  for (std::size_t j = 0; j < source.size(); ++j) s += source.weights[j] * f(source.atoms[j]);
  for (std::size_t i = 0; i < target.size(); ++i) s -= target.weights[i] * f(target.atoms[i]);
  return s;
}

AffineMax random_affine_max(std::size_t n, std::uint64_t& state_seed, std::size_t max_pieces) {
  std::mt19937_64 rng(state_seed);
  state_seed = rng();
  std::uniform_int_distribution<int> pieces(1, static_cast<int>(max_pieces));
  std::uniform_int_distribution<int> num(-6, 6), den(1, 3);
  AffineMax f;
  int r = pieces(rng);
  for (int t = 0; t < r; ++t) {
    Point g(n);
    for (auto& c : g) c = Scalar(mpq_class(num(rng), den(rng)));
    f.grads.push_back(std::move(g));
    f.offsets.push_back(Scalar(mpq_class(num(rng), den(rng))));
  }
  return f;
}

ProbeReport convex_inequality_probe(const Measure& target, const Measure& source, const TransportMatrix& d,
                                    std::size_t samples, std::uint64_t seed, double tol) {
  if (!verify_witness(target, source, d, tol)) fail(ErrorCode::InvalidWitness, "transport does not witness the pair");
  ProbeReport rep;
  std::uint64_t state = seed;
  for (std::size_t s = 0; s < samples; ++s) {
    AffineMax f = random_affine_max(target.n, state);
    Scalar gap = convex_gap(target, source, f);
    if (sign(gap, tol) < 0) ++rep.violations;
    if (s == 0 || gap < rep.min_slack) rep.min_slack = gap;
    if (s == 0 || rep.max_slack < gap) rep.max_slack = gap;
    ++rep.samples;
  }
  if (rep.violations)
    fail(ErrorCode::InternalInconsistency,
         std::to_string(rep.violations) + " convex inequalities violated despite a valid witness");
  return rep;
}

namespace {

// Appends (point, mass) into a growing atom list, merging equal points.
std::size_t slot_for(std::vector<Point>& atoms, const Point& p, double tol) {
  for (std::size_t j = 0; j < atoms.size(); ++j)
    if (approx_equal(atoms[j], p, tol)) return j;
  atoms.push_back(p);
  return atoms.size() - 1;
}

MajorantResult assemble(const Measure& a, const std::vector<std::vector<std::pair<Point, Scalar>>>& pieces,
                        double tol) {
  std::vector<Point> atoms;
  std::vector<std::vector<std::pair<std::size_t, Scalar>>> rows(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (const auto& [pt, mass] : pieces[i]) rows[i].emplace_back(slot_for(atoms, pt, tol), mass);
  TransportMatrix d;
  d.entries.assign(a.size(), std::vector<Scalar>(atoms.size(), Scalar(0)));
  std::vector<Scalar> w(atoms.size(), Scalar(0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (const auto& [j, mass] : rows[i]) {
      d.entries[i][j] += mass;
      w[j] += a.weights[i] * mass;
    }
  }
  MajorantResult res;
  res.measure.n = a.n;
  res.measure.atoms = atoms;
  res.measure.weights = w;
  d.p = w;
  d.q = a.weights;
  res.transport = std::move(d);
  return res;
}

// Exact square root of a nonnegative rational, if it exists.
std::optional<mpq_class> exact_sqrt(const mpq_class& q) {
  if (sgn(q) < 0) return std::nullopt;
  mpz_class n = q.get_num(), d = q.get_den();
  if (!mpz_perfect_square_p(n.get_mpz_t()) || !mpz_perfect_square_p(d.get_mpz_t())) return std::nullopt;
  mpz_class rn, rd;
  mpz_sqrt(rn.get_mpz_t(), n.get_mpz_t());
  mpz_sqrt(rd.get_mpz_t(), d.get_mpz_t());
  return mpq_class(rn, rd);
}

}  // namespace

MajorantResult carpenter_majorant(const Measure& a) {
  const std::size_t n = a.n;
  std::vector<std::vector<std::pair<Point, Scalar>>> pieces(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Point& b = a.atoms[i];
    for (const auto& c : b)
      if (sign(c) < 0 || sign(c - Scalar(1)) > 0) fail(ErrorCode::OutOfRange, "atom coordinate outside [0,1]");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return b[x] < b[y]; });
    // Piece r: coordinates ranked above r are 1, mass c_(r+1) - c_(r).
    Scalar prev(0);
    for (std::size_t r = 0; r <= n; ++r) {
      Scalar next = r < n ? b[order[r]] : Scalar(1);
      Scalar mass = next - prev;
      prev = next;
      if (sign(mass) <= 0) continue;
      Point v(n, Scalar(0));
      for (std::size_t t = r; t < n; ++t) v[order[t]] = Scalar(1);
      pieces[i].emplace_back(std::move(v), mass);
    }
  }
  return assemble(a, pieces, kDefaultTol);
}

MajorantResult unitary_majorant(const Measure& a, double tol) {
  if (a.n != 2) fail(ErrorCode::DimensionMismatch, "unitary majorant needs planar atoms");
  std::vector<std::vector<std::pair<Point, Scalar>>> pieces(a.size());
  const Scalar half(mpq_class(1, 2));
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Scalar& x = a.atoms[i][0];
    const Scalar& y = a.atoms[i][1];
    Scalar r2 = x * x + y * y;
    int s = sign(r2 - Scalar(1), tol);
    if (s > 0) fail(ErrorCode::NotAContraction, "atom " + std::to_string(i) + " lies outside the unit disk");
    if (s == 0) {
      pieces[i].emplace_back(a.atoms[i], Scalar(1));
      continue;
    }
    if (sign(r2, tol) == 0) {
      pieces[i].emplace_back(Point{Scalar(1), Scalar(0)}, half);
      pieces[i].emplace_back(Point{Scalar(-1), Scalar(0)}, half);
      continue;
    }
    // beta +- (-y, x) * sqrt(1 - r^2) / r are unit vectors with midpoint beta.
    Scalar ratio;
    std::optional<mpq_class> ex;
    if (r2.is_exact()) ex = exact_sqrt((1 - r2.rational()) / r2.rational());
    if (ex) {
      ratio = Scalar(*ex);
    } else {
      double r = r2.to_double();
      ratio = Scalar::from_double(std::sqrt((1.0 - r) / r));
    }
    Point perp{-y * ratio, x * ratio};
    pieces[i].emplace_back(a.atoms[i] + perp, half);
    pieces[i].emplace_back(a.atoms[i] - perp, half);
  }
  return assemble(a, pieces, tol);
}

OrthoProjResult orthoproj_diagonal_feasible(const Measure& a) {
  OrthoProjResult res;
  const std::size_t n = a.n;
  for (const auto& b : a.atoms) {
    Scalar s(0);
    for (const auto& c : b) {
      if (sign(c) < 0) return res;
      s += c;
    }
    if (sign(s - Scalar(1)) > 0) return res;
  }
  res.feasible = true;
  TransportMatrix d;
  d.q = a.weights;
  d.p.assign(n + 1, Scalar(0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::vector<Scalar> row(n + 1);
    Scalar s(0);
    for (std::size_t j = 0; j < n; ++j) {
      row[j] = a.atoms[i][j];
      s += row[j];
    }
    row[n] = Scalar(1) - s;
    for (std::size_t j = 0; j <= n; ++j) d.p[j] += a.weights[i] * row[j];
    d.entries.push_back(std::move(row));
  }
  Measure m;
  m.n = n;
  for (std::size_t j = 0; j <= n; ++j) {
    if (sign(d.p[j]) <= 0) continue;
    Point v(n, Scalar(0));
    if (j < n) v[j] = Scalar(1);
    m.atoms.push_back(std::move(v));
    m.weights.push_back(d.p[j]);
  }
  res.transport = std::move(d);
  res.measure = std::move(m);
  return res;
}

TransportMatrix compose(const TransportMatrix& first, const TransportMatrix& second) {
  if (first.cols() != second.rows()) fail(ErrorCode::DimensionMismatch, "transport shapes do not chain");
  TransportMatrix r;
  r.q = first.q;
  r.p = second.p;
  r.entries.assign(first.rows(), std::vector<Scalar>(second.cols(), Scalar(0)));
  for (std::size_t i = 0; i < first.rows(); ++i)
    for (std::size_t t = 0; t < first.cols(); ++t)
      for (std::size_t j = 0; j < second.cols(); ++j) r.entries[i][j] += first.entries[i][t] * second.entries[t][j];
  return r;
}

}  // namespace majlab
