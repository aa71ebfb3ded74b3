#include "majlab/bhdiag.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "majlab/error.hpp"
#include "majlab/lp.hpp"

namespace majlab {

namespace {

Scalar frac(std::size_t a, std::size_t b) {
  return Scalar(mpq_class(static_cast<unsigned long>(a), static_cast<unsigned long>(b)));
}

mpq_class as_rational(const Scalar& s) { return s.is_exact() ? s.rational() : mpq_class(s.to_double()); }

double sup_dist(const Point& a, const Point& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs((a[i] - b[i]).to_double()));
  return d;
}

Point vertex_mean(const std::vector<Point>& x) {
  Point b = zero_point(x[0].size());
  for (const auto& p : x) b = b + p;
  return frac(1, x.size()) * b;
}

std::size_t round_half_even(const Scalar& v) {
  if (!v.is_exact()) return static_cast<std::size_t>(std::max(0.0, std::nearbyint(v.to_double())));
  const mpq_class& q = v.rational();
  mpz_class f;
  mpz_fdiv_q(f.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  mpq_class rem = q - mpq_class(f);
  if (rem > mpq_class(1, 2) || (rem == mpq_class(1, 2) && mpz_odd_p(f.get_mpz_t()))) f += 1;
  return f.get_ui();
}

// Largest-remainder split of `total` cells by the masses q (summing to 1).
std::vector<std::size_t> apportion(const std::vector<Scalar>& q, std::size_t total) {
  std::vector<std::size_t> out(q.size());
  std::vector<std::pair<mpq_class, std::size_t>> rem;
  std::size_t used = 0;
  for (std::size_t t = 0; t < q.size(); ++t) {
    mpq_class v = as_rational(q[t]) * static_cast<unsigned long>(total);
    mpz_class f;
    mpz_fdiv_q(f.get_mpz_t(), v.get_num_mpz_t(), v.get_den_mpz_t());
    out[t] = f.get_ui();
    used += out[t];
    rem.emplace_back(v - mpq_class(f), t);
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; used < total; ++r, ++used) ++out[rem[r % rem.size()].second];
  return out;
}

// A synthesised region in local coordinates.
struct LocalRegion {
  CMatrix u;
  CellTuple values;
  Point diagonal;  // constant diagonal of u diag(values) u*
  SynthRegion info;
};

Point edge_point(const std::vector<Point>& x, const EdgeTerm& t, const Scalar& a) {
  return a * x[t.i] + (Scalar(1) - a) * x[t.j];
}

// Step 1 on `size` cells for the constant target d: per-term two-point blocks
// made constant by Fourier, then regrouped into cells of N and flattened.
LocalRegion constant_region(const std::vector<Point>& x, const Point& d, std::size_t size, bool allow_fallback,
                            double tol, bool with_unitary = true) {
  auto dec = pair_decompose_interior(d, x, tol);
  LocalRegion reg;
  reg.info.kind = "constant";
  reg.info.target = d;
  reg.info.terms = dec.terms;
  std::vector<Scalar> q;
  for (const auto& t : dec.terms) q.push_back(t.q);
  const std::size_t n_base = lcm_of_denominators(q).get_ui();
  reg.info.base = n_base;
  if (size < x.size() * n_base && !allow_fallback)
    fail(ErrorCode::TruncationTooSmall, "M=" + std::to_string(size) + " is below k*N=" +
                                            std::to_string(x.size() * n_base));
  const bool two_stage = size % n_base == 0 && size >= n_base;
  std::vector<std::size_t> b, r, n_t;
  if (two_stage) {
    const std::size_t groups = size / n_base;
    for (const auto& t : dec.terms) {
      n_t.push_back(mpq_class(t.q.rational() * static_cast<unsigned long>(n_base)).get_num().get_ui());
      b.push_back(n_t.back() * groups);
    }
    reg.info.groups = groups;
  } else {
    b = apportion(q, size);
    reg.info.fallback = true;
    reg.info.groups = 1;
  }
  double bound = 0;
  Point mean = zero_point(d.size());
  for (std::size_t t = 0; t < dec.terms.size(); ++t) {
    const auto& term = dec.terms[t];
    r.push_back(std::min(b[t], round_half_even(term.alpha * Scalar(static_cast<long>(b[t])))));
    reg.values.insert(reg.values.end(), r[t], x[term.i]);
    reg.values.insert(reg.values.end(), b[t] - r[t], x[term.j]);
    const double delta = sup_dist(x[term.i], x[term.j]);
    bound += delta / (2.0 * static_cast<double>(size));
    if (b[t]) mean = mean + frac(b[t], size) * edge_point(x, term, frac(r[t], b[t]));
    if (!two_stage) bound += std::abs((frac(b[t], size) - term.q).to_double()) * sup_dist(edge_point(x, term, term.alpha), d);
  }
  reg.diagonal = mean;
  reg.info.bound = bound;
  if (!with_unitary) return reg;
  if (!two_stage) {
    reg.u = fourier_unitary(size).u;
    return reg;
  }

  // Stage 1: Fourier on each term block. Stage 2: in every group the
  // compression is a direct sum of functions of one hermitian per block, so
  // diagonalising the pieces and applying F_N makes the diagonal constant.
  const auto fn = fourier_unitary(n_base).u;
  reg.u = CMatrix::Zero(static_cast<Eigen::Index>(size), static_cast<Eigen::Index>(size));
  std::size_t off = 0;
  for (std::size_t t = 0; t < b.size(); ++t) {
    const auto fb = fourier_unitary(b[t]).u;
    Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(b[t]));
    p.head(static_cast<Eigen::Index>(r[t])).setOnes();
    // portion columns of F_N for this term inside each group
    std::size_t col0 = 0;
    for (std::size_t s = 0; s < t; ++s) col0 += n_t[s];
    for (std::size_t g = 0; g < reg.info.groups; ++g) {
      const auto rows = fb.middleRows(static_cast<Eigen::Index>(g * n_t[t]), static_cast<Eigen::Index>(n_t[t]));
      CMatrix h = rows * p.cast<Complex>().asDiagonal() * rows.adjoint();
      Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
      CMatrix z = es.eigenvectors().adjoint() * rows;
      // group g rows receive F_N[:, portion] * z in the block-t columns
      CMatrix contrib = fn.middleCols(static_cast<Eigen::Index>(col0), static_cast<Eigen::Index>(n_t[t])) * z;
      reg.u.block(static_cast<Eigen::Index>(g * n_base), static_cast<Eigen::Index>(off),
                   static_cast<Eigen::Index>(n_base), static_cast<Eigen::Index>(b[t])) = contrib;
    }
    off += b[t];
  }
  // row order: group g occupies rows [g*N, (g+1)*N)
  return reg;
}

struct Assembly {
  std::size_t m;
  CMatrix u;
  CellTuple source, achieved;
  std::vector<SynthRegion> regions;

  explicit Assembly(std::size_t size)
      : m(size), u(CMatrix::Zero(static_cast<Eigen::Index>(size), static_cast<Eigen::Index>(size))),
        source(size), achieved(size) {}

  void place(const LocalRegion& reg, const std::vector<std::size_t>& cells) {
    for (std::size_t a = 0; a < cells.size(); ++a) {
      source[cells[a]] = reg.values[a];
      achieved[cells[a]] = reg.diagonal;
      for (std::size_t c = 0; c < cells.size(); ++c)
        u(static_cast<Eigen::Index>(cells[a]), static_cast<Eigen::Index>(cells[c])) =
            reg.u(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(c));
    }
    SynthRegion info = reg.info;
    info.cells = cells;
    regions.push_back(std::move(info));
  }

  void raw(std::size_t cell, const Point& v) {
    source[cell] = v;
    achieved[cell] = v;
    u(static_cast<Eigen::Index>(cell), static_cast<Eigen::Index>(cell)) = 1.0;
  }

  // Rotation between two cells with no mutual off-diagonal entry.
  void rotate(std::size_t a, std::size_t b, const Scalar& c2) {
    const Scalar s2 = Scalar(1) - c2;
    const Point va = achieved[a], vb = achieved[b];
    achieved[a] = c2 * va + s2 * vb;
    achieved[b] = s2 * va + c2 * vb;
    const double c = std::sqrt(c2.to_double()), s = std::sqrt(std::max(0.0, s2.to_double()));
    const Eigen::RowVectorXcd ra = u.row(static_cast<Eigen::Index>(a)), rb = u.row(static_cast<Eigen::Index>(b));
    u.row(static_cast<Eigen::Index>(a)) = c * ra + s * rb;
    u.row(static_cast<Eigen::Index>(b)) = -s * ra + c * rb;
  }

  // Fourier over cells whose compression is diagonal.
  void flatten(const std::vector<std::size_t>& cells) {
    Point mean = zero_point(achieved[cells[0]].size());
    for (auto c : cells) mean = mean + achieved[c];
    mean = frac(1, cells.size()) * mean;
    CMatrix rows(static_cast<Eigen::Index>(cells.size()), u.cols());
    for (std::size_t i = 0; i < cells.size(); ++i) rows.row(static_cast<Eigen::Index>(i)) = u.row(static_cast<Eigen::Index>(cells[i]));
    rows = fourier_unitary(cells.size()).u * rows;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      u.row(static_cast<Eigen::Index>(cells[i])) = rows.row(static_cast<Eigen::Index>(i));
      achieved[cells[i]] = mean;
    }
  }
};

SynthesisResult finish(Assembly&& a, const std::vector<Point>& x, CellTuple target) {
  SynthesisResult res;
  res.m = a.m;
  res.target = std::move(target);
  res.source = std::move(a.source);
  res.achieved = std::move(a.achieved);
  res.regions = std::move(a.regions);
  const std::size_t n = x[0].size();
  Eigen::MatrixXd w = a.u.cwiseAbs2();
  res.readout.assign(res.m, std::vector<double>(n));
  for (std::size_t c = 0; c < n; ++c) {
    Eigen::VectorXd s(static_cast<Eigen::Index>(res.m));
    for (std::size_t k = 0; k < res.m; ++k) s(static_cast<Eigen::Index>(k)) = res.source[k][c].to_double();
    Eigen::VectorXd d = w * s;
    for (std::size_t r = 0; r < res.m; ++r) {
      res.readout[r][c] = d(static_cast<Eigen::Index>(r));
      res.sup_error = std::max(res.sup_error, std::abs(res.readout[r][c] - res.target[r][c].to_double()));
      res.readout_error = std::max(res.readout_error, std::abs(res.readout[r][c] - res.achieved[r][c].to_double()));
    }
  }
  for (const auto& r : res.regions) res.bound = std::max(res.bound, r.bound);
  res.vertex_counts.assign(x.size(), 0);
  for (const auto& v : res.source)
    for (std::size_t i = 0; i < x.size(); ++i)
      if (v == x[i]) {
        ++res.vertex_counts[i];
        break;
      }
  res.min_multiplicity = (res.m + 4 * x.size() - 1) / (4 * x.size());
  res.multiplicity_ok = true;
  for (auto c : res.vertex_counts) res.multiplicity_ok = res.multiplicity_ok && c >= res.min_multiplicity;
  res.u = make_unitary(std::move(a.u));
  return res;
}

}  // namespace

std::optional<InteriorCoefficients> interior_coefficients(const Point& d, const std::vector<Point>& x, double tol) {
  if (x.empty()) fail(ErrorCode::InvalidInput, "empty vertex set");
  const std::size_t k = x.size(), n = d.size();
  for (const auto& p : x)
    if (p.size() != n) fail(ErrorCode::DimensionMismatch, "vertex and point dimensions differ");
  // c_i = s_i + t with s >= 0, t >= 0;  maximise t
  LpProblem lp;
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<Scalar> row;
    Scalar sum(0);
    for (std::size_t i = 0; i < k; ++i) {
      row.push_back(x[i][c]);
      sum += x[i][c];
    }
    row.push_back(sum);
    lp.A.push_back(row);
    lp.b.push_back(d[c]);
  }
  std::vector<Scalar> ones(k, Scalar(1));
  ones.push_back(Scalar(static_cast<long>(k)));
  lp.A.push_back(ones);
  lp.b.push_back(Scalar(1));
  lp.c.assign(k + 1, Scalar(0));
  lp.c[k] = Scalar(-1);
  auto sol = solve_lp(lp, tol);
  if (sol.status != LpStatus::Optimal) return std::nullopt;
  InteriorCoefficients out;
  for (std::size_t i = 0; i < k; ++i) out.c.push_back(sol.x[i] + sol.x[k]);
  out.margin = sol.x[k];
  return out;
}

bool is_interior(const Point& d, const std::vector<Point>& x, double tol) {
  auto c = interior_coefficients(d, x, tol);
  if (!c) return false;
  return c->margin.is_exact() ? c->margin > Scalar(0) : c->margin.to_double() >= tol;
}

void require_vertex_set(const std::vector<Point>& x, double tol) {
  if (x.size() < 2) fail(ErrorCode::DegenerateHull, "need at least two vertices");
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::vector<Point> others;
    for (std::size_t j = 0; j < x.size(); ++j)
      if (j != i) others.push_back(x[j]);
    if (hull_membership(x[i], others, tol).member)
      fail(ErrorCode::DegenerateHull, "vertex " + std::to_string(i) + " lies in the hull of the others");
  }
}

EdgeDecomposition pair_decompose_interior(const Point& d, const std::vector<Point>& x, double tol) {
  require_vertex_set(x, tol);
  auto ic = interior_coefficients(d, x, tol);
  if (!ic || !is_interior(d, x, tol)) fail(ErrorCode::NotInterior, "point is not in the relative interior of the hull");
  EdgeDecomposition out;
  out.coefficients = ic->c;
  std::vector<Scalar> c = ic->c;
  std::vector<std::size_t> active(x.size());
  std::iota(active.begin(), active.end(), 0);
  Scalar scale(1);
  // Peel the last vertex against the first through a rational segment point.
  while (active.size() > 2) {
    const std::size_t kk = active.back(), first = active.front();
    const mpq_class lo = as_rational(c[kk]);
    mpq_class hi = as_rational(c[kk] + c[first]);
    if (hi > 1) hi = 1;
    const Scalar q(simplest_between(lo, hi));
    const Scalar a = c[kk] / q;
    out.terms.push_back(EdgeTerm{kk, first, scale * q, a});
    const Scalar rest = Scalar(1) - q;
    c[first] = (c[first] - (q - c[kk])) / rest;
    for (std::size_t i = 1; i + 1 < active.size(); ++i) c[active[i]] = c[active[i]] / rest;
    scale = scale * rest;
    active.pop_back();
  }
  const Scalar tail = c[active[0]] / (c[active[0]] + c[active[1]]);
  out.terms.push_back(EdgeTerm{active[0], active[1], scale, tail});
  out.reconstruction = zero_point(d.size());
  for (const auto& t : out.terms) out.reconstruction = out.reconstruction + t.q * edge_point(x, t, t.alpha);
  if (!approx_equal(out.reconstruction, d, tol))
    fail(ErrorCode::InternalInconsistency, "edge decomposition does not reconstruct the point");
  return out;
}

QuantizedTarget quantize_target(const std::vector<Point>& seq, const std::vector<Point>& x, double eps, double tol) {
  if (!(eps > 0)) fail(ErrorCode::InvalidInput, "eps must be positive");
  if (seq.empty()) fail(ErrorCode::InvalidInput, "empty sequence");
  require_vertex_set(x, tol);
  for (std::size_t m = 0; m < seq.size(); ++m)
    if (!hull_membership(seq[m], x, tol).member)
      fail(ErrorCode::NotInHull, "entry " + std::to_string(m) + " lies outside the hull");
  const std::size_t n = x[0].size();
  const Point bc = vertex_mean(x);
  double radius = 0;
  for (const auto& p : seq) radius = std::max(radius, sup_dist(p, bc));
  const bool full = affine_rank(x, tol) == n;

  auto round_point = [&](const Point& p, const mpq_class& h) {
    Point out;
    for (const auto& v : p) {
      mpq_class z = as_rational(v) / h + mpq_class(1, 2);
      mpz_class f;
      mpz_fdiv_q(f.get_mpz_t(), z.get_num_mpz_t(), z.get_den_mpz_t());
      out.push_back(Scalar(mpq_class(f) * h));
    }
    return out;
  };
  // Coefficient rounding keeps points inside the affine hull of a flat polytope.
  auto round_coeffs = [&](const Point& p, std::size_t kden) {
    auto ic = interior_coefficients(p, x, tol);
    if (!ic) fail(ErrorCode::NotInHull, "entry lies outside the hull");
    auto parts = apportion(ic->c, kden);
    Point out = zero_point(n);
    for (std::size_t i = 0; i < x.size(); ++i) out = out + frac(parts[i], kden) * x[i];
    return out;
  };

  mpq_class h(1, static_cast<unsigned long>(std::ceil(1.0 / eps)));
  for (int refine = 0; refine < 24; ++refine, h /= 2) {
    const double hd = h.get_d();
    const double budget = full ? eps - hd / 2 : eps / 2;
    std::vector<mpq_class> ladder = {mpq_class(0)};
    if (radius > 0) {
      std::vector<mpq_class> up;
      for (int j = 0; j < 60; ++j) {
        mpq_class e(1);
        e /= mpz_class(1) << j;
        if (e.get_d() * radius <= budget) up.push_back(e);
      }
      std::reverse(up.begin(), up.end());
      ladder.insert(ladder.end(), up.begin(), up.end());
    }
    for (const auto& eta : ladder) {
      const Scalar se(eta);
      std::size_t kden = 0;
      if (!full) {
        double rest = eps - eta.get_d() * radius;
        double rx = 0;
        for (const auto& v : x) rx = std::max(rx, sup_dist(v, bc));
        kden = static_cast<std::size_t>(std::floor(static_cast<double>(x.size()) * rx / rest)) + 1;
        kden <<= refine;
      }
      std::map<std::vector<std::string>, Point> cache;
      QuantizedTarget out;
      bool ok = true;
      for (const auto& p : seq) {
        Point shrunk = bc + (Scalar(1) - se) * (p - bc);
        Point z = full ? round_point(shrunk, h) : round_coeffs(shrunk, kden);
        std::vector<std::string> key;
        for (const auto& v : z) key.push_back(v.str());
        auto it = cache.find(key);
        if (it == cache.end()) {
          if (!is_interior(z, x, tol)) {
            ok = false;
            break;
          }
          it = cache.emplace(key, z).first;
          out.values.push_back(z);
          out.counts.push_back(0);
        }
        auto pos = std::find(out.values.begin(), out.values.end(), it->second) - out.values.begin();
        ++out.counts[static_cast<std::size_t>(pos)];
        out.entries.push_back(z);
        out.sup_distance = std::max(out.sup_distance, sup_dist(z, p));
      }
      if (!ok) continue;
      out.grid = full ? Scalar(h) : frac(1, kden);
      out.shrink = se;
      // Keep the input when it is already interior and rounding would not
      // reduce the number of distinct values.
      QuantizedTarget same;
      for (const auto& p : seq) {
        auto it = std::find(same.values.begin(), same.values.end(), p);
        if (it == same.values.end()) {
          if (!is_interior(p, x, tol)) return out;
          same.values.push_back(p);
          same.counts.push_back(0);
          it = same.values.end() - 1;
        }
        ++same.counts[static_cast<std::size_t>(it - same.values.begin())];
        if (same.values.size() > out.values.size()) return out;
      }
      same.entries = seq;
      same.grid = out.grid;
      same.shrink = Scalar(0);
      return same;
    }
  }
  fail(ErrorCode::InternalInconsistency, "no interior quantisation found");
}

SynthesisResult synthesize_constant_diagonal(const std::vector<Point>& x, const Point& d, std::size_t m,
                                             double tol) {
  if (m == 0) fail(ErrorCode::TruncationTooSmall, "M must be positive");
  auto reg = constant_region(x, d, m, false, tol);
  Assembly a(m);
  std::vector<std::size_t> cells(m);
  std::iota(cells.begin(), cells.end(), 0);
  a.place(reg, cells);
  auto res = finish(std::move(a), x, CellTuple(m, d));
  res.constant = res.bound * static_cast<double>(m);
  return res;
}

SynthesisResult synthesize_finite_diagonal(const std::vector<Point>& x, const std::vector<Point>& target,
                                           double tol) {
  const std::size_t m = target.size();
  if (m == 0) fail(ErrorCode::TruncationTooSmall, "empty target");
  require_vertex_set(x, tol);
  // distinct values and their cells
  std::vector<Point> values;
  std::vector<std::vector<std::size_t>> cells;
  for (std::size_t c = 0; c < m; ++c) {
    std::size_t v = 0;
    while (v < values.size() && !approx_equal(values[v], target[c], tol)) ++v;
    if (v == values.size()) {
      values.push_back(target[c]);
      cells.emplace_back();
    }
    cells[v].push_back(c);
  }
  for (std::size_t v = 0; v < values.size(); ++v)
    if (!is_interior(values[v], x, tol))
      fail(ErrorCode::NotInterior, "target value " + std::to_string(v) + " is not interior");
  if (values.size() == 1) return synthesize_constant_diagonal(x, values[0], m, tol);

  const std::size_t threshold = (m + 2 * values.size() - 1) / (2 * values.size());
  std::vector<std::size_t> bulk, exceptional;
  for (std::size_t v = 0; v < values.size(); ++v) (cells[v].size() >= threshold ? bulk : exceptional).push_back(v);
  if (bulk.empty()) fail(ErrorCode::TruncationTooSmall, "no target value has a large multiplicity");

  Assembly a(m);
  // remaining cells of each bulk value, consumed from the back
  std::vector<std::vector<std::size_t>> pool = cells;
  // k*N cells stay reserved for every bulk region.
  std::vector<std::size_t> reserve(values.size(), 0);
  for (auto v : bulk) {
    auto dec = pair_decompose_interior(values[v], x, tol);
    std::vector<Scalar> q;
    for (const auto& t : dec.terms) q.push_back(t.q);
    reserve[v] = x.size() * lcm_of_denominators(q).get_ui();
  }
  auto take = [&](std::size_t v) {
    std::size_t c = pool[v].back();
    pool[v].pop_back();
    return c;
  };

  for (auto e : exceptional) {
    const auto coeff = interior_coefficients(values[e], x, tol)->c;
    for (auto cell : cells[e]) {
      // Partner: the bulk value with the most unused cells.
      std::size_t d = bulk[0];
      for (auto v : bulk)
        if (pool[v].size() > pool[d].size()) d = v;
      if (pool[d].size() < reserve[d] + 2 * (x.size() - 1))
        fail(ErrorCode::TruncationTooSmall, "not enough cells to absorb an exceptional entry");
      // Exact value at `cell` by a chain of rotations over one cell per vertex.
      SynthRegion ex;
      ex.kind = "exceptional";
      ex.target = values[e];
      ex.cells = {cell};
      a.raw(cell, x[0]);
      Scalar w = coeff[0];
      std::vector<std::size_t> byproducts;
      for (std::size_t i = 1; i < x.size(); ++i) {
        std::size_t y = take(d);
        a.raw(y, x[i]);
        a.rotate(cell, y, w / (w + coeff[i]));
        w += coeff[i];
        byproducts.push_back(y);
        ex.cells.push_back(y);
      }
      a.regions.push_back(ex);
      // Each byproduct y joins m fresh cells built for f = d + (d - y)/m, so
      // that d = 1/(m+1) y + m/(m+1) f; the block is flattened by Fourier.
      for (std::size_t bi = 0; bi < byproducts.size(); ++bi) {
        const std::size_t y = byproducts[bi];
        const Point yv = a.achieved[y];
        std::optional<std::pair<double, std::size_t>> best;
        LocalRegion best_reg;
        double best_err = 0;
        // equal share of the spare cells for each byproduct still waiting
        const std::size_t waiting = byproducts.size() - bi;
        const std::size_t room = (pool[d].size() - reserve[d]) / waiting;
        for (std::size_t mm = 1; mm <= 63 && mm <= room; ++mm) {
          Point f = values[d] + frac(1, mm) * (values[d] - yv);
          if (!is_interior(f, x, tol)) continue;
          auto reg = constant_region(x, f, mm, true, tol);
          Point mean = frac(1, mm + 1) * (yv + Scalar(static_cast<long>(mm)) * reg.diagonal);
          // balance the group error against the shrinking bulk region
          const double err = sup_dist(mean, values[d]);
          const std::size_t left = pool[d].size() - mm;
          double score = err;
          if (waiting == 1 && left >= reserve[d])
            score = std::max(score, sup_dist(constant_region(x, values[d], left, false, tol, false).diagonal, values[d]));
          if (!best || score < best->first - 1e-15) {
            best = std::make_pair(score, mm);
            best_err = err;
            best_reg = std::move(reg);
          }
        }
        if (!best)
          fail(ErrorCode::NoRationalCombination,
               "no auxiliary point with denominator <= 64 lies inside the hull for this entry");
        std::vector<std::size_t> group = {y};
        for (std::size_t i = 0; i < best->second; ++i) {
          std::size_t c = take(d);
          a.raw(c, best_reg.values[i]);
          group.push_back(c);
        }
        a.flatten(group);
        SynthRegion comp;
        comp.kind = "compensation";
        comp.cells = group;
        comp.target = values[d];
        comp.terms = best_reg.info.terms;
        comp.base = best_reg.info.base;
        comp.groups = 1;
        comp.fallback = best_reg.info.fallback;
        comp.bound = best_err;
        a.regions.push_back(comp);
      }
    }
  }
  for (auto v : bulk) {
    if (pool[v].empty()) continue;
    std::vector<std::size_t> rest = pool[v];
    std::sort(rest.begin(), rest.end());
    auto reg = constant_region(x, values[v], rest.size(), false, tol);
    // the exact bookkeeping error is itself a bound and is often far below C/size
    reg.info.bound = std::min(reg.info.bound, sup_dist(reg.diagonal, values[v]) + 1e-12);
    a.place(reg, rest);
  }
  return finish(std::move(a), x, target);
}

std::optional<std::vector<mpz_class>> integer_solution(const std::vector<std::vector<mpz_class>>& a,
                                                       const std::vector<mpz_class>& b) {
  const std::size_t rows = a.size(), cols = rows ? a[0].size() : 0;
  if (b.size() != rows) fail(ErrorCode::DimensionMismatch, "rhs length differs from row count");
  auto h = a;
  std::vector<std::vector<mpz_class>> u(cols, std::vector<mpz_class>(cols, 0));
  for (std::size_t i = 0; i < cols; ++i) u[i][i] = 1;
  auto colop = [&](std::size_t p, std::size_t q, const mpz_class& s, const mpz_class& t, const mpz_class& x,
                   const mpz_class& y) {
    // [col_p, col_q] <- [s col_p + t col_q, x col_p + y col_q], determinant +-1
    for (auto* m : {&h, &u})
      for (auto& row : *m) {
        mpz_class vp = row[p], vq = row[q];
        row[p] = s * vp + t * vq;
        row[q] = x * vp + y * vq;
      }
  };
  // Column-style Hermite reduction to lower echelon form.
  std::vector<std::optional<std::size_t>> pivot(rows);
  std::size_t c = 0;
  for (std::size_t i = 0; i < rows && c < cols; ++i) {
    for (std::size_t j = c + 1; j < cols; ++j) {
      if (h[i][j] == 0) continue;
      mpz_class g, s, t;
      mpz_gcdext(g.get_mpz_t(), s.get_mpz_t(), t.get_mpz_t(), h[i][c].get_mpz_t(), h[i][j].get_mpz_t());
      mpz_class x = -h[i][j] / g, y = h[i][c] / g;
      colop(c, j, s, t, x, y);
    }
    if (h[i][c] != 0) {
      pivot[i] = c++;
    }
  }
  std::vector<mpz_class> y(cols, 0);
  for (std::size_t i = 0; i < rows; ++i) {
    mpz_class v = b[i];
    for (std::size_t j = 0; j < cols; ++j)
      if (!(pivot[i] && *pivot[i] == j)) v -= h[i][j] * y[j];
    if (pivot[i]) {
      const mpz_class& p = h[i][*pivot[i]];
      if (v % p != 0) return std::nullopt;
      y[*pivot[i]] = v / p;
    } else if (v != 0) {
      return std::nullopt;
    }
  }
  std::vector<mpz_class> out(cols, 0);
  for (std::size_t r = 0; r < cols; ++r)
    for (std::size_t j = 0; j < cols; ++j) out[r] += u[r][j] * y[j];
  return out;
}

IndexVerdict arveson_index_check(const std::vector<Point>& x, const std::vector<std::size_t>& phi,
                                 const std::vector<Point>& prefix, double tol) {
  if (x.empty()) fail(ErrorCode::InvalidInput, "empty vertex set");
  if (phi.size() != prefix.size()) fail(ErrorCode::DimensionMismatch, "phi and prefix lengths differ");
  const std::size_t n = x[0].size(), k = x.size();
  IndexVerdict v;
  v.deviation_sum = zero_point(n);
  for (std::size_t m = 0; m < phi.size(); ++m) {
    if (phi[m] >= k) fail(ErrorCode::OutOfRange, "phi maps to a vertex that does not exist");
    if (prefix[m].size() != n) fail(ErrorCode::DimensionMismatch, "prefix entry dimension differs");
    v.deviation_sum = v.deviation_sum + (x[phi[m]] - prefix[m]);
  }
  v.irrational = backend_of(x) == Backend::Float || backend_of(v.deviation_sum) == Backend::Float;
  auto exact = [&](const Scalar& s) { return s.is_exact() ? s.rational() : rationalize(s.to_double(), 1e-12); };
  // rows: coordinates of sum nu_j lambda_j = s, then sum nu_j = 0
  std::vector<std::vector<mpz_class>> a;
  std::vector<mpz_class> b;
  for (std::size_t c = 0; c <= n; ++c) {
    std::vector<mpq_class> row;
    for (std::size_t j = 0; j < k; ++j) row.push_back(c < n ? exact(x[j][c]) : mpq_class(1));
    mpq_class rhs = c < n ? exact(v.deviation_sum[c]) : mpq_class(0);
    mpz_class l = rhs.get_den();
    for (const auto& e : row) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), e.get_den_mpz_t());
    std::vector<mpz_class> irow;
    for (const auto& e : row) irow.push_back(mpz_class(e * l));
    a.push_back(irow);
    b.push_back(mpz_class(rhs * l));
  }
  v.nu = integer_solution(a, b);
  if (v.nu) {
    for (std::size_t c = 0; c < n; ++c) {
      double r = -v.deviation_sum[c].to_double();
      for (std::size_t j = 0; j < k; ++j) r += (*v.nu)[j].get_d() * x[j][c].to_double();
      v.residual = std::max(v.residual, std::abs(r));
    }
    if (v.irrational && v.residual > tol)
      fail(ErrorCode::UnsupportedIrrationalVertices, "rationalised lattice solution misses by " +
                                                         std::to_string(v.residual));
  }
  return v;
}

}  // namespace majlab
