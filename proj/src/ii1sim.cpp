#include "majlab/ii1sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

#include "majlab/error.hpp"

namespace majlab {

namespace {

Scalar frac(std::size_t a, std::size_t b) {
  return Scalar(mpq_class(static_cast<unsigned long>(a), static_cast<unsigned long>(b)));
}

std::size_t total(const std::vector<Part>& ps) {
  std::size_t s = 0;
  for (const auto& p : ps) s += p.cells.size();
  return s;
}

std::vector<std::size_t> cells_in(const std::vector<Part>& ps) {
  std::vector<std::size_t> out;
  for (const auto& p : ps) out.insert(out.end(), p.cells.begin(), p.cells.end());
  return out;
}

void append(std::vector<std::size_t>& to, const std::vector<std::size_t>& from) {
  to.insert(to.end(), from.begin(), from.end());
}

Point mean_of(const CellTuple& v, const std::vector<std::size_t>& cells) {
  Point s = zero_point(v[cells.front()].size());
  for (auto c : cells) s = s + v[c];
  return frac(1, cells.size()) * s;
}

std::string counts_text(const std::vector<Part>& parts) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < parts.size(); ++i) os << (i ? "," : "") << parts[i].cells.size();
  os << ")";
  return os.str();
}

// Diagonal bookkeeping plus the accumulated unitary U (B = U S U*).
class Engine {
 public:
  Engine(CellTuple values, const EngineOptions& o) : val(std::move(values)), opts(o) {
    if (opts.build_unitary) u = CMatrix::Identity(val.size(), val.size());
  }

  CellTuple val;
  CMatrix u;
  EngineOptions opts;
  EngineStats stats;

  // Rotation on two cells whose mutual off-diagonal entry is zero, so the
  // new diagonal is c2*a + s2*b and s2*a + c2*b exactly.
  void rotate(std::size_t a, std::size_t b, const Scalar& c2) {
    const Scalar s2 = Scalar(1) - c2;
    const Point va = val[a], vb = val[b];
    val[a] = c2 * va + s2 * vb;
    val[b] = s2 * va + c2 * vb;
    ++stats.rotations;
    if (!opts.build_unitary) return;
    const double c = std::sqrt(std::max(0.0, c2.to_double()));
    const double s = std::sqrt(std::max(0.0, s2.to_double()));
    const Eigen::RowVectorXcd ra = u.row(static_cast<Eigen::Index>(a));
    const Eigen::RowVectorXcd rb = u.row(static_cast<Eigen::Index>(b));
    u.row(static_cast<Eigen::Index>(a)) = c * ra + s * rb;
    u.row(static_cast<Eigen::Index>(b)) = -s * ra + c * rb;
  }

  bool constant(const std::vector<std::size_t>& cells) const {
    for (auto c : cells)
      if (!approx_equal(val[c], val[cells.front()], opts.tol)) return false;
    return true;
  }

  // Fourier conjugation of a diagonal corner: every diagonal entry becomes the mean.
  void flatten(const std::vector<std::size_t>& cells) {
    if (cells.empty() || constant(cells)) return;
    const Point m = mean_of(val, cells);
    for (auto c : cells) val[c] = m;
    ++stats.fourier_blocks;
    if (!opts.build_unitary) return;
    const auto f = fourier_unitary(cells.size()).u;
    CMatrix rows(static_cast<Eigen::Index>(cells.size()), u.cols());
    for (std::size_t i = 0; i < cells.size(); ++i) rows.row(static_cast<Eigen::Index>(i)) = u.row(static_cast<Eigen::Index>(cells[i]));
    rows = f * rows;
    for (std::size_t i = 0; i < cells.size(); ++i) u.row(static_cast<Eigen::Index>(cells[i])) = rows.row(static_cast<Eigen::Index>(i));
  }

  struct ScalarOut {
    std::vector<std::size_t> q, residual;
  };

  struct LemmaOut {
    std::vector<std::size_t> q;
    std::vector<Part> r_parts, rest_parts;
    Scalar tau;
    std::size_t m = 0;
  };

  ScalarOut scalar(const std::vector<std::size_t>& cells, bool finalize, std::vector<Scalar>* trace) {
    ScalarOut out;
    auto atoms = group_parts(val, cells, opts.tol);
    if (atoms.size() <= 1) {
      out.q = cells;
      return out;
    }
    const std::size_t b = cells.size();
    std::vector<std::size_t> order(atoms.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return atoms[x].cells.size() > atoms[y].cells.size(); });
    std::optional<std::size_t> pivot;
    for (std::size_t p : order) {
      const std::size_t cp = atoms[p].cells.size(), rest = b - cp;
      bool ok = true;
      for (std::size_t i = 0; i < atoms.size() && ok; ++i)
        if (i != p && (atoms[i].cells.size() * cp) % rest != 0) ok = false;
      if (ok) {
        pivot = p;
        break;
      }
    }
    if (!pivot) {
      if (opts.policy == ResolutionPolicy::Flatten) {
        flatten(cells);
        stats.flattened = true;
        out.q = cells;
        if (trace) trace->push_back(Scalar(1));
        return out;
      }
      fail(ErrorCode::ResolutionInsufficient, "a corner of " + std::to_string(b) + " cells with atom counts " +
                                                  counts_text(atoms) + " has no split representable at this resolution");
    }
    // The pivot atom is cut into pieces with the relative traces of the others.
    const Part& pv = atoms[*pivot];
    const std::size_t cp = pv.cells.size(), rest = b - cp;
    std::vector<Part> s, t;
    std::size_t off = 0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      if (i == *pivot) continue;
      s.push_back(atoms[i]);
      const std::size_t sz = atoms[i].cells.size() * cp / rest;
      t.push_back(Part{pv.value, std::vector<std::size_t>(pv.cells.begin() + static_cast<long>(off),
                                                          pv.cells.begin() + static_cast<long>(off + sz))});
      off += sz;
    }
    for (std::size_t level = 0; level < opts.depth; ++level) {
      const std::size_t ns = total(s), nt = total(t);
      if (ns + nt == 0) break;
      std::vector<std::size_t> rem = cells_in(s);
      append(rem, cells_in(t));
      if (ns == 0 || nt == 0 || constant(rem)) {
        // One side vanished: the other already has the right trace.
        if (!constant(rem)) scalar(rem, true, nullptr);
        append(out.q, rem);
        s.clear();
        t.clear();
        if (trace) trace->push_back(frac(out.q.size(), b));
        break;
      }
      auto lo = lemma(std::move(s), std::move(t));
      append(out.q, lo.q);
      s = std::move(lo.r_parts);
      t = std::move(lo.rest_parts);
      if (trace) trace->push_back(frac(out.q.size(), b));
    }
    out.residual = cells_in(s);
    append(out.residual, cells_in(t));
    if (finalize && !out.residual.empty()) {
      flatten(out.residual);
      append(out.q, out.residual);
      out.residual.clear();
    }
    return out;
  }

  LemmaOut lemma(std::vector<Part> s, std::vector<Part> t) {
    std::size_t ns = total(s), nt = total(t);
    if (ns > nt) {
      std::swap(s, t);
      std::swap(ns, nt);
    }
    if (s.size() != t.size()) fail(ErrorCode::PairingInvalid, "sides have different part counts");
    for (std::size_t i = 0; i < s.size(); ++i)
      if (t[i].cells.size() * ns != s[i].cells.size() * nt)
        fail(ErrorCode::PairingInvalid, "paired parts have different relative traces");
    LemmaOut out;
    out.tau = frac(ns, ns + nt);
    // (m+1) tau <= 1 < (m+2) tau
    out.m = (ns + nt) / ns - 1;
    const std::size_t m = out.m;
    std::vector<std::vector<std::size_t>> qj(m + 1);
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::size_t e = s[i].cells.size();
      const auto& f = t[i].cells;
      for (std::size_t r = 0; r < e; ++r) {
        std::size_t prev = s[i].cells[r];
        for (std::size_t j = 1; j <= m; ++j) {
          const std::size_t cell = f[(j - 1) * e + r];
          rotate(prev, cell, out.tau / (Scalar(1) - Scalar(static_cast<long>(j - 1)) * out.tau));
          prev = cell;
        }
      }
      for (std::size_t j = 1; j <= m; ++j)
        qj[j].insert(qj[j].end(), f.begin() + static_cast<long>((j - 1) * e), f.begin() + static_cast<long>(j * e));
      std::vector<std::size_t> fm(f.begin() + static_cast<long>((m - 1) * e), f.begin() + static_cast<long>(m * e));
      out.r_parts.push_back(Part{val[fm.front()], fm});
      if (f.size() > m * e)
        out.rest_parts.push_back(Part{t[i].value, std::vector<std::size_t>(f.begin() + static_cast<long>(m * e), f.end())});
    }
    const std::vector<std::size_t> p = cells_in(s);
    scalar(p, true, nullptr);
    append(out.q, p);
    for (std::size_t j = 1; j < m; ++j) {
      scalar(qj[j], true, nullptr);
      append(out.q, qj[j]);
    }
    return out;
  }
};

double readout_gap(const CMatrix& u, const CellTuple& src, const CellTuple& want) {
  if (u.size() == 0 || src.empty()) return 0;
  const std::size_t n = src.size(), dim = src[0].size();
  Eigen::MatrixXd w = u.cwiseAbs2();
  double gap = 0;
  for (std::size_t c = 0; c < dim; ++c) {
    Eigen::VectorXd s(n);
    for (std::size_t k = 0; k < n; ++k) s(static_cast<Eigen::Index>(k)) = src[k][c].to_double();
    Eigen::VectorXd d = w * s;
    for (std::size_t r = 0; r < n; ++r) gap = std::max(gap, std::abs(d(static_cast<Eigen::Index>(r)) - want[r][c].to_double()));
  }
  return gap;
}

void merge(EngineStats& into, const EngineStats& from) {
  into.rotations += from.rotations;
  into.fourier_blocks += from.fourier_blocks;
  into.flattened = into.flattened || from.flattened;
}

// Row/column layout of a block unitary: block i holds rows[i] and takes the
// source cells cols[i].
struct Plan {
  std::size_t n = 0;
  std::vector<std::vector<std::size_t>> rows, cols;
  CellTuple source;  // exact source values used by the engines
};

struct PlanOutput {
  BlockUnitary u;
  CellTuple diagonal;
  EngineStats stats;
};

PlanOutput execute(const Plan& plan, const EngineOptions& opts) {
  PlanOutput out;
  out.u.n = plan.n;
  out.diagonal.assign(plan.n, Point{});
  for (std::size_t b = 0; b < plan.rows.size(); ++b) {
    if (plan.rows[b].empty()) continue;
    CellTuple local;
    for (auto c : plan.cols[b]) local.push_back(plan.source[c]);
    Engine e(std::move(local), opts);
    std::vector<std::size_t> all(plan.cols[b].size());
    std::iota(all.begin(), all.end(), 0);
    e.scalar(all, true, nullptr);
    for (std::size_t r = 0; r < all.size(); ++r) out.diagonal[plan.rows[b][r]] = e.val[r];
    merge(out.stats, e.stats);
    if (opts.build_unitary) out.u.blocks.push_back({plan.rows[b], plan.cols[b], std::move(e.u)});
  }
  return out;
}

// counts[i][j] cells of source atom j go to target block i.
Plan make_plan(const std::vector<std::size_t>& target_block, const std::vector<std::size_t>& source_atom,
               const std::vector<std::vector<std::size_t>>& counts, const CellTuple& source) {
  Plan p;
  p.n = target_block.size();
  p.source = source;
  const std::size_t m = counts.size(), k = m ? counts[0].size() : 0;
  p.rows.assign(m, {});
  p.cols.assign(m, {});
  for (std::size_t c = 0; c < p.n; ++c) p.rows[target_block[c]].push_back(c);
  std::vector<std::vector<std::size_t>> by_atom(k);
  for (std::size_t c = 0; c < p.n; ++c) by_atom[source_atom[c]].push_back(c);
  std::vector<std::size_t> next(k, 0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t r = 0; r < counts[i][j]; ++r) {
        if (next[j] >= by_atom[j].size()) fail(ErrorCode::InternalInconsistency, "source cells exhausted");
        p.cols[i].push_back(by_atom[j][next[j]++]);
      }
  for (std::size_t i = 0; i < m; ++i)
    if (p.rows[i].size() != p.cols[i].size())
      fail(ErrorCode::InternalInconsistency, "block " + std::to_string(i) + " rows and columns differ");
  return p;
}

std::size_t atom_index(const Measure& m, const Point& v, double tol) {
  for (std::size_t i = 0; i < m.size(); ++i)
    if (approx_equal(m.atoms[i], v, tol)) return i;
  fail(ErrorCode::InternalInconsistency, "cell value is not an atom");
}

TransportMatrix exact_witness(const Measure& target, const Measure& source,
                              const std::optional<TransportMatrix>& given, double tol) {
  TransportMatrix d;
  if (given) {
    d = *given;
    if (!verify_witness(target, source, d, tol)) fail(ErrorCode::InvalidWitness, "supplied witness does not verify");
  } else {
    auto v = check_majorization(target, source, tol);
    if (!v.feasible) fail(ErrorCode::NotMajorized, "target is not majorized by the source");
    d = *v.witness;
  }
  bool exact = true;
  for (const auto& row : d.entries)
    for (const auto& x : row) exact = exact && x.is_exact();
  if (exact) return d;
  for (auto& row : d.entries)
    for (auto& x : row) x = Scalar(rationalize(x.to_double(), 1e-12));
  for (auto& x : d.q) x = Scalar(rationalize(x.to_double(), 1e-12));
  for (auto& x : d.p) x = Scalar(rationalize(x.to_double(), 1e-12));
  if (!verify_witness(target, source, d, tol))
    fail(ErrorCode::NotRational, "transport witness has no nearby rational form");
  return d;
}

// Integer counts per (target block, source atom) at resolution n.
std::optional<std::vector<std::vector<std::size_t>>> block_counts(const TransportMatrix& d, std::size_t n) {
  std::vector<std::vector<std::size_t>> x(d.rows(), std::vector<std::size_t>(d.cols()));
  for (std::size_t i = 0; i < d.rows(); ++i)
    for (std::size_t j = 0; j < d.cols(); ++j) {
      mpq_class c = d.q[i].rational() * d.entries[i][j].rational() * static_cast<unsigned long>(n);
      if (c.get_den() != 1) return std::nullopt;
      x[i][j] = c.get_num().get_ui();
    }
  return x;
}

SchurHornResult finish(PlanOutput&& po, const CellTuple& source, const CellTuple& target, TransportMatrix w) {
  SchurHornResult r;
  r.n = po.u.n;
  r.u = std::move(po.u);
  r.defect = r.u.defect();
  r.source = source;
  r.target = target;
  r.diagonal = std::move(po.diagonal);
  r.witness = std::move(w);
  r.stats = po.stats;
  auto num = r.u.readout(source);
  for (std::size_t c = 0; c < r.n; ++c)
    for (std::size_t k = 0; k < num[c].size(); ++k) {
      r.readout_error = std::max(r.readout_error, std::abs(num[c][k] - r.diagonal[c][k].to_double()));
      r.max_error = std::max(r.max_error, std::abs(num[c][k] - target[c][k].to_double()));
    }
  return r;
}

// Shared driver: target/source given cellwise at base resolution n0 with atom
// indices into the two measures; finds a refinement t that works.
SchurHornResult run_schur_horn(const CellTuple& target0, const std::vector<std::size_t>& tblock0,
                               const CellTuple& source0, const std::vector<std::size_t>& satom0,
                               const TransportMatrix& w, const EngineOptions& opts) {
  const std::size_t n0 = target0.size();
  // smallest refinement making every block count integral
  std::vector<Scalar> masses;
  for (std::size_t i = 0; i < w.rows(); ++i)
    for (std::size_t j = 0; j < w.cols(); ++j)
      masses.push_back(w.q[i] * w.entries[i][j] * Scalar(static_cast<long>(n0)));
  const std::size_t base = lcm_of_denominators(masses).get_ui();
  auto expand = [](const std::vector<std::size_t>& v, std::size_t t) {
    std::vector<std::size_t> out;
    for (auto x : v) out.insert(out.end(), t, x);
    return out;
  };
  auto attempt = [&](std::size_t t, bool build) {
    auto counts = block_counts(w, n0 * t);
    if (!counts) fail(ErrorCode::ResolutionInsufficient, "transport masses are not multiples of 1/N at N=" +
                                                             std::to_string(n0 * t));
    Plan plan = make_plan(expand(tblock0, t), expand(satom0, t), *counts, refine(source0, t));
    EngineOptions o = opts;
    o.build_unitary = build;
    return execute(plan, o);
  };
  std::size_t t = 0;
  if (opts.resolution) {
    if (opts.resolution % n0 != 0)
      fail(ErrorCode::ResolutionInsufficient, "resolution is not a multiple of the model size");
    t = opts.resolution / n0;
  } else if (!opts.auto_n) {
    t = base;
  } else {
    for (std::size_t cand = base; n0 * cand <= opts.max_n; cand += base) {
      try {
        attempt(cand, false);
        t = cand;
        break;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::ResolutionInsufficient) throw;
      }
    }
    if (!t)
      fail(ErrorCode::ResolutionInsufficient, "no resolution up to " + std::to_string(opts.max_n) + " works");
  }
  return finish(attempt(t, opts.build_unitary), refine(source0, t), refine(target0, t), w);
}

}  // namespace

std::vector<Part> group_parts(const CellTuple& cells, const std::vector<std::size_t>& subset, double tol) {
  std::vector<Part> parts;
  for (auto c : subset) {
    bool found = false;
    for (auto& p : parts)
      if (approx_equal(p.value, cells[c], tol)) {
        p.cells.push_back(c);
        found = true;
        break;
      }
    if (!found) parts.push_back(Part{cells[c], {c}});
  }
  return parts;
}

std::vector<Part> group_parts(const CellTuple& cells, double tol) {
  std::vector<std::size_t> all(cells.size());
  std::iota(all.begin(), all.end(), 0);
  return group_parts(cells, all, tol);
}

Measure cell_measure(const CellTuple& cells, double tol) {
  if (cells.empty()) fail(ErrorCode::InvalidInput, "empty cell tuple");
  std::vector<Point> atoms;
  std::vector<Scalar> weights;
  for (const auto& p : group_parts(cells, tol)) {
    atoms.push_back(p.value);
    weights.push_back(frac(p.cells.size(), cells.size()));
  }
  return make_measure(atoms, weights, tol);
}

CellTuple cells_of(const Measure& m, std::size_t n) {
  CellTuple out;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!m.weights[i].is_exact()) fail(ErrorCode::NotRational, "cell layouts need rational weights");
    mpq_class c = m.weights[i].rational() * static_cast<unsigned long>(n);
    if (c.get_den() != 1)
      fail(ErrorCode::ResolutionInsufficient,
           "weight " + m.weights[i].str() + " is not a multiple of 1/" + std::to_string(n));
    out.insert(out.end(), c.get_num().get_ui(), m.atoms[i]);
  }
  return out;
}

CellTuple refine(const CellTuple& cells, std::size_t t) {
  CellTuple out;
  out.reserve(cells.size() * t);
  for (const auto& c : cells) out.insert(out.end(), t, c);
  return out;
}

std::optional<ResemblancePairing> resemblance_check(const std::vector<Part>& s, const std::vector<Part>& t) {
  if (s.size() != t.size()) return std::nullopt;
  const std::size_t ns = total(s), nt = total(t);
  if (ns == 0 || nt == 0) return std::nullopt;
  auto order = [](const std::vector<Part>& ps, std::size_t tot) {
    std::vector<std::size_t> idx(ps.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return frac(ps[a].cells.size(), tot) < frac(ps[b].cells.size(), tot);
    });
    return idx;
  };
  auto is = order(s, ns), it = order(t, nt);
  ResemblancePairing p;
  for (std::size_t r = 0; r < s.size(); ++r) {
    Scalar a = frac(s[is[r]].cells.size(), ns), b = frac(t[it[r]].cells.size(), nt);
    if (!(a == b)) return std::nullopt;
    p.s_index.push_back(is[r]);
    p.t_index.push_back(it[r]);
    p.relative_traces.push_back(a);
  }
  return p;
}

LemmaStepResult lemma_ind_step(const CellTuple& cells, const std::vector<Part>& s, const std::vector<Part>& t,
                               const EngineOptions& opts) {
  const std::size_t n = cells.size();
  std::vector<int> seen(n, 0);
  for (const auto* side : {&s, &t})
    for (const auto& part : *side)
      for (auto c : part.cells) {
        if (c >= n) fail(ErrorCode::OutOfRange, "cell index out of range");
        if (!approx_equal(cells[c], part.value, opts.tol))
          fail(ErrorCode::PairingInvalid, "cell " + std::to_string(c) + " does not carry its part value");
        ++seen[c];
      }
  for (std::size_t c = 0; c < n; ++c)
    if (seen[c] != 1) fail(ErrorCode::PairingInvalid, "parts must partition the cells");
  LemmaStepResult res;
  Engine e(cells, opts);
  if (total(s) == 0 || total(t) == 0) {
    // Degenerate corner: the whole space is a single scalar problem.
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    e.scalar(all, true, nullptr);
    res.q = all;
    res.tau_p = Scalar(0);
  } else {
    auto pairing = resemblance_check(s, t);
    if (!pairing) fail(ErrorCode::PairingInvalid, "the tuples do not resemble each other");
    std::vector<Part> ss, tt;
    for (std::size_t r = 0; r < pairing->s_index.size(); ++r) {
      ss.push_back(s[pairing->s_index[r]]);
      tt.push_back(t[pairing->t_index[r]]);
    }
    auto lo = e.lemma(std::move(ss), std::move(tt));
    res.q = lo.q;
    res.r_parts = lo.r_parts;
    res.rest_parts = lo.rest_parts;
    res.r = cells_in(lo.r_parts);
    res.rest = cells_in(lo.rest_parts);
    res.tau_p = lo.tau;
    res.m = lo.m;
  }
  res.diagonal = e.val;
  res.stats = e.stats;
  if (opts.build_unitary) res.u = make_unitary(std::move(e.u));
  return res;
}

ScalarEngineResult scalar_diagonal_engine(const CellTuple& cells, const EngineOptions& opts) {
  if (cells.empty()) fail(ErrorCode::InvalidInput, "empty cell tuple");
  ScalarEngineResult res;
  res.n = cells.size();
  res.source = cells;
  std::vector<std::size_t> all(cells.size());
  std::iota(all.begin(), all.end(), 0);
  res.mean = mean_of(cells, all);
  Engine e(cells, opts);
  auto out = e.scalar(all, opts.finalize, &res.q_traces);
  res.q = std::move(out.q);
  res.residual = std::move(out.residual);
  std::sort(res.q.begin(), res.q.end());
  std::sort(res.residual.begin(), res.residual.end());
  res.diagonal = e.val;
  res.stats = e.stats;
  if (opts.build_unitary) {
    res.readout_error = readout_gap(e.u, cells, res.diagonal);
    res.u = make_unitary(std::move(e.u));
  }
  return res;
}

ScalarEngineResult scalar_diagonal_engine(const Measure& m, const EngineOptions& opts) {
  for (const auto& w : m.weights)
    if (!w.is_exact()) fail(ErrorCode::NotRational, "resolution search needs rational weights");
  const std::size_t base = lcm_of_denominators(m.weights).get_ui();
  if (opts.resolution) return scalar_diagonal_engine(cells_of(m, opts.resolution), opts);
  if (!opts.auto_n) return scalar_diagonal_engine(cells_of(m, base), opts);
  EngineOptions dry = opts;
  dry.build_unitary = false;
  for (std::size_t n = base; n <= opts.max_n; n += base) {
    try {
      scalar_diagonal_engine(cells_of(m, n), dry);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ResolutionInsufficient) continue;
      throw;
    }
    return scalar_diagonal_engine(cells_of(m, n), opts);
  }
  fail(ErrorCode::ResolutionInsufficient, "no resolution up to " + std::to_string(opts.max_n) + " works");
}

double BlockUnitary::defect() const {
  double d = 0;
  for (const auto& b : blocks) d = std::max(d, unitarity_defect(b.u));
  return d;
}

CMatrix BlockUnitary::dense() const {
  CMatrix m = CMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (const auto& b : blocks)
    for (std::size_t r = 0; r < b.rows.size(); ++r)
      for (std::size_t c = 0; c < b.cols.size(); ++c)
        m(static_cast<Eigen::Index>(b.rows[r]), static_cast<Eigen::Index>(b.cols[c])) =
            b.u(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  return m;
}

std::vector<std::vector<double>> BlockUnitary::readout(const CellTuple& s) const {
  const std::size_t dim = s.empty() ? 0 : s[0].size();
  std::vector<std::vector<double>> out(n, std::vector<double>(dim, 0.0));
  for (const auto& b : blocks) {
    Eigen::MatrixXd w = b.u.cwiseAbs2();
    for (std::size_t c = 0; c < dim; ++c) {
      Eigen::VectorXd v(static_cast<Eigen::Index>(b.cols.size()));
      for (std::size_t k = 0; k < b.cols.size(); ++k) v(static_cast<Eigen::Index>(k)) = s[b.cols[k]][c].to_double();
      Eigen::VectorXd d = w * v;
      for (std::size_t r = 0; r < b.rows.size(); ++r) out[b.rows[r]][c] = d(static_cast<Eigen::Index>(r));
    }
  }
  return out;
}

SchurHornResult schur_horn_engine(const Measure& target, const Measure& source, const EngineOptions& opts,
                                  const std::optional<TransportMatrix>& witness) {
  if (target.n != source.n) fail(ErrorCode::DimensionMismatch, "target and source dimensions differ");
  auto w = exact_witness(target, source, witness, opts.tol);
  // Base layout: one cell per unit of the common denominator of the masses.
  std::vector<Scalar> ws = target.weights;
  ws.insert(ws.end(), source.weights.begin(), source.weights.end());
  for (const auto& x : ws)
    if (!x.is_exact()) fail(ErrorCode::NotRational, "weights must be rational");
  const std::size_t n0 = lcm_of_denominators(ws).get_ui();
  CellTuple t0 = cells_of(target, n0), s0 = cells_of(source, n0);
  std::vector<std::size_t> tb, sa;
  for (std::size_t i = 0; i < target.size(); ++i)
    tb.insert(tb.end(), mpq_class(target.weights[i].rational() * static_cast<unsigned long>(n0)).get_num().get_ui(), i);
  for (std::size_t j = 0; j < source.size(); ++j)
    sa.insert(sa.end(), mpq_class(source.weights[j].rational() * static_cast<unsigned long>(n0)).get_num().get_ui(), j);
  EngineOptions o = opts;
  if (o.resolution && o.resolution % n0 != 0)
    fail(ErrorCode::ResolutionInsufficient, "resolution must be a multiple of " + std::to_string(n0));
  return run_schur_horn(t0, tb, s0, sa, w, o);
}

SchurHornResult schur_horn_engine(const CellTuple& target, const CellTuple& source, const EngineOptions& opts,
                                  const std::optional<TransportMatrix>& witness) {
  if (target.size() != source.size() || target.empty())
    fail(ErrorCode::DimensionMismatch, "target and source need the same positive number of cells");
  Measure tm = cell_measure(target, opts.tol), sm = cell_measure(source, opts.tol);
  if (tm.n != sm.n) fail(ErrorCode::DimensionMismatch, "target and source dimensions differ");
  auto w = exact_witness(tm, sm, witness, opts.tol);
  std::vector<std::size_t> tb, sa;
  for (const auto& c : target) tb.push_back(atom_index(tm, c, opts.tol));
  for (const auto& c : source) sa.push_back(atom_index(sm, c, opts.tol));
  return run_schur_horn(target, tb, source, sa, w, opts);
}

namespace {

// Integer matrix with the given margins, within one unit of y where possible.
std::vector<std::vector<std::size_t>> round_with_margins(const std::vector<std::vector<double>>& y,
                                                         const std::vector<std::size_t>& rows,
                                                         const std::vector<std::size_t>& cols) {
  const std::size_t m = rows.size(), k = cols.size();
  std::vector<std::vector<std::size_t>> x(m, std::vector<std::size_t>(k, 0));
  std::vector<long> need_r(m), need_c(k);
  for (std::size_t i = 0; i < m; ++i) need_r[i] = static_cast<long>(rows[i]);
  for (std::size_t j = 0; j < k; ++j) need_c[j] = static_cast<long>(cols[j]);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      long f = static_cast<long>(std::floor(std::max(0.0, y[i][j]) + 1e-9));
      f = std::min({f, need_r[i], need_c[j]});
      x[i][j] = static_cast<std::size_t>(f);
      need_r[i] -= f;
      need_c[j] -= f;
    }
  // Distribute the remaining units by max flow; first on the support, then anywhere.
  for (int pass = 0; pass < 2; ++pass) {
    const std::size_t nodes = m + k + 2, src = m + k, snk = m + k + 1;
    std::vector<std::vector<long>> cap(nodes, std::vector<long>(nodes, 0));
    for (std::size_t i = 0; i < m; ++i) cap[src][i] = need_r[i];
    for (std::size_t j = 0; j < k; ++j) cap[m + j][snk] = need_c[j];
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < k; ++j)
        if (pass == 1 || y[i][j] > 1e-12) cap[i][m + j] = pass == 0 ? 1 : need_r[i];
    std::vector<std::vector<long>> flow(nodes, std::vector<long>(nodes, 0));
    while (true) {
      std::vector<std::size_t> parent(nodes, nodes);
      std::queue<std::size_t> bfs;
      bfs.push(src);
      parent[src] = src;
      while (!bfs.empty() && parent[snk] == nodes) {
        auto v = bfs.front();
        bfs.pop();
        for (std::size_t w = 0; w < nodes; ++w)
          if (parent[w] == nodes && cap[v][w] - flow[v][w] > 0) {
            parent[w] = v;
            bfs.push(w);
          }
      }
      if (parent[snk] == nodes) break;
      long aug = 1L << 40;
      for (auto v = snk; v != src; v = parent[v]) aug = std::min(aug, cap[parent[v]][v] - flow[parent[v]][v]);
      for (auto v = snk; v != src; v = parent[v]) {
        flow[parent[v]][v] += aug;
        flow[v][parent[v]] -= aug;
      }
    }
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < k; ++j)
        if (flow[i][m + j] > 0) {
          x[i][j] += static_cast<std::size_t>(flow[i][m + j]);
          need_r[i] -= flow[i][m + j];
          need_c[j] -= flow[i][m + j];
        }
    bool done = true;
    for (auto v : need_r) done = done && v == 0;
    if (done) break;
  }
  for (auto v : need_r)
    if (v != 0) fail(ErrorCode::InternalInconsistency, "margin-preserving rounding failed");
  return x;
}

Scalar grid_round(const Scalar& x, const Scalar& eps) {
  if (x.is_exact()) {
    mpq_class q = x.rational() / eps.rational() + mpq_class(1, 2);
    mpz_class f;
    mpz_fdiv_q(f.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return Scalar(mpq_class(f) * eps.rational());
  }
  const double k = std::floor(x.to_double() / eps.to_double() + 0.5);
  return Scalar(mpq_class(static_cast<long>(k)) * eps.rational());
}

}  // namespace

ApproxSchurHornResult approx_schur_horn(const CellTuple& target, const CellTuple& source, double eps,
                                        const EngineOptions& opts) {
  if (!(eps > 0)) fail(ErrorCode::InvalidInput, "eps must be positive");
  if (target.size() != source.size() || target.empty())
    fail(ErrorCode::DimensionMismatch, "target and source need the same positive number of cells");
  const std::size_t n0 = target.size(), dim = target[0].size();
  ApproxSchurHornResult res;
  res.eps = Scalar(rationalize(eps, eps * 1e-9));

  auto measure_error = [&](const SchurHornResult& sh, std::size_t t) {
    auto num = sh.u.readout(refine(source, t));
    const CellTuple want = refine(target, t);
    double e = 0;
    for (std::size_t c = 0; c < num.size(); ++c)
      for (std::size_t k = 0; k < dim; ++k) e = std::max(e, std::abs(num[c][k] - want[c][k].to_double()));
    return e;
  };

  if (backend_of(target) == Backend::Exact && backend_of(source) == Backend::Exact &&
      check_majorization(cell_measure(target), cell_measure(source)).feasible) {
    try {
      EngineOptions o = opts;
      o.auto_n = true;
      res.sh = schur_horn_engine(target, source, o);
      res.exact_path = true;
      res.refinement = res.sh.n / n0;
      res.max_error = measure_error(res.sh, res.refinement);
      return res;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ResolutionInsufficient) throw;
    }
  }

  // Source snapped to the eps-grid; target averaged over its grid cells.
  CellTuple snapped(n0);
  for (std::size_t c = 0; c < n0; ++c)
    for (const auto& x : source[c]) snapped[c].push_back(grid_round(x, res.eps));
  CellTuple keys(n0);
  for (std::size_t c = 0; c < n0; ++c)
    for (const auto& x : target[c]) keys[c].push_back(grid_round(x, res.eps));
  auto groups = group_parts(keys, 0.0);
  const std::size_t m = groups.size();
  std::vector<Point> bar(m);
  std::vector<std::size_t> group_of(n0), n_i(m);
  for (std::size_t i = 0; i < m; ++i) {
    bar[i] = mean_of(target, groups[i].cells);
    n_i[i] = groups[i].cells.size();
    for (auto c : groups[i].cells) {
      group_of[c] = i;
      for (std::size_t k = 0; k < dim; ++k)
        res.grouping_error = std::max(res.grouping_error, std::abs((target[c][k] - bar[i][k]).to_double()));
    }
  }
  auto atoms = group_parts(snapped, 0.0);
  const std::size_t k = atoms.size();
  std::vector<std::size_t> atom_of(n0), m_j(k);
  for (std::size_t j = 0; j < k; ++j) {
    m_j[j] = atoms[j].cells.size();
    for (auto c : atoms[j].cells) atom_of[c] = j;
  }

  // min t  s.t.  D 1 = 1, n^T D = m^T, |sum_j d_ij alpha_j - bar_i| <= t
  const std::size_t nd = m * k, tv = nd, ns = 2 * m * dim, vars = nd + 1 + ns;
  LpProblem lp;
  auto row = [&]() { return std::vector<Scalar>(vars, Scalar(0)); };
  for (std::size_t i = 0; i < m; ++i) {
    auto r = row();
    for (std::size_t j = 0; j < k; ++j) r[i * k + j] = Scalar(1);
    lp.A.push_back(r);
    lp.b.push_back(Scalar(1));
  }
  for (std::size_t j = 0; j < k; ++j) {
    auto r = row();
    for (std::size_t i = 0; i < m; ++i) r[i * k + j] = Scalar(static_cast<long>(n_i[i]));
    lp.A.push_back(r);
    lp.b.push_back(Scalar(static_cast<long>(m_j[j])));
  }
  std::size_t slack = nd + 1;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t c = 0; c < dim; ++c)
      for (int sgn : {1, -1}) {
        auto r = row();
        for (std::size_t j = 0; j < k; ++j) r[i * k + j] = Scalar(sgn) * atoms[j].value[c];
        r[tv] = Scalar(-1);
        r[slack++] = Scalar(1);
        lp.A.push_back(r);
        lp.b.push_back(Scalar(sgn) * bar[i][c]);
      }
  lp.c.assign(vars, Scalar(0));
  lp.c[tv] = Scalar(1);
  auto sol = solve_lp(lp, opts.tol);
  if (sol.status != LpStatus::Optimal)
    fail(ErrorCode::NotApproxMajorized, "discretised transport problem is infeasible");
  res.lp_deviation = sol.objective.to_double();
  if (res.lp_deviation > eps + opts.tol)
    fail(ErrorCode::NotApproxMajorized,
         "discretised transport misses the target by " + std::to_string(res.lp_deviation) + " > eps");

  // Refine the model until integer block counts keep the block means within 1.5 eps.
  struct Choice {
    std::size_t r;
    std::vector<std::vector<std::size_t>> x;
  };
  std::optional<Choice> strict, loose;
  for (std::size_t r = 1; r <= 64 && !strict; ++r) {
    std::vector<std::vector<double>> y(m, std::vector<double>(k));
    std::vector<std::size_t> rr(m), cc(k);
    for (std::size_t i = 0; i < m; ++i) {
      rr[i] = r * n_i[i];
      for (std::size_t j = 0; j < k; ++j) y[i][j] = static_cast<double>(rr[i]) * sol.x[i * k + j].to_double();
    }
    for (std::size_t j = 0; j < k; ++j) cc[j] = r * m_j[j];
    auto x = round_with_margins(y, rr, cc);
    double dev = 0;
    for (std::size_t i = 0; i < m; ++i) {
      Point b = zero_point(dim);
      for (std::size_t j = 0; j < k; ++j) b = b + Scalar(static_cast<long>(x[i][j])) * atoms[j].value;
      b = frac(1, rr[i]) * b;
      for (std::size_t c = 0; c < dim; ++c) dev = std::max(dev, std::abs((b[c] - bar[i][c]).to_double()));
    }
    if (dev > 1.5 * eps) continue;
    if (!loose) loose = Choice{r, x};
    Plan plan = make_plan(
        [&] {
          std::vector<std::size_t> v;
          for (std::size_t c = 0; c < n0; ++c) v.insert(v.end(), r, group_of[c]);
          return v;
        }(),
        [&] {
          std::vector<std::size_t> v;
          for (std::size_t c = 0; c < n0; ++c) v.insert(v.end(), r, atom_of[c]);
          return v;
        }(),
        x, refine(snapped, r));
    EngineOptions dry = opts;
    dry.build_unitary = false;
    dry.policy = ResolutionPolicy::Strict;
    try {
      execute(plan, dry);
      strict = Choice{r, x};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ResolutionInsufficient) throw;
    }
  }
  if (!strict && !loose) fail(ErrorCode::NotApproxMajorized, "no refinement up to 64 keeps block means within 1.5 eps");
  const Choice& ch = strict ? *strict : *loose;
  EngineOptions run = opts;
  if (!strict) run.policy = ResolutionPolicy::Flatten;
  const std::size_t r = ch.r;
  std::vector<std::size_t> tb, sa;
  for (std::size_t c = 0; c < n0; ++c) {
    tb.insert(tb.end(), r, group_of[c]);
    sa.insert(sa.end(), r, atom_of[c]);
  }
  Plan plan = make_plan(tb, sa, ch.x, refine(snapped, r));
  TransportMatrix w;
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<Scalar> rowv;
    for (std::size_t j = 0; j < k; ++j) rowv.push_back(frac(ch.x[i][j], r * n_i[i]));
    w.entries.push_back(rowv);
    w.q.push_back(frac(n_i[i], n0));
  }
  for (std::size_t j = 0; j < k; ++j) w.p.push_back(frac(m_j[j], n0));
  res.refinement = r;
  res.sh = finish(execute(plan, run), refine(snapped, r), refine(target, r), std::move(w));
  res.max_error = measure_error(res.sh, r);
  return res;
}

namespace {

CMatrix conj_diag(const CMatrix& u, const std::vector<Complex>& d) {
  CVector v(static_cast<Eigen::Index>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i) v(static_cast<Eigen::Index>(i)) = d[i];
  return u * v.asDiagonal() * u.adjoint();
}

}  // namespace

CarpenterResult carpenter_exact(const Measure& a, const EngineOptions& opts) {
  auto maj = carpenter_majorant(a);
  EngineOptions o = opts;
  if (!o.resolution) o.auto_n = true;
  CarpenterResult res;
  res.projections = maj.measure;
  res.sh = schur_horn_engine(a, maj.measure, o, maj.transport);
  const std::size_t dim = a.n;
  for (const auto& b : res.sh.u.blocks) {
    std::vector<CMatrix> p;
    for (std::size_t i = 0; i < dim; ++i) {
      std::vector<Complex> d;
      for (auto c : b.cols) d.emplace_back(res.sh.source[c][i].to_double());
      p.push_back(conj_diag(b.u, d));
      res.projection_defect = std::max({res.projection_defect, max_abs(p.back() * p.back() - p.back()),
                                        max_abs(p.back() - p.back().adjoint())});
    }
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = i + 1; j < dim; ++j)
        res.commutation_defect = std::max(res.commutation_defect, max_abs(p[i] * p[j] - p[j] * p[i]));
  }
  return res;
}

UnitaryDiagonalResult unitary_diagonal(const Measure& a, const EngineOptions& opts) {
  auto maj = unitary_majorant(a, opts.tol);
  EngineOptions o = opts;
  if (!o.resolution) o.auto_n = true;
  UnitaryDiagonalResult res;
  res.spectrum = maj.measure;
  res.sh = schur_horn_engine(a, maj.measure, o, maj.transport);
  for (const auto& b : res.sh.u.blocks) {
    std::vector<Complex> d;
    for (auto c : b.cols) d.emplace_back(res.sh.source[c][0].to_double(), res.sh.source[c][1].to_double());
    CMatrix v = conj_diag(b.u, d);
    res.unitary_defect = std::max(res.unitary_defect, unitarity_defect(v));
  }
  return res;
}

}  // namespace majlab
