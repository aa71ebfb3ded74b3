#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "majlab/error.hpp"

namespace majlab::cmd {

using io::Json;
using io::to_json;

namespace {

Scalar q(long a, long b = 1) { return Scalar(mpq_class(a, b)); }

Measure uniform(std::vector<Point> atoms) {
  std::vector<Scalar> w(atoms.size(), q(1, static_cast<long>(atoms.size())));
  return make_measure(std::move(atoms), std::move(w));
}

Measure read_measure(const Json& j, const Options& o) { return io::measure_from(j, o.as_float, o.tol); }

CVector random_beta(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CVector v(static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = Complex(g(rng), g(rng));
  return v;
}

Json terms_json(const std::vector<BirkhoffTerm>& terms) {
  Json a = Json::array();
  for (const auto& t : terms) a.push_back(Json{{"weight", to_json(t.weight)}, {"permutation", io::one_based(t.perm)}});
  return a;
}

Json overlap_json(const OverlapCertificate& c) {
  return Json{{"rows", {c.row1 + 1, c.row2 + 1}}, {"column", c.column + 1}, {"product", to_json(c.product)}};
}

bool same_measure(const Measure& a, const Measure& b, double tol) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    bool hit = false;
    for (std::size_t j = 0; j < b.size() && !hit; ++j)
      hit = approx_equal(a.atoms[i], b.atoms[j], tol) && approx_equal(a.weights[i], b.weights[j], tol);
    if (!hit) return false;
  }
  return true;
}

EngineOptions engine_options(const Options& o, std::size_t resolution) {
  EngineOptions e;
  e.tol = o.tol;
  e.resolution = resolution;
  e.auto_n = resolution == 0;
  return e;
}

Json schur_horn_json(const SchurHornResult& r, const Measure& target, double tol) {
  const Measure achieved = cell_measure(r.diagonal, tol);
  return Json{{"n", r.n},
              {"achieved_diagonal", to_json(achieved)},
              {"achieved_equals_target", same_measure(achieved, target, tol)},
              {"unitarity_defect", r.defect},
              {"max_error", r.max_error},
              {"readout_error", r.readout_error},
              {"witness", to_json(r.witness)},
              {"rotations", r.stats.rotations},
              {"fourier_blocks", r.stats.fourier_blocks}};
}

}  // namespace

Measure arveson_target() { return uniform({{q(1, 2), q(0)}, {q(0), q(1, 2)}, {q(1, 2), q(1, 2)}}); }
Measure arveson_source() { return uniform({{q(1), q(0)}, {q(0), q(0)}, {q(0), q(1)}}); }
Matrix arveson_matrix() { return {{q(1, 2), q(1, 2), q(0)}, {q(0), q(1, 2), q(1, 2)}, {q(1, 2), q(0), q(1, 2)}}; }
Measure horn_target() { return uniform({{q(2), q(0)}, {q(-2), q(0)}, {q(0), q(2)}, {q(0), q(-2)}}); }
Measure horn_source() { return uniform({{q(0), q(0)}, {q(0), q(4)}, {q(3), q(-2)}, {q(-3), q(-2)}}); }

Outcome check(const Json& target_j, const Json& source_j, const Options& o) {
  const Measure t = read_measure(target_j, o), s = read_measure(source_j, o);
  auto v = check_majorization(t, s, o.tol);
  bool in_hull = true;
  for (const auto& a : t.atoms) in_hull = in_hull && hull_membership(a, s, o.tol).member;
  Outcome out;
  out.negative = !v.feasible;
  out.report = Json{{"feasible", v.feasible},
                    {"backend", backend_name(v.backend)},
                    {"target_atoms_in_hull", in_hull},
                    {"barycenters_equal", approx_equal(barycenter(t), barycenter(s), o.tol)},
                    {"witness", v.witness ? to_json(v.witness->entries) : Json(nullptr)},
                    {"certificate", to_json(v.certificate)},
                    {"verified", v.feasible ? verify_witness(t, s, *v.witness, o.tol)
                                            : verify_certificate(t, s, v.certificate, o.tol)}};
  return out;
}

Outcome birkhoff(const Json& matrix, const Options& o) {
  const Matrix d = io::real_matrix_from(matrix, o.as_float);
  auto terms = birkhoff_decompose(d, o.tol);
  const Matrix back = birkhoff_sum(terms, d.size());
  double dev = 0;
  bool exact = true;
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = 0; j < d.size(); ++j) {
      dev = std::max(dev, std::abs((back[i][j] - d[i][j]).to_double()));
      exact = exact && back[i][j] == d[i][j];
    }
  Outcome out;
  out.report = Json{{"terms", terms_json(terms)},
                    {"reconstruction_exact", exact},
                    {"reconstruction_error", dev}};
  return out;
}

Outcome inflate(const Json& matrix, double eps, const Options& o) {
  const Matrix d = io::real_matrix_from(matrix, o.as_float);
  const Inflation inf = eps > 0 ? inflate_approx_ds(d, eps) : inflate_rational_ds(d);
  std::mt19937_64 rng(o.seed);
  double residual = 0;
  const int samples = 20;
  for (int k = 0; k < samples; ++k) residual = std::max(residual, inflation_residual(d, inf, random_beta(d.size(), rng)));
  Outcome out;
  out.report = Json{{"m", inf.m},
                    {"size", inf.u.u.rows()},
                    {"unitarity_defect", inf.u.defect},
                    {"bound", inf.bound},
                    {"counts", inf.counts},
                    {"terms", terms_json(inf.terms)},
                    {"residual_max", residual},
                    {"residual_samples", samples},
                    {"eps", eps > 0 ? Json(eps) : Json(nullptr)}};
  out.matrices["unitary"] = to_json(inf.u.u);
  return out;
}

Outcome certify_arveson3x3(const Options& o) {
  const Matrix d = arveson_matrix();
  auto c = unistochastic_obstruction(d, o.tol);
  Outcome out;
  out.negative = c.has_value();
  out.report = Json{{"matrix", to_json(d)},
                    {"obstructed", c.has_value()},
                    {"certificate", c ? overlap_json(*c) : Json(nullptr)}};
  return out;
}

Outcome certify_irrational(double a, std::size_t m, const Options&) {
  auto r = irrational_inflation_obstruction(a, m);
  Outcome out;
  out.negative = r.obstructed;
  out.report = Json{{"a", r.a}, {"m", r.m}, {"distance", r.distance}, {"obstructed", r.obstructed}};
  return out;
}

Outcome ii1_scalar(const Json& measure, std::size_t depth, bool auto_n, const Options& o) {
  const Measure m = read_measure(measure, o);
  EngineOptions e;
  e.tol = o.tol;
  e.depth = depth;
  e.auto_n = auto_n;
  auto r = scalar_diagonal_engine(m, e);
  Json traces = Json::array();
  for (const auto& t : r.q_traces) traces.push_back(to_json(t));
  Outcome out;
  out.report = Json{{"n", r.n},
                    {"depth", depth},
                    {"mean", to_json(r.mean)},
                    {"achieved_diagonal", to_json(cell_measure(r.diagonal, o.tol))},
                    {"trace_of_Q_K", r.q_traces.empty() ? Json(nullptr) : to_json(r.q_traces.back())},
                    {"q_traces", traces},
                    {"residual_cells", r.residual.size()},
                    {"max_error", r.readout_error},
                    {"unitarity_defect", r.u.defect},
                    {"flattened", r.stats.flattened}};
  out.matrices["unitary"] = to_json(r.u.u);
  return out;
}

Outcome ii1_schur_horn(const Json& target_j, const Json& source_j, std::size_t resolution, const Options& o) {
  const Measure t = read_measure(target_j, o), s = read_measure(source_j, o);
  Outcome out;
  try {
    auto r = schur_horn_engine(t, s, engine_options(o, resolution));
    out.report = schur_horn_json(r, t, o.tol);
    out.matrices["unitary"] = to_json(r.u);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotMajorized) throw;
    auto v = check_majorization(t, s, o.tol);
    out.negative = true;
    out.report = Json{{"feasible", false}, {"certificate", to_json(v.certificate)}, {"reason", e.what()}};
  }
  return out;
}

Outcome ii1_carpenter(const Json& target_j, std::size_t resolution, const Options& o) {
  const Measure a = read_measure(target_j, o);
  auto r = carpenter_exact(a, engine_options(o, resolution));
  Outcome out;
  out.report = schur_horn_json(r.sh, a, o.tol);
  out.report["projections"] = to_json(r.projections);
  out.report["projection_defect"] = r.projection_defect;
  out.report["commutation_defect"] = r.commutation_defect;
  out.matrices["unitary"] = to_json(r.sh.u);
  return out;
}

Outcome bh_synth(const Json& vertices, const Json& target, std::size_t size, const Options& o) {
  const auto x = io::points_from(vertices, o.as_float, "vertices");
  const Json& tj = target.is_object() && target.contains("entries") ? target.at("entries") : target;
  const bool single = tj.is_array() && !tj.empty() && !tj.front().is_array();
  SynthesisResult r;
  if (single || tj.is_number() || tj.is_string()) {
    if (size == 0) fail(ErrorCode::InvalidInput, "a constant target needs --size");
    r = synthesize_constant_diagonal(x, io::point_from(tj, o.as_float), size, o.tol);
  } else {
    auto entries = io::points_from(tj, o.as_float, nullptr);
    if (size != 0 && size != entries.size())
      fail(ErrorCode::DimensionMismatch, "--size differs from the number of target entries");
    r = synthesize_finite_diagonal(x, entries, o.tol);
  }
  Json layout = Json::array();
  for (const auto& g : r.regions) {
    Json terms = Json::array();
    for (const auto& t : g.terms)
      terms.push_back(Json{{"i", t.i + 1}, {"j", t.j + 1}, {"q", to_json(t.q)}, {"alpha", to_json(t.alpha)}});
    layout.push_back(Json{{"kind", g.kind},
                          {"cells", g.cells.size()},
                          {"first_cell", g.cells.empty() ? 0 : g.cells.front() + 1},
                          {"target", to_json(g.target)},
                          {"terms", terms},
                          {"base", g.base},
                          {"groups", g.groups},
                          {"fallback", g.fallback},
                          {"bound", g.bound}});
  }
  Outcome out;
  out.report = Json{{"size", r.m},
                    {"sup_error", r.sup_error},
                    {"readout_error", r.readout_error},
                    {"bound", r.bound},
                    {"constant", r.constant},
                    {"unitarity_defect", r.u.defect},
                    {"vertex_counts", r.vertex_counts},
                    {"min_multiplicity", r.min_multiplicity},
                    {"multiplicity_ok", r.multiplicity_ok},
                    {"block_layout", layout}};
  out.matrices["unitary"] = to_json(r.u.u);
  out.matrices["source"] = to_json(r.source);
  return out;
}

Outcome bh_index(const Json& vertices, const Json& phi_j, const Json& prefix_j, const Options& o) {
  const auto x = io::points_from(vertices, o.as_float, "vertices");
  const Json& pj = phi_j.is_object() && phi_j.contains("phi") ? phi_j.at("phi") : phi_j;
  std::vector<std::size_t> phi;
  for (const auto& v : pj) {
    if (!v.is_number_integer() || v.get<long long>() < 1)
      fail(ErrorCode::InvalidInput, "phi entries are one-based vertex indices");
    phi.push_back(v.get<std::size_t>() - 1);
  }
  const auto prefix = io::points_from(prefix_j, o.as_float, "prefix");
  auto v = arveson_index_check(x, phi, prefix, o.tol);
  Json nu = nullptr;
  if (v.nu) {
    nu = Json::array();
    for (const auto& z : *v.nu) nu.push_back(z.get_str());
  }
  Outcome out;
  out.negative = !v.nu;
  out.report = Json{{"deviation_sum", to_json(v.deviation_sum)},
                    {"lattice_coefficients", nu},
                    {"present", v.nu.has_value()},
                    {"irrational", v.irrational},
                    {"residual", v.residual},
                    {"sufficiency", "necessary condition only"}};
  return out;
}

}  // namespace majlab::cmd
