#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <thread>

#include "commands.hpp"
#include "majlab/error.hpp"

namespace majlab::cmd {

using io::Json;
using io::to_json;

namespace {

Scalar q(long a, long b = 1) { return Scalar(mpq_class(a, b)); }

struct Example {
  Json report;
  bool passed = false;
};

Example arveson3x3(const Options& o) {
  Example ex;
  auto v = check_majorization(arveson_target(), arveson_source(), o.tol);
  const bool unique = v.feasible && v.witness->entries == arveson_matrix();
  auto c = unistochastic_obstruction(arveson_matrix(), o.tol);
  const bool cert = c && c->row1 == 0 && c->row2 == 1 && c->column == 1;
  auto inf = inflate_rational_ds(arveson_matrix());
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> g;
  double residual = 0;
  for (int k = 0; k < 20; ++k) {
    CVector beta(3);
    for (int i = 0; i < 3; ++i) beta(i) = Complex(g(rng), g(rng));
    residual = std::max(residual, inflation_residual(arveson_matrix(), inf, beta));
  }
  ex.report = Json{{"transport_feasible", v.feasible},
                   {"witness", v.witness ? to_json(v.witness->entries) : Json(nullptr)},
                   {"witness_matches", unique},
                   {"obstruction", c ? Json{{"rows", {c->row1 + 1, c->row2 + 1}},
                                            {"column", c->column + 1},
                                            {"product", to_json(c->product)}}
                                     : Json(nullptr)},
                   {"inflation_m", inf.m},
                   {"inflation_residual", residual}};
  ex.passed = unique && cert && inf.m == 2 && residual <= 1e-9;
  return ex;
}

Example horn(const Options& o) {
  Example ex;
  const Measure t = horn_target(), s = horn_source();
  auto v = check_majorization(t, s, o.tol);
  bool in_hull = true;
  for (const auto& a : t.atoms) in_hull = in_hull && hull_membership(a, s, o.tol).member;
  const bool bary = barycenter(t) == barycenter(s);
  const bool cert = !v.feasible && verify_certificate(t, s, v.certificate, o.tol);
  ex.report = Json{{"feasible", v.feasible},
                   {"certificate", to_json(v.certificate)},
                   {"certificate_verified", cert},
                   {"target_atoms_in_hull", in_hull},
                   {"barycenters_equal", bary}};
  ex.passed = cert && in_hull && bary;
  return ex;
}

Example simplex(const Options& o) {
  std::mt19937_64 rng(o.seed + 1);
  std::uniform_int_distribution<int> num(-6, 6), den(1, 4), pick(1, 3);
  auto rnd = [&] { return Scalar(mpq_class(num(rng), den(rng))); };
  std::size_t agree = 0, total = 0;
  for (int it = 0; it < 50; ++it) {
    const std::size_t n = static_cast<std::size_t>(pick(rng));
    std::vector<Point> atoms;
    do {
      atoms.clear();
      for (std::size_t i = 0; i <= n; ++i) {
        Point p;
        for (std::size_t c = 0; c < n; ++c) p.push_back(rnd());
        atoms.push_back(p);
      }
    } while (affine_rank(atoms) != n);
    std::vector<Scalar> w(n + 1, q(1, static_cast<long>(n + 1)));
    const Measure s = make_measure(atoms, w);
    std::vector<Point> tatoms;
    std::size_t m = static_cast<std::size_t>(pick(rng)) + 1;
    for (std::size_t i = 0; i < m; ++i) {
      Point p;
      for (std::size_t c = 0; c < n; ++c) p.push_back(rnd() * q(1, 3));
      tatoms.push_back(p);
    }
    std::vector<Scalar> tw(m, q(1, static_cast<long>(m)));
    Measure t;
    try {
      t = make_measure(tatoms, tw);
    } catch (const Error&) {
      continue;
    }
    ++total;
    agree += simplex_majorization(t, s, o.tol) == check_majorization(t, s, o.tol).feasible;
  }
  Example ex;
  ex.report = Json{{"instances", total}, {"agreements", agree}};
  ex.passed = agree == total;
  return ex;
}

Example scalar(const Options& o) {
  const Measure m = make_measure({{q(0), q(0)}, {q(1), q(0)}, {q(0), q(1)}}, {q(1, 2), q(1, 3), q(1, 6)});
  EngineOptions e;
  e.tol = o.tol;
  e.depth = 5;
  e.auto_n = true;
  e.finalize = false;
  auto r = scalar_diagonal_engine(m, e);
  e.finalize = true;
  auto f = scalar_diagonal_engine(m, e);
  bool constant = true;
  for (const auto& d : f.diagonal) constant = constant && d == f.mean;
  const Scalar bound = q(211, 243);
  Example ex;
  ex.report = Json{{"n", r.n},
                   {"trace_of_Q_K", to_json(r.q_traces.back())},
                   {"required", to_json(bound)},
                   {"finalized_constant", constant},
                   {"mean", to_json(f.mean)},
                   {"max_error", std::max(r.readout_error, f.readout_error)}};
  ex.passed = r.q_traces.back() >= bound && constant && f.u.defect <= 1e-10;
  return ex;
}

Example schur_horn(const Options& o) {
  const Measure s = make_measure({{q(1), q(0)}, {q(0), q(1)}}, {q(1, 2), q(1, 2)});
  const Measure t = make_measure({{q(3, 4), q(1, 4)}, {q(1, 4), q(3, 4)}}, {q(1, 2), q(1, 2)});
  EngineOptions e;
  e.tol = o.tol;
  e.resolution = 8;
  auto r = schur_horn_engine(t, s, e);
  const Measure achieved = cell_measure(r.diagonal, o.tol);
  bool equal = achieved.size() == t.size();
  for (std::size_t i = 0; equal && i < t.size(); ++i) {
    bool hit = false;
    for (std::size_t j = 0; j < achieved.size(); ++j)
      hit = hit || (achieved.atoms[j] == t.atoms[i] && achieved.weights[j] == t.weights[i]);
    equal = hit;
  }
  Example ex;
  ex.report = Json{{"n", r.n}, {"achieved_equals_target", equal}, {"unitarity_defect", r.defect},
                   {"max_error", r.max_error}};
  ex.passed = equal && r.defect <= 1e-10;
  return ex;
}

Example approx_schur_horn_example(const Options& o) {
  CellTuple s, a;
  for (std::size_t c = 0; c < 64; ++c)
    s.push_back({Scalar::from_double(std::fmod(static_cast<double>(c) * std::sqrt(2.0), 1.0)),
                 Scalar::from_double(std::fmod(static_cast<double>(c) * std::sqrt(3.0), 1.0))});
  for (std::size_t c = 0; c < 64; ++c) a.push_back(Scalar::from_double(0.5) * (s[c] + s[c ^ 1]));
  EngineOptions e;
  e.tol = o.tol;
  auto r = approx_schur_horn(a, s, 0.05, e);
  Example ex;
  ex.report = Json{{"eps", 0.05},       {"max_error", r.max_error},          {"allowed", 0.15},
                   {"refinement", r.refinement}, {"lp_deviation", r.lp_deviation}, {"unitarity_defect", r.sh.defect}};
  ex.passed = r.max_error <= 0.15 && r.sh.defect <= 1e-10;
  return ex;
}

Example carpenter(const Options& o) {
  const Measure a = make_measure({{q(1, 4), q(3, 4)}, {q(1, 2), q(1, 4)}}, {q(1, 2), q(1, 2)});
  EngineOptions e;
  e.tol = o.tol;
  e.auto_n = true;
  auto r = carpenter_exact(a, e);
  Example ex;
  ex.report = Json{{"n", r.sh.n},
                   {"projections", to_json(r.projections)},
                   {"projection_defect", r.projection_defect},
                   {"commutation_defect", r.commutation_defect}};
  ex.passed = r.projection_defect <= 1e-10 && r.commutation_defect <= 1e-10 && r.sh.defect <= 1e-10;
  return ex;
}

Example bh_constant(const Options& o) {
  const std::vector<Point> x = {{q(0), q(0)}, {q(1), q(0)}, {q(0), q(1)}};
  const Point d = {q(1, 3), q(1, 3)};
  auto a = synthesize_constant_diagonal(x, d, 300, o.tol);
  auto b = synthesize_constant_diagonal(x, d, 1200, o.tol);
  Example ex;
  ex.report = Json{{"sup_error_300", a.sup_error}, {"bound_300", a.bound},
                   {"sup_error_1200", b.sup_error}, {"bound_1200", b.bound},
                   {"unitarity_defect", std::max(a.u.defect, b.u.defect)}};
  ex.passed = a.sup_error <= 0.01 && b.sup_error <= 0.0025 && std::max(a.u.defect, b.u.defect) <= 1e-10;
  return ex;
}

Example bh_index_example(const Options& o) {
  const std::vector<Point> x = {{q(0)}, {q(1)}};
  auto shift = arveson_index_check(x, {0}, {{q(1)}}, o.tol);
  auto half = arveson_index_check(x, {1}, {{q(1, 2)}}, o.tol);
  const bool ok_shift = shift.nu && (*shift.nu)[0] == 1 && (*shift.nu)[1] == -1;
  Example ex;
  ex.report = Json{{"integer_shift_present", shift.nu.has_value()},
                   {"integer_shift_nu", ok_shift ? Json{1, -1} : Json(nullptr)},
                   {"half_present", half.nu.has_value()}};
  ex.passed = ok_shift && !half.nu;
  return ex;
}

Example irrational(const Options&) {
  const double a = std::sqrt(2.0) - 1;
  Json rows = Json::array();
  bool all = true;
  for (std::size_t m = 1; m <= 6; ++m) {
    auto r = irrational_inflation_obstruction(a, m);
    rows.push_back(Json{{"m", m}, {"distance", r.distance}, {"obstructed", r.obstructed}});
    all = all && r.obstructed;
  }
  Example ex;
  ex.report = Json{{"a", a}, {"by_m", rows}};
  ex.passed = all;
  return ex;
}

using Runner = Example (*)(const Options&);

const std::vector<std::pair<std::string, Runner>>& table() {
  static const std::vector<std::pair<std::string, Runner>> t = {
      {"arveson3x3", arveson3x3}, {"horn", horn},
      {"simplex", simplex},       {"scalar", scalar},
      {"schur-horn", schur_horn}, {"approx-schur-horn", approx_schur_horn_example},
      {"carpenter", carpenter},   {"bh-constant", bh_constant},
      {"bh-index", bh_index_example}, {"irrational", irrational},
  };
  return t;
}

unsigned worker_count(const Options& o, std::size_t jobs) {
  unsigned n = o.threads;
  if (n == 0) {
    if (const char* env = std::getenv("MAJLAB_THREADS")) n = static_cast<unsigned>(std::strtoul(env, nullptr, 10));
  }
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(n, jobs));
}

}  // namespace

const std::vector<std::string>& repro_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [name, fn] : table()) v.push_back(name);
    return v;
  }();
  return names;
}

Outcome repro(const std::string& name, const Options& o) {
  const auto& t = table();
  std::vector<std::size_t> picked;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (name == "all" || t[i].first == name) picked.push_back(i);
  if (picked.empty()) fail(ErrorCode::InvalidInput, "unknown example '" + name + "'");

  std::vector<Example> results(picked.size());
  std::vector<std::string> errors(picked.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k; (k = next++) < picked.size();) {
      try {
        results[k] = t[picked[k]].second(o);
      } catch (const std::exception& e) {
        errors[k] = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < worker_count(o, picked.size()); ++w) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();

  Outcome out;
  Json examples = Json::object();
  bool all = true;
  for (std::size_t k = 0; k < picked.size(); ++k) {
    Json r = results[k].report;
    if (!errors[k].empty()) r = Json{{"error", errors[k]}};
    r["passed"] = results[k].passed && errors[k].empty();
    all = all && r["passed"].get<bool>();
    examples[t[picked[k]].first] = r;
  }
  out.report = Json{{"examples", examples}, {"all_passed", all}};
  if (name == "all")
    out.report["limitations"] =
        "II_1 results are checked in finite matrix models M_N with the normalised trace; B(H) results on "
        "finite truncations. Neither is a diffuse factor or an infinite-dimensional space.";
  out.negative = !all;
  return out;
}

}  // namespace majlab::cmd
