// Command-line front end. Talks to the library only through majlab.h.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "majlab.h"

namespace {

const char* kSchemas = R"(Input formats:
  measure   {"n": 2, "atoms": [["1/2","0"], ...], "weights": ["1/3", ...]}
  matrix    {"rows": r, "cols": c, "re": [[...]], "im": [[...]]}  or  [[...]]
  vertices  [[x, y], ...]  or  {"vertices": [...]}
  target    one point [x, y]  or a list of points  or  {"entries": [...]}
  phi       [1, 2, ...]  (one-based vertex indices)
  prefix    [[x, y], ...]
Numbers are JSON numbers or strings "p/q" / decimals; they are read exactly
unless --float is given.
Exit status: 0 success, 2 certified negative verdict, 1 usage or input error.)";

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  out = ss.str();
  return true;
}

struct Session {
  majlab_context* ctx = nullptr;
  majlab_result* res = nullptr;
  ~Session() {
    majlab_result_destroy(res);
    majlab_context_destroy(ctx);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"majlab: joint majorization, diagonals and certificates"};
  app.footer(kSchemas);
  app.require_subcommand(1);
  // global flags may also follow the subcommand
  app.fallthrough();

  bool use_float = false, use_exact = false, timing = false;
  std::uint64_t seed = 0;
  double tol = 1e-9;
  unsigned threads = 0;
  std::string out_path;
  auto* backend = app.add_option_group("backend");
  backend->add_flag("--exact", use_exact, "exact rational arithmetic (default)");
  backend->add_flag("--float", use_float, "double precision arithmetic");
  backend->require_option(0, 1);
  app.add_option("--seed", seed, "seed for all randomness");
  app.add_option("--tol", tol, "numerical tolerance")->check(CLI::Range(1e-16, 1e-2));
  app.add_option("--out", out_path, "write the full artifact (report and matrices) here");
  app.add_option("--threads", threads, "worker cap (default: MAJLAB_THREADS or all cores)");
  app.add_flag("--timing", timing, "add wall_time to the report");

  std::string target, source, matrix, spec, vertices, phi, prefix, name, what;
  double eps = 0, a = 0;
  std::size_t depth = 12, size = 0, resolution = 0, m = 1;
  bool auto_n = false;

  auto* check = app.add_subcommand("check", "joint majorization of two measures");
  check->add_option("--target", target, "target measure JSON")->required();
  check->add_option("--source", source, "source measure JSON")->required();

  auto* birk = app.add_subcommand("birkhoff", "Birkhoff decomposition of a doubly stochastic matrix");
  birk->add_option("matrix", matrix, "matrix JSON")->required();

  auto* infl = app.add_subcommand("inflate", "dilation of a doubly stochastic matrix");
  infl->add_option("matrix", matrix, "matrix JSON")->required();
  infl->add_option("--eps", eps, "approximate inflation tolerance (omit for exact)");

  auto* cert = app.add_subcommand("certify", "obstruction certificates");
  cert->add_option("which", what, "arveson3x3 | irrational")->required()->check(CLI::IsMember({"arveson3x3", "irrational"}));
  cert->add_option("--a", a, "diagonal entry in (0,1)");
  cert->add_option("--m", m, "inflation multiplicity");

  auto* ii1 = app.add_subcommand("ii1", "finite models of a II_1 factor");
  ii1->require_subcommand(1);
  auto* scal = ii1->add_subcommand("scalar", "scalar diagonal engine");
  scal->add_option("--spec", spec, "measure JSON")->required();
  scal->add_option("--depth", depth, "number of halving levels");
  scal->add_flag("--auto-n", auto_n, "search the resolution N");
  auto* sh = ii1->add_subcommand("schur-horn", "exact Schur-Horn engine");
  sh->add_option("--target", target, "target measure JSON")->required();
  sh->add_option("--source", source, "source measure JSON")->required();
  sh->add_option("--resolution", resolution, "matrix size N (default: search)");
  auto* carp = ii1->add_subcommand("carpenter", "commuting projections with a prescribed diagonal");
  carp->add_option("--target", target, "target measure JSON")->required();
  carp->add_option("--resolution", resolution, "matrix size N (default: search)");

  auto* bh = app.add_subcommand("bh", "diagonals in B(H) by truncation");
  bh->require_subcommand(1);
  auto* synth = bh->add_subcommand("synth", "synthesise a unitary with a prescribed diagonal");
  synth->add_option("--vertices", vertices, "vertex JSON")->required();
  synth->add_option("--target", target, "target JSON")->required();
  synth->add_option("--size", size, "truncation size M");
  auto* index = bh->add_subcommand("index", "integer lattice index check");
  index->add_option("--vertices", vertices, "vertex JSON")->required();
  index->add_option("--phi", phi, "assignment JSON")->required();
  index->add_option("--prefix", prefix, "prefix JSON")->required();

  auto* repro = app.add_subcommand("repro", "bundled reproduction suite");
  repro->add_option("name", name, std::string("all | ") + majlab_repro_names())->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "majlab: " << e.what() << "\n\n" << app.help() << std::endl;
    return 1;
  }

  Session s;
  if (majlab_context_create(&s.ctx) != MAJLAB_OK || majlab_result_create(&s.res) != MAJLAB_OK) {
    std::cerr << "majlab: out of memory" << std::endl;
    return 1;
  }
  majlab_context_set_backend(s.ctx, use_float ? MAJLAB_BACKEND_FLOAT : MAJLAB_BACKEND_EXACT);
  majlab_context_set_tolerance(s.ctx, tol);
  majlab_context_set_seed(s.ctx, seed);
  majlab_context_set_threads(s.ctx, threads);
  majlab_context_set_timing(s.ctx, timing ? 1 : 0);

  // file arguments are loaded up front so IO problems map to exit 1
  auto load = [](const std::string& path, std::string& out) {
    if (path.empty()) return true;
    if (read_file(path, out)) return true;
    std::cerr << "majlab: cannot read " << path << std::endl;
    return false;
  };
  std::string t_txt, s_txt, m_txt, spec_txt, v_txt, phi_txt, p_txt;
  if (!load(target, t_txt) || !load(source, s_txt) || !load(matrix, m_txt) || !load(spec, spec_txt) ||
      !load(vertices, v_txt) || !load(phi, phi_txt) || !load(prefix, p_txt))
    return 1;

  majlab_status st = MAJLAB_OK;
  if (*check) {
    st = majlab_check(s.ctx, t_txt.c_str(), s_txt.c_str(), s.res);
  } else if (*birk) {
    st = majlab_birkhoff(s.ctx, m_txt.c_str(), s.res);
  } else if (*infl) {
    st = majlab_inflate(s.ctx, m_txt.c_str(), eps, s.res);
  } else if (*cert) {
    if (what == "arveson3x3") {
      st = majlab_certify_arveson3x3(s.ctx, s.res);
    } else {
      if (!cert->count("--a")) {
        std::cerr << "majlab: certify irrational needs --a" << std::endl;
        return 1;
      }
      st = majlab_certify_irrational(s.ctx, a, m, s.res);
    }
  } else if (*scal) {
    st = majlab_ii1_scalar(s.ctx, spec_txt.c_str(), depth, auto_n ? 1 : 0, s.res);
  } else if (*sh) {
    st = majlab_ii1_schur_horn(s.ctx, t_txt.c_str(), s_txt.c_str(), resolution, s.res);
  } else if (*carp) {
    st = majlab_ii1_carpenter(s.ctx, t_txt.c_str(), resolution, s.res);
  } else if (*synth) {
    st = majlab_bh_synth(s.ctx, v_txt.c_str(), t_txt.c_str(), size, s.res);
  } else if (*index) {
    st = majlab_bh_index(s.ctx, v_txt.c_str(), phi_txt.c_str(), p_txt.c_str(), s.res);
  } else if (*repro) {
    st = majlab_repro(s.ctx, name.c_str(), s.res);
  }

  if (st != MAJLAB_OK) {
    std::cerr << "majlab: " << majlab_status_name(st) << ": " << majlab_context_last_error(s.ctx) << std::endl;
    if (st == MAJLAB_ERR_INVALID_ARGUMENT) std::cerr << "\n" << kSchemas << std::endl;
    return 1;
  }
  std::cout << majlab_result_report(s.res) << std::endl;
  if (!out_path.empty()) {
    std::ofstream f(out_path, std::ios::binary);
    if (!(f << majlab_result_artifact(s.res) << '\n')) {
      std::cerr << "majlab: cannot write " << out_path << std::endl;
      return 1;
    }
  }
  return majlab_result_verdict(s.res) == MAJLAB_VERDICT_NEGATIVE ? 2 : 0;
}
