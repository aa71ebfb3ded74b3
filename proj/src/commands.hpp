#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "io.hpp"

namespace majlab::cmd {

struct Options {
  bool as_float = false;
  double tol = kDefaultTol;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

struct Outcome {
  io::Json report;      // small, always printed
  io::Json matrices;    // large payloads, only in the artifact
  bool negative = false;
};

Outcome check(const io::Json& target, const io::Json& source, const Options& o);
Outcome birkhoff(const io::Json& matrix, const Options& o);
Outcome inflate(const io::Json& matrix, double eps, const Options& o);
Outcome certify_arveson3x3(const Options& o);
Outcome certify_irrational(double a, std::size_t m, const Options& o);
Outcome ii1_scalar(const io::Json& measure, std::size_t depth, bool auto_n, const Options& o);
Outcome ii1_schur_horn(const io::Json& target, const io::Json& source, std::size_t resolution, const Options& o);
Outcome ii1_carpenter(const io::Json& target, std::size_t resolution, const Options& o);
Outcome bh_synth(const io::Json& vertices, const io::Json& target, std::size_t size, const Options& o);
Outcome bh_index(const io::Json& vertices, const io::Json& phi, const io::Json& prefix, const Options& o);

const std::vector<std::string>& repro_names();
Outcome repro(const std::string& name, const Options& o);

// Bundled instances, also shipped under data/.
Measure arveson_target();
Measure arveson_source();
Matrix arveson_matrix();
Measure horn_target();
Measure horn_source();

}  // namespace majlab::cmd
