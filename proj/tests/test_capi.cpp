// Exercises the shared library through majlab.h only.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "majlab.h"

using nlohmann::json;

namespace {

std::string data(const std::string& name) {
  std::ifstream in(std::string(MAJLAB_DATA_DIR) + "/" + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Handles {
  majlab_context* ctx = nullptr;
  majlab_result* res = nullptr;
  Handles() {
    REQUIRE(majlab_context_create(&ctx) == MAJLAB_OK);
    REQUIRE(majlab_result_create(&res) == MAJLAB_OK);
  }
  ~Handles() {
    majlab_result_destroy(res);
    majlab_context_destroy(ctx);
  }
  json report() const { return json::parse(majlab_result_report(res)); }
};

}  // namespace

TEST_CASE("context settings validate their arguments") {
  Handles h;
  CHECK(majlab_context_set_backend(h.ctx, MAJLAB_BACKEND_FLOAT) == MAJLAB_OK);
  CHECK(majlab_context_set_backend(h.ctx, static_cast<majlab_backend>(7)) == MAJLAB_ERR_INVALID_ARGUMENT);
  CHECK(majlab_context_set_tolerance(h.ctx, -1) == MAJLAB_ERR_INVALID_ARGUMENT);
  CHECK(majlab_context_set_tolerance(h.ctx, 1e-10) == MAJLAB_OK);
  CHECK(majlab_context_set_backend(nullptr, MAJLAB_BACKEND_EXACT) == MAJLAB_ERR_INVALID_ARGUMENT);
  CHECK(std::string(majlab_status_name(MAJLAB_ERR_REFUSED)) == "refused");
  CHECK(std::string(majlab_context_last_error(nullptr)).empty());
  majlab_context_destroy(nullptr);
  majlab_result_destroy(nullptr);
}

TEST_CASE("check: feasible, infeasible and reflexive") {
  Handles h;
  REQUIRE(majlab_check(h.ctx, data("arveson-mu.json").c_str(), data("arveson-lambda.json").c_str(), h.res) ==
          MAJLAB_OK);
  CHECK(majlab_result_verdict(h.res) == MAJLAB_VERDICT_POSITIVE);
  auto r = h.report();
  CHECK(r["feasible"] == true);
  CHECK(r["witness"] == json::parse(R"([["1/2","1/2","0"],["0","1/2","1/2"],["1/2","0","1/2"]])"));
  CHECK(r["inputs_digest"].get<std::string>().size() == 64);
  CHECK_FALSE(r.contains("wall_time"));

  REQUIRE(majlab_check(h.ctx, data("horn-A.json").c_str(), data("horn-N.json").c_str(), h.res) == MAJLAB_OK);
  CHECK(majlab_result_verdict(h.res) == MAJLAB_VERDICT_NEGATIVE);
  r = h.report();
  CHECK(r["verified"] == true);
  CHECK(r["target_atoms_in_hull"] == true);
  CHECK(r["barycenters_equal"] == true);

  REQUIRE(majlab_check(h.ctx, data("horn-A.json").c_str(), data("horn-A.json").c_str(), h.res) == MAJLAB_OK);
  r = h.report();
  CHECK(r["witness"][0] == json::parse(R"(["1","0","0","0"])"));
}

TEST_CASE("exact reports are byte-identical; keys are sorted; artifacts round-trip") {
  Handles h;
  REQUIRE(majlab_inflate(h.ctx, data("arveson-D.json").c_str(), 0, h.res) == MAJLAB_OK);
  const std::string first = majlab_result_report(h.res), art = majlab_result_artifact(h.res);
  REQUIRE(majlab_inflate(h.ctx, data("arveson-D.json").c_str(), 0, h.res) == MAJLAB_OK);
  CHECK(first == majlab_result_report(h.res));
  CHECK(art == majlab_result_artifact(h.res));
  auto parsed = json::parse(art);
  CHECK(parsed.dump() == art);
  CHECK(parsed["matrices"]["unitary"]["rows"] == 6);
  CHECK(parsed["m"] == 2);
  CHECK(parsed["residual_max"].get<double>() <= 1e-9);

  // a different seed changes the sampled betas but not the verdict
  majlab_context_set_seed(h.ctx, 42);
  REQUIRE(majlab_inflate(h.ctx, data("arveson-D.json").c_str(), 0, h.res) == MAJLAB_OK);
  CHECK(h.report()["inputs_digest"] != json::parse(first)["inputs_digest"]);

  majlab_context_set_timing(h.ctx, 1);
  REQUIRE(majlab_birkhoff(h.ctx, data("arveson-D.json").c_str(), h.res) == MAJLAB_OK);
  CHECK(h.report().contains("wall_time"));
}

TEST_CASE("certificates") {
  Handles h;
  REQUIRE(majlab_certify_arveson3x3(h.ctx, h.res) == MAJLAB_OK);
  CHECK(majlab_result_verdict(h.res) == MAJLAB_VERDICT_NEGATIVE);
  CHECK(h.report()["certificate"]["rows"] == json::parse("[1,2]"));
  CHECK(h.report()["certificate"]["column"] == 2);
  REQUIRE(majlab_certify_irrational(h.ctx, 0.5, 2, h.res) == MAJLAB_OK);
  CHECK(majlab_result_verdict(h.res) == MAJLAB_VERDICT_POSITIVE);
  CHECK(majlab_certify_irrational(h.ctx, 1.5, 2, h.res) == MAJLAB_ERR_INVALID_INPUT);
}

TEST_CASE("ii1 commands") {
  Handles h;
  REQUIRE(majlab_ii1_scalar(h.ctx, data("scalar-k3.json").c_str(), 5, 1, h.res) == MAJLAB_OK);
  CHECK(h.report()["mean"] == json::parse(R"(["1/3","1/6"])"));
  REQUIRE(majlab_ii1_schur_horn(h.ctx, data("sh-target.json").c_str(), data("sh-source.json").c_str(), 8, h.res) ==
          MAJLAB_OK);
  CHECK(h.report()["achieved_equals_target"] == true);
  CHECK(h.report()["n"] == 8);
  REQUIRE(majlab_ii1_schur_horn(h.ctx, data("sh-source.json").c_str(), data("sh-target.json").c_str(), 0, h.res) ==
          MAJLAB_OK);
  CHECK(majlab_result_verdict(h.res) == MAJLAB_VERDICT_NEGATIVE);
  CHECK(majlab_ii1_schur_horn(h.ctx, data("sh-target.json").c_str(), data("sh-source.json").c_str(), 3, h.res) ==
        MAJLAB_ERR_REFUSED);
  REQUIRE(majlab_ii1_carpenter(h.ctx, data("carpenter-target.json").c_str(), 0, h.res) == MAJLAB_OK);
  CHECK(h.report()["projection_defect"].get<double>() <= 1e-10);
}

TEST_CASE("bh commands") {
  Handles h;
  REQUIRE(majlab_bh_synth(h.ctx, data("triangle.json").c_str(), data("centroid.json").c_str(), 300, h.res) ==
          MAJLAB_OK);
  auto r = h.report();
  CHECK(r["sup_error"].get<double>() <= 0.01);
  CHECK(r["block_layout"].size() == 1);
  CHECK(majlab_bh_synth(h.ctx, data("triangle.json").c_str(), data("centroid.json").c_str(), 3, h.res) ==
        MAJLAB_ERR_REFUSED);
  CHECK(majlab_bh_synth(h.ctx, data("triangle.json").c_str(), "[0, 0]", 30, h.res) == MAJLAB_ERR_INVALID_INPUT);

  REQUIRE(majlab_bh_index(h.ctx, data("segment.json").c_str(), "[1]", "[[1]]", h.res) == MAJLAB_OK);
  CHECK(h.report()["lattice_coefficients"] == json::parse(R"(["1","-1"])"));
  REQUIRE(majlab_bh_index(h.ctx, data("segment.json").c_str(), "[2]", "[[\"1/2\"]]", h.res) == MAJLAB_OK);
  CHECK(majlab_result_verdict(h.res) == MAJLAB_VERDICT_NEGATIVE);
  CHECK(majlab_bh_index(h.ctx, data("segment.json").c_str(), "[0]", "[[1]]", h.res) == MAJLAB_ERR_INVALID_INPUT);
}

TEST_CASE("repro names and unknown examples") {
  Handles h;
  CHECK(std::string(majlab_repro_names()).find("arveson3x3") != std::string::npos);
  REQUIRE(majlab_repro(h.ctx, "horn", h.res) == MAJLAB_OK);
  CHECK(h.report()["all_passed"] == true);
  CHECK(majlab_repro(h.ctx, "nonexistent", h.res) == MAJLAB_ERR_INVALID_INPUT);
  CHECK(majlab_repro(h.ctx, nullptr, h.res) == MAJLAB_ERR_INVALID_INPUT);
}

TEST_CASE("float backend") {
  Handles h;
  majlab_context_set_backend(h.ctx, MAJLAB_BACKEND_FLOAT);
  REQUIRE(majlab_check(h.ctx, data("arveson-mu.json").c_str(), data("arveson-lambda.json").c_str(), h.res) ==
          MAJLAB_OK);
  auto r = h.report();
  CHECK(r["backend"] == "float");
  CHECK(r["feasible"] == true);
  CHECK(r["witness"][0][0].is_number());
}
