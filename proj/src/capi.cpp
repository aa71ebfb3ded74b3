#include "majlab.h"

#include <chrono>
#include <new>
#include <stdexcept>
#include <string>

#include "commands.hpp"
#include "digest.hpp"
#include "majlab/error.hpp"

using majlab::io::Json;

struct majlab_context {
  majlab::cmd::Options opts;
  bool timing = false;
  std::string last_error;
};

struct majlab_result {
  majlab_verdict verdict = MAJLAB_VERDICT_POSITIVE;
  std::string report = "{}";
  std::string artifact = "{}";
};

namespace {

majlab_status status_of(majlab::ErrorCode c) {
  using majlab::ErrorCode;
  switch (c) {
    case ErrorCode::IoError: return MAJLAB_ERR_IO;
    case ErrorCode::InternalInconsistency: return MAJLAB_ERR_INTERNAL;
    case ErrorCode::ResolutionInsufficient:
    case ErrorCode::TruncationTooSmall:
    case ErrorCode::NoRationalCombination:
    case ErrorCode::UnsupportedIrrationalVertices:
    case ErrorCode::NoPerfectMatching:
    case ErrorCode::NotMajorized:
    case ErrorCode::NotApproxMajorized: return MAJLAB_ERR_REFUSED;
    default: return MAJLAB_ERR_INVALID_INPUT;
  }
}

Json options_json(const majlab_context* ctx) {
  return Json{{"backend", ctx->opts.as_float ? "float" : "exact"},
              {"tol", ctx->opts.tol},
              {"seed", ctx->opts.seed}};
}

Json parse(const char* text, const char* what) {
  if (!text) majlab::fail(majlab::ErrorCode::InvalidInput, std::string(what) + " is null");
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(std::string(what) + ": " + e.what());
  }
}

// Runs one command and fills `out` with the report and the artifact.
template <class F>
majlab_status run(majlab_context* ctx, majlab_result* out, const char* subcommand, const Json& inputs, F&& body) {
  if (!ctx || !out) return MAJLAB_ERR_INVALID_ARGUMENT;
  ctx->last_error.clear();
  try {
    const auto t0 = std::chrono::steady_clock::now();
    majlab::cmd::Outcome oc = body();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    Json report = oc.report;
    const Json opts = options_json(ctx);
    report["subcommand"] = subcommand;
    report["backend"] = opts["backend"];
    report["tol"] = opts["tol"];
    report["inputs_digest"] =
        majlab::sha256_hex(majlab::io::dump(Json{{"subcommand", subcommand}, {"inputs", inputs}, {"options", opts}}));
    report["verdict"] = oc.negative ? "negative" : "positive";
    if (ctx->timing) report["wall_time"] = secs;
    Json artifact = report;
    if (!oc.matrices.is_null()) artifact["matrices"] = oc.matrices;
    out->verdict = oc.negative ? MAJLAB_VERDICT_NEGATIVE : MAJLAB_VERDICT_POSITIVE;
    out->report = majlab::io::dump(report);
    out->artifact = majlab::io::dump(artifact);
    return MAJLAB_OK;
  } catch (const majlab::Error& e) {
    ctx->last_error = e.what();
    return status_of(e.code());
  } catch (const std::invalid_argument& e) {
    ctx->last_error = std::string("malformed JSON in ") + e.what();
    return MAJLAB_ERR_INVALID_ARGUMENT;
  } catch (const Json::exception& e) {
    ctx->last_error = std::string("malformed input: ") + e.what();
    return MAJLAB_ERR_INVALID_ARGUMENT;
  } catch (const std::bad_alloc&) {
    ctx->last_error = "out of memory";
    return MAJLAB_ERR_INTERNAL;
  } catch (const std::exception& e) {
    ctx->last_error = e.what();
    return MAJLAB_ERR_INTERNAL;
  }
}

// Inputs are digested in parsed, canonical form.
Json parsed_or_raw(const char* text) {
  if (!text) return nullptr;
  try {
    return Json::parse(text);
  } catch (const Json::exception&) {
    return text;
  }
}

}  // namespace

extern "C" {

const char* majlab_version(void) { return "1.0.0"; }

const char* majlab_status_name(majlab_status s) {
  switch (s) {
    case MAJLAB_OK: return "ok";
    case MAJLAB_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case MAJLAB_ERR_INVALID_INPUT: return "invalid_input";
    case MAJLAB_ERR_REFUSED: return "refused";
    case MAJLAB_ERR_IO: return "io_error";
    case MAJLAB_ERR_INTERNAL: return "internal_error";
  }
  return "unknown";
}

majlab_status majlab_context_create(majlab_context** out) {
  if (!out) return MAJLAB_ERR_INVALID_ARGUMENT;
  *out = new (std::nothrow) majlab_context();
  return *out ? MAJLAB_OK : MAJLAB_ERR_INTERNAL;
}

void majlab_context_destroy(majlab_context* ctx) { delete ctx; }

majlab_status majlab_context_set_backend(majlab_context* ctx, majlab_backend b) {
  if (!ctx || (b != MAJLAB_BACKEND_EXACT && b != MAJLAB_BACKEND_FLOAT)) return MAJLAB_ERR_INVALID_ARGUMENT;
  ctx->opts.as_float = b == MAJLAB_BACKEND_FLOAT;
  return MAJLAB_OK;
}

majlab_status majlab_context_set_tolerance(majlab_context* ctx, double tol) {
  if (!ctx || !(tol > 0) || tol > 1e-2) return MAJLAB_ERR_INVALID_ARGUMENT;
  ctx->opts.tol = tol;
  return MAJLAB_OK;
}

majlab_status majlab_context_set_seed(majlab_context* ctx, uint64_t seed) {
  if (!ctx) return MAJLAB_ERR_INVALID_ARGUMENT;
  ctx->opts.seed = seed;
  return MAJLAB_OK;
}

majlab_status majlab_context_set_threads(majlab_context* ctx, unsigned threads) {
  if (!ctx) return MAJLAB_ERR_INVALID_ARGUMENT;
  ctx->opts.threads = threads;
  return MAJLAB_OK;
}

majlab_status majlab_context_set_timing(majlab_context* ctx, int enabled) {
  if (!ctx) return MAJLAB_ERR_INVALID_ARGUMENT;
  ctx->timing = enabled != 0;
  return MAJLAB_OK;
}

const char* majlab_context_last_error(const majlab_context* ctx) { return ctx ? ctx->last_error.c_str() : ""; }

majlab_status majlab_result_create(majlab_result** out) {
  if (!out) return MAJLAB_ERR_INVALID_ARGUMENT;
  *out = new (std::nothrow) majlab_result();
  return *out ? MAJLAB_OK : MAJLAB_ERR_INTERNAL;
}

void majlab_result_destroy(majlab_result* res) { delete res; }

majlab_verdict majlab_result_verdict(const majlab_result* res) {
  return res ? res->verdict : MAJLAB_VERDICT_NEGATIVE;
}
const char* majlab_result_report(const majlab_result* res) { return res ? res->report.c_str() : ""; }
const char* majlab_result_artifact(const majlab_result* res) { return res ? res->artifact.c_str() : ""; }

majlab_status majlab_check(majlab_context* ctx, const char* target, const char* source, majlab_result* out) {
  Json in{{"target", parsed_or_raw(target)}, {"source", parsed_or_raw(source)}};
  return run(ctx, out, "check", in, [&] {
    return majlab::cmd::check(parse(target, "target"), parse(source, "source"), ctx->opts);
  });
}

majlab_status majlab_birkhoff(majlab_context* ctx, const char* matrix, majlab_result* out) {
  Json in{{"matrix", parsed_or_raw(matrix)}};
  return run(ctx, out, "birkhoff", in, [&] { return majlab::cmd::birkhoff(parse(matrix, "matrix"), ctx->opts); });
}

majlab_status majlab_inflate(majlab_context* ctx, const char* matrix, double eps, majlab_result* out) {
  Json in{{"matrix", parsed_or_raw(matrix)}, {"eps", eps}};
  return run(ctx, out, "inflate", in, [&] { return majlab::cmd::inflate(parse(matrix, "matrix"), eps, ctx->opts); });
}

majlab_status majlab_certify_arveson3x3(majlab_context* ctx, majlab_result* out) {
  return run(ctx, out, "certify arveson3x3", Json::object(), [&] { return majlab::cmd::certify_arveson3x3(ctx->opts); });
}

majlab_status majlab_certify_irrational(majlab_context* ctx, double a, size_t m, majlab_result* out) {
  Json in{{"a", a}, {"m", m}};
  return run(ctx, out, "certify irrational", in, [&] { return majlab::cmd::certify_irrational(a, m, ctx->opts); });
}

majlab_status majlab_ii1_scalar(majlab_context* ctx, const char* measure, size_t depth, int auto_n,
                                majlab_result* out) {
  Json in{{"spec", parsed_or_raw(measure)}, {"depth", depth}, {"auto_n", auto_n != 0}};
  return run(ctx, out, "ii1 scalar", in, [&] {
    return majlab::cmd::ii1_scalar(parse(measure, "spec"), depth, auto_n != 0, ctx->opts);
  });
}

majlab_status majlab_ii1_schur_horn(majlab_context* ctx, const char* target, const char* source, size_t resolution,
                                    majlab_result* out) {
  Json in{{"target", parsed_or_raw(target)}, {"source", parsed_or_raw(source)}, {"resolution", resolution}};
  return run(ctx, out, "ii1 schur-horn", in, [&] {
    return majlab::cmd::ii1_schur_horn(parse(target, "target"), parse(source, "source"), resolution, ctx->opts);
  });
}

majlab_status majlab_ii1_carpenter(majlab_context* ctx, const char* target, size_t resolution, majlab_result* out) {
  Json in{{"target", parsed_or_raw(target)}, {"resolution", resolution}};
  return run(ctx, out, "ii1 carpenter", in, [&] {
    return majlab::cmd::ii1_carpenter(parse(target, "target"), resolution, ctx->opts);
  });
}

majlab_status majlab_bh_synth(majlab_context* ctx, const char* vertices, const char* target, size_t size,
                              majlab_result* out) {
  Json in{{"vertices", parsed_or_raw(vertices)}, {"target", parsed_or_raw(target)}, {"size", size}};
  return run(ctx, out, "bh synth", in, [&] {
    return majlab::cmd::bh_synth(parse(vertices, "vertices"), parse(target, "target"), size, ctx->opts);
  });
}

majlab_status majlab_bh_index(majlab_context* ctx, const char* vertices, const char* phi, const char* prefix,
                              majlab_result* out) {
  Json in{{"vertices", parsed_or_raw(vertices)}, {"phi", parsed_or_raw(phi)}, {"prefix", parsed_or_raw(prefix)}};
  return run(ctx, out, "bh index", in, [&] {
    return majlab::cmd::bh_index(parse(vertices, "vertices"), parse(phi, "phi"), parse(prefix, "prefix"), ctx->opts);
  });
}

majlab_status majlab_repro(majlab_context* ctx, const char* name, majlab_result* out) {
  const std::string n = name ? name : "";
  return run(ctx, out, ("repro " + n).c_str(), Json{{"name", n}}, [&] { return majlab::cmd::repro(n, ctx->opts); });
}

const char* majlab_repro_names(void) {
  static const std::string joined = [] {
    std::string s;
    for (const auto& n : majlab::cmd::repro_names()) s += (s.empty() ? "" : ",") + n;
    return s;
  }();
  return joined.c_str();
}

}  // extern "C"
