#ifndef MAJLAB_H
#define MAJLAB_H

/* C interface to the majlab library.
 *
 * Inputs are JSON documents passed as NUL-terminated UTF-8 strings. Every
 * operation fills a result handle holding a report (JSON), an optional
 * artifact (report plus matrices) and a verdict. Handles are opaque and must
 * be released with the matching destroy call. Strings returned by accessors
 * stay valid until the owning handle is destroyed or reused.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MAJLAB_API __declspec(dllexport)
#else
#define MAJLAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum majlab_status {
  MAJLAB_OK = 0,
  MAJLAB_ERR_INVALID_ARGUMENT = 1, /* null handle, bad enum, malformed JSON */
  MAJLAB_ERR_INVALID_INPUT = 2,    /* well-formed input rejected by a precondition */
  MAJLAB_ERR_REFUSED = 3,          /* construction refused (resolution, truncation, ...) */
  MAJLAB_ERR_IO = 4,
  MAJLAB_ERR_INTERNAL = 5
} majlab_status;

typedef enum majlab_backend { MAJLAB_BACKEND_EXACT = 0, MAJLAB_BACKEND_FLOAT = 1 } majlab_backend;

typedef enum majlab_verdict {
  MAJLAB_VERDICT_POSITIVE = 0, /* feasible / constructed / lattice solution present */
  MAJLAB_VERDICT_NEGATIVE = 1  /* certified infeasible, obstructed or absent */
} majlab_verdict;

typedef struct majlab_context majlab_context;
typedef struct majlab_result majlab_result;

MAJLAB_API const char* majlab_version(void);
MAJLAB_API const char* majlab_status_name(majlab_status status);

MAJLAB_API majlab_status majlab_context_create(majlab_context** out);
MAJLAB_API void majlab_context_destroy(majlab_context* ctx);
MAJLAB_API majlab_status majlab_context_set_backend(majlab_context* ctx, majlab_backend backend);
MAJLAB_API majlab_status majlab_context_set_tolerance(majlab_context* ctx, double tol);
MAJLAB_API majlab_status majlab_context_set_seed(majlab_context* ctx, uint64_t seed);
/* Worker cap; 0 means MAJLAB_THREADS or the hardware count. */
MAJLAB_API majlab_status majlab_context_set_threads(majlab_context* ctx, unsigned threads);
/* Adds wall_time to reports. Off by default so exact runs are byte-identical. */
MAJLAB_API majlab_status majlab_context_set_timing(majlab_context* ctx, int enabled);
/* Message of the last failed call on this context ("" if none). */
MAJLAB_API const char* majlab_context_last_error(const majlab_context* ctx);

MAJLAB_API majlab_status majlab_result_create(majlab_result** out);
MAJLAB_API void majlab_result_destroy(majlab_result* res);
MAJLAB_API majlab_verdict majlab_result_verdict(const majlab_result* res);
MAJLAB_API const char* majlab_result_report(const majlab_result* res);
MAJLAB_API const char* majlab_result_artifact(const majlab_result* res);

/* Measures: {"n": int, "atoms": [[q,...],...], "weights": [q,...]}. */
MAJLAB_API majlab_status majlab_check(majlab_context* ctx, const char* target_json, const char* source_json,
                                      majlab_result* out);

/* Matrices: {"rows": r, "cols": c, "re": [[...]], "im": [[...]]} or a bare [[...]]. */
MAJLAB_API majlab_status majlab_birkhoff(majlab_context* ctx, const char* matrix_json, majlab_result* out);
/* eps <= 0 requests the exact rational inflation. */
MAJLAB_API majlab_status majlab_inflate(majlab_context* ctx, const char* matrix_json, double eps,
                                        majlab_result* out);
MAJLAB_API majlab_status majlab_certify_arveson3x3(majlab_context* ctx, majlab_result* out);
MAJLAB_API majlab_status majlab_certify_irrational(majlab_context* ctx, double a, size_t m, majlab_result* out);

/* resolution 0 selects the smallest admissible N (or searches, with auto_n). */
MAJLAB_API majlab_status majlab_ii1_scalar(majlab_context* ctx, const char* measure_json, size_t depth,
                                           int auto_n, majlab_result* out);
MAJLAB_API majlab_status majlab_ii1_schur_horn(majlab_context* ctx, const char* target_json,
                                               const char* source_json, size_t resolution, majlab_result* out);
MAJLAB_API majlab_status majlab_ii1_carpenter(majlab_context* ctx, const char* target_json, size_t resolution,
                                              majlab_result* out);

/* Vertices: [[...],...] or {"vertices": [...]}. Target: one point, or a list of
 * points of length `size` ({"entries": [...]} also accepted). */
MAJLAB_API majlab_status majlab_bh_synth(majlab_context* ctx, const char* vertices_json, const char* target_json,
                                         size_t size, majlab_result* out);
/* phi: one-based vertex indices; prefix: list of points of the same length. */
MAJLAB_API majlab_status majlab_bh_index(majlab_context* ctx, const char* vertices_json, const char* phi_json,
                                         const char* prefix_json, majlab_result* out);

/* name: "all" or one bundled example (see majlab_repro_names). */
MAJLAB_API majlab_status majlab_repro(majlab_context* ctx, const char* name, majlab_result* out);
/* Comma-separated list of bundled example names. */
MAJLAB_API const char* majlab_repro_names(void);

#ifdef __cplusplus
}
#endif

#endif
