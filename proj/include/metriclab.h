#ifndef METRICLAB_H
#define METRICLAB_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define ML_API __declspec(dllexport)
#else
#define ML_API __attribute__((visibility("default")))
#endif

/* Every call returns one of these. ML_NEGATIVE means the computation finished and its verdict is
 * negative (not a metric, not CND, band missed, ...); the report is still filled in. */
typedef enum ml_status {
  ML_OK = 0,
  ML_NEGATIVE = 1,
  ML_INPUT_ERROR = 2,
  ML_INTERNAL_ERROR = 3
} ml_status;

typedef struct ml_context ml_context;
typedef struct ml_metric ml_metric;

/* Progress sink for long runs; line is valid only during the call. */
typedef void (*ml_line_fn)(const char* line, void* user);

ML_API const char* ml_version(void);

ML_API ml_context* ml_context_new(void);
ML_API void ml_context_free(ml_context* ctx);
/* Message for the last failing call on this context, "" if none. */
ML_API const char* ml_last_error(const ml_context* ctx);
ML_API void ml_set_workers(ml_context* ctx, unsigned workers);
ML_API void ml_set_seed(ml_context* ctx, uint64_t seed);
/* "lz77", "lz77x" or "external". */
ML_API ml_status ml_set_codec(ml_context* ctx, const char* name);

/* Reports are JSON strings owned by the caller. */
ML_API void ml_free_string(char* s);

/* spec: a built-in name (k33, k33-minus-edge, k32, ring-N, path-N, d01-N, hamming4, cube-N,
 * catalog names), JSON {"d": [["p/q", ...], ...], "labels": [...]}, or a graph
 * {"n": N, "edges": [[u, v, "w"], ...]}. */
ML_API ml_status ml_metric_load(ml_context* ctx, const char* spec, ml_metric** out);
ML_API void ml_metric_free(ml_metric* m);
ML_API size_t ml_metric_size(const ml_metric* m);
/* d(i, j) as "p/q"; caller frees. */
ML_API ml_status ml_metric_entry(ml_context* ctx, const ml_metric* m, size_t i, size_t j, char** out);
ML_API ml_status ml_metric_to_json(ml_context* ctx, const ml_metric* m, char** out);
/* Names accepted by ml_metric_load as a JSON array. */
ML_API ml_status ml_builtin_names(ml_context* ctx, char** out);

/* Axioms with witnesses. Negative when m is not a metric. */
ML_API ml_status ml_validate(ml_context* ctx, const ml_metric* m, char** report);
/* CND test of d^exponent entrywise; exponent "p/q" or NULL for 1. Negative when not CND. */
ML_API ml_status ml_cnd(ml_context* ctx, const ml_metric* m, const char* exponent, char** report);
/* Euclidean test of d^alpha (NULL for 1). Negative when not Euclidean. */
ML_API ml_status ml_euclidean(ml_context* ctx, const ml_metric* m, const char* alpha, char** report);
ML_API ml_status ml_kmn(ml_context* ctx, size_t m, size_t n, const char* alpha, char** report);
/* Point coordinates by Gram factorization. Negative when m is not Euclidean. */
ML_API ml_status ml_realize(ml_context* ctx, const ml_metric* m, char** report);
/* Frechet coordinates in l_inf with base point `base`. */
ML_API ml_status ml_frechet(ml_context* ctx, const ml_metric* m, size_t base, char** report);

/* Hamming-cube embedding of a graph spec (tree, path-N, ring-N or graph on <= 4 nodes). */
ML_API ml_status ml_embed_cube(ml_context* ctx, const char* graph_spec, char** report);
ML_API ml_status ml_embed_4pt(ml_context* ctx, const ml_metric* m, char** report);

/* params: {"kind": "cube"|"interval"|"sequence"|"box"|"simplex", "s": S, "m": M,
 * "bounds": [["a","b"], ...], "points": [["p/q", ...], ...]}. Strings come back as hex. */
ML_API ml_status ml_embed_scale(ml_context* ctx, const char* params, char** report);
/* Same params plus "scales": [...], "band": [lo, hi]. Negative when fewer than 95% of ratios lie in
 * the band or the rank correlation is below 0.95. */
ML_API ml_status ml_verify_scale(ml_context* ctx, const char* params, char** report);

/* dist: "xor", "cut:<bits>" or {"m", "alphabets", "table": ["p/q", ...]}. */
ML_API ml_status ml_entropy(ml_context* ctx, const char* dist, char** report);

/* variant "sum" or "max"; eps "p/q"; mode "metric_band" (default when NULL), "both_relaxed",
 * "normalized". Certificates go to sidecar_dir when non-NULL. */
ML_API ml_status ml_lp_embed(ml_context* ctx, const ml_metric* m, const char* variant, const char* eps,
                             const char* mode, const char* sidecar_dir, char** report);
/* Verifies a sidecar produced by ml_lp_embed against the system it claims to settle. */
ML_API ml_status ml_verify_certificate(ml_context* ctx, const ml_metric* m, const char* variant, const char* eps,
                                       const char* mode, const char* certificate_text, char** report);

/* Kraft sum of 2^-d over `count` seeded strings of `bits` bits and r-ball count around the first. */
ML_API ml_status ml_kraft(ml_context* ctx, size_t count, size_t bits, double radius, char** report);
ML_API ml_status ml_packing(ml_context* ctx, const ml_metric* m, const char* eps, const char* r, double c, double b,
                            size_t s_max, char** report);

/* suite "paper"; criteria NULL or a comma list like "1,6". Negative when any criterion fails. */
ML_API ml_status ml_reproduce(ml_context* ctx, const char* suite, const char* criteria, const char* sidecar_dir,
                              ml_line_fn on_line, void* user, char** report);

#ifdef __cplusplus
}
#endif

#endif
