/* C interface to the sequence-space laboratory.
 *
 * All functions are thread-safe with respect to distinct handles. Strings
 * returned as char* are heap-allocated and must be released with
 * bsv_string_free; reports must be released with bsv_report_free.
 * Functions that can fail return NULL (pointers) or a nonzero code (ints);
 * bsv_last_error() then returns a thread-local description of the failure.
 */
#ifndef BESOVLAB_CAPI_H
#define BESOVLAB_CAPI_H

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define BSV_API __declspec(dllexport)
#else
#define BSV_API __attribute__((visibility("default")))
#endif

typedef struct bsv_report bsv_report;

/* Last error message for the calling thread, or "" if none. Never NULL.
 * Valid until the next failing bsv_ call on the same thread. */
BSV_API const char* bsv_last_error(void);

/* Release a string returned by this library. NULL is a no-op. */
BSV_API void bsv_string_free(char* s);

/* JSON array of suite names. */
BSV_API char* bsv_list_suites(void);

/* Human-readable property and tolerance contract for one suite.
 * NULL if the suite name is unknown. */
BSV_API char* bsv_explain_suite(const char* suite);

/* Run one experiment suite from a JSON config (schema 1; mandatory integer
 * seed). Returns NULL on malformed config or unknown suite. */
BSV_API bsv_report* bsv_run_suite(const char* config_json);

/* 1 if every trial met its tolerance contract, else 0. */
BSV_API int bsv_report_passed(const bsv_report* rep);

/* Deterministic JSON document for the report (schema 1). */
BSV_API char* bsv_report_json(const bsv_report* rep);

/* CSV table, one row per trial, fixed column order. */
BSV_API char* bsv_report_csv(const bsv_report* rep);

/* Static SVG histogram of the per-trial metric. */
BSV_API char* bsv_report_plot_svg(const bsv_report* rep);

BSV_API void bsv_report_free(bsv_report* rep);

/* Sequence norm of a coefficient field.
 * space_json: {"family":"b"|"f"|"f_infinity","p":..,"q":..,
 *              "weights":{...},"window":{...}}
 * field_json: the coefficient-field document produced by this library.
 * Returns 0 and writes the norm to *out, or nonzero on error. */
BSV_API int bsv_sequence_norm(const char* space_json, const char* field_json, double* out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* BESOVLAB_CAPI_H */
