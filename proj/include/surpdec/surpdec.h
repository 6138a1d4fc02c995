/* C interface to the surprisal decomposition library.
 *
 * Every fallible call returns a surpdec_status. On failure the message is
 * available from surpdec_last_error() on the same thread until the next call.
 * Strings returned through char** out-parameters are owned by the caller and
 * released with surpdec_string_free().
 */
#ifndef SURPDEC_H
#define SURPDEC_H

#include <stddef.h>

#if defined(_WIN32)
#define SURPDEC_API __declspec(dllexport)
#else
#define SURPDEC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum surpdec_status {
  SURPDEC_OK = 0,
  SURPDEC_INVALID_ARGUMENT = 1,
  SURPDEC_SCHEMA_ERROR = 2,
  SURPDEC_IO_ERROR = 3,
  SURPDEC_MISSING_VERIDICAL = 4,
  SURPDEC_EMPTY_SET = 5,
  SURPDEC_ZERO_NORM_EMBEDDING = 6,
  SURPDEC_BACKEND_UNAVAILABLE = 7,
  SURPDEC_MISSING_ENTRY = 8,
  SURPDEC_NUMERICAL_UNDERFLOW = 9,
  SURPDEC_NEGATIVE_DEEP = 10,
  SURPDEC_TARGET_UNREACHABLE = 11,
  SURPDEC_ITERATION_LIMIT = 12,
  SURPDEC_UNKNOWN_ITEM_ID = 13,
  SURPDEC_UNPAIRED_ITEM = 14,
  SURPDEC_CONTEXT_MISMATCH = 15,
  SURPDEC_DANGLING_CONTROL_REF = 16,
  SURPDEC_RANK_DEFICIENT = 17,
  SURPDEC_JOIN_ERROR = 18,
  SURPDEC_ITEM_FAILURES = 19,
  SURPDEC_INTERNAL = 99
} surpdec_status;

typedef struct surpdec_backend surpdec_backend;
typedef struct surpdec_dataset surpdec_dataset;
typedef struct surpdec_candidates surpdec_candidates;
typedef struct surpdec_run surpdec_run;

SURPDEC_API const char* surpdec_version(void);
SURPDEC_API const char* surpdec_status_name(surpdec_status status);
SURPDEC_API const char* surpdec_last_error(void);
SURPDEC_API void surpdec_string_free(char* s);
SURPDEC_API void surpdec_doubles_free(double* values);

/* Backends: "mock:FILE" or "http:URL". */
SURPDEC_API surpdec_status surpdec_backend_open(const char* spec, surpdec_backend** out);
SURPDEC_API void surpdec_backend_free(surpdec_backend* backend);
SURPDEC_API surpdec_status surpdec_backend_identity(const surpdec_backend* backend, char** out);
SURPDEC_API surpdec_status surpdec_backend_logprob(const surpdec_backend* backend, const char* context,
                                                   const char* continuation, double* out);

/* Stimulus datasets. */
SURPDEC_API surpdec_status surpdec_dataset_load(const char* path, surpdec_dataset** out);
SURPDEC_API void surpdec_dataset_free(surpdec_dataset* dataset);
SURPDEC_API size_t surpdec_dataset_size(const surpdec_dataset* dataset);
SURPDEC_API int surpdec_dataset_has_item(const surpdec_dataset* dataset, const char* item_id);
/* {"name", "n_items", "conditions", "expected_pattern", "lambda", "gamma"} */
SURPDEC_API surpdec_status surpdec_dataset_info_json(const surpdec_dataset* dataset, char** out);

typedef struct surpdec_generator_options {
  const char* generator;         /* "external", "counterpart" or "sampler" */
  const char* corrections_path;  /* external */
  const char* lexicon_path;      /* sampler */
  const char* word_vectors_path; /* sampler, optional */
  size_t n_phonological;
  size_t n_semantic;
  size_t n_contextual;
  size_t jobs;
} surpdec_generator_options;

SURPDEC_API void surpdec_generator_options_init(surpdec_generator_options* options);

/* Per-item generation failures are kept on the handle, not returned as errors. */
SURPDEC_API surpdec_status surpdec_candidates_generate(const surpdec_dataset* dataset, const surpdec_backend* backend,
                                                       const surpdec_generator_options* options,
                                                       surpdec_candidates** out);
SURPDEC_API surpdec_status surpdec_candidates_load(const char* path, surpdec_candidates** out);
SURPDEC_API void surpdec_candidates_free(surpdec_candidates* candidates);
SURPDEC_API size_t surpdec_candidates_count(const surpdec_candidates* candidates);
SURPDEC_API size_t surpdec_candidates_failure_count(const surpdec_candidates* candidates);
SURPDEC_API surpdec_status surpdec_candidates_to_json(const surpdec_candidates* candidates, char** out);
SURPDEC_API surpdec_status surpdec_candidates_failures_csv(const surpdec_candidates* candidates, char** out);

typedef struct surpdec_decompose_options {
  double lambda;
  double gamma;
  double alpha;
  double beta;
  size_t jobs;
} surpdec_decompose_options;

SURPDEC_API void surpdec_decompose_options_init(surpdec_decompose_options* options);

/* Per-item failures (including those carried by `candidates`) are collected on the run. */
SURPDEC_API surpdec_status surpdec_run_decompose(const surpdec_dataset* dataset, const surpdec_candidates* candidates,
                                                 const surpdec_backend* backend,
                                                 const surpdec_decompose_options* options, surpdec_run** out);
SURPDEC_API void surpdec_run_free(surpdec_run* run);
SURPDEC_API size_t surpdec_run_result_count(const surpdec_run* run);
SURPDEC_API size_t surpdec_run_failure_count(const surpdec_run* run);
SURPDEC_API surpdec_status surpdec_run_items_csv(const surpdec_run* run, char** out);
SURPDEC_API surpdec_status surpdec_run_summary_csv(const surpdec_run* run, char** out);
SURPDEC_API surpdec_status surpdec_run_failures_csv(const surpdec_run* run, char** out);
SURPDEC_API surpdec_status surpdec_run_effects_svg(const surpdec_run* run, const char* title, char** out);
/* erp_csv_path may be NULL for a model-only export. */
SURPDEC_API surpdec_status surpdec_run_long_format_csv(const surpdec_run* run, const char* erp_csv_path, char** out);

/* svg_out may be NULL. Unknown item ids yield SURPDEC_UNKNOWN_ITEM_ID. */
SURPDEC_API surpdec_status surpdec_frontier(const surpdec_candidates* candidates, const char* item_id,
                                            const double* lambdas, size_t n_lambdas, double gamma, char** csv_out,
                                            char** svg_out);

/* pattern may be NULL to use the dataset's expected_pattern. */
SURPDEC_API surpdec_status surpdec_gridsearch(const surpdec_dataset* dataset, const surpdec_candidates* candidates,
                                              const surpdec_backend* backend, const double* lambdas,
                                              size_t n_lambdas, const double* gammas, size_t n_gammas,
                                              const char* const* pattern, size_t n_pattern, size_t jobs,
                                              char** csv_out);

/* "start:stop:step" or "a,b,c"; NULL or "" gives the default lambda grid. */
SURPDEC_API surpdec_status surpdec_grid_parse(const char* text, double** values, size_t* n);
SURPDEC_API surpdec_status surpdec_default_gamma_grid(double** values, size_t* n);

/* Reads a CSV with columns n400, p600, surprisal and writes the sign report. */
SURPDEC_API surpdec_status surpdec_stats_sign_check(const char* csv_path, char** report_out, int* all_match);

/* JSON array of {"experiment", "lambda"} for a generator name. */
SURPDEC_API surpdec_status surpdec_lambda_presets_json(const char* generator, char** out);

#ifdef __cplusplus
}
#endif

#endif /* SURPDEC_H */
