/* C interface to the glmstab library.
 *
 * Objects are opaque handles released with the matching *_free function.
 * Every fallible call returns a gs_status; on failure the message is
 * available from gs_last_error() on the same thread until the next call. */
#ifndef GLMSTAB_H
#define GLMSTAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(GLMSTAB_BUILDING)
#    define GS_API __declspec(dllexport)
#  else
#    define GS_API __declspec(dllimport)
#  endif
#else
#  define GS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gs_status {
  GS_OK = 0,
  GS_ERR_ARGUMENT = 1,
  GS_ERR_DATA = 2,
  GS_ERR_OUT_OF_RANGE = 3,
  GS_ERR_MISSING_CONSTANTS = 4,
  GS_ERR_NOT_POSITIVE_DEFINITE = 5,
  GS_ERR_UNSUPPORTED_DOMAIN_TRANSFORM = 6,
  GS_ERR_INFEASIBLE_PREDICTION = 7,
  GS_ERR_SPEC = 8,
  GS_ERR_CONFIG = 9,
  GS_ERR_IO = 10,
  GS_ERR_INTERNAL = 100
} gs_status;

typedef enum gs_loss_kind { GS_LOSS_SQUARE = 0, GS_LOSS_BOUNDED_LOGISTIC = 1 } gs_loss_kind;

typedef struct gs_dataset gs_dataset;
typedef struct gs_loss gs_loss;
typedef struct gs_domain gs_domain;
typedef struct gs_report gs_report;

GS_API const char* gs_version(void);
GS_API const char* gs_last_error(void);
GS_API const char* gs_status_name(gs_status status);

/* X is row-major n x d. */
GS_API gs_status gs_dataset_create(const double* X, const double* y, size_t n, size_t d, double cap_Y,
                                   gs_dataset** out);
GS_API gs_status gs_dataset_load_csv(const char* path, double cap_Y, gs_dataset** out);
GS_API size_t gs_dataset_n(const gs_dataset* dataset);
GS_API size_t gs_dataset_d(const gs_dataset* dataset);
GS_API void gs_dataset_free(gs_dataset* dataset);

GS_API gs_status gs_loss_create(gs_loss_kind kind, double cap_Y, gs_loss** out);
GS_API double gs_loss_rho(const gs_loss* loss);
GS_API double gs_loss_alpha(const gs_loss* loss);
GS_API gs_status gs_loss_eval(const gs_loss* loss, double y, double z, double* value, double* first,
                              double* second);
GS_API void gs_loss_free(gs_loss* loss);

GS_API gs_status gs_domain_euclidean_ball(double radius, gs_domain** out);
GS_API gs_status gs_domain_l1_ball(double radius, gs_domain** out);
GS_API gs_status gs_domain_box(double radius, gs_domain** out);
/* A is row-major d x d, symmetric positive definite. */
GS_API gs_status gs_domain_quad_ball(const double* A, size_t d, double radius, gs_domain** out);
GS_API void gs_domain_free(gs_domain* domain);

typedef struct gs_solve_info {
  double certificate_eps;
  double objective;
  size_t iterations;
  int converged;
} gs_solve_info;

/* w_out receives d values. info may be NULL. */
GS_API gs_status gs_erm_solve(const gs_dataset* dataset, const gs_loss* loss, const gs_domain* domain, double tol,
                              size_t max_iter, double* w_out, gs_solve_info* info);

typedef struct gs_stability {
  double delta;
  double bound_avg;
  double bound_uniform;
  double bound_preconditioned;
  double numeric_slack;
  double kappa_C;
  size_t rank;
  int converged;
} gs_stability;

/* threads: 0 = one per hardware thread. delta_i may be NULL, else n values. */
GS_API gs_status gs_average_stability(const gs_dataset* dataset, const gs_loss* loss, const gs_domain* domain,
                                      double tol, unsigned threads, gs_stability* out, double* delta_i);

typedef struct gs_run_options {
  int has_seed;
  uint64_t seed;
  int has_tol;
  double tol;
  int threads;             /* < 0: take from config; 0: auto */
  const char* output_dir;  /* NULL: take from config */
  const char* base_dir;    /* relative dataset paths resolve here; NULL: working directory */
  int timestamp;           /* nonzero: stamp the report with the current UTC time */
} gs_run_options;

GS_API void gs_run_options_init(gs_run_options* options);

/* Runs one of gen, stability, invariance, mc, excess, sgd. Config problems
 * return GS_ERR_CONFIG before any computation starts. */
GS_API gs_status gs_run_command(const char* command, const char* config_json, const gs_run_options* options,
                                gs_report** out);

GS_API const char* gs_report_json(const gs_report* report);
GS_API const char* gs_report_summary_csv(const gs_report* report);
GS_API const char* gs_report_output_dir(const gs_report* report);
GS_API int gs_report_all_pass(const gs_report* report);
GS_API size_t gs_report_predicate_count(const gs_report* report);
GS_API const char* gs_report_predicate_name(const gs_report* report, size_t index);
GS_API int gs_report_predicate_pass(const gs_report* report, size_t index);
/* "PASS name: detail" or "FAIL name: detail" */
GS_API const char* gs_report_predicate_line(const gs_report* report, size_t index);
GS_API size_t gs_report_artifact_count(const gs_report* report);
GS_API const char* gs_report_artifact_name(const gs_report* report, size_t index);
GS_API const char* gs_report_artifact_content(const gs_report* report, size_t index);
GS_API void gs_report_free(gs_report* report);

#ifdef __cplusplus
}
#endif

#endif /* GLMSTAB_H */
