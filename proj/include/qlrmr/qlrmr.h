#ifndef QLRMR_QLRMR_H
#define QLRMR_QLRMR_H

#include <stddef.h>
#include <stdint.h>

#if defined(QLRMR_BUILDING_LIBRARY)
#define QLRMR_API __attribute__((visibility("default")))
#else
#define QLRMR_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/*
 * Status codes. Every function returning qlrmr_status leaves its outputs
 * untouched on failure; qlrmr_last_error() then describes the failure for the
 * calling thread.
 */
typedef enum qlrmr_status {
  QLRMR_OK = 0,
  QLRMR_INVALID_ARGUMENT = 1,
  QLRMR_CONFIG = 2,
  QLRMR_DIMENSION = 3,
  QLRMR_NUMERIC = 4,
  QLRMR_IO = 5,
  QLRMR_PARSE = 6,
  QLRMR_INTERNAL = 7
} qlrmr_status;

typedef enum qlrmr_dither_kind {
  QLRMR_DITHER_NONE = 0,
  QLRMR_DITHER_UNIFORM = 1,
  QLRMR_DITHER_TRIANGULAR = 2
} qlrmr_dither_kind;

typedef enum qlrmr_experiment_kind {
  QLRMR_EXPERIMENT_ERROR_CURVE = 0,
  QLRMR_EXPERIMENT_DITHER_COMPARE = 1,
  QLRMR_EXPERIMENT_LASSO_VS_OLS = 2,
  QLRMR_EXPERIMENT_REAL_DATA = 3
} qlrmr_experiment_kind;

typedef struct qlrmr_matrix qlrmr_matrix;
typedef struct qlrmr_rng qlrmr_rng;
typedef struct qlrmr_result qlrmr_result;

typedef struct qlrmr_solver_options {
  int max_iters;
  double rel_tol;
  int backtracking; /* nonzero: backtracking from eta (0 = automatic) */
  double eta;       /* fixed step, or initial step when backtracking; 0 = automatic */
  double beta;      /* backtracking shrink factor in (0, 1) */
  int acceleration;
} qlrmr_solver_options;

typedef struct qlrmr_fit_info {
  int iterations;
  int converged;
  double final_objective;
  double stationarity_residual;
  double min_eig_sxx;
  double step;
} qlrmr_fit_info;

typedef struct qlrmr_noise_moments {
  double mean_noise;
  double var_noise;
  double second_moment_noise;
  double mean_error;
  double ks_stat;
} qlrmr_noise_moments;

QLRMR_API const char* qlrmr_version(void);
/* Message of the last failure on this thread; "" if none. */
QLRMR_API const char* qlrmr_last_error(void);
QLRMR_API void qlrmr_string_free(char* s);

/* Matrices are column-major. `data` may be NULL for a zero matrix. */
QLRMR_API qlrmr_status qlrmr_matrix_create(size_t rows, size_t cols, const double* data,
                                           qlrmr_matrix** out);
QLRMR_API void qlrmr_matrix_destroy(qlrmr_matrix* m);
QLRMR_API size_t qlrmr_matrix_rows(const qlrmr_matrix* m);
QLRMR_API size_t qlrmr_matrix_cols(const qlrmr_matrix* m);
/* Copies rows*cols values; `capacity` is the length of `out`. */
QLRMR_API qlrmr_status qlrmr_matrix_copy_out(const qlrmr_matrix* m, double* out, size_t capacity);
QLRMR_API qlrmr_status qlrmr_matrix_read_csv(const char* path, qlrmr_matrix** out);
QLRMR_API qlrmr_status qlrmr_matrix_write_csv(const qlrmr_matrix* m, const char* path);

QLRMR_API qlrmr_status qlrmr_rng_create(uint64_t seed, qlrmr_rng** out);
QLRMR_API void qlrmr_rng_destroy(qlrmr_rng* rng);

/* Quantization. */
QLRMR_API qlrmr_status qlrmr_uniform_quantize(double a, double delta, double* out);
/* `dither` may be NULL. */
QLRMR_API qlrmr_status qlrmr_quantize(const double* input, size_t count, double delta,
                                      qlrmr_dither_kind kind, qlrmr_rng* rng, double* quantized,
                                      double* dither);
QLRMR_API qlrmr_status qlrmr_noise_moments_of(const double* input, size_t count, double delta,
                                              qlrmr_dither_kind kind, qlrmr_rng* rng,
                                              qlrmr_noise_moments* out);

/* Linear algebra. */
QLRMR_API qlrmr_status qlrmr_svt(const qlrmr_matrix* m, double tau, qlrmr_matrix** out);
QLRMR_API qlrmr_status qlrmr_project_nuclear_ball(const qlrmr_matrix* m, double radius,
                                                  qlrmr_matrix** out);
QLRMR_API qlrmr_status qlrmr_nuclear_norm(const qlrmr_matrix* m, double* out);
QLRMR_API qlrmr_status qlrmr_operator_norm(const qlrmr_matrix* m, double* out);

/* Estimation. X is d1 x n and Y is d2 x n, one sample per column. */
QLRMR_API qlrmr_status qlrmr_quantize_dataset(const qlrmr_matrix* x, const qlrmr_matrix* y,
                                              double delta1, double delta2, int dithered,
                                              qlrmr_rng* rng, qlrmr_matrix** xdot,
                                              qlrmr_matrix** ydot);
QLRMR_API qlrmr_status qlrmr_surrogate_covariances(const qlrmr_matrix* xdot,
                                                   const qlrmr_matrix* ydot, double delta1,
                                                   qlrmr_matrix** sxx, qlrmr_matrix** sxy);
QLRMR_API void qlrmr_solver_options_default(qlrmr_solver_options* opts);
/* `opts` and `info` may be NULL. */
QLRMR_API qlrmr_status qlrmr_regularized_lasso(const qlrmr_matrix* sxx, const qlrmr_matrix* sxy,
                                               double lambda, const qlrmr_solver_options* opts,
                                               qlrmr_matrix** theta, qlrmr_fit_info* info);
QLRMR_API qlrmr_status qlrmr_constrained_lasso(const qlrmr_matrix* sxx, const qlrmr_matrix* sxy,
                                               double radius, const qlrmr_solver_options* opts,
                                               qlrmr_matrix** theta, qlrmr_fit_info* info);
QLRMR_API qlrmr_status qlrmr_ols(const qlrmr_matrix* sxx, const qlrmr_matrix* sxy,
                                 qlrmr_matrix** theta, qlrmr_fit_info* info);
/* Matrix responses: sxy is s x (p*q); theta is returned rearranged, row i
 * holding the column-major vec of block i. */
QLRMR_API qlrmr_status qlrmr_l2rm_regularized(const qlrmr_matrix* sxx, const qlrmr_matrix* sxy,
                                              size_t p, size_t q, double lambda,
                                              const qlrmr_solver_options* opts,
                                              qlrmr_matrix** theta, qlrmr_fit_info* info);
QLRMR_API qlrmr_status qlrmr_lambda_schedule(size_t d1, size_t d2, size_t n, double scale,
                                             double* out);

/* JSON-configured workflows. Config strings are JSON documents. */
/* Fills in defaults and validates; *resolved_json is freed by qlrmr_string_free. */
QLRMR_API qlrmr_status qlrmr_resolve_experiment_config(const char* config_json,
                                                       char** resolved_json);
QLRMR_API qlrmr_status qlrmr_resolve_dither_demo_config(const char* config_json,
                                                        char** resolved_json);
/* Writes a CSV table of noise moments; `rows_json` may be NULL. */
QLRMR_API qlrmr_status qlrmr_dither_demo(const char* config_json, const char* out_csv,
                                         char** rows_json);
QLRMR_API qlrmr_status qlrmr_generate(const char* config_json, const char* out_dir);
/* threads == 0 uses all cores. */
QLRMR_API qlrmr_status qlrmr_run_experiment(qlrmr_experiment_kind kind, const char* config_json,
                                            unsigned threads, qlrmr_result** out);
/* `scales` may be NULL with count 0 for the default grid. Result is a JSON array. */
QLRMR_API qlrmr_status qlrmr_calibrate(const char* config_json, const double* scales,
                                       size_t count, unsigned threads, char** report_json);

QLRMR_API qlrmr_status qlrmr_result_read_csv(const char* path, qlrmr_result** out);
QLRMR_API void qlrmr_result_destroy(qlrmr_result* r);
QLRMR_API size_t qlrmr_result_record_count(const qlrmr_result* r);
/* results.csv, summary.json, plot_results.py. */
QLRMR_API qlrmr_status qlrmr_result_write(const qlrmr_result* r, const char* out_dir);
QLRMR_API qlrmr_status qlrmr_result_summary_json(const qlrmr_result* r, char** out);

#ifdef __cplusplus
}
#endif

#endif
