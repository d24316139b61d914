/*
 * C interface to libpursuitlab.
 *
 * Every function returns a pl_status. On failure a human-readable message is
 * available from pl_last_error() on the calling thread until the next call.
 * Matrices are dense, row-major, double precision. Handles are opaque and
 * owned by the caller once returned; release them with the matching _free.
 */
#ifndef PURSUITLAB_H
#define PURSUITLAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define PL_API __declspec(dllexport)
#else
#  define PL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pl_status {
  PL_OK = 0,
  PL_ERR_DIMENSION_MISMATCH = 1,
  PL_ERR_RANK_DEFICIENT = 2,
  PL_ERR_NOT_POSITIVE_DEFINITE = 3,
  PL_ERR_SINGULAR_MATRIX = 4,
  PL_ERR_NON_FINITE = 5,
  PL_ERR_INVALID_DIMS = 6,
  PL_ERR_ZERO_SIGNAL = 7,
  PL_ERR_INVALID_OMEGA = 8,
  PL_ERR_ZERO_SPREAD = 9,
  PL_ERR_UNDEFINED_SNR = 10,
  PL_ERR_TOO_LARGE = 11,
  PL_ERR_PARSE = 12,
  PL_ERR_VALIDATION = 13,
  PL_ERR_IO = 14,
  PL_ERR_INVALID_ARGUMENT = 15,
  PL_ERR_INTERNAL = 99
} pl_status;

typedef enum pl_variant {
  PL_OMP = 0,
  PL_SGP = 1,
  PL_TOMP = 2,
  PL_LOMP = 3,
  PL_COSAMP = 4
} pl_variant;

typedef enum pl_termination {
  PL_RESIDUAL_MET = 0,
  PL_MAX_ITERATIONS = 1,
  PL_STALLED = 2
} pl_termination;

typedef enum pl_omega_rule {
  PL_OMEGA_SUPPORT_FROBENIUS = 0,
  PL_OMEGA_GLOBAL_FROBENIUS = 1,
  PL_OMEGA_TIGHT = 2,
  PL_OMEGA_FIXED = 3
} pl_omega_rule;

typedef enum pl_format { PL_FORMAT_CSV = 0, PL_FORMAT_SVG = 1, PL_FORMAT_BOTH = 2 } pl_format;

/* Parameters of one recovery algorithm. Fields not used by `variant` are ignored. */
typedef struct pl_algorithm {
  pl_variant variant;
  double alpha;           /* TOMP */
  size_t lambda;          /* LOMP */
  pl_omega_rule omega_rule; /* LOMP */
  double omega;           /* LOMP with PL_OMEGA_FIXED */
  size_t k_max;           /* SGP */
  double mu;              /* SGP; <= 0 selects 2m / (3 k_max) */
  size_t k;               /* COSAMP */
} pl_algorithm;

typedef struct pl_recovery {
  size_t iterations;
  size_t support_size;
  pl_termination termination;
  double residual_final;
} pl_recovery;

typedef struct pl_cell_summary {
  const char* algorithm; /* valid while the owning pl_results lives */
  const char* params;
  size_t m;
  double snr_db;         /* +inf for noise-free cells */
  size_t trials;
  double nrmse_mean;
  double nrmse_std;
  double support_size_mean;
  double support_recovered_rate;
  double exact_support_rate;
  double iterations_mean;
  size_t stalled_count;
} pl_cell_summary;

typedef struct pl_bound_report {
  size_t instances;
  size_t holding;
  double worst_ratio;
} pl_bound_report;

typedef struct pl_config pl_config;
typedef struct pl_results pl_results;

typedef void (*pl_progress_fn)(size_t done_cells, size_t total_cells, void* user);

PL_API const char* pl_version(void);
PL_API const char* pl_status_string(pl_status status);
PL_API const char* pl_last_error(void);

/* ---- linear algebra ---------------------------------------------------- */

PL_API pl_status pl_least_squares(const double* a, size_t rows, size_t cols, const double* y, double* x_out);
PL_API pl_status pl_solve_tikhonov(const double* a, size_t rows, size_t cols, const double* y, double alpha,
                                   double* x_out);
PL_API pl_status pl_gram_eig_extremes(const double* a, size_t rows, size_t cols, double* lambda_min,
                                      double* lambda_max);
PL_API pl_status pl_condition_number(const double* a, size_t rows, size_t cols, double* kappa);

/* ---- instances --------------------------------------------------------- */

/* m x n Gaussian matrix with unit-norm columns; `out` holds m * n doubles. */
PL_API pl_status pl_gen_sensing_matrix(uint64_t seed, size_t m, size_t n, double* out);

/* ---- recovery ---------------------------------------------------------- */

PL_API pl_algorithm pl_algorithm_default(pl_variant variant);

/* Recovers x_hat (length cols) from y (length rows). A zero threshold means noise-free. */
PL_API pl_status pl_recover(const pl_algorithm* algorithm, const double* a, size_t rows, size_t cols,
                            const double* y, double residual_threshold, size_t max_iterations,
                            double* x_hat_out, pl_recovery* info_out);

/* ---- analysis ---------------------------------------------------------- */

PL_API pl_status pl_nrmse(const double* x, const double* x_hat, size_t n, double* out);
PL_API pl_status pl_ric_exact(const double* a, size_t rows, size_t cols, size_t k, double* delta_out);
/* delta_k of the seeded normalized Gaussian matrix used by the `ric` command. */
PL_API pl_status pl_ric_seeded(uint64_t seed, size_t rows, size_t cols, size_t k, double* delta_out);
PL_API pl_status pl_verify_tikhonov(uint64_t seed, size_t instances, pl_bound_report* out);
PL_API pl_status pl_verify_landweber(uint64_t seed, size_t instances, size_t ell_max, pl_bound_report* out);

/* ---- experiments ------------------------------------------------------- */

PL_API pl_status pl_config_default(pl_config** out);
/* Parses a key = value file. The result is validated only by pl_config_validate / pl_run_experiment. */
PL_API pl_status pl_config_load(const char* path, pl_config** out);
/* Applies one assignment with the same syntax as a config file line. */
PL_API pl_status pl_config_set(pl_config* config, const char* key, const char* value);
PL_API pl_status pl_config_validate(const pl_config* config);
/* Canonical text of the config; the string lives until the next call on this config. */
PL_API pl_status pl_config_text(pl_config* config, const char** text_out);
PL_API pl_status pl_config_output_dir(const pl_config* config, const char** dir_out);
PL_API pl_status pl_config_format(const pl_config* config, pl_format* format_out);
PL_API void pl_config_free(pl_config* config);

/* threads == 0 uses the config value. partial_csv may be NULL. */
PL_API pl_status pl_run_experiment(const pl_config* config, size_t threads, const char* partial_csv,
                                   pl_progress_fn progress, void* user, pl_results** out);
PL_API size_t pl_results_count(const pl_results* results);
PL_API pl_status pl_results_get(const pl_results* results, size_t index, pl_cell_summary* out);
PL_API pl_status pl_results_write_csv(const pl_results* results, const char* path);
PL_API pl_status pl_results_write_trials_csv(const pl_results* results, const char* path);
/* Writes <prefix>m<m>_nrmse.svg and <prefix>m<m>_support_size.svg for every m. */
PL_API pl_status pl_results_write_svg(const pl_results* results, const char* path_prefix);
/* Writes summary.csv / SVGs / trials.csv as configured, plus manifest.txt, into dir. */
PL_API pl_status pl_results_write_outputs(const pl_results* results, const pl_config* config, const char* dir,
                                          pl_format format);
PL_API void pl_results_free(pl_results* results);

#ifdef __cplusplus
}
#endif

#endif /* PURSUITLAB_H */
