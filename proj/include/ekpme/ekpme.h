/*
 * C interface to the ekpme solver library.
 *
 * Every function returns an ekpme_status; on failure a description is
 * available from ekpme_last_error() on the calling thread. Handles are
 * opaque and must be released with the matching *_free function.
 */
#ifndef EKPME_H
#define EKPME_H

#include <stddef.h>

#if defined(EKPME_BUILDING_LIBRARY)
#define EKPME_API __attribute__((visibility("default")))
#else
#define EKPME_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ekpme_status {
  EKPME_OK = 0,
  EKPME_ERR_DOMAIN = 1,
  EKPME_ERR_INDEX = 2,
  EKPME_ERR_LENGTH = 3,
  EKPME_ERR_PARSE = 4,
  EKPME_ERR_CONVERGENCE = 5,
  EKPME_ERR_IO = 6,
  EKPME_ERR_NULL = 7,
  EKPME_ERR_INTERNAL = 8
} ekpme_status;

typedef enum ekpme_rule { EKPME_RULE_RECTANGLE = 0, EKPME_RULE_TRAPEZOID = 1 } ekpme_rule;

typedef struct ekpme_model ekpme_model;
typedef struct ekpme_outcome ekpme_outcome;
typedef struct ekpme_curve ekpme_curve;
typedef struct ekpme_table ekpme_table;

typedef struct ekpme_solver_config {
  double alpha;
  double A;
  double B;
  int N;
  ekpme_rule rule;
  double tolerance;
  int max_iterations;
  double scalar_tolerance;
  int regularize; /* nonzero: use max(D, eps(h)) with the constants below */
  double reg_C;
  double reg_delta;
} ekpme_solver_config;

EKPME_API const char* ekpme_version(void);
EKPME_API const char* ekpme_last_error(void);
EKPME_API const char* ekpme_status_name(ekpme_status status);

/* Fills defaults: A = 1 - alpha, B = alpha/2, N = 256, rectangle, tolerance 1e-8. */
EKPME_API void ekpme_solver_config_init(ekpme_solver_config* config, double alpha);
EKPME_API ekpme_status ekpme_solver_config_validate(const ekpme_solver_config* config);

/* Diffusivity models: "power:m=<float>" or "exp". */
EKPME_API ekpme_status ekpme_model_parse(const char* spec, ekpme_model** out);
EKPME_API void ekpme_model_free(ekpme_model* model);
EKPME_API ekpme_status ekpme_model_D(const ekpme_model* model, double u, double* out);
EKPME_API ekpme_status ekpme_model_K(const ekpme_model* model, double u, double* out);
EKPME_API ekpme_status ekpme_model_K_inverse(const ekpme_model* model, double y, double* out);
EKPME_API ekpme_status ekpme_model_admissible(const ekpme_model* model, int* admissible,
                                              double* value);
/* Writes at most `capacity` bytes including the terminator. */
EKPME_API ekpme_status ekpme_model_describe(const ekpme_model* model, char* buffer,
                                            size_t capacity);

/* Front shooting. */
EKPME_API ekpme_status ekpme_shoot(const ekpme_solver_config* config, const ekpme_model* model,
                                   double mass, ekpme_outcome** out);
/* Profile for a fixed front position, without shooting. */
EKPME_API ekpme_status ekpme_step(const ekpme_solver_config* config, const ekpme_model* model,
                                  double eta_star, ekpme_outcome** out);
EKPME_API void ekpme_outcome_free(ekpme_outcome* outcome);
EKPME_API ekpme_status ekpme_outcome_summary(const ekpme_outcome* outcome, double* eta_star,
                                             double* residual, int* iterations, int* clamped);
/* Copies U_0..U_N; `count` receives N+1 even when `capacity` is too small. */
EKPME_API ekpme_status ekpme_outcome_profile(const ekpme_outcome* outcome, double* values,
                                             size_t capacity, size_t* count);
EKPME_API ekpme_status ekpme_outcome_reconstruct(const ekpme_outcome* outcome, double x, double t,
                                                 double* u);
/* Either path may be NULL to skip that file. */
EKPME_API ekpme_status ekpme_outcome_write_csv(const ekpme_outcome* outcome,
                                               const char* profile_path, const char* summary_path);
EKPME_API ekpme_status ekpme_apriori_bound(const ekpme_solver_config* config,
                                           const ekpme_model* model, double eta_star, double* out);

/* EK discretization error curve on the analytic test pair. */
EKPME_API ekpme_status ekpme_ek_error_curve(double alpha, double mu, const double* h,
                                            size_t count, ekpme_rule rule, ekpme_curve** out);
EKPME_API void ekpme_curve_free(ekpme_curve* curve);
EKPME_API ekpme_status ekpme_curve_point(const ekpme_curve* curve, size_t index, double* h,
                                         double* error);
EKPME_API size_t ekpme_curve_size(const ekpme_curve* curve);
/* `available` is 0 when the curve has a single point. */
EKPME_API ekpme_status ekpme_curve_slope(const ekpme_curve* curve, double* slope, int* available);
EKPME_API ekpme_status ekpme_curve_write_csv(const ekpme_curve* curve, const char* path);

EKPME_API ekpme_status ekpme_aitken_order(double v_N, double v_2N, double v_4N, double* out);

/* Tables: rows of doubles with named columns. */
EKPME_API ekpme_status ekpme_order_sweep(const double* alphas, size_t count,
                                         const ekpme_model* model, double mass, int base_N,
                                         int threads, ekpme_table** out);
/* reference == NULL selects Richardson extrapolation from 2x and 4x the finest N. */
EKPME_API ekpme_status ekpme_front_errors(const int* N_list, size_t count, double alpha,
                                          const ekpme_model* model, double mass,
                                          const double* reference, int threads, ekpme_table** out);
EKPME_API ekpme_status ekpme_time_ratios(const double* alphas, size_t count,
                                         const ekpme_model* model, double mass, int N,
                                         ekpme_table** out);
EKPME_API void ekpme_table_free(ekpme_table* table);
EKPME_API size_t ekpme_table_rows(const ekpme_table* table);
EKPME_API size_t ekpme_table_columns(const ekpme_table* table);
EKPME_API const char* ekpme_table_column_name(const ekpme_table* table, size_t column);
EKPME_API ekpme_status ekpme_table_get(const ekpme_table* table, size_t row, size_t column,
                                       double* out);
/* Extra scalar attached to a table, e.g. the front reference value. */
EKPME_API ekpme_status ekpme_table_reference(const ekpme_table* table, double* out);
/* Writes the CSV schema of the producing analysis (alpha,order / N,eta_star,error / alpha,tau). */
EKPME_API ekpme_status ekpme_table_write_csv(const ekpme_table* table, const char* path);

#ifdef __cplusplus
}
#endif

#endif /* EKPME_H */
