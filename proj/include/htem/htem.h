/* C interface to the heavy-tailed Euler-Maruyama library.
 *
 * Every function returns an htem_status. On failure the message is kept
 * per thread and can be read with htem_last_error() until the next call on
 * that thread. Strings returned through char** are owned by the caller and
 * must be released with htem_string_free(). */
#ifndef HTEM_H
#define HTEM_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define HTEM_API __declspec(dllexport)
#else
#define HTEM_API __attribute__((visibility("default")))
#endif

typedef enum htem_status {
  HTEM_OK = 0,
  HTEM_ERR_DOMAIN = 1,
  HTEM_ERR_CONFIG_INVALID = 2,
  HTEM_ERR_TRAJECTORY_DIVERGED = 3,
  HTEM_ERR_DIMENSION_MISMATCH = 4,
  HTEM_ERR_UNEQUAL_SAMPLE_COUNTS = 5,
  HTEM_ERR_BOUND_VIOLATED = 6,
  HTEM_ERR_LAMBDA_OUT_OF_RANGE = 7,
  HTEM_ERR_MOMENT_UNDEFINED = 8,
  HTEM_ERR_MISSING_C2 = 9,
  HTEM_ERR_TAIL_BOUND_UNAVAILABLE = 10,
  HTEM_ERR_IO = 11,
  HTEM_ERR_NULL_ARGUMENT = 20,
  HTEM_ERR_INTERNAL = 99
} htem_status;

typedef struct htem_drift htem_drift;
typedef struct htem_ensemble htem_ensemble;

/* Progress lines from long runs (convergence, audit); may be NULL. */
typedef void (*htem_progress_fn)(const char* line, void* user);

HTEM_API const char* htem_version(void);
HTEM_API const char* htem_last_error(void);
HTEM_API const char* htem_status_name(htem_status status);
HTEM_API void htem_string_free(char* s);

/* --- sampling ---------------------------------------------------------- */

HTEM_API htem_status htem_p_alpha(double alpha, double* out);
HTEM_API htem_status htem_sigma(double alpha, double* out);
/* E|S|^p of the standard symmetric stable law, 0 <= p < alpha. */
HTEM_API htem_status htem_stable_abs_moment(double alpha, double p, double* out);

/* n draws into out. kind is "stable" (times scale) or "pareto" (scale
 * ignored). Draw i uses the stream (seed, i / 4096). */
HTEM_API htem_status htem_sample(const char* kind, double alpha, double scale, uint64_t seed,
                                 size_t n, double* out);
/* Draws from the single stream (seed, stream_id), in order. */
HTEM_API htem_status htem_sample_stream(const char* kind, double alpha, double scale,
                                        uint64_t seed, uint64_t stream_id, size_t n,
                                        double* out);

/* --- drifts ------------------------------------------------------------ */

/* kind: "ou" (param = theta), "sine" (param = a) or "tanh" (param unused). */
HTEM_API htem_status htem_drift_create(const char* kind, double param, size_t dim,
                                       htem_drift** out);
HTEM_API void htem_drift_destroy(htem_drift* drift);
HTEM_API size_t htem_drift_dim(const htem_drift* drift);
/* theta1, theta2, theta3, theta4, K, |b(0)|. */
HTEM_API htem_status htem_drift_params(const htem_drift* drift, double out[6]);
HTEM_API htem_status htem_drift_eval(const htem_drift* drift, const double* x, double* out);
/* Certification report as JSON. */
HTEM_API htem_status htem_drift_certify(const htem_drift* drift, size_t samples, double radius,
                                        uint64_t seed, char** out_json);

/* --- simulation -------------------------------------------------------- */

/* scheme: "stable", "pareto" or "exact_ou". x0 has htem_drift_dim entries. */
HTEM_API htem_status htem_simulate(const htem_drift* drift, double alpha, const char* scheme,
                                   double eta, uint64_t n_steps, const double* x0,
                                   uint64_t seed, uint64_t n_traj, htem_ensemble** out);
HTEM_API void htem_ensemble_destroy(htem_ensemble* ensemble);
HTEM_API size_t htem_ensemble_rows(const htem_ensemble* ensemble);
HTEM_API size_t htem_ensemble_cols(const htem_ensemble* ensemble);
/* Row-major terminal states, valid until the ensemble is destroyed. */
HTEM_API const double* htem_ensemble_data(const htem_ensemble* ensemble);
HTEM_API int htem_ensemble_stepsize_gate_ok(const htem_ensemble* ensemble);
/* format: "csv" or "binary". */
HTEM_API htem_status htem_ensemble_write(const htem_ensemble* ensemble, const char* path,
                                         const char* format);
HTEM_API htem_status htem_ensemble_csv(const htem_ensemble* ensemble, char** out_csv);

/* --- metrics ----------------------------------------------------------- */

/* Exact 1-d W1 between two samples of equal size n. */
HTEM_API htem_status htem_w1_1d(const double* x, const double* y, size_t n, double* out);
/* Sliced surrogate for n x d row-major samples. */
HTEM_API htem_status htem_w1_sliced(const double* x, const double* y, size_t n, size_t d,
                                    size_t n_projections, uint64_t seed, double* out);
HTEM_API htem_status htem_empirical_cf(const double* x, size_t n, size_t d, const double* u,
                                       double* out_re, double* out_im);
HTEM_API htem_status htem_mom_abs_moment(const double* x, size_t n, size_t d, double power,
                                         size_t n_blocks, uint64_t seed, double* out_value,
                                         double* out_std_error);

/* --- fractional Laplacian ---------------------------------------------- */

typedef double (*htem_scalar_fn)(double x, void* user);

/* Delta^{alpha/2} f(x) for a scalar f. Pass a negative lipschitz or
 * second_difference when unknown; at least one must be known. Default
 * quadrature settings. */
HTEM_API htem_status htem_frac_laplacian_1d(htem_scalar_fn f, void* user, double x,
                                            double alpha, double lipschitz,
                                            double second_difference, double* out_value,
                                            double* out_error);
/* |Delta^{alpha/2} b(0)| (Euclidean norm over components). */
HTEM_API htem_status htem_frac_laplacian_drift_at_zero(const htem_drift* drift, double alpha,
                                                       double* out_value, double* out_error);

/* --- constants, oracles, studies (JSON in, JSON out) ------------------- */

/* request: {"alpha", "drift": {...}, "eta", "x0", "C2_user"}; reply is the
 * ledger {"inputs", "values", "warnings"}. */
HTEM_API htem_status htem_constants_json(const char* request_json, char** out_json);
HTEM_API htem_status htem_oracle_ou_json(double alpha, double eta, char** out_json);
HTEM_API htem_status htem_ou_invariant_json(double alpha, double eta, uint64_t n,
                                            uint64_t seed, char** out_json);
/* Runs a convergence study from a schema_version 1 config. Returns the fit
 * JSON and the per-eta CSV. */
HTEM_API htem_status htem_converge_json(const char* config_json, htem_progress_fn progress,
                                        void* user, char** out_json, char** out_csv);
/* Ergodicity audit; *out_passed is 1 when every bound held. */
HTEM_API htem_status htem_audit_json(const char* config_json, htem_progress_fn progress,
                                     void* user, char** out_json, int* out_passed);

#ifdef __cplusplus
}
#endif

#endif /* HTEM_H */
