/* heatlab C interface.
 *
 * Every function returning hl_status stores a message for the calling thread
 * on failure; read it with hl_last_error(). Handles are opaque and owned by
 * the caller; release them with the matching *_destroy function. */
#ifndef HEATLAB_H
#define HEATLAB_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define HL_API __attribute__((visibility("default")))
#else
#define HL_API
#endif

typedef enum hl_status {
  HL_OK = 0,
  HL_INVALID_ARGUMENT,
  HL_NOT_REAL,
  HL_HARMONIC,
  HL_DEGREE_TOO_LOW,
  HL_ALL_MIXED_TERMS_VANISH,
  HL_GRID_TOO_COARSE,
  HL_NOT_HERMITIAN,
  HL_NOT_PSD,
  HL_SOLVER_DIVERGED,
  HL_SCHEDULE_UNREACHABLE,
  HL_TAIL_NOT_NEGLIGIBLE,
  HL_POSITIVE_REAL_PART,
  HL_ORDER_TOO_HIGH,
  HL_CYLINDER_OUT_OF_RANGE,
  HL_SCHEDULE_TOO_SHORT,
  HL_PARSE_ERROR,
  HL_VALIDATION_ERROR,
  HL_IO,
  HL_INTERNAL
} hl_status;

typedef struct hl_polynomial hl_polynomial;
typedef struct hl_kernel hl_kernel;
typedef struct hl_config hl_config;

HL_API const char* hl_version(void);
HL_API const char* hl_status_name(hl_status status);
/* Message of the last failed call on this thread ("" if none). */
HL_API const char* hl_last_error(void);
/* Process exit code the CLI uses for a status. */
HL_API int hl_exit_code(hl_status status);

/* ---- polynomial -------------------------------------------------------- */

/* Wirtinger coefficients: p = sum c_jk z^j conj(z)^k with c_jk = re + i im. */
HL_API hl_status hl_polynomial_create(const int* j, const int* k, const double* re, const double* im,
                                      size_t count, hl_polynomial** out);
/* family 1: |z|^{2m}; family 2: (Re z)^{2m}. */
HL_API hl_status hl_polynomial_model(int family, int m, hl_polynomial** out);
HL_API void hl_polynomial_destroy(hl_polynomial* p);
HL_API int hl_polynomial_degree(const hl_polynomial* p);
HL_API hl_status hl_polynomial_eval(const hl_polynomial* p, double x1, double x2, double* out);
HL_API hl_status hl_polynomial_laplacian(const hl_polynomial* p, double x1, double x2, double* out);

/* ---- geometry ---------------------------------------------------------- */

HL_API hl_status hl_geom_lambda(const hl_polynomial* p, double z_re, double z_im, double delta,
                                double* out);
HL_API hl_status hl_geom_mu(const hl_polynomial* p, double z_re, double z_im, double delta, double* out);
HL_API hl_status hl_geom_sobolev_radius(const hl_polynomial* p, double tau, double z_re, double z_im,
                                        double* out);
HL_API hl_status hl_geom_twist(const hl_polynomial* p, double w_re, double w_im, double z_re,
                               double z_im, double* out);
/* Grid metric on [-L, L]^2 with n nodes per side; straight_line may be NULL. */
HL_API hl_status hl_rho_grid(const hl_polynomial* p, double half_width, int n, double z_re, double z_im,
                             double w_re, double w_im, double* rho, double* straight_line);
HL_API hl_status hl_rho_closed_form(int family, int m, double z_re, double z_im, double w_re,
                                    double w_im, double* out);

/* ---- heat kernel ------------------------------------------------------- */

HL_API hl_status hl_kernel_compute(const hl_polynomial* p, double tau, double half_width, int n,
                                   double dt, double w_re, double w_im, const double* schedule,
                                   size_t count, hl_kernel** out);
HL_API void hl_kernel_destroy(hl_kernel* k);
HL_API size_t hl_kernel_snapshot_count(const hl_kernel* k);
HL_API int hl_kernel_grid_n(const hl_kernel* k);
HL_API double hl_kernel_time(const hl_kernel* k, size_t snapshot);
/* Node (i, j) sits at ((i - c) h, (j - c) h), c = (n - 1) / 2. */
HL_API hl_status hl_kernel_value(const hl_kernel* k, size_t snapshot, int i, int j, double* re,
                                 double* im);
HL_API hl_status hl_kernel_interpolate(const hl_kernel* k, size_t snapshot, double x1, double x2,
                                       double* re, double* im);

/* ---- Monte Carlo ------------------------------------------------------- */

HL_API hl_status hl_mc_kernel(const hl_polynomial* p, double tau, double x1, double x2, double y1,
                              double y2, double s, int n_paths, int n_t, uint64_t seed, double* re,
                              double* im, double* std_error, double* free_factor);

/* ---- configuration and runs -------------------------------------------- */

HL_API hl_status hl_config_default(int oracle_mode, hl_config** out);
HL_API hl_status hl_config_parse(const char* text, int oracle_mode, hl_config** out);
HL_API void hl_config_destroy(hl_config* c);
/* Sets "section.key" from text, e.g. ("operator.tau", "2"). Not validated
 * until hl_config_validate or hl_run. */
HL_API hl_status hl_config_set(hl_config* c, const char* key, const char* value);
HL_API hl_status hl_config_validate(const hl_config* c);
/* 16 hex digits plus terminator; buf needs at least 17 bytes. */
HL_API hl_status hl_config_hash(const hl_config* c, char* buf, size_t len);
/* Caller frees with hl_string_free. */
HL_API char* hl_config_canonical(const hl_config* c);

/* Runs a command (geom, rho, kernel, mc, gfield, verify) writing artifacts
 * into outdir. Returns the process exit code. When summary is not NULL it
 * receives text for standard output (free with hl_string_free). On a nonzero
 * code the message is available from hl_last_error(). */
HL_API int hl_run(const hl_config* c, const char* command, const char* outdir, char** summary);

HL_API void hl_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif
