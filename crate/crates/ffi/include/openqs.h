#ifndef OPENQS_H
#define OPENQS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  OQS_STATUS_OK = 0,
  OQS_STATUS_NULL_POINTER = 1,
  /**
   * Bad dimension, non-finite input, malformed config, unknown preset.
   */
  OQS_STATUS_INVALID = 2,
  OQS_STATUS_SOLVER = 3,
  /**
   * Cardano branch degenerate; use the numeric spectrum instead.
   */
  OQS_STATUS_BRANCH_DEGENERACY = 4,
  OQS_STATUS_OUT_OF_RANGE = 5,
  OQS_STATUS_IO = 6,
  OQS_STATUS_PANIC = 7,
} OqsStatus;

typedef enum {
  OQS_SEARCH_MODE_SCAN1D = 0,
  OQS_SEARCH_MODE_REFINE2D = 1,
} OqsSearchMode;

/**
 * Complex-symmetric model matrix.
 */
typedef struct OqsModel OqsModel;

typedef struct OqsScenario OqsScenario;

/**
 * Biorthonormal eigensystem together with its mixing table.
 */
typedef struct OqsSpectrum OqsSpectrum;

typedef struct {
  double re;
  double im;
} OqsComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL after a
 * success. Valid until the next call into this library on the same thread.
 */
const char *oqs_last_error_message(void);

/**
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void oqs_string_free(char *s);

/**
 * Builds an `n x n` model from row-major entries; must be symmetric.
 *
 * # Safety
 * `entries` must point to `n * n` values; `model` must be writable.
 */
OqsStatus oqs_model_new(size_t n, const OqsComplex *entries, OqsModel **model);

/**
 * `[[eps1, omega], [omega, eps2]]` with `eps = e + (i/2) gamma`.
 *
 * # Safety
 * `model` must be writable.
 */
OqsStatus oqs_model_two_level(OqsComplex eps1, OqsComplex eps2, OqsComplex omega, OqsModel **model);

/**
 * Doorway model: level 1 couples to 2 and 3, which do not couple directly.
 *
 * # Safety
 * `eps` must point to three values; `model` must be writable.
 */
OqsStatus oqs_model_doorway(const OqsComplex *eps,
                            OqsComplex omega12,
                            OqsComplex omega13,
                            OqsModel **model);

/**
 * # Safety
 * `model` must be writable.
 */
OqsStatus oqs_model_pt(double e, double gamma, double w, bool lossy, OqsModel **model);

/**
 * `diag(hb) - i alpha v v^T`.
 *
 * # Safety
 * `hb` and `v` must point to `n` values; `model` must be writable.
 */
OqsStatus oqs_model_channel(const double *hb,
                            const double *v,
                            size_t n,
                            double alpha,
                            OqsModel **model);

/**
 * Dimension of `model`, or 0 for NULL.
 *
 * # Safety
 * `model` must be NULL or a live handle.
 */
size_t oqs_model_dim(const OqsModel *model);

/**
 * # Safety
 * `model` must be a live handle; `value` must be writable.
 */
OqsStatus oqs_model_get(const OqsModel *model, size_t i, size_t j, OqsComplex *value);

/**
 * # Safety
 * `model` must be NULL or a handle not yet freed.
 */
void oqs_model_free(OqsModel *model);

/**
 * Closed-form eigenvalues of a 2x2 model: `lambdas[0] = mean + Z`.
 *
 * # Safety
 * `model` must be a live handle; `lambdas` must hold two values.
 */
OqsStatus oqs_two_level_eigenvalues(const OqsModel *model, OqsComplex *lambdas);

/**
 * Cardano eigenvalues of a 3x3 doorway model.
 *
 * # Safety
 * `model` must be a live handle; `lambdas` must hold three values.
 */
OqsStatus oqs_cardano_eigenvalues(const OqsModel *model, OqsComplex *lambdas);

/**
 * Numeric biorthonormal eigendecomposition of `model`.
 *
 * # Safety
 * `model` must be a live handle; `spectrum` must be writable.
 */
OqsStatus oqs_spectrum_new(const OqsModel *model, OqsSpectrum **spectrum);

/**
 * # Safety
 * `spectrum` must be NULL or a live handle.
 */
size_t oqs_spectrum_dim(const OqsSpectrum *spectrum);

/**
 * # Safety
 * `spectrum` must be a live handle; `lambda` must be writable.
 */
OqsStatus oqs_spectrum_eigenvalue(const OqsSpectrum *spectrum, size_t i, OqsComplex *lambda);

/**
 * Phase rigidity `r_i`.
 *
 * # Safety
 * `spectrum` must be a live handle; `rigidity` must be writable.
 */
OqsStatus oqs_spectrum_rigidity(const OqsSpectrum *spectrum, size_t i, double *rigidity);

/**
 * # Safety
 * `spectrum` must be a live handle; `flag` must be writable.
 */
OqsStatus oqs_spectrum_near_ep(const OqsSpectrum *spectrum, size_t i, bool *flag);

/**
 * Copies right eigenvector `i` (normalized so `phi^T phi = 1`) into `phi`.
 *
 * # Safety
 * `spectrum` must be a live handle; `phi` must hold `len` values.
 */
OqsStatus oqs_spectrum_eigenvector(const OqsSpectrum *spectrum,
                                   size_t i,
                                   OqsComplex *phi,
                                   size_t len);

/**
 * Mixing coefficient `b_ij` of eigenfunction `i` on basis state `j`.
 *
 * # Safety
 * `spectrum` must be a live handle; `b` must be writable.
 */
OqsStatus oqs_spectrum_mixing(const OqsSpectrum *spectrum, size_t i, size_t j, OqsComplex *b);

/**
 * # Safety
 * `spectrum` must be NULL or a handle not yet freed.
 */
void oqs_spectrum_free(OqsSpectrum *spectrum);

/**
 * # Safety
 * `id` must be a NUL-terminated string; `scenario` must be writable.
 */
OqsStatus oqs_scenario_preset(const char *id, OqsScenario **scenario);

/**
 * # Safety
 * `json` must be a NUL-terminated string; `scenario` must be writable.
 */
OqsStatus oqs_scenario_from_json(const char *json, OqsScenario **scenario);

/**
 * Replaces the grid size; `points` must be at least 2.
 *
 * # Safety
 * `scenario` must be a live handle.
 */
OqsStatus oqs_scenario_set_points(OqsScenario *scenario, size_t points);

/**
 * # Safety
 * `scenario` must be a live handle; `json` must be writable.
 */
OqsStatus oqs_scenario_to_json(const OqsScenario *scenario, char **json);

/**
 * Model matrix at sweep parameter `x`.
 *
 * # Safety
 * `scenario` must be a live handle; `model` must be writable.
 */
OqsStatus oqs_scenario_model_at(const OqsScenario *scenario, double x, OqsModel **model);

/**
 * Runs the sweep and returns the CSV table.
 *
 * # Safety
 * `scenario` must be a live handle; `csv` must be writable.
 */
OqsStatus oqs_sweep_csv(const OqsScenario *scenario, char **csv);

/**
 * EP search report as JSON. `tol <= 0` selects the default tolerance.
 *
 * # Safety
 * `scenario` must be a live handle; `json` must be writable.
 */
OqsStatus oqs_ep_search_json(const OqsScenario *scenario,
                             OqsSearchMode mode,
                             double tol,
                             char **json);

/**
 * # Safety
 * `scenario` must be NULL or a handle not yet freed.
 */
void oqs_scenario_free(OqsScenario *scenario);

/**
 * Preset catalog as a JSON array.
 *
 * # Safety
 * `json` must be writable.
 */
OqsStatus oqs_list_scenarios_json(char **json);

/**
 * Evaluates an S-matrix model given as JSON (`{"form": "pair", ...}`) on
 * `n` energies, writing `S(E)` and `sigma(E)`. Widths must be positive.
 *
 * # Safety
 * `model_json` must be a NUL-terminated string; `energies`, `s` and `sigma`
 * must each hold `n` values.
 */
OqsStatus oqs_smatrix_line_shape(const char *model_json,
                                 const double *energies,
                                 size_t n,
                                 OqsComplex *s,
                                 double *sigma);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OPENQS_H */
