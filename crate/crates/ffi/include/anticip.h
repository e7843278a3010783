#ifndef ANTICIP_H
#define ANTICIP_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum {
  ANTICIP_STATUS_OK = 0,
  ANTICIP_STATUS_NULL_POINTER = 1,
  ANTICIP_STATUS_INVALID_SIZE = 2,
  ANTICIP_STATUS_OUT_OF_RANGE = 3,
  ANTICIP_STATUS_INVALID_MODEL = 4,
  ANTICIP_STATUS_INVALID_MEASURE = 5,
  ANTICIP_STATUS_INVALID_DISTRIBUTION = 6,
  ANTICIP_STATUS_INVALID_MOMENTS = 7,
  ANTICIP_STATUS_INVALID_CONFIG = 8,
  ANTICIP_STATUS_INVALID_UTF8 = 9,
  ANTICIP_STATUS_BUFFER_TOO_SMALL = 10,
  ANTICIP_STATUS_PANIC = 11,
} AnticipStatus;

/**
 * Extremal model states.
 */
typedef enum {
  ANTICIP_MODEL_KIND_CONST_PERIODIC = 0,
  ANTICIP_MODEL_KIND_ALT_PERIODIC = 1,
  ANTICIP_MODEL_KIND_CONST_CONTINUOUS = 2,
  ANTICIP_MODEL_KIND_ALT_CONTINUOUS = 3,
} AnticipModelKind;

/**
 * Which periodic closed-form moment to evaluate.
 */
typedef enum {
  /**
   * `E(p_n)`; `index` is `n`.
   */
  ANTICIP_MOMENT_EXPECTED_PN = 0,
  /**
   * `Var(p_n)`; `index` is `n`.
   */
  ANTICIP_MOMENT_VARIANCE_PN = 1,
  /**
   * `E(p_N)`; `index` is the cut `N`.
   */
  ANTICIP_MOMENT_EXPECTED_TAIL = 2,
  /**
   * `Var(p_N)`; `index` is the cut `N`.
   */
  ANTICIP_MOMENT_VARIANCE_TAIL = 3,
  /**
   * `E(p_tot)`; `period` and `index` are ignored.
   */
  ANTICIP_MOMENT_EXPECTED_TOTAL = 4,
} AnticipMoment;

/**
 * Opaque series of anticipation probabilities.
 */
typedef struct AnticipProbabilities AnticipProbabilities;

/**
 * Opaque Monte Carlo report.
 */
typedef struct AnticipReport AnticipReport;

/**
 * Opaque spectral difference, periodic or continuous.
 */
typedef struct AnticipSpectrum AnticipSpectrum;

/**
 * Raw moments `E(ŷ^r)`, `r = 1..4`, of the sampling law.
 */
typedef struct {
  double m1;
  double m2;
  double m3;
  double m4;
} AnticipMoments;

/**
 * One Monte Carlo estimate.
 */
typedef struct {
  uint64_t trials;
  double mean;
  double variance;
  double std_error;
  double variance_std_error;
  double predicted_mean;
  double predicted_variance;
  double z_mean;
  double z_variance;
} AnticipEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread, NUL-terminated and
 * truncated to `capacity`. Returns the full message length in bytes.
 *
 * # Safety
 * `buffer` must be null or point to `capacity` writable bytes.
 */
size_t anticip_last_error(char *buffer, size_t capacity);

/**
 * Periodic spectral difference `ŷ_0..ŷ_{p-1}`, values in `[-1, 1]`.
 *
 * # Safety
 * `values` must point to `len` doubles; `out` must be writable.
 */
AnticipStatus anticip_spectrum_periodic_new(const double *values,
                                            size_t len,
                                            AnticipSpectrum **out);

/**
 * Piecewise-constant continuous spectral difference on `len` cells.
 *
 * # Safety
 * `values` must point to `len` doubles; `out` must be writable.
 */
AnticipStatus anticip_spectrum_continuous_new(const double *values,
                                              size_t len,
                                              AnticipSpectrum **out);

/**
 * Spectral difference of an extremal model state of the given size.
 *
 * # Safety
 * `out` must be writable.
 */
AnticipStatus anticip_spectrum_model_new(AnticipModelKind kind,
                                         size_t size,
                                         double y,
                                         AnticipSpectrum **out);

/**
 * Number of periods or cells.
 *
 * # Safety
 * `spectrum` must be a live handle.
 */
size_t anticip_spectrum_size(const AnticipSpectrum *spectrum);

/**
 * # Safety
 * `spectrum` must be null or a handle not yet freed.
 */
void anticip_spectrum_free(AnticipSpectrum *spectrum);

/**
 * Probabilities `p_n`: `n = 1..p` for a periodic spectrum (the window is
 * ignored), `n_min..=n_max` for a continuous one. `fast` selects the FFT
 * route for periodic spectra.
 *
 * # Safety
 * `spectrum` must be a live handle; `out` must be writable.
 */
AnticipStatus anticip_probabilities_new(const AnticipSpectrum *spectrum,
                                        int64_t n_min,
                                        int64_t n_max,
                                        bool fast,
                                        AnticipProbabilities **out);

/**
 * First index of the series.
 *
 * # Safety
 * `probs` must be a live handle.
 */
int64_t anticip_probabilities_n_min(const AnticipProbabilities *probs);

/**
 * Last index of the series.
 *
 * # Safety
 * `probs` must be a live handle.
 */
int64_t anticip_probabilities_n_max(const AnticipProbabilities *probs);

/**
 * `p_n` for an index inside the series.
 *
 * # Safety
 * `probs` must be a live handle; `out` must be writable.
 */
AnticipStatus anticip_probabilities_get(const AnticipProbabilities *probs, int64_t n, double *out);

/**
 * Sum of the series: one period, or the continuous window.
 *
 * # Safety
 * `probs` must be a live handle.
 */
double anticip_probabilities_total(const AnticipProbabilities *probs);

/**
 * Bound on the mass outside a continuous window; NaN for periodic series.
 *
 * # Safety
 * `probs` must be a live handle.
 */
double anticip_probabilities_tail_bound(const AnticipProbabilities *probs);

/**
 * # Safety
 * `probs` must be null or a handle not yet freed.
 */
void anticip_probabilities_free(AnticipProbabilities *probs);

/**
 * Closed-form `p_n` of an extremal model state.
 *
 * # Safety
 * `out` must be writable.
 */
AnticipStatus anticip_model_pn(AnticipModelKind kind,
                               size_t size,
                               double y,
                               int64_t n,
                               double *out);

/**
 * Closed-form moment under i.i.d. sampling of `ŷ` with the given moments.
 *
 * # Safety
 * `out` must be writable.
 */
AnticipStatus anticip_periodic_moment(AnticipMoment which,
                                      size_t period,
                                      int64_t index,
                                      AnticipMoments law,
                                      double *out);

/**
 * Monte Carlo run over `trials` i.i.d. spectral differences.
 *
 * `distribution` uses the CLI syntax (`uniform`, `two-point:Y`,
 * `table:PATH`). `continuous` selects `size` cells instead of period `size`.
 * `threads = 0` uses all cores; results do not depend on it.
 *
 * # Safety
 * `distribution` must be a NUL-terminated string; `n_list` and `cut_list`
 * must point to `n_len` and `cut_len` elements; `out` must be writable.
 */
AnticipStatus anticip_monte_carlo_run(bool continuous,
                                      size_t size,
                                      const char *distribution,
                                      uint64_t trials,
                                      uint64_t seed,
                                      const int64_t *n_list,
                                      size_t n_len,
                                      const size_t *cut_list,
                                      size_t cut_len,
                                      size_t threads,
                                      AnticipReport **out);

/**
 * Number of estimates in the report.
 *
 * # Safety
 * `report` must be a live handle.
 */
size_t anticip_report_len(const AnticipReport *report);

/**
 * Estimate at position `index`, in the report's order.
 *
 * # Safety
 * `report` must be a live handle; `out` must be writable.
 */
AnticipStatus anticip_report_estimate(const AnticipReport *report,
                                      size_t index,
                                      AnticipEstimate *out);

/**
 * Label of estimate `index` (`p_n[3]`, `p_N[2]`, `p_tot`, ...), copied
 * NUL-terminated into `buffer`.
 *
 * # Safety
 * `report` must be a live handle; `buffer` must point to `capacity` bytes.
 */
AnticipStatus anticip_report_label(const AnticipReport *report,
                                   size_t index,
                                   char *buffer,
                                   size_t capacity);

/**
 * Position of the `p_tot` estimate, or `SIZE_MAX` when absent.
 *
 * # Safety
 * `report` must be a live handle.
 */
size_t anticip_report_total_index(const AnticipReport *report);

/**
 * # Safety
 * `report` must be null or a handle not yet freed.
 */
void anticip_report_free(AnticipReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ANTICIP_H */
