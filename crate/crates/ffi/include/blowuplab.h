/* C interface to the blowuplab lifespan laboratory. */

#ifndef BLOWUPLAB_H
#define BLOWUPLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Metric families for `blowuplab_metric_new`.
 */
typedef enum BlowuplabMetricFamily {
  BlowuplabMetricFamily_Flat = 0,
  BlowuplabMetricFamily_PowerPerturbation = 1,
  BlowuplabMetricFamily_ExponentialPerturbation = 2,
} BlowuplabMetricFamily;

/**
 * Regime codes mirrored from the classifier.
 */
typedef enum BlowuplabRegime {
  BlowuplabRegime_S = 0,
  BlowuplabRegime_Z = 1,
  BlowuplabRegime_G = 2,
  BlowuplabRegime_S1 = 3,
  BlowuplabRegime_CriticalS = 4,
  BlowuplabRegime_CriticalG = 5,
  BlowuplabRegime_OutsideBlowupRegion = 6,
} BlowuplabRegime;

/**
 * Status codes returned by fallible entry points.
 */
typedef enum BlowuplabStatus {
  BlowuplabStatus_Ok = 0,
  BlowuplabStatus_InvalidArgument = 1,
  BlowuplabStatus_NumericalFailure = 2,
  BlowuplabStatus_NoBlowup = 3,
  BlowuplabStatus_Utf8 = 4,
  BlowuplabStatus_NullPointer = 5,
} BlowuplabStatus;

/**
 * Opaque radial metric profile.
 */
typedef struct BlowuplabMetric BlowuplabMetric;

/**
 * Opaque damping time-rescaling (m, h, η, m̃ bundle).
 */
typedef struct BlowuplabRescaling BlowuplabRescaling;

/**
 * Blow-up report with plain C layout.
 */
typedef struct BlowuplabReport {
  int32_t blown_up;
  /**
   * Lifespan estimate in original time.
   */
  double t_num;
  /**
   * Detection time in the run's own time variable.
   */
  double raw_time;
  /**
   * 1 = blow-up time stable under h → h/2, 0 = not, -1 = not checked.
   */
  int32_t refinement_consistent;
  double min_support_margin;
  uint64_t steps;
} BlowuplabReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the most recent error message into `buf` (truncated, always
 * NUL-terminated); returns the full message length.
 * # Safety
 * `buf` must point to at least `len` writable bytes (or be null).
 */
uintptr_t blowuplab_last_error(char *buf, uintptr_t len);

/**
 * Positive root of (n−1)x² − (n+1)x − 2 = 0.
 * # Safety
 * `out` must be a valid pointer to writable memory for one f64.
 */
enum BlowuplabStatus blowuplab_strauss_exponent(uint32_t n, double *out);

/**
 * p_G(n) = 1 + 2/(n−1).
 * # Safety
 * `out` must be a valid pointer to writable memory for one f64.
 */
enum BlowuplabStatus blowuplab_glassey_exponent(uint32_t n, double *out);

/**
 * Classify the (p, q) point. `out_alpha` receives the positive lifespan
 * exponent (NaN on the critical lines, where `out_log_exponent` holds the
 * exponent κ of exp(C₀ε^{-κ}) instead).
 * # Safety
 * All three out-pointers must be valid for writes.
 */
enum BlowuplabStatus blowuplab_classify(uint32_t n,
                                        double p,
                                        double q,
                                        double c1,
                                        double c2,
                                        int32_t u1_nontrivial,
                                        enum BlowuplabRegime *out_regime,
                                        double *out_alpha,
                                        double *out_log_exponent);

/**
 * Evaluate the predicted lifespan upper bound C₀ε^{-α} (or exp(C₀ε^{-κ})).
 * # Safety
 * `out` must be a valid pointer to writable memory for one f64.
 */
enum BlowuplabStatus blowuplab_lifespan_bound(uint32_t n,
                                              double p,
                                              double q,
                                              double c1,
                                              double c2,
                                              int32_t u1_nontrivial,
                                              double eps,
                                              double c0,
                                              double *out);

/**
 * Create a radial metric profile; returns null on invalid parameters.
 */
struct BlowuplabMetric *blowuplab_metric_new(enum BlowuplabMetricFamily family,
                                             double a,
                                             double rate,
                                             uint32_t dim);

/**
 * # Safety
 * `m` must come from `blowuplab_metric_new` and not be freed twice.
 */
void blowuplab_metric_free(struct BlowuplabMetric *m);

/**
 * Conformal factor K(r).
 * # Safety
 * `m` must be a live handle from `blowuplab_metric_new` (or null).
 */
double blowuplab_metric_k(const struct BlowuplabMetric *m, double r);

/**
 * Geodesic radius r̃(r) = ∫₀ʳ K.
 * # Safety
 * `m` must be a live metric handle (or null); `out` must be writable.
 */
enum BlowuplabStatus blowuplab_metric_geodesic_radius(const struct BlowuplabMetric *m,
                                                      double r,
                                                      double *out);

/**
 * Largest δ₀ ∈ (0,1) with δ₀ < K < 1/δ₀.
 * # Safety
 * `m` must be a live handle from `blowuplab_metric_new` (or null).
 */
double blowuplab_metric_ellipticity(const struct BlowuplabMetric *m);

/**
 * Build the damping time rescaling for b(t) = mu(1+t)^{-beta} (mu = 0 for
 * the identity map); returns null on invalid parameters.
 */
struct BlowuplabRescaling *blowuplab_rescaling_new(double mu,
                                                   double beta,
                                                   double t_max,
                                                   double tol);

/**
 * # Safety
 * `r` must come from `blowuplab_rescaling_new` and not be freed twice.
 */
void blowuplab_rescaling_free(struct BlowuplabRescaling *r);

/**
 * η(s), the inverse of s = ∫₀ᵗ 1/m.
 * # Safety
 * `r` must be a live handle from `blowuplab_rescaling_new` (or null).
 */
double blowuplab_rescaling_eta(const struct BlowuplabRescaling *r, double s);

/**
 * m̃(s) = m(η(s)).
 * # Safety
 * `r` must be a live handle from `blowuplab_rescaling_new` (or null).
 */
double blowuplab_rescaling_m_tilde(const struct BlowuplabRescaling *r, double s);

/**
 * k = m(∞) = exp(∫₀^∞ b).
 * # Safety
 * `r` must be a live handle from `blowuplab_rescaling_new` (or null).
 */
double blowuplab_rescaling_k(const struct BlowuplabRescaling *r);

/**
 * δ₁ with m ∈ [δ₁, 1/δ₁].
 * # Safety
 * `r` must be a live handle from `blowuplab_rescaling_new` (or null).
 */
double blowuplab_rescaling_delta1(const struct BlowuplabRescaling *r);

/**
 * Closed-form blow-up time of I' = κI^p(1+t)^{-a}, I(0) = ε. Writes both
 * T and ln T (the critical-decay case overflows T itself).
 * # Safety
 * `out_t` and `out_ln_t` must be valid pointers for writes.
 */
enum BlowuplabStatus blowuplab_kato_first_order(double p,
                                                double a,
                                                double kappa,
                                                double eps,
                                                double *out_t,
                                                double *out_ln_t);

/**
 * Run the solver from a configuration file (key = value text), with the
 * refinement cross-check. `mode`: 0 = original equation, 1 = transformed.
 *
 * # Safety
 * `path` must be a NUL-terminated UTF-8 string; `out` must be valid.
 */
enum BlowuplabStatus blowuplab_run_config(const char *path,
                                          int32_t mode,
                                          struct BlowuplabReport *out);

/**
 * Static library version string.
 */
const char *blowuplab_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BLOWUPLAB_H */
