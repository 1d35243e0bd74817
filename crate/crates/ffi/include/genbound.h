#ifndef GENBOUND_H
#define GENBOUND_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GbSampleComplexity {
  GB_SAMPLE_COMPLEXITY_INDEPENDENT = 0,
  GB_SAMPLE_COMPLEXITY_MI_STABLE = 1,
} GbSampleComplexity;

typedef enum GbStatus {
  GB_STATUS_OK = 0,
  GB_STATUS_NULL_POINTER = 1,
  GB_STATUS_INVALID_ARGUMENT = 2,
  GB_STATUS_DIMENSION = 3,
  GB_STATUS_DISTRIBUTION = 4,
  GB_STATUS_DOMAIN = 5,
  GB_STATUS_SUPPORT = 6,
  GB_STATUS_GRID = 7,
  GB_STATUS_CAPACITY = 8,
  GB_STATUS_PANIC = 9,
} GbStatus;

typedef enum GbTieRule {
  GB_TIE_RULE_LOWEST_INDEX = 0,
  GB_TIE_RULE_UNIFORM_OVER_ARGMIN = 1,
} GbTieRule;

/**
 * Opaque distribution over `0..len`.
 */
typedef struct GbDistribution GbDistribution;

/**
 * Opaque row-stochastic kernel.
 */
typedef struct GbKernel GbKernel;

/**
 * Opaque loss table on a rational grid.
 */
typedef struct GbLossTable GbLossTable;

typedef struct GbRiskSummary {
  double expected_empirical;
  double expected_population;
  double gen_error;
  double abs_gen_error;
  double excess_risk;
} GbRiskSummary;

typedef struct GbEstimate {
  double mean;
  double std_error;
  uint64_t trials;
  double ci95_lo;
  double ci95_hi;
} GbEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *gb_last_error_message(void);

/**
 * Library version as a static nul-terminated string.
 */
const char *gb_version(void);

/**
 * # Safety
 * `probs` must point to `len` readable doubles; `out` must be writable.
 */
enum GbStatus gb_distribution_new(const double *probs, size_t len, struct GbDistribution **out);

/**
 * # Safety
 * `dist` must come from `gb_distribution_new` and not be used afterwards.
 */
void gb_distribution_free(struct GbDistribution *dist);

/**
 * # Safety
 * `dist` must be a live handle or null.
 */
size_t gb_distribution_len(const struct GbDistribution *dist);

/**
 * Loss `numerators[w * z_size + z] / denominator`, bounded by
 * `[lo, hi] / denominator`.
 *
 * # Safety
 * `numerators` must point to `hypotheses * z_size` readable values; `out`
 * must be writable.
 */
enum GbStatus gb_loss_table_new(const int64_t *numerators,
                                size_t hypotheses,
                                size_t z_size,
                                uint64_t denominator,
                                int64_t lo,
                                int64_t hi,
                                struct GbLossTable **out);

/**
 * # Safety
 * `loss` must come from `gb_loss_table_new` and not be used afterwards.
 */
void gb_loss_table_free(struct GbLossTable *loss);

/**
 * `(b − a)/2` of the loss range, or NaN for a null handle.
 *
 * # Safety
 * `loss` must be a live handle or null.
 */
double gb_loss_table_sigma(const struct GbLossTable *loss);

/**
 * ERM over datasets of size `n`.
 *
 * # Safety
 * `loss` must be a live handle; `out` must be writable.
 */
enum GbStatus gb_kernel_erm(const struct GbLossTable *loss,
                            size_t n,
                            enum GbTieRule tie,
                            struct GbKernel **out);

/**
 * Gibbs kernel with inverse temperature `beta`; a null `q` means a uniform prior.
 *
 * # Safety
 * `loss` must be a live handle; `q` null or `q_len` readable doubles; `out` writable.
 */
enum GbStatus gb_kernel_gibbs(const struct GbLossTable *loss,
                              size_t n,
                              double beta,
                              const double *q,
                              size_t q_len,
                              struct GbKernel **out);

/**
 * Noisy ERM with exponential noise means `b`, computed exactly.
 *
 * # Safety
 * `loss` must be a live handle; `b` must hold `b_len` doubles; `out` writable.
 */
enum GbStatus gb_kernel_noisy_erm(const struct GbLossTable *loss,
                                  size_t n,
                                  const double *b,
                                  size_t b_len,
                                  struct GbKernel **out);

/**
 * Kernel with explicit rows `data[code * outputs + w]`, one row per dataset of
 * `n` draws from `z_size` instances.
 *
 * # Safety
 * `data` must hold `z_size^n * outputs` doubles; `out` must be writable.
 */
enum GbStatus gb_kernel_from_rows(const double *data,
                                  size_t z_size,
                                  size_t n,
                                  size_t outputs,
                                  struct GbKernel **out);

/**
 * # Safety
 * `kernel` must come from a `gb_kernel_*` constructor and not be used afterwards.
 */
void gb_kernel_free(struct GbKernel *kernel);

/**
 * # Safety
 * `kernel` must be a live handle; `inputs` and `outputs` writable.
 */
enum GbStatus gb_kernel_shape(const struct GbKernel *kernel, size_t *inputs, size_t *outputs);

/**
 * Copies row `input` into `buf`, which holds `len` doubles.
 *
 * # Safety
 * `kernel` must be a live handle; `buf` must hold `len` writable doubles.
 */
enum GbStatus gb_kernel_row(const struct GbKernel *kernel, size_t input, double *buf, size_t len);

/**
 * `I(S;W)` in nats.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum GbStatus gb_io_mutual_information(const struct GbDistribution *mu,
                                       size_t n,
                                       const struct GbKernel *kernel,
                                       double *out);

/**
 * `I(Λ_W(S);W)` in nats.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum GbStatus gb_lambda_mutual_information(const struct GbDistribution *mu,
                                           size_t n,
                                           const struct GbKernel *kernel,
                                           const struct GbLossTable *loss,
                                           double *out);

/**
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum GbStatus gb_exact_risk_summary(const struct GbDistribution *mu,
                                    size_t n,
                                    const struct GbKernel *kernel,
                                    const struct GbLossTable *loss,
                                    struct GbRiskSummary *out);

/**
 * Monte Carlo estimate of `E[L_μ(W) − L_S(W)]`; reproducible for a fixed seed.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum GbStatus gb_estimate_gen(const struct GbDistribution *mu,
                              size_t n,
                              const struct GbKernel *kernel,
                              const struct GbLossTable *loss,
                              uint64_t trials,
                              uint64_t seed,
                              struct GbEstimate *out);

/**
 * `sqrt(2σ² mi / n)`.
 */
double gb_mi_gen_bound(double sigma, size_t n, double mi);

/**
 * Both bounds on `E|L_μ(W) − L_S(W)|` for an `ε`-stable algorithm.
 *
 * # Safety
 * `abs_bound` and `russo_zou` must be writable.
 */
enum GbStatus gb_abs_gen_bounds(double sigma,
                                size_t n,
                                double epsilon,
                                double *abs_bound,
                                double *russo_zou);

/**
 * Sample size for the `(α, β)` guarantee; `epsilon` is ignored for the
 * independent kind and must be finite for the MI-stable kind.
 *
 * # Safety
 * `out` must be writable.
 */
enum GbStatus gb_sample_complexity(enum GbSampleComplexity kind,
                                   double sigma,
                                   double alpha,
                                   double beta_conf,
                                   double epsilon,
                                   uint64_t *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum GbStatus gb_covering_bound(double sigma, size_t n, size_t d, double radius, double *out);

double gb_two_stage_bound(size_t vc_dim, size_t n1, size_t n2);

double gb_monitor_bound(double sigma, size_t n, size_t m, double epsilon);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GENBOUND_H */
