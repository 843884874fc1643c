#ifndef GTSIM_H
#define GTSIM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum GtsimStatus {
  GtsimStatus_Ok = 0,
  GtsimStatus_InvalidArgument = 1,
  GtsimStatus_NullPointer = 2,
  GtsimStatus_Utf8 = 3,
  GtsimStatus_ParseError = 4,
  GtsimStatus_RunFailed = 5,
} GtsimStatus;

/**
 * Opaque positive probability measure on sequences over a finite alphabet.
 */
typedef struct GtsimMeasure GtsimMeasure;

/**
 * Opaque price-time-priority order book with 1e-4 price ticks.
 */
typedef struct GtsimOrderBook GtsimOrderBook;

/**
 * One fill of a market order, as seen by C callers.
 */
typedef struct GtsimFill {
  uint64_t maker_id;
  uint32_t price_ticks;
  uint64_t qty;
} GtsimFill;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the most recent error on this thread, or NULL. The pointer is
 * valid until the next failing call on the same thread; do not free it.
 */
const char *gtsim_last_error(void);

/**
 * Library version as a static string; do not free.
 */
const char *gtsim_version(void);

/**
 * Release a string allocated by this library.
 *
 * # Safety
 * `s` must be a pointer previously returned by a gtsim function that
 * documents [`gtsim_string_free`] ownership, and must not be used after.
 */
void gtsim_string_free(char *s);

/**
 * Regret threshold `2 sqrt(K N ln(1/eps))`, `eps` in (0, 0.3).
 *
 * # Safety
 * `out` must point to a writable f64.
 */
enum GtsimStatus gtsim_regret_threshold(size_t k, size_t n, double eps, double *out);

/**
 * Chain tail bound on the regret exceeding `c`.
 *
 * # Safety
 * `out` must point to a writable f64.
 */
enum GtsimStatus gtsim_chain_bound(double c, size_t k, size_t n, double gamma, double *out);

/**
 * One-sided Hoeffding tails `exp(-u^2/(2q))` and `exp(-u^2 k/(2n))`.
 *
 * # Safety
 * `out_tight` and `out_coarse` must point to writable f64s.
 */
enum GtsimStatus gtsim_hoeffding_bound(double u,
                                       size_t q,
                                       size_t k,
                                       size_t n,
                                       double *out_tight,
                                       double *out_coarse);

/**
 * Closed-form aggregation bound `(4KN/C^2) exp(-C^2/(8KN))`.
 *
 * # Safety
 * `out` must point to a writable f64.
 */
enum GtsimStatus gtsim_feller_bound(double c, size_t k, size_t n, double *out);

/**
 * Piecewise-linear envelope value `g(x)` with threshold `c`, classes `k`,
 * ramp width `alpha`.
 *
 * # Safety
 * `out` must point to a writable f64.
 */
enum GtsimStatus gtsim_g_eval(double x, double c, size_t k, double alpha, double *out);

/**
 * Lookback LLN threshold `4 sqrt(K N ln(1/eps))`, `eps` in (0, 0.7).
 *
 * # Safety
 * `out` must point to a writable f64.
 */
enum GtsimStatus gtsim_lln_threshold(size_t k, size_t n, double eps, double *out);

/**
 * Build a measure on `Y^horizon` for an alphabet of `outcomes` symbols
 * (labelled "0", "1", ...). `weights` must hold `outcomes^horizon` strictly
 * positive entries in lexicographic order; they are renormalized to total
 * mass one. Returns NULL on error (see [`gtsim_last_error`]).
 *
 * # Safety
 * `weights` must point to `weights_len` readable f64s.
 */
struct GtsimMeasure *gtsim_measure_new(size_t outcomes,
                                       size_t horizon,
                                       const double *weights,
                                       size_t weights_len);

/**
 * # Safety
 * `m` must be a pointer from [`gtsim_measure_new`] or
 * [`gtsim_measure_condition`], not yet freed.
 */
void gtsim_measure_free(struct GtsimMeasure *m);

/**
 * Marginal probability of an observation prefix.
 *
 * # Safety
 * `m` must be a live measure handle; `prefix` must point to `prefix_len`
 * readable usizes; `out` must be writable.
 */
enum GtsimStatus gtsim_measure_marginal(const struct GtsimMeasure *m,
                                        const size_t *prefix,
                                        size_t prefix_len,
                                        double *out);

/**
 * Bayesian conditioning on the first observation; returns a new handle or
 * NULL on error.
 *
 * # Safety
 * `m` must be a live measure handle.
 */
struct GtsimMeasure *gtsim_measure_condition(const struct GtsimMeasure *m, size_t outcome);

/**
 * Number of weights carried by the measure.
 *
 * # Safety
 * `m` must be a live measure handle.
 */
size_t gtsim_measure_len(const struct GtsimMeasure *m);

/**
 * Copy the measure's weights into `buf` (capacity `buf_len`).
 *
 * # Safety
 * `m` must be a live measure handle; `buf` must point to `buf_len`
 * writable f64s.
 */
enum GtsimStatus gtsim_measure_weights(const struct GtsimMeasure *m, double *buf, size_t buf_len);

struct GtsimOrderBook *gtsim_book_new(void);

/**
 * # Safety
 * `b` must be a pointer from [`gtsim_book_new`], not yet freed.
 */
void gtsim_book_free(struct GtsimOrderBook *b);

/**
 * Rest a limit order; `side` is 0 for buy, 1 for sell; `expiry < 0` means
 * no expiry. Writes the order id into `out_id`.
 *
 * # Safety
 * `b` must be a live book handle; `out_id` must be writable.
 */
enum GtsimStatus gtsim_book_submit_limit(struct GtsimOrderBook *b,
                                         int side,
                                         uint32_t price_ticks,
                                         uint64_t qty,
                                         int64_t expiry,
                                         uint64_t *out_id);

/**
 * Match a market order; fills are written into `fills` (capacity
 * `fills_cap`) and their count into `out_count`. Unfilled remainder lapses.
 *
 * # Safety
 * `b` must be a live book handle; `fills` must point to `fills_cap`
 * writable [`GtsimFill`]s; `out_count` must be writable.
 */
enum GtsimStatus gtsim_book_submit_market(struct GtsimOrderBook *b,
                                          int side,
                                          uint64_t qty,
                                          struct GtsimFill *fills,
                                          size_t fills_cap,
                                          size_t *out_count);

/**
 * Best bid in ticks, or 0 when the bid side is empty.
 *
 * # Safety
 * `b` must be a live book handle.
 */
uint32_t gtsim_book_best_bid(const struct GtsimOrderBook *b);

/**
 * Best ask in ticks, or 0 when the ask side is empty.
 *
 * # Safety
 * `b` must be a live book handle.
 */
uint32_t gtsim_book_best_ask(const struct GtsimOrderBook *b);

/**
 * Remove every order with `expiry <= now`; returns the number removed.
 *
 * # Safety
 * `b` must be a live book handle.
 */
size_t gtsim_book_expire(struct GtsimOrderBook *b, uint64_t now);

/**
 * Exact two-point distribution of the full-horizon counterexample: writes
 * P(gap = +1) and P(gap = -1).
 *
 * # Safety
 * `out_plus` and `out_minus` must point to writable f64s.
 */
enum GtsimStatus gtsim_counter_example(size_t n_steps,
                                       double p_last,
                                       double *out_plus,
                                       double *out_minus);

/**
 * Run the regret experiment from a TOML configuration (same schema as the
 * CLI `simulate` command without the `experiment` key) and return the JSON
 * report. Free the result with [`gtsim_string_free`]; NULL on error.
 *
 * # Safety
 * `config_toml` must be a NUL-terminated string.
 */
char *gtsim_theorem_optimal_json(const char *config_toml, uint64_t seed, size_t reps);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* GTSIM_H */
