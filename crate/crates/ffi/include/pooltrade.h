#ifndef POOLTRADE_H
#define POOLTRADE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PtStatus {
  PT_STATUS_OK = 0,
  PT_STATUS_INFEASIBLE = 1,
  PT_STATUS_DOMAIN = 2,
  PT_STATUS_UNIT = 3,
  PT_STATUS_NULL_POINTER = 4,
  PT_STATUS_INVALID_UTF8 = 5,
  PT_STATUS_OVERFLOW = 6,
  PT_STATUS_PANIC = 7,
  PT_STATUS_CONFIG = 8,
} PtStatus;

typedef enum PtArchitecture {
  PT_ARCHITECTURE_CENTRALIZED = 0,
  PT_ARCHITECTURE_DISTRIBUTED = 1,
} PtArchitecture;

/**
 * Opaque parameter set.
 */
typedef struct PtScenario PtScenario;

/**
 * Optimal configuration of one architecture. `available` is false when the
 * architecture cannot meet the SLA; the other fields are then zero.
 */
typedef struct PtPlan {
  bool available;
  bool feasible;
  enum PtArchitecture architecture;
  uint32_t licenses_total;
  /**
   * Bits per second; 0 for the distributed architecture.
   */
  double capacity_extra_bps;
  double cost;
  double blocking;
  double timeout;
  double success;
} PtPlan;

typedef struct PtPlanComparison {
  enum PtArchitecture chosen;
  struct PtPlan centralized;
  struct PtPlan distributed;
} PtPlanComparison;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *pt_last_error(void);

/**
 * Library version as a static string.
 */
const char *pt_version(void);

/**
 * Parses flat TOML config text into a new scenario written to `out`.
 * Release it with [`pt_scenario_free`].
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `out` valid for one write.
 */
enum PtStatus pt_scenario_from_toml(const char *toml, struct PtScenario **out);

/**
 * Sets or overrides one key, e.g. `("tau", "10 ms")`.
 *
 * # Safety
 * `s` must be a live scenario; `key` and `value` NUL-terminated strings.
 */
enum PtStatus pt_scenario_set(struct PtScenario *s, const char *key, const char *value);

/**
 * # Safety
 * `s` must be null or a pointer from [`pt_scenario_from_toml`] not yet freed.
 */
void pt_scenario_free(struct PtScenario *s);

/**
 * Engset blocking via the stable recursion.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum PtStatus pt_blocking(uint32_t licenses, uint32_t population, double rho, double *out);

/**
 * Engset blocking from the binomial sums; fails with overflow for large populations.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum PtStatus pt_blocking_direct(uint32_t licenses, uint32_t population, double rho, double *out);

/**
 * Population-weighted blocking of `n` isolated sites.
 *
 * # Safety
 * `populations` and `licenses` must each point to `n` values; `out` valid for one write.
 */
enum PtStatus pt_blocking_distributed(const uint32_t *populations,
                                      const uint32_t *licenses,
                                      size_t n,
                                      double rho,
                                      double *out);

/**
 * Timeout probability at the scenario's link capacity.
 *
 * # Safety
 * `s` must be a live scenario; `out` valid for one write.
 */
enum PtStatus pt_timeout_probability(const struct PtScenario *s, double *out);

/**
 * Total link capacity, bits per second, at which the timeout probability is `p_target`.
 *
 * # Safety
 * `s` must be a live scenario; `out_bps` valid for one write.
 */
enum PtStatus pt_capacity_for_timeout(const struct PtScenario *s, double p_target, double *out_bps);

/**
 * Centralized success with `licenses` licenses shared by the whole population.
 *
 * # Safety
 * `s` must be a live scenario; `out` valid for one write.
 */
enum PtStatus pt_success_centralized(const struct PtScenario *s, uint32_t licenses, double *out);

/**
 * Optimizes both architectures. The scenario's own `capacity_extra` is ignored.
 * When `pool_licenses` is non-null it receives the distributed per-site split
 * and `pool_len` must equal the number of sites.
 *
 * # Safety
 * `s` must be a live scenario, `out` valid for one write, and `pool_licenses`
 * null or valid for `pool_len` writes.
 */
enum PtStatus pt_plan(const struct PtScenario *s,
                      struct PtPlanComparison *out,
                      uint32_t *pool_licenses,
                      size_t pool_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POOLTRADE_H */
