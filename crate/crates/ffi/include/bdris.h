#ifndef BDRIS_H
#define BDRIS_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum {
  BDRIS_STATUS_OK = 0,
  BDRIS_STATUS_NULL_POINTER = 1,
  BDRIS_STATUS_INVALID_CONFIG = 2,
  BDRIS_STATUS_SHAPE_MISMATCH = 3,
  BDRIS_STATUS_UNSUPPORTED_ARCHITECTURE = 4,
  BDRIS_STATUS_RANK_DEFICIENT = 5,
  BDRIS_STATUS_INFEASIBLE = 6,
  BDRIS_STATUS_DOMAIN = 7,
  BDRIS_STATUS_BISECTION_FAILURE = 8,
  BDRIS_STATUS_IO = 9,
  BDRIS_STATUS_PARSE = 10,
  BDRIS_STATUS_BUFFER_TOO_SMALL = 11,
  BDRIS_STATUS_PANIC = 12,
} BdrisStatus;

/**
 * Surface mode.
 */
typedef enum {
  BDRIS_MODE_REFLECTIVE = 0,
  BDRIS_MODE_HYBRID = 1,
  /**
   * Needs `sectors >= 3`.
   */
  BDRIS_MODE_MULTI_SECTOR = 2,
} BdrisMode;

/**
 * Circuit architecture.
 */
typedef enum {
  BDRIS_ARCHITECTURE_SINGLE_CONNECTED = 0,
  /**
   * Needs `group_size` in antennas.
   */
  BDRIS_ARCHITECTURE_GROUP_CONNECTED = 1,
  BDRIS_ARCHITECTURE_FULLY_CONNECTED = 2,
  /**
   * Needs `group_size` in antennas.
   */
  BDRIS_ARCHITECTURE_DYNAMIC_GROUP_CONNECTED = 3,
  BDRIS_ARCHITECTURE_NON_DIAGONAL = 4,
} BdrisArchitecture;

typedef struct BdrisChannel BdrisChannel;

typedef struct BdrisConfig BdrisConfig;

typedef struct BdrisSolveResult BdrisSolveResult;

typedef struct BdrisState BdrisState;

/**
 * Scenario parameters; see [`bdris_scene_default`].
 */
typedef struct {
  size_t tx_antennas;
  size_t users;
  double carrier_frequency;
  double d_tx_ris;
  double d_ris_user;
  double rician_factor;
  double tx_power;
  double noise_power;
  double path_loss_exponent;
} BdrisScene;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *bdris_version(void);

/**
 * Creates a configuration from `BdrisMode` and `BdrisArchitecture` codes.
 * `sectors` is read only for `MULTI_SECTOR` and `group_size` only for the
 * two group-connected architectures.
 */
BdrisStatus bdris_config_new(size_t elements,
                             int32_t mode,
                             size_t sectors,
                             int32_t architecture,
                             size_t group_size,
                             BdrisConfig **out_config);

void bdris_config_free(BdrisConfig *config);

/**
 * Antennas per sector, the side length of every effective matrix.
 */
BdrisStatus bdris_config_sector_size(const BdrisConfig *config, size_t *out_size);

BdrisStatus bdris_config_sectors(const BdrisConfig *config, size_t *out_sectors);

/**
 * Number of impedance components of the circuit.
 */
BdrisStatus bdris_circuit_complexity(const BdrisConfig *config, uint64_t *out_count);

/**
 * Writes the default scenario into `out_scene`.
 */
BdrisStatus bdris_scene_default(BdrisScene *out_scene);

/**
 * Haar-random feasible state from `seed`.
 */
BdrisStatus bdris_state_random(const BdrisConfig *config, uint64_t seed, BdrisState **out_state);

void bdris_state_free(BdrisState *state);

/**
 * Checks every feasibility invariant at `tol`; `out_passed` is 1 when all
 * hold, and `out_max_deviation` is the largest deviation found.
 */
BdrisStatus bdris_state_validate(const BdrisState *state,
                                 double tol,
                                 int32_t *out_passed,
                                 double *out_max_deviation);

/**
 * Copies the effective matrix of `sector` (side length from
 * `bdris_config_sector_size`) into `re`/`im`, each of `len` entries.
 */
BdrisStatus bdris_state_effective_matrix(const BdrisState *state,
                                         size_t sector,
                                         double *re,
                                         double *im,
                                         size_t len);

/**
 * Draws a channel for `config` in `scene` from `seed`.
 */
BdrisStatus bdris_channel_realize(const BdrisScene *scene,
                                  const BdrisConfig *config,
                                  uint64_t seed,
                                  BdrisChannel **out_channel);

void bdris_channel_free(BdrisChannel *channel);

/**
 * Sum-rate (bps/Hz) of `state` with the `tx_antennas x users` precoder
 * given column-major in `w_re`/`w_im`.
 */
BdrisStatus bdris_sum_rate(const BdrisChannel *channel,
                           const BdrisState *state,
                           const double *w_re,
                           const double *w_im,
                           size_t tx_antennas,
                           size_t users,
                           double *out_rate);

/**
 * Joint optimization with default parameters from a start drawn with
 * `seed`.
 */
BdrisStatus bdris_solve(const BdrisChannel *channel,
                        const BdrisConfig *config,
                        const BdrisScene *scene,
                        uint64_t seed,
                        BdrisSolveResult **out_result);

void bdris_solve_result_free(BdrisSolveResult *result);

BdrisStatus bdris_solve_result_rate(const BdrisSolveResult *result, double *out_rate);

BdrisStatus bdris_solve_result_iterations(const BdrisSolveResult *result, size_t *out_iterations);

/**
 * Copies the rate trajectory (initial point first). Call with `len = 0` to
 * learn the length through `out_len`.
 */
BdrisStatus bdris_solve_result_trajectory(const BdrisSolveResult *result,
                                          double *buf,
                                          size_t len,
                                          size_t *out_len);

/**
 * Copy of the final scattering state as a new handle.
 */
BdrisStatus bdris_solve_result_state(const BdrisSolveResult *result, BdrisState **out_state);

/**
 * Copies the final `tx_antennas x users` precoder.
 */
BdrisStatus bdris_solve_result_precoder(const BdrisSolveResult *result,
                                        double *re,
                                        double *im,
                                        size_t len);

/**
 * Message of the last error on the calling thread, or NULL. The pointer is
 * valid until the next call into this library on the same thread.
 */
const char *bdris_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BDRIS_H */
