/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef QCHAN_H
#define QCHAN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes. The first four match the command-line exit codes.
typedef enum QchanStatus {
  QCHAN_STATUS_OK = 0,
  QCHAN_STATUS_ASSERTION_FAILED = 1,
  QCHAN_STATUS_INVALID_INPUT = 2,
  QCHAN_STATUS_NON_CONVERGENCE = 3,
  QCHAN_STATUS_NULL_POINTER = 4,
  QCHAN_STATUS_PANIC = 5,
} QchanStatus;

// Opaque quantum channel.
typedef struct QchanChannel QchanChannel;

// Opaque ensemble of states.
typedef struct QchanEnsemble QchanEnsemble;

// Opaque density matrix.
typedef struct QchanState QchanState;

typedef struct QchanAudit {
  double chi_in;
  double chi_out;
  double gap;
  double max_residual;
  bool reversible;
} QchanAudit;

typedef struct QchanCapacityOptions {
  double tol;
  size_t max_iter;
  size_t restarts;
  uint64_t seed;
} QchanCapacityOptions;

typedef struct QchanCapacity {
  // Bits; `+inf` is reported as `INFINITY`.
  double value;
  size_t iterations;
  bool converged;
} QchanCapacity;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *qchan_version(void);

// Last error message on this thread. Returns the buffer size needed (including the NUL);
// the message is written only if `len` is at least that size.
//
// # Safety
// `buf` must be null or valid for `len` bytes.
size_t qchan_last_error(char *buf, size_t len);

// Parses a channel document (`{"dim_in", "dim_out", "kraus"}`).
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be valid for writes.
enum QchanStatus qchan_channel_from_json(const char *json, struct QchanChannel **out_channel);

// Builds a channel from `count` Kraus operators, each `dim_out × dim_in`, stored consecutively.
//
// # Safety
// `data` must hold `2 · count · dim_out · dim_in` doubles; `out` must be valid for writes.
enum QchanStatus qchan_channel_from_kraus(size_t dim_in,
                                          size_t dim_out,
                                          size_t count,
                                          const double *data,
                                          struct QchanChannel **out_channel);

// Built-in channel by name: `identity:D`, `dephasing:D`, `partial-trace:B:E`, `trine`, `depolarizing:D:P`, `replacement:D_IN:D_OUT`.
//
// # Safety
// `spec` must be a NUL-terminated string; `out` must be valid for writes.
enum QchanStatus qchan_channel_named(const char *spec,
                                     struct QchanChannel **out_channel);

// # Safety
// `channel` must be null or a handle from this library, not yet freed.
void qchan_channel_free(struct QchanChannel *channel);

// # Safety
// `channel` must be a live handle; the outputs must be valid for writes.
enum QchanStatus qchan_channel_dims(const struct QchanChannel *channel,
                                    size_t *dim_in,
                                    size_t *dim_out);

// Serializes the channel. `needed` receives the buffer size including the NUL; the text is
// written only if `len` suffices.
//
// # Safety
// `channel` must be a live handle; `buf` null or valid for `len` bytes; `needed` valid for writes.
enum QchanStatus qchan_channel_to_json(const struct QchanChannel *channel,
                                       char *buf,
                                       size_t len,
                                       size_t *needed);

// Complementary channel from the minimal Stinespring dilation.
//
// # Safety
// `channel` must be a live handle; `out` must be valid for writes.
enum QchanStatus qchan_channel_complementary(const struct QchanChannel *channel,
                                             struct QchanChannel **out_channel);

// Parses a density matrix given as a nested `[re, im]` array.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be valid for writes.
enum QchanStatus qchan_state_from_json(const char *json, struct QchanState **out_state);

// # Safety
// `data` must hold `2 · dim · dim` doubles; `out` must be valid for writes.
enum QchanStatus qchan_state_from_matrix(size_t dim,
                                         const double *data,
                                         struct QchanState **out_state);

// # Safety
// `state` must be null or a handle from this library, not yet freed.
void qchan_state_free(struct QchanState *state);

// Parses an ensemble given as an array of `{"prob", "state"}` objects.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be valid for writes.
enum QchanStatus qchan_ensemble_from_json(const char *json, struct QchanEnsemble **out_ensemble);

// # Safety
// `ensemble` must be null or a handle from this library, not yet freed.
void qchan_ensemble_free(struct QchanEnsemble *ensemble);

// Holevo quantity `χ` of an ensemble, in bits.
//
// # Safety
// `ensemble` must be a live handle; `value` must be valid for writes.
enum QchanStatus qchan_holevo(const struct QchanEnsemble *ensemble, double *value);

// `χ` of the image ensemble under the channel.
//
// # Safety
// Handles must be live; `value` must be valid for writes.
enum QchanStatus qchan_holevo_image(const struct QchanChannel *channel,
                                    const struct QchanEnsemble *ensemble,
                                    double *value);

// Quantum mutual information `I(Φ, ρ)` in bits.
//
// # Safety
// Handles must be live; `value` must be valid for writes.
enum QchanStatus qchan_mutual_info(const struct QchanChannel *channel,
                                   const struct QchanState *state,
                                   double *value);

// Petz-recovery reversibility audit.
//
// # Safety
// Handles must be live; `report` must be valid for writes.
enum QchanStatus qchan_audit(const struct QchanChannel *channel,
                             const struct QchanEnsemble *ensemble,
                             struct QchanAudit *report);

struct QchanCapacityOptions qchan_capacity_options_default(void);

// Holevo capacity `C̄(Φ)`. `opts` may be null for defaults.
//
// # Safety
// `channel` must be live; `opts` null or valid; `result` valid for writes.
enum QchanStatus qchan_holevo_capacity(const struct QchanChannel *channel,
                                       const struct QchanCapacityOptions *opts,
                                       struct QchanCapacity *result);

// Minimal output entropy `H_min(Φ)`. `opts` may be null for defaults.
//
// # Safety
// `channel` must be live; `opts` null or valid; `result` valid for writes.
enum QchanStatus qchan_min_output_entropy(const struct QchanChannel *channel,
                                          const struct QchanCapacityOptions *opts,
                                          struct QchanCapacity *result);

// State-constrained Holevo capacity `C̄(Φ, ρ)`. `opts` may be null for defaults.
//
// # Safety
// Handles must be live; `opts` null or valid; `result` valid for writes.
enum QchanStatus qchan_constrained_holevo(const struct QchanChannel *channel,
                                          const struct QchanState *state,
                                          const struct QchanCapacityOptions *opts,
                                          struct QchanCapacity *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QCHAN_H */
