#ifndef QUBOBENCH_H
#define QUBOBENCH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code for every fallible call.
typedef enum QbStatus {
  QB_STATUS_OK = 0,
  QB_STATUS_NULL_POINTER = 1,
  QB_STATUS_INVALID_UTF8 = 2,
  QB_STATUS_PARSE_ERROR = 3,
  QB_STATUS_INVALID_ARGUMENT = 4,
  QB_STATUS_DIMENSION_MISMATCH = 5,
  QB_STATUS_TOO_LARGE = 6,
  QB_STATUS_IO = 7,
  QB_STATUS_INTERNAL = 8,
  QB_STATUS_PANIC = 9,
} QbStatus;

// A benchmark instance loaded from a file.
typedef struct QbInstance QbInstance;

// A QUBO model.
typedef struct QbQubo QbQubo;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *qb_last_error(void);

// Zero QUBO on `n` variables.
//
// # Safety
// `out` must be valid for writing one pointer.
enum QbStatus qb_qubo_new(size_t n, struct QbQubo **out);

// Parse the `N offset` / `i j coeff` text form.
//
// # Safety
// `text` must be a nul-terminated string; `out` must be writable.
enum QbStatus qb_qubo_from_text(const char *text, struct QbQubo **out);

// Add `value` to the coefficient of `x_i x_j` (`x_i` when `i == j`).
//
// # Safety
// `qubo` must be a live handle.
enum QbStatus qb_qubo_add_term(struct QbQubo *qubo, size_t i, size_t j, double value);

// Number of variables, or 0 for a null handle.
//
// # Safety
// `qubo` must be null or a live handle.
size_t qb_qubo_dimension(const struct QbQubo *qubo);

// Energy of a bit assignment (`len` must equal the dimension).
//
// # Safety
// `bits` must point to `len` bytes; `out` must be writable.
enum QbStatus qb_qubo_energy(const struct QbQubo *qubo,
                             const uint8_t *bits,
                             size_t len,
                             double *out);

// Text form; release with [`qb_string_free`].
//
// # Safety
// `qubo` must be a live handle; `out` must be writable.
enum QbStatus qb_qubo_to_text(const struct QbQubo *qubo, char **out);

// Exhaustive minimum. `bits_out` receives the minimiser.
//
// # Safety
// `bits_out` must hold `len` bytes; `value_out` must be writable.
enum QbStatus qb_qubo_brute_force(const struct QbQubo *qubo,
                                  uint8_t *bits_out,
                                  size_t len,
                                  double *value_out);

// Solve with Pauli correlation encoding and bit-swap polishing.
// `max_rounds == 0` keeps the default round cap.
//
// # Safety
// `bits_out` must hold `len` bytes; `value_out` must be writable.
enum QbStatus qb_qubo_solve_pce(const struct QbQubo *qubo,
                                uint64_t seed,
                                size_t max_rounds,
                                uint8_t *bits_out,
                                size_t len,
                                double *value_out);

// # Safety
// `qubo` must be null or a handle not yet freed.
void qb_qubo_free(struct QbQubo *qubo);

// Load an instance file. `family` is one of `mdkp`, `mis`, `qap`, `msp`,
// `qubo`.
//
// # Safety
// `path` and `family` must be nul-terminated strings; `out` writable.
enum QbStatus qb_instance_load(const char *path, const char *family, struct QbInstance **out);

// Lower an instance to a new QUBO handle. `penalty <= 0` uses the
// family default; `preprocess != 0` applies MIS reductions.
//
// # Safety
// `inst` must be a live handle; `out` writable.
enum QbStatus qb_instance_to_qubo(const struct QbInstance *inst,
                                  double penalty,
                                  int32_t preprocess,
                                  struct QbQubo **out);

// # Safety
// `inst` must be null or a handle not yet freed.
void qb_instance_free(struct QbInstance *inst);

// Release a string returned by this library.
//
// # Safety
// `s` must be null or a string from this library not yet freed.
void qb_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QUBOBENCH_H */
