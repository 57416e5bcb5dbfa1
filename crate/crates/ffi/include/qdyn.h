#ifndef QDYN_H
#define QDYN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum QdynStatus {
  QDYN_STATUS_OK = 0,
  QDYN_STATUS_NULL_POINTER = 1,
  QDYN_STATUS_INVALID_ARGUMENT = 2,
  QDYN_STATUS_NUMERICAL = 3,
  QDYN_STATUS_PANIC = 4,
} QdynStatus;

typedef enum QdynScenario {
  QDYN_SCENARIO_DEPHASING = 0,
  QDYN_SCENARIO_LOSS = 1,
} QdynScenario;

typedef enum QdynMethod {
  /**
   * Closed-form solution.
   */
  QDYN_METHOD_EXACT = 0,
  /**
   * Adaptive integration of the full master equation.
   */
  QDYN_METHOD_ORACLE = 1,
} QdynMethod;

/**
 * Opaque model handle.
 */
typedef struct QdynModel QdynModel;

typedef struct QdynComplex {
  double re;
  double im;
} QdynComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *qdyn_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *qdyn_version(void);

/**
 * Creates a model with coupling `g`, detuning `delta`, dephasing rate
 * `gamma`, loss rate `kappa` and `fock_dim` cavity levels.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum QdynStatus qdyn_model_new(double g,
                               double delta,
                               double gamma,
                               double kappa,
                               size_t fock_dim,
                               struct QdynModel **out);

/**
 * Releases a model. Null is ignored.
 *
 * # Safety
 * `model` must come from [`qdyn_model_new`] and not have been freed.
 */
void qdyn_model_free(struct QdynModel *model);

/**
 * The four eigenvalues of the dephasing block for excitation sector `n`.
 *
 * # Safety
 * `model` must be a live handle and `out` must point to four writable values.
 */
enum QdynStatus qdyn_dephasing_eigenvalues(const struct QdynModel *model,
                                           size_t n,
                                           struct QdynComplex *out);

/**
 * The two eigenvalues of the effective Hamiltonian block for `n ≥ 1`.
 *
 * # Safety
 * `model` must be a live handle and `out` must point to two writable values.
 */
enum QdynStatus qdyn_loss_block_eigenvalues(const struct QdynModel *model,
                                            size_t n,
                                            struct QdynComplex *out);

/**
 * Amplitude `f(t)` of the excited state under photon loss.
 *
 * # Safety
 * `model` must be a live handle and `out` a valid pointer.
 */
enum QdynStatus qdyn_loss_amplitude(const struct QdynModel *model,
                                    double t,
                                    struct QdynComplex *out);

/**
 * Excited-state population and atomic purity on a time grid.
 *
 * The atom starts in `c_g|g⟩ + c_e|e⟩` with the cavity in vacuum. The
 * dephasing closed form only supports `c_e = 1`; use the oracle method for
 * other initial states.
 *
 * # Safety
 * `model` must be a live handle; `t`, `p_e` and `purity` must each point to
 * `len` values (`p_e` and `purity` writable). `p_e` or `purity` may be null
 * to skip that output.
 */
enum QdynStatus qdyn_observables(const struct QdynModel *model,
                                 enum QdynScenario scenario,
                                 enum QdynMethod method,
                                 struct QdynComplex c_g,
                                 struct QdynComplex c_e,
                                 const double *t,
                                 size_t len,
                                 double *p_e,
                                 double *purity);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QDYN_H */
