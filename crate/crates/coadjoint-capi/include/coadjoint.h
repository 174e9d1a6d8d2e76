#ifndef COADJOINT_H
#define COADJOINT_H

/* Generated by cbindgen from coadjoint-capi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * ABI revision of this header.
 */
#define CJ_ABI_VERSION 1

/**
 * Integration scheme selector.
 */
typedef enum CjIntegrator {
  CJ_INTEGRATOR_EXPLICIT_RK4 = 0,
  CJ_INTEGRATOR_IMPLICIT_MIDPOINT = 1,
  CJ_INTEGRATOR_COADJOINT_SPLITTING = 2,
} CjIntegrator;

/**
 * Candidate section families understood by [`cj_verify_theorem`].
 */
typedef enum CjSectionKind {
  /**
   * The coadjoint transport of `mu` (constant spatial momentum).
   */
  CJ_SECTION_KIND_CONSTANT_MOMENTUM = 0,
  /**
   * The constant-in-body section with value `mu`.
   */
  CJ_SECTION_KIND_BODY_CONSTANT = 1,
  /**
   * The inertia-scaled family over the transport of `mu` (rigid body only).
   */
  CJ_SECTION_KIND_SCALED_INERTIA_FAMILY = 2,
  /**
   * A seeded perturbation of the natural base family.
   */
  CJ_SECTION_KIND_PERTURBED = 3,
} CjSectionKind;

/**
 * Status code of every fallible entry point.
 */
typedef enum CjStatus {
  CJ_STATUS_OK = 0,
  CJ_STATUS_NULL_POINTER = 1,
  CJ_STATUS_INVALID_ARGUMENT = 2,
  CJ_STATUS_OUT_OF_DOMAIN = 3,
  CJ_STATUS_NUMERICAL_FAILURE = 4,
} CjStatus;

/**
 * Opaque handle of a Lie-Poisson system.
 */
typedef struct CjSystem CjSystem;

/**
 * Aggregate result of a verification run.
 */
typedef struct CjVerifySummary {
  double hj_max;
  double relatedness_max;
  double closedness_max;
  double momentum_defect;
  double invariance_defect;
  bool consistent;
} CjVerifySummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * ABI revision of the library.
 */
uint32_t cj_abi_version(void);

/**
 * Message of the last failure on this thread; empty when the last call
 * succeeded. The pointer stays valid until the next library call on the
 * same thread.
 */
const char *cj_last_error(void);

/**
 * Creates a free rigid body from its three principal moments of inertia.
 *
 * # Safety
 * `inertia` must point to 3 doubles and `out` must be a valid location.
 */
enum CjStatus cj_rigid_body_new(const double *inertia, struct CjSystem **out);

/**
 * Creates a heavy top from inertia, mass, gravity, segment length, and the
 * unit body axis `chi`.
 *
 * # Safety
 * `inertia` and `chi` must point to 3 doubles; `out` must be valid.
 */
enum CjStatus cj_heavy_top_new(const double *inertia,
                               double mass,
                               double gravity,
                               double length,
                               const double *chi,
                               struct CjSystem **out);

/**
 * Releases a system handle. A null handle is ignored.
 *
 * # Safety
 * `sys` must be null or a pointer previously returned by a constructor and
 * not yet freed.
 */
void cj_system_free(struct CjSystem *sys);

/**
 * Number of doubles in the system's state vector (3 on so*(3), 6 on se*(3));
 * 0 for a null handle.
 *
 * # Safety
 * `sys` must be null or a live handle.
 */
size_t cj_system_state_len(const struct CjSystem *sys);

/**
 * Evaluates the Hamiltonian at a state.
 *
 * # Safety
 * `sys` must be a live handle, `state` must point to `len` doubles, and
 * `energy_out` must be a valid location.
 */
enum CjStatus cj_system_energy(const struct CjSystem *sys,
                               const double *state,
                               size_t len,
                               double *energy_out);

/**
 * Evaluates the Hamiltonian vector field at a state; writes `len` doubles.
 *
 * # Safety
 * `sys` must be a live handle; `state` and `field_out` must point to `len`
 * doubles.
 */
enum CjStatus cj_system_vector_field(const struct CjSystem *sys,
                                     const double *state,
                                     size_t len,
                                     double *field_out);

/**
 * Integrates `steps` steps of size `dt` from `state0` and reports the final
 * state plus maximal drifts of the energy, the Casimirs, and — when
 * `with_group` is set — the spatial momentum components.
 *
 * # Safety
 * `sys` must be a live handle; `state0` and `state_out` must point to `len`
 * doubles; the drift outputs must be valid locations.
 */
enum CjStatus cj_system_integrate(const struct CjSystem *sys,
                                  const double *state0,
                                  size_t len,
                                  enum CjIntegrator method,
                                  double dt,
                                  uint64_t steps,
                                  bool with_group,
                                  double *state_out,
                                  double *max_energy_drift,
                                  double *max_casimir_drift,
                                  double *max_momentum_drift);

/**
 * The rigid-body residual field `pi x (gamma/I)`; writes 3 doubles.
 *
 * # Safety
 * All pointers must reference 3 readable (resp. writable) doubles.
 */
enum CjStatus cj_hj_residual_rigid(const double *pi,
                                   const double *gamma,
                                   const double *inertia,
                                   double *out);

/**
 * The heavy-top residual fields; writes 3 doubles to each output slot.
 *
 * # Safety
 * All pointers must reference 3 readable (resp. writable) doubles.
 */
enum CjStatus cj_hj_residual_top(const double *pi,
                                 const double *gamma_adv,
                                 const double *gamma,
                                 const double *inertia,
                                 double mgh,
                                 const double *chi,
                                 double *out_pi,
                                 double *out_gamma);

/**
 * Runs the equivalence verifier on a named section family over `samples`
 * seeded group points at tolerance `tol`, with the residual equations
 * evaluated at the section's own values.
 *
 * # Safety
 * `sys` must be a live handle, `mu` must point to `mu_len` doubles, and
 * `out` must be a valid location.
 */
enum CjStatus cj_verify_theorem(const struct CjSystem *sys,
                                enum CjSectionKind section,
                                const double *mu,
                                size_t mu_len,
                                double k,
                                double amplitude,
                                uint64_t perturb_seed,
                                uint64_t samples,
                                double tol,
                                uint64_t seed,
                                struct CjVerifySummary *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COADJOINT_H */
