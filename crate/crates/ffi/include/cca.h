/* C interface to the cca coupled-cavity-array simulator. */

#ifndef CCA_H
#define CCA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum CcaStatus {
  CCA_STATUS_OK = 0,
  CCA_STATUS_INVALID_ARGUMENT = 1,
  CCA_STATUS_NULL_POINTER = 2,
  CCA_STATUS_BUFFER_TOO_SMALL = 3,
  CCA_STATUS_DIMENSION_CAP = 4,
  CCA_STATUS_NUMERICAL_GUARD = 5,
  CCA_STATUS_PERIOD_UNAVAILABLE = 6,
  CCA_STATUS_INTERNAL = 99,
} CcaStatus;

typedef enum CcaPlacement {
  CCA_PLACEMENT_FIRST_TWO = 0,
  CCA_PLACEMENT_LAST_TWO = 1,
} CcaPlacement;

/*
 Chain parameters with their cached spectrum.
 */
typedef struct CcaModel CcaModel;

typedef struct CcaState CcaState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread, or NULL. The pointer
 stays valid until the next library call on the same thread.
 */
const char *cca_last_error(void);

/*
 # Safety
 `out` must be valid for writing one pointer.
 */
enum CcaStatus cca_model_new(size_t cavities, double omega, double coupling, struct CcaModel **out);

/*
 # Safety
 `model` must be NULL or a handle from [`cca_model_new`] not yet freed.
 */
void cca_model_free(struct CcaModel *model);

/*
 Number of cavities, or 0 for a NULL handle.

 # Safety
 `model` must be NULL or a live handle.
 */
size_t cca_model_cavities(const struct CcaModel *model);

/*
 Writes the `n` mode frequencies into `out[0..len]`.

 # Safety
 `model` must be a live handle and `out` valid for `len` writes.
 */
enum CcaStatus cca_model_frequencies(const struct CcaModel *model, double *out, size_t len);

/*
 Revival period; 0 for a stationary spectrum, `PeriodUnavailable` if aperiodic.

 # Safety
 `model` must be a live handle and `out` valid for one write.
 */
enum CcaStatus cca_model_period(const struct CcaModel *model, double tol, double *out);

/*
 Probability that the Fock state `occupations` is found unchanged at `t`.

 # Safety
 `model` must be a live handle, `occupations` readable for `len` values,
 `out` valid for one write.
 */
enum CcaStatus cca_survival_probability(const struct CcaModel *model,
                                        const uint32_t *occupations,
                                        size_t len,
                                        double t,
                                        double *out);

/*
 # Safety
 `occupations` readable for `len` values; `out` valid for one write.
 */
enum CcaStatus cca_state_fock(const uint32_t *occupations, size_t len, struct CcaState **out);

/*
 Product of truncated coherent states with amplitudes `re[i] + i·im[i]`.

 # Safety
 `re` and `im` readable for `len` values; `out` valid for one write.
 */
enum CcaStatus cca_state_coherent(const double *re,
                                  const double *im,
                                  size_t len,
                                  struct CcaState **out);

/*
 `sinθ|10⟩ + cosθ|01⟩` on the first or last two of `cavities` sites.

 # Safety
 `out` valid for one write.
 */
enum CcaStatus cca_state_pair(size_t cavities,
                              double theta,
                              enum CcaPlacement placement,
                              struct CcaState **out);

/*
 # Safety
 `state` must be NULL or a live handle not yet freed.
 */
void cca_state_free(struct CcaState *state);

/*
 Probability of the Fock state `occupations` after evolving `state` for `t`.

 # Safety
 Live handles; `occupations` readable for `len` values; `out` valid for one write.
 */
enum CcaStatus cca_state_probability(const struct CcaState *state,
                                     const struct CcaModel *model,
                                     const uint32_t *occupations,
                                     size_t len,
                                     double t,
                                     double *out);

/*
 Four-cavity pair-transfer probability at time `t` for concurrence `c`.
 */
double cca_transfer_closed_form(double t, double concurrence);

/*
 Pair transfer by direct evolution (four-cavity model); also reports the concurrence.

 # Safety
 `model` must be a live handle; out-pointers valid for one write each
 (`out_concurrence` may be NULL).
 */
enum CcaStatus cca_transfer_numeric(const struct CcaModel *model,
                                    double theta,
                                    double t,
                                    double *out_probability,
                                    double *out_concurrence);

/*
 Pair transfer under uniform photon loss `gamma`, integrated with step `dt`.

 # Safety
 `model` must be a live handle; `out` valid for one write.
 */
enum CcaStatus cca_dissipative_transfer(const struct CcaModel *model,
                                        double theta,
                                        double gamma,
                                        double t,
                                        double dt,
                                        double *out);

/*
 W-event times within one repeat period (three-cavity model). `*out_count`
 receives the number of events even when it exceeds `capacity`.

 # Safety
 Live handles; `out_times` valid for `capacity` writes; `out_count` for one.
 */
enum CcaStatus cca_find_w_times(const struct CcaState *state,
                                const struct CcaModel *model,
                                uint32_t photons,
                                double *out_times,
                                size_t capacity,
                                size_t *out_count);

/*
 NOON-event times; same conventions as [`cca_find_w_times`].

 # Safety
 As for [`cca_find_w_times`].
 */
enum CcaStatus cca_find_noon_times(const struct CcaState *state,
                                   const struct CcaModel *model,
                                   uint32_t photons,
                                   double *out_times,
                                   size_t capacity,
                                   size_t *out_count);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CCA_H */
