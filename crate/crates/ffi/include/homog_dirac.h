#ifndef HOMOG_DIRAC_H
#define HOMOG_DIRAC_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum HdStatus {
  HD_STATUS_OK = 0,
  /**
   * A verification ran and at least one check failed.
   */
  HD_STATUS_CHECK_FAILED = 1,
  HD_STATUS_NULL_POINTER = 2,
  HD_STATUS_INVALID_ARGUMENT = 3,
  HD_STATUS_UNSUPPORTED = 4,
  HD_STATUS_NUMERICAL = 5,
  HD_STATUS_IO = 6,
  HD_STATUS_PANIC = 7,
} HdStatus;

/**
 * An invariant connection on the tangent bundle of G/K.
 */
typedef struct HdConnection HdConnection;

/**
 * A group G with subgroup K.
 */
typedef struct HdGroup HdGroup;

/**
 * Eigenvalues of the Dirac operator, block by block.
 */
typedef struct HdSpectrum HdSpectrum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Description of the last failure on this thread; never null.
 */
const char *hd_last_error_message(void);

/**
 * Releases a string returned by the library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void hd_string_free(char *s);

/**
 * Looks up a catalog group ("su2" or "su2-trivial-k") with the given
 * inner-product scale.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum HdStatus hd_group_catalog(const char *name, double scale, struct HdGroup **out);

/**
 * dim 𝔤 and dim 𝔪.
 *
 * # Safety
 * Pointers must be valid.
 */
enum HdStatus hd_group_dims(const struct HdGroup *group, size_t *dim, size_t *dim_m);

/**
 * # Safety
 * `group` must come from `hd_group_catalog` and not be freed twice.
 */
void hd_group_free(struct HdGroup *group);

/**
 * The canonical connection ∇⁰.
 *
 * # Safety
 * Pointers must be valid.
 */
enum HdStatus hd_connection_canonical(const struct HdGroup *group, struct HdConnection **out);

/**
 * The Levi-Civita connection of the normal metric.
 *
 * # Safety
 * Pointers must be valid.
 */
enum HdStatus hd_connection_levi_civita(const struct HdGroup *group, struct HdConnection **out);

/**
 * A tangent connection from γ(e_1), …, γ(e_p): `len = p·p·p` doubles,
 * block after block, each row-major.
 *
 * # Safety
 * `gamma` must point to `len` doubles; other pointers must be valid.
 */
enum HdStatus hd_connection_from_gamma(const struct HdGroup *group,
                                       const double *gamma,
                                       size_t len,
                                       struct HdConnection **out);

/**
 * Both forms of the self-adjointness criterion at `samples` Haar points.
 * `verdict` is 1 when the criterion holds within `tolerance`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum HdStatus hd_connection_criterion(const struct HdConnection *conn,
                                      size_t samples,
                                      uint64_t seed,
                                      double tolerance,
                                      double *torsion_trace,
                                      double *self_action,
                                      int32_t *verdict);

/**
 * # Safety
 * `conn` must come from an `hd_connection_*` constructor.
 */
void hd_connection_free(struct HdConnection *conn);

/**
 * Dirac spectrum on spins 0..=`max_level` with quadrature bandwidth
 * `bandwidth`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum HdStatus hd_spectrum_compute(const struct HdConnection *conn,
                                  uint32_t max_level,
                                  uint32_t bandwidth,
                                  struct HdSpectrum **out);

/**
 * Number of eigenvalues; 0 for a null handle.
 *
 * # Safety
 * `spec` must be null or valid.
 */
size_t hd_spectrum_len(const struct HdSpectrum *spec);

/**
 * The `index`-th (level, eigenvalue) pair.
 *
 * # Safety
 * Pointers must be valid.
 */
enum HdStatus hd_spectrum_entry(const struct HdSpectrum *spec,
                                size_t index,
                                double *level,
                                double *eigenvalue);

/**
 * # Safety
 * `spec` must come from `hd_spectrum_compute`.
 */
void hd_spectrum_free(struct HdSpectrum *spec);

/**
 * Runs a verification suite (0 geometry, 1 dirac, 2 all) on a config
 * given as `key = value` text and returns the JSON report in `json_out`
 * (free with `hd_string_free`). Returns `CheckFailed` when a check fails.
 *
 * # Safety
 * `config` must be a NUL-terminated string and `json_out` valid.
 */
enum HdStatus hd_verify(const char *config, int32_t suite, char **json_out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* HOMOG_DIRAC_H */
