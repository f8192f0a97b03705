#ifndef EMH_H
#define EMH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Status codes.
 */
typedef enum EmhStatus {
  EMH_STATUS_OK = 0,
  EMH_STATUS_NULL_POINTER = 1,
  EMH_STATUS_INVALID_ARGUMENT = 2,
  EMH_STATUS_POLE = 3,
  EMH_STATUS_NOT_CONVERGED = 4,
  EMH_STATUS_DEGENERATE_GEOMETRY = 5,
  EMH_STATUS_BUFFER_TOO_SMALL = 6,
  EMH_STATUS_PANIC = 7,
} EmhStatus;

/*
 Which tensor formula [`emh_tensor`] evaluates.
 */
typedef enum EmhTensorForm {
  EMH_TENSOR_FORM_FULL_RATIONAL = 0,
  EMH_TENSOR_FORM_ASYMPTOTIC = 1,
} EmhTensorForm;

/*
 Opaque lattice handle.
 */
typedef struct EmhLattice EmhLattice;

typedef struct EmhComplex {
  double re;
  double im;
} EmhComplex;

/*
 Weierstrass zeta and its first three derivatives.
 */
typedef struct EmhZeta {
  struct EmhComplex value;
  struct EmhComplex d1;
  struct EmhComplex d2;
  struct EmhComplex d3;
} EmhZeta;

typedef struct EmhCoeffs {
  double theta;
  double a1;
  double b1;
  double c1;
  double d1;
  double a2;
  double b2;
  double c2;
  double d2;
} EmhCoeffs;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread, or null. Valid until
 the next failing call on the same thread.
 */
const char *emh_last_error(void);

/*
 Creates a lattice with periods `tau1 x tau2` (`min = 1`), cylinder
 radius `a` and permittivity `eps_in`.

 # Safety
 `out` must be a valid pointer to writable storage for one handle.
 */
enum EmhStatus emh_lattice_new(double tau1,
                               double tau2,
                               double a,
                               double eps_in,
                               struct EmhLattice **out);

/*
 Releases a handle; null is ignored.

 # Safety
 `lat` must come from [`emh_lattice_new`] and not be used afterwards.
 */
void emh_lattice_free(struct EmhLattice *lat);

/*
 Quasi-period constants `eta1` and `eta2~`.

 # Safety
 Pointers must be valid; `lat` must be a live handle.
 */
enum EmhStatus emh_eta(const struct EmhLattice *lat, double *eta1, double *eta2_tilde);

/*
 Lattice sum `s_{two_k}` for even `two_k` in `4..=48`.

 # Safety
 Pointers must be valid; `lat` must be a live handle.
 */
enum EmhStatus emh_lattice_sum(const struct EmhLattice *lat, uint32_t two_k, double *out);

/*
 `zeta(z)` and derivatives at `z = re + i im`.

 # Safety
 Pointers must be valid; `lat` must be a live handle.
 */
enum EmhStatus emh_zeta(const struct EmhLattice *lat, double re, double im, struct EmhZeta *out);

/*
 Multipole coefficients for propagation angle `theta`.

 # Safety
 Pointers must be valid; `lat` must be a live handle.
 */
enum EmhStatus emh_coeffs(const struct EmhLattice *lat, double theta, struct EmhCoeffs *out);

/*
 Effective tensor `(eps1*, eps2*)` at Bloch vector `(q, theta)`.

 # Safety
 Pointers must be valid; `lat` must be a live handle.
 */
enum EmhStatus emh_tensor(const struct EmhLattice *lat,
                          double q,
                          double theta,
                          enum EmhTensorForm form,
                          double *eps1,
                          double *eps2);

/*
 Asymptotic `nu^2` and `lambda2`.

 # Safety
 Pointers must be valid; `lat` must be a live handle. `lambda2` may be null.
 */
enum EmhStatus emh_dispersion(const struct EmhLattice *lat,
                              double q,
                              double theta,
                              double *nu_squared,
                              double *lambda2);

/*
 Lowest `n_modes` plane-wave eigenvalues `nu^2` at `(q, theta)` with
 cutoff `cutoff`; `out` must hold `n_modes` values.

 # Safety
 `out` must point to `out_len` writable doubles; `lat` must be a live handle.
 */
enum EmhStatus emh_oracle_eigenvalues(const struct EmhLattice *lat,
                                      double q,
                                      double theta,
                                      size_t cutoff,
                                      size_t n_modes,
                                      double *out,
                                      size_t out_len);

/*
 `lambda2` fitted from the plane-wave oracle along direction `theta`.

 # Safety
 Pointers must be valid; `lat` must be a live handle.
 */
enum EmhStatus emh_oracle_lambda2(const struct EmhLattice *lat,
                                  double theta,
                                  size_t cutoff,
                                  double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EMH_H */
