#ifndef BIPHOTON_DUALITY_H
#define BIPHOTON_DUALITY_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum BdDirection {
  BD_DIRECTION_FREQ_TO_TIME = 0,
  BD_DIRECTION_TIME_TO_FREQ = 1,
} BdDirection;

typedef enum BdStatus {
  BD_STATUS_OK = 0,
  BD_STATUS_NULL_POINTER = 1,
  BD_STATUS_INVALID_ARGUMENT = 2,
  BD_STATUS_OUT_OF_RANGE = 3,
  BD_STATUS_UNSUPPORTED = 4,
  BD_STATUS_DEGENERATE_PROFILE = 5,
  BD_STATUS_NON_DECONVOLVABLE = 6,
  BD_STATUS_INTERNAL = 7,
} BdStatus;

typedef enum BdUnit {
  BD_UNIT_THZ = 0,
  BD_UNIT_PS = 1,
  BD_UNIT_NM = 2,
} BdUnit;

// Opaque sampled 2D field, complex or real.
typedef struct BdField BdField;

// Opaque biphoton model.
typedef struct BdModel BdModel;

// Centered uniform axis: sample k sits at `center + (k - (n-1)/2) * step`.
typedef struct BdAxis {
  double center;
  double step;
  uintptr_t n;
  enum BdUnit unit;
} BdAxis;

typedef struct BdWidthReport {
  double dnu_y;
  double dnu_yc;
  double dnu_plus;
  double dnu_minus;
  double dtau_y;
  double dtau_yc;
  double dtau_plus;
  double dtau_minus;
  double tbp_plus;
  double tbp_minus;
  double tbp_y;
} BdWidthReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. The pointer
// stays valid until the next failing call on the same thread.
const char *bd_last_error(void);

// Library version as a static NUL-terminated string.
const char *bd_version(void);

// Gaussian-pump model with coefficients `a` (THz^-2) and `b` (THz^-1).
//
// # Safety
// `out` must be NULL or point to writable storage for one pointer.
enum BdStatus bd_model_gaussian(double a, double b, struct BdModel **out_model);

// Gaussian-pump model whose spectral intensity has the given FWHMs along
// the sum and difference directions, THz.
//
// # Safety
// `out` must be NULL or point to writable storage for one pointer.
enum BdStatus bd_model_calibrate(double dnu_plus, double dnu_minus, struct BdModel **out_model);

// # Safety
// `model` must be NULL or a handle from this library; `a` and `b` must be
// NULL or writable.
enum BdStatus bd_model_params(const struct BdModel *model, double *a, double *b);

// # Safety
// `model` must be NULL or a handle from this library not yet freed.
void bd_model_free(struct BdModel *model);

// Spectral amplitude on THz axes.
//
// # Safety
// Pointers must be NULL or valid for their stated use.
enum BdStatus bd_field_jsa(const struct BdModel *model,
                           struct BdAxis axis_1,
                           struct BdAxis axis_2,
                           struct BdField **out_field);

// Closed-form temporal amplitude on ps axes (Gaussian pump only).
//
// # Safety
// Pointers must be NULL or valid for their stated use.
enum BdStatus bd_field_analytic_jta(const struct BdModel *model,
                                    struct BdAxis axis_1,
                                    struct BdAxis axis_2,
                                    struct BdField **out_field);

// Real field from `n1 * n2` row-major values.
//
// # Safety
// `values` must point to `len` readable doubles.
enum BdStatus bd_field_from_real(struct BdAxis axis_1,
                                 struct BdAxis axis_2,
                                 const double *values,
                                 uintptr_t len,
                                 struct BdField **out_field);

// Two-dimensional transform onto the conjugate grid.
//
// # Safety
// Pointers must be NULL or valid for their stated use.
enum BdStatus bd_field_dft2(const struct BdField *field,
                            enum BdDirection direction,
                            struct BdField **out_field);

// `|field|²` as a real field.
//
// # Safety
// Pointers must be NULL or valid for their stated use.
enum BdStatus bd_field_intensity(const struct BdField *field, struct BdField **out_field);

// # Safety
// Pointers must be NULL or valid for their stated use.
enum BdStatus bd_field_dims(const struct BdField *field, uintptr_t *n1, uintptr_t *n2);

// Axis 1 or 2 of a field.
//
// # Safety
// Pointers must be NULL or valid for their stated use.
enum BdStatus bd_field_axis(const struct BdField *field, uint32_t which, struct BdAxis *out_axis);

// Copies row-major values; `im` may be NULL. `len` must equal `n1 * n2`.
//
// # Safety
// `re` (and `im` when not NULL) must point to `len` writable doubles.
enum BdStatus bd_field_copy_values(const struct BdField *field,
                                   double *re,
                                   double *im,
                                   uintptr_t len);

// # Safety
// `field` must be NULL or a handle from this library not yet freed.
void bd_field_free(struct BdField *field);

// Eight widths and three products from a spectral (THz) and a temporal
// (ps) intensity, removing per-axis Gaussian instrument widths.
//
// # Safety
// Pointers must be NULL or valid for their stated use.
enum BdStatus bd_widths_report(const struct BdField *tsi,
                               const struct BdField *tti,
                               double instrument_thz,
                               double instrument_ps,
                               struct BdWidthReport *out_report);

// Pearson correlation of the two coordinates under the field's intensity.
//
// # Safety
// Pointers must be NULL or valid for their stated use.
enum BdStatus bd_correlation_sign(const struct BdField *field, double *out_value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BIPHOTON_DUALITY_H */
