//! C ABI over `biphoton-duality`.
//!
//! Objects are opaque handles owned by the caller and released with the
//! matching `*_free`. Every call returns a [`BdStatus`]; on failure the
//! message is available from [`bd_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use biphoton_duality::analysis::{correlation_sign, widths_report, InstrumentWidths, WidthReport};
use biphoton_duality::grid::{Axis, Field2D, Intensity2D, Unit};
use biphoton_duality::model::{analytic_jta, calibrate, jsa, BiphotonModel};
use biphoton_duality::transform::{dft2, Direction};
use biphoton_duality::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutOfRange = 3,
    Unsupported = 4,
    DegenerateProfile = 5,
    NonDeconvolvable = 6,
    Internal = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BdUnit {
    Thz = 0,
    Ps = 1,
    Nm = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BdDirection {
    FreqToTime = 0,
    TimeToFreq = 1,
}

/// Centered uniform axis: sample k sits at `center + (k - (n-1)/2) * step`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BdAxis {
    pub center: f64,
    pub step: f64,
    pub n: usize,
    pub unit: BdUnit,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BdWidthReport {
    pub dnu_y: f64,
    pub dnu_yc: f64,
    pub dnu_plus: f64,
    pub dnu_minus: f64,
    pub dtau_y: f64,
    pub dtau_yc: f64,
    pub dtau_plus: f64,
    pub dtau_minus: f64,
    pub tbp_plus: f64,
    pub tbp_minus: f64,
    pub tbp_y: f64,
}

/// Opaque biphoton model.
pub struct BdModel(BiphotonModel);

/// Opaque sampled 2D field, complex or real.
pub enum BdField {
    Complex(Field2D),
    Real(Intensity2D),
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> BdStatus {
    match e {
        Error::InvalidArgument(_) | Error::Parse { .. } | Error::Config { .. } | Error::Io { .. } => {
            BdStatus::InvalidArgument
        }
        Error::OutOfRange { .. } => BdStatus::OutOfRange,
        Error::Unsupported(_) => BdStatus::Unsupported,
        Error::DegenerateProfile(_) => BdStatus::DegenerateProfile,
        Error::NonDeconvolvable { .. } => BdStatus::NonDeconvolvable,
        Error::Internal(_) => BdStatus::Internal,
    }
}

struct Null(&'static str);

enum Fail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

impl From<Null> for Fail {
    fn from(n: Null) -> Self {
        Fail::Null(n.0)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> BdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BdStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_last_error(format!("null pointer: {what}"));
            BdStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic".into());
            BdStatus::Internal
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Null> {
    p.as_ref().ok_or(Null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Null> {
    p.as_mut().ok_or(Null(what))
}

fn to_unit(u: BdUnit) -> Unit {
    match u {
        BdUnit::Thz => Unit::THz,
        BdUnit::Ps => Unit::Ps,
        BdUnit::Nm => Unit::Nm,
    }
}

fn from_unit(u: Unit) -> BdUnit {
    match u {
        Unit::THz => BdUnit::Thz,
        Unit::Ps => BdUnit::Ps,
        Unit::Nm => BdUnit::Nm,
    }
}

fn to_axis(a: &BdAxis) -> Result<Axis, Error> {
    Axis::new(a.center, a.step, a.n, to_unit(a.unit))
}

fn from_axis(a: &Axis) -> BdAxis {
    BdAxis {
        center: a.center(),
        step: a.step(),
        n: a.len(),
        unit: from_unit(a.unit()),
    }
}

fn from_report(r: &WidthReport) -> BdWidthReport {
    BdWidthReport {
        dnu_y: r.dnu_y,
        dnu_yc: r.dnu_yc,
        dnu_plus: r.dnu_plus,
        dnu_minus: r.dnu_minus,
        dtau_y: r.dtau_y,
        dtau_yc: r.dtau_yc,
        dtau_plus: r.dtau_plus,
        dtau_minus: r.dtau_minus,
        tbp_plus: r.tbp_plus,
        tbp_minus: r.tbp_minus,
        tbp_y: r.tbp_y,
    }
}

impl BdField {
    fn axes(&self) -> (&Axis, &Axis) {
        match self {
            BdField::Complex(f) => (f.axis_1(), f.axis_2()),
            BdField::Real(f) => (f.axis_1(), f.axis_2()),
        }
    }

    fn complex(&self) -> Field2D {
        match self {
            BdField::Complex(f) => f.clone(),
            BdField::Real(f) => Field2D::from_real(f),
        }
    }

    fn intensity(&self) -> Intensity2D {
        match self {
            BdField::Complex(f) => f.intensity(),
            BdField::Real(f) => f.clone(),
        }
    }
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Gaussian-pump model with coefficients `a` (THz^-2) and `b` (THz^-1).
///
/// # Safety
/// `out` must be NULL or point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn bd_model_gaussian(a: f64, b: f64, out_model: *mut *mut BdModel) -> BdStatus {
    guard(|| {
        let slot = out(out_model, "out_model")?;
        *slot = boxed(BdModel(BiphotonModel::gaussian(a, b)?));
        Ok(())
    })
}

/// Gaussian-pump model whose spectral intensity has the given FWHMs along
/// the sum and difference directions, THz.
///
/// # Safety
/// `out` must be NULL or point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn bd_model_calibrate(dnu_plus: f64, dnu_minus: f64, out_model: *mut *mut BdModel) -> BdStatus {
    guard(|| {
        let slot = out(out_model, "out_model")?;
        *slot = boxed(BdModel(calibrate(dnu_plus, dnu_minus)?));
        Ok(())
    })
}

/// # Safety
/// `model` must be NULL or a handle from this library; `a` and `b` must be
/// NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn bd_model_params(model: *const BdModel, a: *mut f64, b: *mut f64) -> BdStatus {
    guard(|| {
        let m = deref(model, "model")?;
        *out(a, "a")? = m.0.a();
        *out(b, "b")? = m.0.b();
        Ok(())
    })
}

/// # Safety
/// `model` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bd_model_free(model: *mut BdModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Spectral amplitude on THz axes.
///
/// # Safety
/// Pointers must be NULL or valid for their stated use.
#[no_mangle]
pub unsafe extern "C" fn bd_field_jsa(
    model: *const BdModel,
    axis_1: BdAxis,
    axis_2: BdAxis,
    out_field: *mut *mut BdField,
) -> BdStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let slot = out(out_field, "out_field")?;
        let f = jsa(&m.0, &to_axis(&axis_1)?, &to_axis(&axis_2)?)?;
        *slot = boxed(BdField::Complex(f));
        Ok(())
    })
}

/// Closed-form temporal amplitude on ps axes (Gaussian pump only).
///
/// # Safety
/// Pointers must be NULL or valid for their stated use.
#[no_mangle]
pub unsafe extern "C" fn bd_field_analytic_jta(
    model: *const BdModel,
    axis_1: BdAxis,
    axis_2: BdAxis,
    out_field: *mut *mut BdField,
) -> BdStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let slot = out(out_field, "out_field")?;
        let f = analytic_jta(&m.0, &to_axis(&axis_1)?, &to_axis(&axis_2)?)?;
        *slot = boxed(BdField::Complex(f));
        Ok(())
    })
}

/// Real field from `n1 * n2` row-major values.
///
/// # Safety
/// `values` must point to `len` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn bd_field_from_real(
    axis_1: BdAxis,
    axis_2: BdAxis,
    values: *const f64,
    len: usize,
    out_field: *mut *mut BdField,
) -> BdStatus {
    guard(|| {
        if values.is_null() {
            return Err(Null("values").into());
        }
        let slot = out(out_field, "out_field")?;
        let data = std::slice::from_raw_parts(values, len).to_vec();
        let f = Intensity2D::new(to_axis(&axis_1)?, to_axis(&axis_2)?, data)?;
        *slot = boxed(BdField::Real(f));
        Ok(())
    })
}

/// Two-dimensional transform onto the conjugate grid.
///
/// # Safety
/// Pointers must be NULL or valid for their stated use.
#[no_mangle]
pub unsafe extern "C" fn bd_field_dft2(
    field: *const BdField,
    direction: BdDirection,
    out_field: *mut *mut BdField,
) -> BdStatus {
    guard(|| {
        let f = deref(field, "field")?;
        let slot = out(out_field, "out_field")?;
        let dir = match direction {
            BdDirection::FreqToTime => Direction::FreqToTime,
            BdDirection::TimeToFreq => Direction::TimeToFreq,
        };
        *slot = boxed(BdField::Complex(dft2(&f.complex(), dir)?));
        Ok(())
    })
}

/// `|field|²` as a real field.
///
/// # Safety
/// Pointers must be NULL or valid for their stated use.
#[no_mangle]
pub unsafe extern "C" fn bd_field_intensity(field: *const BdField, out_field: *mut *mut BdField) -> BdStatus {
    guard(|| {
        let f = deref(field, "field")?;
        let slot = out(out_field, "out_field")?;
        *slot = boxed(BdField::Real(f.intensity()));
        Ok(())
    })
}

/// # Safety
/// Pointers must be NULL or valid for their stated use.
#[no_mangle]
pub unsafe extern "C" fn bd_field_dims(field: *const BdField, n1: *mut usize, n2: *mut usize) -> BdStatus {
    guard(|| {
        let f = deref(field, "field")?;
        let (a1, a2) = f.axes();
        *out(n1, "n1")? = a1.len();
        *out(n2, "n2")? = a2.len();
        Ok(())
    })
}

/// Axis 1 or 2 of a field.
///
/// # Safety
/// Pointers must be NULL or valid for their stated use.
#[no_mangle]
pub unsafe extern "C" fn bd_field_axis(field: *const BdField, which: u32, out_axis: *mut BdAxis) -> BdStatus {
    guard(|| {
        let f = deref(field, "field")?;
        let slot = out(out_axis, "out_axis")?;
        let (a1, a2) = f.axes();
        *slot = match which {
            1 => from_axis(a1),
            2 => from_axis(a2),
            _ => return Err(Error::InvalidArgument(format!("axis must be 1 or 2, got {which}")).into()),
        };
        Ok(())
    })
}

/// Copies row-major values; `im` may be NULL. `len` must equal `n1 * n2`.
///
/// # Safety
/// `re` (and `im` when not NULL) must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn bd_field_copy_values(field: *const BdField, re: *mut f64, im: *mut f64, len: usize) -> BdStatus {
    guard(|| {
        let f = deref(field, "field")?;
        if re.is_null() {
            return Err(Null("re").into());
        }
        let (a1, a2) = f.axes();
        let n = a1.len() * a2.len();
        if len != n {
            return Err(Error::InvalidArgument(format!("buffer holds {len} values, field has {n}")).into());
        }
        let re = std::slice::from_raw_parts_mut(re, len);
        let mut im = (!im.is_null()).then(|| std::slice::from_raw_parts_mut(im, len));
        match f {
            BdField::Complex(c) => {
                for (k, v) in c.values().iter().enumerate() {
                    re[k] = v.re;
                    if let Some(im) = im.as_deref_mut() {
                        im[k] = v.im;
                    }
                }
            }
            BdField::Real(r) => {
                re.copy_from_slice(r.values());
                if let Some(im) = im {
                    im.fill(0.0);
                }
            }
        }
        Ok(())
    })
}

/// # Safety
/// `field` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bd_field_free(field: *mut BdField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Eight widths and three products from a spectral (THz) and a temporal
/// (ps) intensity, removing per-axis Gaussian instrument widths.
///
/// # Safety
/// Pointers must be NULL or valid for their stated use.
#[no_mangle]
pub unsafe extern "C" fn bd_widths_report(
    tsi: *const BdField,
    tti: *const BdField,
    instrument_thz: f64,
    instrument_ps: f64,
    out_report: *mut BdWidthReport,
) -> BdStatus {
    guard(|| {
        let tsi = deref(tsi, "tsi")?.intensity();
        let tti = deref(tti, "tti")?.intensity();
        let slot = out(out_report, "out_report")?;
        let inst = InstrumentWidths {
            frequency: [instrument_thz; 2],
            time: [instrument_ps; 2],
        };
        *slot = from_report(&widths_report(&tsi, &tti, &inst)?);
        Ok(())
    })
}

/// Pearson correlation of the two coordinates under the field's intensity.
///
/// # Safety
/// Pointers must be NULL or valid for their stated use.
#[no_mangle]
pub unsafe extern "C" fn bd_correlation_sign(field: *const BdField, out_value: *mut f64) -> BdStatus {
    guard(|| {
        let f = deref(field, "field")?.intensity();
        *out(out_value, "out_value")? = correlation_sign(&f)?;
        Ok(())
    })
}
