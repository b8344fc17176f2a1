//! C ABI over `apq-core`.
//!
//! Every function returns an [`ApqStatus`]; results are written through out
//! pointers. Models and weights are opaque heap handles released with their
//! `_free` functions. After a failure, [`apq_last_error`] describes it.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use apq_core::ainf::eval_ainf;
use apq_core::bellman::{eval, eval_a2, eval_lambda, gradient};
use apq_core::extremal::build;
use apq_core::geometry::classify;
use apq_core::rh::rh_constant;
use apq_core::weights::Weight;
use apq_core::{ApqError, Model, Region};

/// Result code of every exported function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParams = 2,
    NoConvergence = 3,
    OutsideDomain = 4,
    NearBoundary = 5,
    InvalidWeight = 6,
    NonIntegrable = 7,
    Unsupported = 8,
    InvalidString = 9,
    Panic = 10,
}

/// Region of the moment domain.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApqRegion {
    I = 1,
    II = 2,
    III = 3,
    IV = 4,
    Gamma1 = 5,
    GammaQ = 6,
    Outside = 7,
}

impl From<Region> for ApqRegion {
    fn from(r: Region) -> Self {
        match r {
            Region::I => ApqRegion::I,
            Region::II => ApqRegion::II,
            Region::III => ApqRegion::III,
            Region::IV => ApqRegion::IV,
            Region::Gamma1 => ApqRegion::Gamma1,
            Region::GammaQ => ApqRegion::GammaQ,
            Region::Outside => ApqRegion::Outside,
        }
    }
}

/// Constants derived from `(p1, p2, Q)`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct ApqConstants {
    pub gamma_minus: f64,
    pub gamma_plus: f64,
    pub v_minus: f64,
    pub v_plus: f64,
    pub a: f64,
    pub nu: f64,
    pub a2: f64,
    pub b2: f64,
    pub c2: f64,
}

/// A Bellman value with its region; `v` is NaN outside the curved regions.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ApqEval {
    pub value: f64,
    pub region: ApqRegion,
    pub v: f64,
}

/// Reverse Hölder result; `constant` is infinite when the integral diverges.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ApqRh {
    pub constant: f64,
    pub converged: bool,
    pub tail_power: f64,
}

/// Opaque exponent pair, class constant and derived constants.
pub struct ApqModel(Model);

/// Opaque piecewise weight on `[0,1]`.
pub struct ApqWeight(Weight);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &ApqError) -> ApqStatus {
    match e {
        ApqError::InvalidParams(_) => ApqStatus::InvalidParams,
        ApqError::NoConvergence(_) => ApqStatus::NoConvergence,
        ApqError::OutsideDomain { .. } => ApqStatus::OutsideDomain,
        ApqError::NearBoundary { .. } => ApqStatus::NearBoundary,
        ApqError::InvalidWeight(_) => ApqStatus::InvalidWeight,
        ApqError::NonIntegrable { .. } => ApqStatus::NonIntegrable,
        ApqError::Unsupported(_) => ApqStatus::Unsupported,
    }
}

/// Run `f`, converting errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), ApqStatus>>(f: F) -> ApqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ApqStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            ApqStatus::Panic
        }
    }
}

fn check<T>(r: apq_core::Result<T>) -> Result<T, ApqStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), ApqStatus> {
    if p.is_null() {
        set_error(format!("{what} is null"));
        Err(ApqStatus::NullPointer)
    } else {
        Ok(())
    }
}

/// # Safety
/// `out` must be writable when non-null.
unsafe fn write<T>(out: *mut T, value: T) -> Result<(), ApqStatus> {
    non_null(out, "output pointer")?;
    out.write(value);
    Ok(())
}

/// # Safety
/// `model` must be null or a live handle from [`apq_model_new`].
unsafe fn model_ref<'a>(model: *const ApqModel) -> Result<&'a Model, ApqStatus> {
    non_null(model, "model")?;
    Ok(&(*model).0)
}

/// # Safety
/// `weight` must be null or a live handle.
unsafe fn weight_ref<'a>(weight: *const ApqWeight) -> Result<&'a Weight, ApqStatus> {
    non_null(weight, "weight")?;
    Ok(&(*weight).0)
}

fn to_eval(value: f64, region: Region, v: Option<f64>) -> ApqEval {
    ApqEval { value, region: region.into(), v: v.unwrap_or(f64::NAN) }
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn apq_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Create a model for exponents `p1 > p2` and class constant `q > 1`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn apq_model_new(p1: f64, p2: f64, q: f64, out: *mut *mut ApqModel) -> ApqStatus {
    guard(|| {
        non_null(out, "output pointer")?;
        let m = check(Model::new(p1, p2, q))?;
        out.write(Box::into_raw(Box::new(ApqModel(m))));
        Ok(())
    })
}

/// Release a model. Null is ignored.
///
/// # Safety
/// `model` must be null or a handle from [`apq_model_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn apq_model_free(model: *mut ApqModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn apq_model_constants(model: *const ApqModel, out: *mut ApqConstants) -> ApqStatus {
    guard(|| {
        let c = model_ref(model)?.consts;
        write(
            out,
            ApqConstants {
                gamma_minus: c.gamma_minus,
                gamma_plus: c.gamma_plus,
                v_minus: c.v_minus,
                v_plus: c.v_plus,
                a: c.a,
                nu: c.nu,
                a2: c.a2,
                b2: c.b2,
                c2: c.c2,
            },
        )
    })
}

/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn apq_classify(model: *const ApqModel, x1: f64, x2: f64, out: *mut ApqRegion) -> ApqStatus {
    guard(|| {
        let m = model_ref(model)?;
        let r = check(classify(x1, x2, &m.params, &m.consts))?;
        write(out, r.into())
    })
}

/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn apq_eval(model: *const ApqModel, x1: f64, x2: f64, out: *mut ApqEval) -> ApqStatus {
    guard(|| {
        let m = model_ref(model)?;
        let e = check(eval(x1, x2, &m.params, &m.consts))?;
        write(out, to_eval(e.value, e.region, e.v))
    })
}

/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn apq_eval_lambda(
    model: *const ApqModel,
    x1: f64,
    x2: f64,
    lambda: f64,
    out: *mut f64,
) -> ApqStatus {
    guard(|| {
        let m = model_ref(model)?;
        let v = check(eval_lambda(x1, x2, lambda, &m.params, &m.consts))?;
        write(out, v)
    })
}

/// Supporting plane `B(x) = t[0] + t[1] x1 + t[2] x2`.
///
/// # Safety
/// `model` must be a live handle and `out` must point to three writable doubles.
#[no_mangle]
pub unsafe extern "C" fn apq_gradient(model: *const ApqModel, x1: f64, x2: f64, out: *mut f64) -> ApqStatus {
    guard(|| {
        let m = model_ref(model)?;
        non_null(out, "output pointer")?;
        let (t0, t1, t2) = check(gradient(x1, x2, &m.params, &m.consts))?;
        out.write(t0);
        out.add(1).write(t1);
        out.add(2).write(t2);
        Ok(())
    })
}

/// Closed-form value for the pair `(1, -1)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn apq_eval_a2(x1: f64, x2: f64, q: f64, out: *mut f64) -> ApqStatus {
    guard(|| write(out, check(eval_a2(x1, x2, q))?))
}

/// Value for the logarithmic limit class, with `x2 = <log w>`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn apq_eval_ainf(x1: f64, x2: f64, q: f64, out: *mut ApqEval) -> ApqStatus {
    guard(|| {
        let (value, region, v) = check(eval_ainf(x1, x2, q))?;
        write(out, to_eval(value, region, v))
    })
}

/// Reverse Hölder constant from an upper-boundary point of the `(1, -1)` class.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn apq_rh_constant(q: f64, alpha: f64, x1: f64, x2: f64, out: *mut ApqRh) -> ApqStatus {
    guard(|| {
        let r = check(rh_constant(q, alpha, x1, x2))?;
        write(
            out,
            ApqRh { constant: r.constant.unwrap_or(f64::INFINITY), converged: r.converged, tail_power: r.tail_power },
        )
    })
}

/// Build an extremal weight at `x`.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn apq_extremal_build(
    model: *const ApqModel,
    x1: f64,
    x2: f64,
    out: *mut *mut ApqWeight,
) -> ApqStatus {
    guard(|| {
        let m = model_ref(model)?;
        non_null(out, "output pointer")?;
        let ex = check(build(x1, x2, &m.params, &m.consts))?;
        out.write(Box::into_raw(Box::new(ApqWeight(ex.weight))));
        Ok(())
    })
}

/// Parse a weight from its JSON document.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn apq_weight_from_json(json: *const c_char, out: *mut *mut ApqWeight) -> ApqStatus {
    guard(|| {
        non_null(json, "json")?;
        non_null(out, "output pointer")?;
        let text = CStr::from_ptr(json).to_str().map_err(|e| {
            set_error(e.to_string());
            ApqStatus::InvalidString
        })?;
        let w: Weight = serde_json::from_str(text).map_err(|e| {
            set_error(e.to_string());
            ApqStatus::InvalidWeight
        })?;
        out.write(Box::into_raw(Box::new(ApqWeight(w))));
        Ok(())
    })
}

/// Serialize a weight to JSON; free the result with [`apq_string_free`].
///
/// # Safety
/// `weight` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn apq_weight_to_json(weight: *const ApqWeight, out: *mut *mut c_char) -> ApqStatus {
    guard(|| {
        let w = weight_ref(weight)?;
        let text = serde_json::to_string(w).map_err(|e| {
            set_error(e.to_string());
            ApqStatus::InvalidWeight
        })?;
        let c = CString::new(text).map_err(|_| ApqStatus::InvalidString)?;
        write(out, c.into_raw())
    })
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from [`apq_weight_to_json`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn apq_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Release a weight. Null is ignored.
///
/// # Safety
/// `weight` must be null or a live handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn apq_weight_free(weight: *mut ApqWeight) {
    if !weight.is_null() {
        drop(Box::from_raw(weight));
    }
}

/// `<w^p>` over `[lo, hi]`.
///
/// # Safety
/// `weight` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn apq_weight_moment(weight: *const ApqWeight, p: f64, lo: f64, hi: f64, out: *mut f64) -> ApqStatus {
    guard(|| {
        let w = weight_ref(weight)?;
        write(out, check(w.moment_on(p, lo, hi))?)
    })
}

/// Measure of `{w >= lambda}`.
///
/// # Safety
/// `weight` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn apq_weight_distribution(weight: *const ApqWeight, lambda: f64, out: *mut f64) -> ApqStatus {
    guard(|| {
        let w = weight_ref(weight)?;
        write(out, w.distribution(lambda))
    })
}

/// Class-norm estimate of a weight for the model's exponents.
///
/// # Safety
/// `weight` and `model` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn apq_weight_apq_norm(
    weight: *const ApqWeight,
    model: *const ApqModel,
    resolution: usize,
    out: *mut f64,
) -> ApqStatus {
    guard(|| {
        let w = weight_ref(weight)?;
        let m = model_ref(model)?;
        write(out, check(w.apq_norm(&m.params, resolution))?)
    })
}
