//! C ABI for the heavytail library: opaque model handles, status codes, and
//! a thread-local last-error message.
//!
//! Conventions: every fallible function returns [`HtStatus`] and writes its
//! result through an out pointer only on `HT_STATUS_OK`. On any other status
//! the out target is left untouched and [`ht_last_error_message`] carries a
//! description. Handles must be released with [`ht_model_free`]; strings
//! returned by `*_to_json` with [`ht_string_free`].

use heavytail::base::BaseDistribution;
use heavytail::fit::{fit_quantile_regression, FitConfig};
use heavytail::generated::GeneratedDistribution;
use heavytail::tail::hill_estimator;
use heavytail::transform::TransformSpec;
use heavytail::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};

/// Outcome of a C API call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HtStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// Parameters violate a constructor constraint or a spec failed to parse.
    InvalidSpec = 2,
    /// A numeric argument fell outside the domain of the operation.
    Domain = 3,
    /// Too little or unusable data for the requested fit or estimate.
    InsufficientData = 4,
    /// The transform fails the monotonicity condition.
    NotMonotone = 5,
    /// A numeric routine failed to converge or overflowed.
    Numerical = 6,
}

/// Opaque handle to a transformed distribution.
pub struct HtModel {
    inner: GeneratedDistribution,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let sanitized = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = sanitized);
}

fn fail(err: Error) -> HtStatus {
    let status = match err {
        Error::InvalidSpec(_) | Error::Unsupported(_) => HtStatus::InvalidSpec,
        Error::Domain(_) => HtStatus::Domain,
        Error::InsufficientData { .. } | Error::DegenerateData(_) | Error::Ingestion(_) => {
            HtStatus::InsufficientData
        }
        Error::NotMonotone { .. } => HtStatus::NotMonotone,
        _ => HtStatus::Numerical,
    };
    set_last_error(&err.to_string());
    status
}

fn null_argument(which: &str) -> HtStatus {
    set_last_error(&format!("{which} must not be null"));
    HtStatus::NullArgument
}

/// Message for the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread; never free it.
#[no_mangle]
pub extern "C" fn ht_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string; never free it.
#[no_mangle]
pub extern "C" fn ht_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Build the four-parameter exponential-sides transform over a standard
/// Gaussian base: `f(x) = mu + sigma * x * (u^x/a + v^(-x)/a + 1)`.
///
/// # Safety
/// `out` must be a valid pointer to writable `*mut HtModel` storage.
#[no_mangle]
pub unsafe extern "C" fn ht_model_pgml(
    mu: f64,
    sigma: f64,
    u: f64,
    v: f64,
    a: f64,
    out: *mut *mut HtModel,
) -> HtStatus {
    if out.is_null() {
        return null_argument("out");
    }
    let spec = match TransformSpec::pgml(mu, sigma, u, v, a) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    match GeneratedDistribution::new(BaseDistribution::Gaussian, spec) {
        Ok(dist) => {
            *out = Box::into_raw(Box::new(HtModel { inner: dist }));
            HtStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Build a model from its JSON spec: either a full `{"base", "transform"}`
/// object or a bare transform (Gaussian base assumed). All parameters are
/// re-validated.
///
/// # Safety
/// `spec_json` must point to a NUL-terminated string; `out` must be a valid
/// pointer to writable `*mut HtModel` storage.
#[no_mangle]
pub unsafe extern "C" fn ht_model_from_json(
    spec_json: *const c_char,
    out: *mut *mut HtModel,
) -> HtStatus {
    if spec_json.is_null() {
        return null_argument("spec_json");
    }
    if out.is_null() {
        return null_argument("out");
    }
    let text = match CStr::from_ptr(spec_json).to_str() {
        Ok(t) => t,
        Err(_) => {
            set_last_error("spec_json is not valid UTF-8");
            return HtStatus::InvalidSpec;
        }
    };
    match GeneratedDistribution::from_json(text) {
        Ok(dist) => {
            *out = Box::into_raw(Box::new(HtModel { inner: dist }));
            HtStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Fit the exponential-sides transform over a Gaussian base to a data array
/// by quantile regression, with `restarts` optimizer starts (0 picks the
/// default of 3) seeded by `seed`.
///
/// # Safety
/// `data` must point to `len` readable doubles; `out` must be a valid
/// pointer to writable `*mut HtModel` storage.
#[no_mangle]
pub unsafe extern "C" fn ht_fit_pgml(
    data: *const f64,
    len: usize,
    restarts: usize,
    seed: u64,
    out: *mut *mut HtModel,
) -> HtStatus {
    if data.is_null() {
        return null_argument("data");
    }
    if out.is_null() {
        return null_argument("out");
    }
    let slice = std::slice::from_raw_parts(data, len);
    let config = FitConfig {
        restarts: if restarts == 0 { 3 } else { restarts },
        seed,
        ..FitConfig::default()
    };
    let fit = match fit_quantile_regression(&BaseDistribution::Gaussian, slice, &config) {
        Ok(f) => f,
        Err(e) => return fail(e),
    };
    match GeneratedDistribution::new(BaseDistribution::Gaussian, fit.spec) {
        Ok(dist) => {
            *out = Box::into_raw(Box::new(HtModel { inner: dist }));
            HtStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Release a model handle. Passing null is a no-op.
///
/// # Safety
/// `model` must be null or a pointer previously returned through an out
/// parameter of this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ht_model_free(model: *mut HtModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

unsafe fn with_model<T>(
    model: *const HtModel,
    out: *mut T,
    op: impl FnOnce(&GeneratedDistribution) -> Result<T, Error>,
) -> HtStatus {
    if model.is_null() {
        return null_argument("model");
    }
    if out.is_null() {
        return null_argument("out");
    }
    match op(&(*model).inner) {
        Ok(value) => {
            *out = value;
            HtStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Quantile of the model at probability `alpha` in (0,1).
///
/// # Safety
/// `model` must be a live handle from this library; `out` must point to a
/// writable double.
#[no_mangle]
pub unsafe extern "C" fn ht_model_quantile(
    model: *const HtModel,
    alpha: f64,
    out: *mut f64,
) -> HtStatus {
    with_model(model, out, |dist| dist.quantile(alpha))
}

/// Cumulative probability of the model at `y`.
///
/// # Safety
/// `model` must be a live handle from this library; `out` must point to a
/// writable double.
#[no_mangle]
pub unsafe extern "C" fn ht_model_cdf(
    model: *const HtModel,
    y: f64,
    out: *mut f64,
) -> HtStatus {
    with_model(model, out, |dist| Ok(dist.cdf(y)))
}

/// Density of the model at `y`.
///
/// # Safety
/// `model` must be a live handle from this library; `out` must point to a
/// writable double.
#[no_mangle]
pub unsafe extern "C" fn ht_model_pdf(
    model: *const HtModel,
    y: f64,
    out: *mut f64,
) -> HtStatus {
    with_model(model, out, |dist| Ok(dist.pdf(y)))
}

/// Log-density of the model at `y` (may be -inf in regions of zero mass).
///
/// # Safety
/// `model` must be a live handle from this library; `out` must point to a
/// writable double.
#[no_mangle]
pub unsafe extern "C" fn ht_model_log_pdf(
    model: *const HtModel,
    y: f64,
    out: *mut f64,
) -> HtStatus {
    with_model(model, out, |dist| Ok(dist.log_pdf(y)))
}

/// Draw `n` samples into the caller's buffer; identical (seed, n) pairs
/// reproduce identical draws.
///
/// # Safety
/// `model` must be a live handle from this library; `out` must point to at
/// least `n` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ht_model_sample(
    model: *const HtModel,
    n: usize,
    seed: u64,
    out: *mut f64,
) -> HtStatus {
    if model.is_null() {
        return null_argument("model");
    }
    if out.is_null() && n > 0 {
        return null_argument("out");
    }
    match (*model).inner.sample(n, seed) {
        Ok(draws) => {
            std::ptr::copy_nonoverlapping(draws.as_ptr(), out, n);
            HtStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Serialize the model's spec as JSON. The returned string must be released
/// with `ht_string_free`; returns null only on allocation failure.
///
/// # Safety
/// `model` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn ht_model_to_json(model: *const HtModel) -> *mut c_char {
    if model.is_null() {
        set_last_error("model must not be null");
        return std::ptr::null_mut();
    }
    let text = serde_json::to_string(&(*model).inner).expect("model serializes");
    CString::new(text).map_or(std::ptr::null_mut(), CString::into_raw)
}

/// Release a string returned by this library. Passing null is a no-op.
///
/// # Safety
/// `s` must be null or a pointer returned by `ht_model_to_json`, not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn ht_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Hill tail-index estimate from the `k` largest of `len` observations.
///
/// # Safety
/// `data` must point to `len` readable doubles; `out` must point to a
/// writable double.
#[no_mangle]
pub unsafe extern "C" fn ht_hill_estimator(
    data: *const f64,
    len: usize,
    k: usize,
    out: *mut f64,
) -> HtStatus {
    if data.is_null() {
        return null_argument("data");
    }
    if out.is_null() {
        return null_argument("out");
    }
    let slice = std::slice::from_raw_parts(data, len);
    match hill_estimator(slice, k) {
        Ok(estimate) => {
            *out = estimate;
            HtStatus::Ok
        }
        Err(e) => fail(e),
    }
}
