//! C interface over `ibnls`.
//!
//! Every handle is opaque and owned by the caller once returned; release it with
//! the matching `*_free`. Every fallible call returns an [`IbnlsStatus`] and leaves
//! a message for [`ibnls_last_error`] on the calling thread. Strings returned by the
//! library are released with [`ibnls_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ibnls::certify::{build_full_certificate, verify_certificate, FullCertificate};
use ibnls::classify::{theorem_applies, ParamSet};
use ibnls::error::CertifyError;
use ibnls::simulate::{default_rho, energy, make_weight, mass, GridField, Grid, Stepper, Weight};
use num_complex::Complex64;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IbnlsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Parameters fail the well-posedness hypotheses.
    Gate = 3,
    /// No feasible exponents were found.
    Infeasible = 4,
    /// The verifier rejected at least one row.
    VerifyFailed = 5,
    Numerical = 6,
    Panic = 7,
}

/// Validated parameter tuple `(d, s, b, σ)`.
pub struct IbnlsParams(ParamSet);

pub struct IbnlsCertificate(FullCertificate);

/// A field on a periodic grid together with its weight and nonlinearity.
pub struct IbnlsSimulation {
    weight: Weight,
    field: GridField,
    lambda: f64,
    sigma: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).unwrap_or_default());
}

/// Run `f`, turning `Err` into a status plus message and panics into `Panic`.
fn guard(f: impl FnOnce() -> Result<(), (IbnlsStatus, String)>) -> IbnlsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            IbnlsStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            IbnlsStatus::Panic
        }
    }
}

type Res<T> = Result<T, (IbnlsStatus, String)>;

fn null(what: &str) -> (IbnlsStatus, String) {
    (IbnlsStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl ToString) -> (IbnlsStatus, String) {
    (IbnlsStatus::InvalidArgument, msg.to_string())
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Res<&'a str> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid(format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Res<&'a T> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<T>(p: *mut T, what: &str, value: T) -> Res<()> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(value);
    Ok(())
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

fn certify_status(e: CertifyError) -> (IbnlsStatus, String) {
    let status = match e {
        CertifyError::Gate(_) => IbnlsStatus::Gate,
        CertifyError::Infeasible { .. } => IbnlsStatus::Infeasible,
        _ => IbnlsStatus::InvalidArgument,
    };
    (status, e.to_string())
}

/// Message from the most recent failing call on this thread; empty after a success.
/// The pointer stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn ibnls_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ibnls_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ibnls_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse exact rationals such as `"1/2"` or `"0.25"` into a parameter handle.
///
/// # Safety
/// String arguments must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ibnls_params_new(
    d: u32,
    s: *const c_char,
    b: *const c_char,
    sigma: *const c_char,
    out_params: *mut *mut IbnlsParams,
) -> IbnlsStatus {
    guard(|| {
        let p = ParamSet::parse(d, str_arg(s, "s")?, str_arg(b, "b")?, str_arg(sigma, "sigma")?).map_err(|e| invalid(e.0))?;
        out(out_params, "out_params", Box::into_raw(Box::new(IbnlsParams(p))))
    })
}

/// # Safety
/// `p` must be null or a live handle from [`ibnls_params_new`].
#[no_mangle]
pub unsafe extern "C" fn ibnls_params_free(p: *mut IbnlsParams) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Whether all hypotheses hold. When they do not, the failing checks are in the last-error message.
///
/// # Safety
/// `params` must be a live handle; `out_applies` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ibnls_classify(params: *const IbnlsParams, out_applies: *mut bool) -> IbnlsStatus {
    let mut failing = String::new();
    let status = guard(|| {
        let v = theorem_applies(&handle(params, "params")?.0);
        failing = v.failed().map(|c| c.name.clone()).collect::<Vec<_>>().join(", ");
        out(out_applies, "out_applies", v.applies)
    });
    if status == IbnlsStatus::Ok && !failing.is_empty() {
        set_error(format!("failing checks: {failing}"));
    }
    status
}

/// Build the full exponent certificate.
///
/// # Safety
/// `params` must be a live handle; `out_cert` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ibnls_certify(params: *const IbnlsParams, out_cert: *mut *mut IbnlsCertificate) -> IbnlsStatus {
    guard(|| {
        let c = build_full_certificate(&handle(params, "params")?.0).map_err(certify_status)?;
        out(out_cert, "out_cert", Box::into_raw(Box::new(IbnlsCertificate(c))))
    })
}

/// # Safety
/// `json` must be NUL-terminated; `out_cert` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ibnls_certificate_from_json(json: *const c_char, out_cert: *mut *mut IbnlsCertificate) -> IbnlsStatus {
    guard(|| {
        let c: FullCertificate = serde_json::from_str(str_arg(json, "json")?).map_err(invalid)?;
        out(out_cert, "out_cert", Box::into_raw(Box::new(IbnlsCertificate(c))))
    })
}

/// Pretty JSON; free with [`ibnls_string_free`]. Null on failure.
///
/// # Safety
/// `cert` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ibnls_certificate_to_json(cert: *const IbnlsCertificate) -> *mut c_char {
    let mut text = None;
    guard(|| {
        text = Some(serde_json::to_string_pretty(&handle(cert, "cert")?.0).map_err(invalid)?);
        Ok(())
    });
    text.map(to_c_string).unwrap_or(ptr::null_mut())
}

/// Exact global θ, e.g. `"5/8"` or `"1/2+1ε"`; free with [`ibnls_string_free`]. Null on failure.
///
/// # Safety
/// `cert` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ibnls_certificate_theta(cert: *const IbnlsCertificate) -> *mut c_char {
    let mut text = None;
    guard(|| {
        text = Some(handle(cert, "cert")?.0.theta.to_string());
        Ok(())
    });
    text.map(to_c_string).unwrap_or(ptr::null_mut())
}

/// Re-derive every row of `cert` against its own stored parameters.
/// Returns `VerifyFailed` with the number of failing rows in `out_failed` when any row fails.
///
/// # Safety
/// `cert` must be a live handle; `out_failed` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn ibnls_verify(cert: *const IbnlsCertificate, out_failed: *mut usize) -> IbnlsStatus {
    guard(|| {
        let c = &handle(cert, "cert")?.0;
        let report = verify_certificate(&c.params, c);
        let failed: Vec<String> = report.failures().map(|r| format!("{} / {}", r.scope, r.label)).collect();
        if !out_failed.is_null() {
            out_failed.write(failed.len());
        }
        if failed.is_empty() {
            Ok(())
        } else {
            Err((IbnlsStatus::VerifyFailed, failed.join("; ")))
        }
    })
}

/// # Safety
/// `cert` must be null or a live certificate handle.
#[no_mangle]
pub unsafe extern "C" fn ibnls_certificate_free(cert: *mut IbnlsCertificate) {
    if !cert.is_null() {
        drop(Box::from_raw(cert));
    }
}

/// Periodic grid `[-L, L)^d` with `n` points per axis, weight `|x|^{-b}` regularised
/// at radius `rho` (`rho <= 0` picks half a cell) and a zero field.
///
/// # Safety
/// `out_sim` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ibnls_sim_new(
    d: u32,
    n: usize,
    length: f64,
    b: f64,
    rho: f64,
    lambda: f64,
    sigma: f64,
    out_sim: *mut *mut IbnlsSimulation,
) -> IbnlsStatus {
    guard(|| {
        let grid = Grid::new(d as usize, n, length).map_err(invalid)?;
        let rho = if rho > 0.0 { rho } else { default_rho(&grid) };
        let weight = make_weight(grid, b, rho).map_err(invalid)?;
        if !(sigma.is_finite() && sigma > 0.0 && lambda.is_finite()) {
            return Err(invalid("sigma must be positive and lambda finite"));
        }
        let sim = IbnlsSimulation { weight, field: GridField::zeros(grid), lambda, sigma };
        out(out_sim, "out_sim", Box::into_raw(Box::new(sim)))
    })
}

/// Number of grid points, i.e. the length expected by the field accessors.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ibnls_sim_len(sim: *const IbnlsSimulation) -> usize {
    sim.as_ref().map_or(0, |s| s.field.values.len())
}

/// Replace the field by `amp · exp(-|x|²/width²)`.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ibnls_sim_set_gaussian(sim: *mut IbnlsSimulation, amp: f64, width: f64) -> IbnlsStatus {
    guard(|| {
        let s = sim.as_mut().ok_or_else(|| null("sim"))?;
        if !(amp.is_finite() && width.is_finite() && width > 0.0) {
            return Err(invalid("amp must be finite and width positive"));
        }
        s.field = GridField::gaussian(s.weight.grid, amp, width);
        Ok(())
    })
}

/// Copy `len` nodal values (row-major, split into real and imaginary arrays) into the field.
///
/// # Safety
/// `re` and `im` must each point to `len` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn ibnls_sim_set_field(sim: *mut IbnlsSimulation, re: *const f64, im: *const f64, len: usize) -> IbnlsStatus {
    guard(|| {
        let s = sim.as_mut().ok_or_else(|| null("sim"))?;
        if re.is_null() || im.is_null() {
            return Err(null("re/im"));
        }
        if len != s.field.values.len() {
            return Err(invalid(format!("expected {} values, got {len}", s.field.values.len())));
        }
        let (re, im) = (std::slice::from_raw_parts(re, len), std::slice::from_raw_parts(im, len));
        let values: Vec<Complex64> = re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        s.field = GridField::new(s.weight.grid, values).map_err(invalid)?;
        Ok(())
    })
}

/// Copy the current field out into `re` and `im`, each of length `len`.
///
/// # Safety
/// `re` and `im` must each point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ibnls_sim_get_field(sim: *const IbnlsSimulation, re: *mut f64, im: *mut f64, len: usize) -> IbnlsStatus {
    guard(|| {
        let s = handle(sim, "sim")?;
        if re.is_null() || im.is_null() {
            return Err(null("re/im"));
        }
        if len != s.field.values.len() {
            return Err(invalid(format!("expected {} values, got {len}", s.field.values.len())));
        }
        let (re, im) = (std::slice::from_raw_parts_mut(re, len), std::slice::from_raw_parts_mut(im, len));
        for (k, v) in s.field.values.iter().enumerate() {
            re[k] = v.re;
            im[k] = v.im;
        }
        Ok(())
    })
}

/// Advance by `steps` Strang steps of size `dt` (negative runs backward).
/// Returns `Numerical` and leaves the field untouched if it stops being finite.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ibnls_sim_step(sim: *mut IbnlsSimulation, dt: f64, steps: usize) -> IbnlsStatus {
    guard(|| {
        let s = sim.as_mut().ok_or_else(|| null("sim"))?;
        if !dt.is_finite() {
            return Err(invalid("dt must be finite"));
        }
        let stepper = Stepper::new(&s.weight, s.lambda, s.sigma);
        let mut u = s.field.clone();
        for k in 0..steps {
            u = stepper.strang(&u, dt);
            if !u.is_finite() {
                return Err((IbnlsStatus::Numerical, format!("field stopped being finite at step {}", k + 1)));
            }
        }
        s.field = u;
        Ok(())
    })
}

/// Discrete mass and energy of the current field.
///
/// # Safety
/// `sim` must be a live handle; outputs must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn ibnls_sim_invariants(sim: *const IbnlsSimulation, out_mass: *mut f64, out_energy: *mut f64) -> IbnlsStatus {
    guard(|| {
        let s = handle(sim, "sim")?;
        if !out_mass.is_null() {
            out_mass.write(mass(&s.field));
        }
        if !out_energy.is_null() {
            out_energy.write(energy(&s.field, &s.weight, s.lambda, s.sigma));
        }
        Ok(())
    })
}

/// # Safety
/// `sim` must be null or a live simulation handle.
#[no_mangle]
pub unsafe extern "C" fn ibnls_sim_free(sim: *mut IbnlsSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}
