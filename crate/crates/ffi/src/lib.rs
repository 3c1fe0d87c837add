//! C ABI over `trapflux`.
//!
//! Every fallible function returns a [`TfStatus`]; on failure a message for
//! the calling thread is available from [`tf_last_error`]. Handles are opaque
//! and must be released with the matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use trapflux::kinematics::RotorDynamics;
use trapflux::signal::{
    generate_stream, total_flux, DipoleBias, FluxonPopulation, FnSink, KinematicsMode, SampledSignal, StreamConfig,
};
use trapflux::transfer::{Method, TransferCurve};
use trapflux::Error;

pub const TF_METHOD_SERIES: u32 = 0;
pub const TF_METHOD_INTEGRAL: u32 = 1;
pub const TF_METHOD_CLOSED_FORM: u32 = 2;
pub const TF_METHOD_PIECEWISE_LINEAR: u32 = 3;
pub const TF_METHOD_ARCTAN: u32 = 4;
pub const TF_METHOD_ARCTAN_ADJUSTED: u32 = 5;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Numerical = 4,
    Io = 5,
    Parse = 6,
    Panic = 7,
}

/// Transfer curve handle.
pub struct TfCurve {
    inner: TransferCurve,
}

/// Fluxon population handle.
pub struct TfPopulation {
    inner: FluxonPopulation,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct TfCurveConstants {
    pub delta: f64,
    pub f_delta: f64,
    pub kappa_delta: f64,
    pub delta_width: f64,
    pub a_delta: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct TfFluxon {
    pub xi: f64,
    pub eta: f64,
    pub polarity: i32,
}

/// Rotor and roll parameters. Frequencies in Hz, angles in radians. When
/// `inertia_ratio` is zero and `polhode_hz` positive, `ΔI/I` is chosen to
/// give that polhode frequency.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct TfDynamics {
    pub spin_hz: f64,
    pub roll_hz: f64,
    pub polhode_hz: f64,
    pub inertia_ratio: f64,
    pub gamma_b: f64,
    pub alpha: f64,
    pub beta0: f64,
    pub theta_s0: f64,
    pub theta_p0: f64,
    pub theta_r0: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> TfStatus {
    match e {
        Error::Domain { .. } | Error::Singular { .. } | Error::Conditioning { .. } => TfStatus::Domain,
        Error::Quadrature { .. } | Error::RootSolve(_) => TfStatus::Numerical,
        Error::InvalidParameter(_) | Error::Config(_) | Error::BiasInfeasible { .. } => TfStatus::InvalidArgument,
        Error::Parse { .. } => TfStatus::Parse,
        Error::Io { .. } | Error::Sink(_) => TfStatus::Io,
    }
}

fn guard(f: impl FnOnce() -> Result<(), TfStatus>) -> TfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TfStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            TfStatus::Panic
        }
    }
}

fn fail(e: Error) -> TfStatus {
    set_error(&e.to_string());
    status_of(&e)
}

fn null(what: &str) -> TfStatus {
    set_error(&format!("null pointer: {what}"));
    TfStatus::NullPointer
}

fn invalid(msg: &str) -> TfStatus {
    set_error(msg);
    TfStatus::InvalidArgument
}

fn method_of(code: u32) -> Option<Method> {
    Some(match code {
        TF_METHOD_SERIES => Method::Series,
        TF_METHOD_INTEGRAL => Method::Integral,
        TF_METHOD_CLOSED_FORM => Method::ClosedForm,
        TF_METHOD_PIECEWISE_LINEAR => Method::PiecewiseLinear,
        TF_METHOD_ARCTAN => Method::Arctan,
        TF_METHOD_ARCTAN_ADJUSTED => Method::ArctanAdjusted,
        _ => return None,
    })
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, TfStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

fn dynamics_of(d: &TfDynamics) -> Result<RotorDynamics, TfStatus> {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut out = RotorDynamics {
        omega_s: two_pi * d.spin_hz,
        omega_r: two_pi * d.roll_hz,
        inertia_ratio: d.inertia_ratio,
        gamma_b: d.gamma_b,
        alpha: d.alpha,
        beta0: d.beta0,
        theta_s0: d.theta_s0,
        theta_p0: d.theta_p0,
        theta_r0: d.theta_r0,
        omega_p_override: None,
    };
    if d.inertia_ratio == 0.0 && d.polhode_hz > 0.0 {
        out = out.with_polhode_period(1.0 / d.polhode_hz);
    }
    out.validate().map_err(fail)?;
    Ok(out)
}

/// Message describing the last failure on this thread. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// GP-B parameters: 100 Hz spin, 3 min roll, 43.6 min polhode period.
///
/// # Safety
///
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tf_dynamics_gpb(out: *mut TfDynamics) -> TfStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let g = RotorDynamics::gpb();
        let two_pi = 2.0 * std::f64::consts::PI;
        *out = TfDynamics {
            spin_hz: g.omega_s / two_pi,
            roll_hz: g.omega_r / two_pi,
            polhode_hz: g.omega_p() / two_pi,
            inertia_ratio: 0.0,
            gamma_b: g.gamma_b,
            alpha: g.alpha,
            beta0: g.beta0,
            theta_s0: 0.0,
            theta_p0: 0.0,
            theta_r0: 0.0,
        };
        Ok(())
    })
}

/// Creates a transfer curve for gap `delta` using one of the `TF_METHOD_*` codes.
///
/// # Safety
///
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tf_curve_new(delta: f64, method: u32, out: *mut *mut TfCurve) -> TfStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = ptr::null_mut();
        let m = method_of(method).ok_or_else(|| invalid(&format!("unknown method code {method}")))?;
        let inner = TransferCurve::new(delta, m).map_err(fail)?;
        *out = Box::into_raw(Box::new(TfCurve { inner }));
        Ok(())
    })
}

/// Releases a curve handle.
///
/// # Safety
///
/// `curve` must be null or a handle from `tf_curve_new` not yet freed; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn tf_curve_free(curve: *mut TfCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// Curve constants `f_δ`, `κ_δ`, `Δ_δ` and `A_δ`.
///
/// # Safety
///
/// `curve` must be null or a live curve handle; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tf_curve_constants(curve: *const TfCurve, out: *mut TfCurveConstants) -> TfStatus {
    guard(|| {
        let c = &deref(curve, "curve")?.inner;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = TfCurveConstants {
            delta: c.delta(),
            f_delta: c.f_delta(),
            kappa_delta: c.kappa_delta(),
            delta_width: c.delta_width(),
            a_delta: c.a_delta(),
        };
        Ok(())
    })
}

/// Evaluates `F_δ` at `n` points of `s` into `out`.
///
/// # Safety
///
/// `curve` must be null or a live curve handle; `s` and `out` must be null or valid for `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn tf_curve_eval(curve: *const TfCurve, s: *const f64, n: usize, out: *mut f64) -> TfStatus {
    guard(|| {
        let c = &deref(curve, "curve")?.inner;
        if n == 0 {
            return Ok(());
        }
        if s.is_null() || out.is_null() {
            return Err(null("s/out"));
        }
        let s = std::slice::from_raw_parts(s, n);
        let out = std::slice::from_raw_parts_mut(out, n);
        for (o, &x) in out.iter_mut().zip(s) {
            *o = c.eval(x).map_err(fail)?;
        }
        Ok(())
    })
}

/// Evaluates `F_δ'` at `n` points of `s` into `out`.
///
/// # Safety
///
/// `curve` must be null or a live curve handle; `s` and `out` must be null or valid for `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn tf_curve_deriv(curve: *const TfCurve, s: *const f64, n: usize, out: *mut f64) -> TfStatus {
    guard(|| {
        let c = &deref(curve, "curve")?.inner;
        if n == 0 {
            return Ok(());
        }
        if s.is_null() || out.is_null() {
            return Err(null("s/out"));
        }
        let s = std::slice::from_raw_parts(s, n);
        let out = std::slice::from_raw_parts_mut(out, n);
        for (o, &x) in out.iter_mut().zip(s) {
            *o = c.deriv(x).map_err(fail)?;
        }
        Ok(())
    })
}

/// `2 n_pairs` fluxons uniform on the sphere with alternating polarity.
///
/// # Safety
///
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tf_population_uniform(n_pairs: usize, seed: u64, out: *mut *mut TfPopulation) -> TfStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = Box::into_raw(Box::new(TfPopulation {
            inner: FluxonPopulation::uniform(n_pairs, seed),
        }));
        Ok(())
    })
}

/// Dipole-biased population. `axis` (three doubles, body frame) may be null
/// for a random axis; `bias_pairs` of zero selects the default count.
///
/// # Safety
///
/// `axis` must be null or point to three doubles; `curve` must be null or a live curve handle; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tf_population_dipole(
    n_pairs: usize,
    bias_flux: f64,
    axis: *const f64,
    bias_pairs: usize,
    curve: *const TfCurve,
    seed: u64,
    out: *mut *mut TfPopulation,
) -> TfStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = ptr::null_mut();
        let c = &deref(curve, "curve")?.inner;
        let axis = if axis.is_null() {
            None
        } else {
            let a = std::slice::from_raw_parts(axis, 3);
            Some([a[0], a[1], a[2]])
        };
        let bias = DipoleBias {
            flux: bias_flux,
            axis,
            pairs: (bias_pairs > 0).then_some(bias_pairs),
        };
        let inner = FluxonPopulation::dipole_biased(n_pairs, bias, c, seed).map_err(fail)?;
        *out = Box::into_raw(Box::new(TfPopulation { inner }));
        Ok(())
    })
}

/// Reads a population file of `xi eta polarity` lines.
///
/// # Safety
///
/// `path` must be null or a NUL-terminated string; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tf_population_read(path: *const c_char, out: *mut *mut TfPopulation) -> TfStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = ptr::null_mut();
        if path.is_null() {
            return Err(null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| invalid("path is not UTF-8"))?;
        let inner = FluxonPopulation::read(Path::new(path)).map_err(fail)?;
        *out = Box::into_raw(Box::new(TfPopulation { inner }));
        Ok(())
    })
}

/// Releases a population handle.
///
/// # Safety
///
/// `pop` must be null or a population handle not yet freed; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn tf_population_free(pop: *mut TfPopulation) {
    if !pop.is_null() {
        drop(Box::from_raw(pop));
    }
}

/// Number of fluxons, or 0 for a null handle.
///
/// # Safety
///
/// `pop` must be null or a live population handle.
#[no_mangle]
pub unsafe extern "C" fn tf_population_len(pop: *const TfPopulation) -> usize {
    pop.as_ref().map_or(0, |p| p.inner.len())
}

/// Copies fluxon `index` into `out`.
///
/// # Safety
///
/// `pop` must be null or a live population handle; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tf_population_get(pop: *const TfPopulation, index: usize, out: *mut TfFluxon) -> TfStatus {
    guard(|| {
        let p = &deref(pop, "population")?.inner;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let f = p
            .fluxons
            .get(index)
            .ok_or_else(|| invalid(&format!("index {index} out of range for {} fluxons", p.len())))?;
        *out = TfFluxon {
            xi: f.xi,
            eta: f.eta,
            polarity: i32::from(f.polarity),
        };
        Ok(())
    })
}

/// Total flux in units of Φ₀ at time `t`.
///
/// # Safety
///
/// Handles must be null or live; `dynamics` must be null or point to a `TfDynamics`; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tf_total_flux(
    pop: *const TfPopulation,
    curve: *const TfCurve,
    dynamics: *const TfDynamics,
    t: f64,
    out: *mut f64,
) -> TfStatus {
    guard(|| {
        let p = &deref(pop, "population")?.inner;
        let c = &deref(curve, "curve")?.inner;
        let d = dynamics_of(deref(dynamics, "dynamics")?)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = total_flux(p, c, &d, t, KinematicsMode::Exact).map_err(fail)?;
        Ok(())
    })
}

/// Fills `buffer` with `n_samples` flux samples at `t_start + i / sample_rate`.
/// A nonzero `first_order` selects the first-order kinematics.
///
/// # Safety
///
/// Handles must be null or live; `dynamics` must be null or point to a `TfDynamics`; `buffer` must be null or valid for `n_samples` doubles.
#[no_mangle]
pub unsafe extern "C" fn tf_generate(
    pop: *const TfPopulation,
    curve: *const TfCurve,
    dynamics: *const TfDynamics,
    t_start: f64,
    sample_rate: f64,
    n_samples: usize,
    first_order: i32,
    buffer: *mut f64,
) -> TfStatus {
    guard(|| {
        let p = &deref(pop, "population")?.inner;
        let c = &deref(curve, "curve")?.inner;
        let d = dynamics_of(deref(dynamics, "dynamics")?)?;
        if n_samples == 0 {
            return Ok(());
        }
        if buffer.is_null() {
            return Err(null("buffer"));
        }
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(invalid("sample rate must be positive"));
        }
        let buf = std::slice::from_raw_parts_mut(buffer, n_samples);
        let cfg = StreamConfig {
            t_start,
            duration: n_samples as f64 / sample_rate,
            sample_rate,
            kinematics: if first_order != 0 {
                KinematicsMode::FirstOrder
            } else {
                KinematicsMode::Exact
            },
            ..StreamConfig::default()
        };
        if cfg.total_samples() != n_samples {
            return Err(invalid("sample count is not representable at this rate"));
        }
        let mut pos = 0;
        let mut sink = FnSink(|b: &SampledSignal| {
            buf[pos..pos + b.len()].copy_from_slice(&b.samples);
            pos += b.len();
            Ok(())
        });
        generate_stream(p, c, &d, &cfg, &mut sink).map_err(fail)?;
        Ok(())
    })
}
