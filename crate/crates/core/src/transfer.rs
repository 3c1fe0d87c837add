//! The universal curve `F_δ(s)`: flux through the pick-up loop (in units of
//! `Φ₀/2`) produced by one fluxon at `s = cos ϑ_f` relative to the loop normal.
//!
//! Exact evaluators: Legendre series, a one-dimensional integral, and a
//! closed form in complete elliptic integrals. Elementary approximations:
//! piecewise-linear, arctan and adjusted arctan.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions};
use crate::specfun::{carlson_rf, carlson_rj, ellip_e, ellip_k, legendre_p_all, legendre_p_deriv_all};

/// Below this `|s|` the closed form loses too many digits to cancellation.
pub const CLOSED_FORM_S_MIN: f64 = 0.02;

/// Below this gap the Legendre series converges too slowly to be practical.
pub const SERIES_DELTA_WARN: f64 = 0.05;

const INTEGRAL_OPTS: QuadOptions = QuadOptions {
    abs_tol: 1e-15,
    rel_tol: 1e-13,
    max_intervals: 4000,
};

/// Evaluation method of a [`TransferCurve`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Series,
    Integral,
    ClosedForm,
    PiecewiseLinear,
    Arctan,
    ArctanAdjusted,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Series,
        Method::Integral,
        Method::ClosedForm,
        Method::PiecewiseLinear,
        Method::Arctan,
        Method::ArctanAdjusted,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Series => "series",
            Method::Integral => "integral",
            Method::ClosedForm => "closed_form",
            Method::PiecewiseLinear => "piecewise_linear",
            Method::Arctan => "arctan",
            Method::ArctanAdjusted => "arctan_adjusted",
        }
    }

    /// True for the three exact representations.
    pub fn is_exact(self) -> bool {
        matches!(self, Method::Series | Method::Integral | Method::ClosedForm)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown transfer method `{s}`")))
    }
}

fn check_delta(func: &'static str, delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain(
            func,
            format!("gap must satisfy 0 < delta < 1, got {delta}"),
        ));
    }
    Ok(())
}

fn check_s(func: &'static str, s: f64) -> Result<()> {
    if !s.is_finite() || s.abs() > 1.0 {
        return Err(Error::domain(func, format!("|s| must be <= 1, got {s}")));
    }
    Ok(())
}

/// Number of series terms after which `η^{2k+1}` drops below 1e-17.
pub fn series_terms_for(delta: f64) -> usize {
    let eta = 1.0 - delta;
    let k = (1e-17f64).ln() / (2.0 * eta.ln());
    (k.ceil() as usize).clamp(10, 200_000)
}

// c_k = (2/√π)(−1)^k (k+3/4) Γ(k+1/2)/(k+1)!, times η^{2k+1}.
fn series_coefficients(delta: f64, k_max: usize) -> Vec<f64> {
    let eta = 1.0 - delta;
    let eta2 = eta * eta;
    let mut out = Vec::with_capacity(k_max + 1);
    // g_k = Γ(k+1/2) / (√π (k+1)!)
    let mut g = 1.0;
    let mut eta_pow = eta;
    for k in 0..=k_max {
        let kf = k as f64;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        out.push(2.0 * sign * (kf + 0.75) * g * eta_pow);
        g *= (kf + 0.5) / (kf + 2.0);
        eta_pow *= eta2;
    }
    out
}

fn warn_series(delta: f64) {
    if delta < SERIES_DELTA_WARN {
        log::warn!("Legendre series converges slowly for delta = {delta} < {SERIES_DELTA_WARN}");
    }
}

/// Partial sum of the Legendre series through `k = k_max`.
pub fn f_series(s: f64, delta: f64, k_max: usize) -> Result<f64> {
    check_delta("f_series", delta)?;
    check_s("f_series", s)?;
    warn_series(delta);
    let c = series_coefficients(delta, k_max);
    let p = legendre_p_all(2 * k_max + 1, s)?;
    Ok(c.iter().enumerate().map(|(k, ck)| ck * p[2 * k + 1]).sum())
}

/// Derivative of the partial sum in `s`.
pub fn f_series_deriv(s: f64, delta: f64, k_max: usize) -> Result<f64> {
    check_delta("f_series_deriv", delta)?;
    check_s("f_series_deriv", s)?;
    warn_series(delta);
    let c = series_coefficients(delta, k_max);
    let dp = legendre_p_deriv_all(2 * k_max + 1, s);
    Ok(c.iter().enumerate().map(|(k, ck)| ck * dp[2 * k + 1]).sum())
}

// g(λ) = λ/√(1+λ²) − √(1+λ²)/(2λ) + 1/(2λ) and its derivative.
fn g_and_dg(lam: Complex64) -> (Complex64, Complex64) {
    let w = (1.0 + lam * lam).sqrt();
    let inv = lam.inv();
    let g = lam / w - w * inv * 0.5 + inv * 0.5;
    let dg = (w * w * w).inv() + inv * inv * 0.5 / w - inv * inv * 0.5;
    (g, dg)
}

// h(ψ) = e^{iψ/2} g(η e^{iψ}) / cos(ψ/2) = (1 + i tan(ψ/2)) g(λ).
fn h(psi: f64, eta: f64) -> Complex64 {
    let lam = Complex64::from_polar(eta, psi);
    let (g, _) = g_and_dg(lam);
    Complex64::new(1.0, (0.5 * psi).tan()) * g
}

fn dh(psi: f64, eta: f64) -> Complex64 {
    let lam = Complex64::from_polar(eta, psi);
    let (g, dg) = g_and_dg(lam);
    let c = (0.5 * psi).cos();
    let u = Complex64::new(1.0, (0.5 * psi).tan());
    let du = Complex64::new(0.0, 0.5 / (c * c));
    du * g + u * dg * Complex64::i() * lam
}

/// Integral representation. The endpoint singularity `1/√(cos ψ − cos ϑ_f)`
/// is removed by `sin(ψ/2) = sin(ϑ_f/2) sin φ`, leaving a smooth integrand on
/// `φ ∈ [0, π/2]`.
pub fn f_integral(s: f64, delta: f64) -> Result<f64> {
    check_delta("f_integral", delta)?;
    check_s("f_integral", s)?;
    if s == 0.0 {
        return Ok(0.0);
    }
    if s < 0.0 {
        return f_integral(-s, delta).map(|v| -v);
    }
    let eta = 1.0 - delta;
    let half = 0.5 * s.acos();
    let sh = half.sin();
    let r = integrate(
        |phi: f64| {
            let psi = 2.0 * (sh * phi.sin()).asin();
            h(psi, eta).re
        },
        0.0,
        FRAC_PI_2,
        INTEGRAL_OPTS,
    )?;
    Ok(4.0 / PI * r.value)
}

/// `dF/ds` from the differentiated integral representation.
pub fn f_integral_deriv(s: f64, delta: f64) -> Result<f64> {
    check_delta("f_integral_deriv", delta)?;
    check_s("f_integral_deriv", s)?;
    let s = s.abs();
    let eta = 1.0 - delta;
    let half = 0.5 * s.acos();
    let sh = half.sin();
    // Re h is even in ψ, so Re h'(ψ)/sin ψ is smooth; freeze the ratio at
    // tiny ψ where it would be 0/0.
    const PSI_FLOOR: f64 = 1e-5;
    let r = integrate(
        |phi: f64| {
            let sp = phi.sin();
            let psi = (2.0 * (sh * sp).asin()).max(PSI_FLOOR);
            dh(psi, eta).re / psi.sin() * sp * sp
        },
        0.0,
        FRAC_PI_2,
        INTEGRAL_OPTS,
    )?;
    Ok(-4.0 / PI * r.value)
}

/// Saturation value `f_δ = F_δ(1)`.
pub fn saturation(delta: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::domain(
            "saturation",
            format!("gap must satisfy 0 <= delta < 1, got {delta}"),
        ));
    }
    let eta = 1.0 - delta;
    Ok((1.0 - (2.0 * delta - delta * delta) / (1.0 + eta * eta).sqrt()) / eta)
}

/// Slope at the origin, `κ_δ = F'_δ(0)`.
pub fn slope_at_zero(delta: f64) -> Result<f64> {
    check_delta("slope_at_zero", delta)?;
    let eta = 1.0 - delta;
    let m = eta * eta;
    let one_minus_m = delta * (2.0 - delta);
    Ok(2.0 / (PI * eta) * ((1.0 + m) / one_minus_m * ellip_e(eta)? - ellip_k(eta)?))
}

/// The small-gap asymptote `(2/π)(1/δ + 2)` as quoted for `κ_δ`.
pub fn slope_asymptote(delta: f64) -> f64 {
    2.0 / PI * (1.0 / delta + 2.0)
}

/// The leading small-gap behaviour `(2/π)/δ`, which `κ_δ` approaches with an
/// `O(δ log δ⁻¹)` remainder.
pub fn slope_leading(delta: f64) -> f64 {
    2.0 / (PI * delta)
}

/// Adjusted-arctan amplitude `A_δ`, the root of `A arctan(κ_δ/A) = f_δ`.
pub fn adjusted_amplitude(delta: f64) -> Result<f64> {
    solve_amplitude(saturation(delta)?, slope_at_zero(delta)?)
}

fn solve_amplitude(f: f64, kappa: f64) -> Result<f64> {
    if kappa <= f {
        return Err(Error::RootSolve(format!(
            "A arctan(κ/A) = f has no root for κ = {kappa} <= f = {f}"
        )));
    }
    let phi = |a: f64| a * (kappa / a).atan() - f;
    let mut lo = 2.0 * f / PI;
    let mut hi = kappa;
    let mut grow = 0;
    while phi(hi) <= 0.0 {
        lo = hi;
        hi *= 2.0;
        grow += 1;
        if grow > 200 {
            return Err(Error::RootSolve("could not bracket A_δ".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `clamp(κ_δ s, −f_δ, f_δ)`.
pub fn f_piecewise_linear(s: f64, delta: f64) -> Result<f64> {
    check_s("f_piecewise_linear", s)?;
    let f = saturation(delta)?;
    Ok((slope_at_zero(delta)? * s).clamp(-f, f))
}

/// `(2/π) f_δ arctan((π/2) κ_δ s / f_δ)`.
pub fn f_arctan(s: f64, delta: f64) -> Result<f64> {
    check_s("f_arctan", s)?;
    let f = saturation(delta)?;
    let kappa = slope_at_zero(delta)?;
    Ok(2.0 / PI * f * (FRAC_PI_2 * kappa * s / f).atan())
}

/// `A_δ arctan(κ_δ s / A_δ)`.
pub fn f_arctan_adjusted(s: f64, delta: f64) -> Result<f64> {
    check_s("f_arctan_adjusted", s)?;
    let kappa = slope_at_zero(delta)?;
    let a = solve_amplitude(saturation(delta)?, kappa)?;
    Ok(a * (kappa * s / a).atan())
}

/// Closed form in complete elliptic integrals of the first and third kind.
/// Refuses `|s| < CLOSED_FORM_S_MIN`, where two large terms nearly cancel.
pub fn f_closed(s: f64, delta: f64) -> Result<f64> {
    check_delta("f_closed", delta)?;
    check_s("f_closed", s)?;
    if s.abs() < CLOSED_FORM_S_MIN {
        return Err(Error::Conditioning {
            s: s.abs(),
            s_min: CLOSED_FORM_S_MIN,
        });
    }
    let eta = 1.0 - delta;
    let st = (1.0 - s * s).max(0.0).sqrt();
    // 1 − sin ϑ_f without cancellation
    let one_minus_st = s * s / (1.0 + st);
    let d2 = delta * delta;
    let denom = 2.0 * eta * (1.0 + st) + d2;
    let kc2 = (2.0 * eta * one_minus_st + d2) / denom;
    let rf = carlson_rf(0.0, kc2, 1.0);
    // Π(ν, k) = R_F + (ν/3) R_J(0, 1−k², 1, 1−ν)
    let nu_p = 2.0 * st / (1.0 + st);
    let pi_p = rf + nu_p / 3.0 * carlson_rj(0.0, kc2, 1.0, one_minus_st / (1.0 + st));
    let nu_m = -2.0 * st / one_minus_st;
    let pi_m = rf + nu_m / 3.0 * carlson_rj(0.0, kc2, 1.0, (1.0 + st) / one_minus_st);
    let bracket = pi_p / (1.0 + st) + pi_m / one_minus_st;
    let gap = delta * (2.0 - delta);
    Ok(s / eta * (1.0 / s.abs() - gap / (PI * denom.sqrt()) * bracket))
}

/// Derivative of the exact curve in `s` (series-free route).
pub fn f_deriv(s: f64, delta: f64) -> Result<f64> {
    f_integral_deriv(s, delta)
}

/// A transfer curve with its method and precomputed constants.
#[derive(Clone, Debug)]
pub struct TransferCurve {
    delta: f64,
    method: Method,
    f_delta: f64,
    kappa_delta: f64,
    delta_width: f64,
    a_delta: f64,
    series_terms: usize,
}

impl TransferCurve {
    pub fn new(delta: f64, method: Method) -> Result<Self> {
        check_delta("TransferCurve::new", delta)?;
        let f_delta = saturation(delta)?;
        let kappa_delta = slope_at_zero(delta)?;
        let a_delta = solve_amplitude(f_delta, kappa_delta)?;
        if method == Method::Series {
            warn_series(delta);
        }
        Ok(Self {
            delta,
            method,
            f_delta,
            kappa_delta,
            delta_width: f_delta / kappa_delta,
            a_delta,
            series_terms: series_terms_for(delta),
        })
    }

    /// Overrides the truncation of the series method.
    pub fn with_series_terms(mut self, k_max: usize) -> Self {
        self.series_terms = k_max;
        self
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn method(&self) -> Method {
        self.method
    }
    pub fn f_delta(&self) -> f64 {
        self.f_delta
    }
    pub fn kappa_delta(&self) -> f64 {
        self.kappa_delta
    }
    pub fn delta_width(&self) -> f64 {
        self.delta_width
    }
    pub fn a_delta(&self) -> f64 {
        self.a_delta
    }
    pub fn series_terms(&self) -> usize {
        self.series_terms
    }

    /// `F_δ(s)` by the selected method.
    pub fn eval(&self, s: f64) -> Result<f64> {
        check_s("TransferCurve::eval", s)?;
        Ok(match self.method {
            Method::Series => {
                let c = series_coefficients(self.delta, self.series_terms);
                let p = legendre_p_all(2 * self.series_terms + 1, s)?;
                c.iter().enumerate().map(|(k, ck)| ck * p[2 * k + 1]).sum()
            }
            Method::Integral => f_integral(s, self.delta)?,
            Method::ClosedForm => f_closed(s, self.delta)?,
            _ => self.eval_approx(s),
        })
    }

    /// Evaluates one of the elementary approximations without validation.
    /// Exact methods fall back to the adjusted arctan.
    #[inline]
    pub fn eval_approx(&self, s: f64) -> f64 {
        match self.method {
            Method::PiecewiseLinear => (self.kappa_delta * s).clamp(-self.f_delta, self.f_delta),
            Method::Arctan => 2.0 / PI * self.f_delta * (FRAC_PI_2 * self.kappa_delta * s / self.f_delta).atan(),
            _ => self.a_delta * (self.kappa_delta * s / self.a_delta).atan(),
        }
    }

    /// `F'_δ(s)` by the selected method. The closed form and the integral
    /// describe the same function and share the integral derivative.
    pub fn deriv(&self, s: f64) -> Result<f64> {
        check_s("TransferCurve::deriv", s)?;
        let k = self.kappa_delta;
        Ok(match self.method {
            Method::Series => {
                let c = series_coefficients(self.delta, self.series_terms);
                let dp = legendre_p_deriv_all(2 * self.series_terms + 1, s);
                c.iter().enumerate().map(|(k, ck)| ck * dp[2 * k + 1]).sum()
            }
            Method::Integral | Method::ClosedForm => f_integral_deriv(s, self.delta)?,
            Method::PiecewiseLinear => {
                if s.abs() <= self.delta_width {
                    k
                } else {
                    0.0
                }
            }
            Method::Arctan => {
                let x = FRAC_PI_2 * k * s / self.f_delta;
                k / (1.0 + x * x)
            }
            Method::ArctanAdjusted => {
                let x = k * s / self.a_delta;
                k / (1.0 + x * x)
            }
        })
    }
}
