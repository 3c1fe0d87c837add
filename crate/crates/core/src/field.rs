//! Exterior Neumann and Dirichlet Green's functions of a sphere and the
//! magnetic field of a single fluxon pinned to its surface. `Φ₀ = 1`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

fn unit(theta: f64, phi: f64) -> Vec3 {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [st * cp, st * sp, ct]
}

/// Rotor and pick-up loop geometry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GyroGeometry {
    r_g: f64,
    loop_radius: f64,
    delta: f64,
}

impl GyroGeometry {
    pub fn new(r_g: f64, loop_radius: f64) -> Result<Self> {
        if !(r_g > 0.0 && loop_radius > r_g && loop_radius.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "geometry needs 0 < r_g < R, got r_g = {r_g}, R = {loop_radius}"
            )));
        }
        Ok(Self {
            r_g,
            loop_radius,
            delta: (loop_radius - r_g) / loop_radius,
        })
    }

    /// Normalized geometry with `R = 1`, `r_g = 1 − δ`.
    pub fn from_delta(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "gap must satisfy 0 < delta < 1, got {delta}"
            )));
        }
        Ok(Self {
            r_g: 1.0 - delta,
            loop_radius: 1.0,
            delta,
        })
    }

    pub fn r_g(&self) -> f64 {
        self.r_g
    }
    pub fn loop_radius(&self) -> f64 {
        self.loop_radius
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// Fluxon position on the rotor surface.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SourcePoint {
    pub theta_f: f64,
    pub phi_f: f64,
}

impl SourcePoint {
    pub fn new(theta_f: f64, phi_f: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta_f) || !phi_f.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "source angles out of range: theta_f = {theta_f}, phi_f = {phi_f}"
            )));
        }
        Ok(Self {
            theta_f,
            phi_f: phi_f.rem_euclid(2.0 * PI),
        })
    }

    pub fn direction(&self) -> Vec3 {
        unit(self.theta_f, self.phi_f)
    }
}

/// Observation point in spherical coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldPoint {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
}

impl FieldPoint {
    pub fn new(r: f64, theta: f64, phi: f64) -> Self {
        Self { r, theta, phi }
    }

    pub fn from_cartesian(x: Vec3) -> Self {
        let r = norm(x);
        let theta = if r == 0.0 {
            0.0
        } else {
            (x[2] / r).clamp(-1.0, 1.0).acos()
        };
        Self {
            r,
            theta,
            phi: x[1].atan2(x[0]).rem_euclid(2.0 * PI),
        }
    }

    pub fn to_cartesian(&self) -> Vec3 {
        scale(unit(self.theta, self.phi), self.r)
    }

    /// Local orthonormal basis `(r̂, θ̂, φ̂)`.
    pub fn basis(&self) -> [Vec3; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [[st * cp, st * sp, ct], [ct * cp, ct * sp, -st], [-sp, cp, 0.0]]
    }
}

/// Cosine of the angle between the observer and source directions.
pub fn cos_gamma(obs: FieldPoint, src: SourcePoint) -> f64 {
    let c = obs.theta.cos() * src.theta_f.cos() + obs.theta.sin() * src.theta_f.sin() * (obs.phi - src.phi_f).cos();
    c.clamp(-1.0, 1.0)
}

/// Partial sum of a Legendre series with a convergence flag.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesSum {
    pub value: f64,
    /// `|last term| / |sum| ≤ 1e-12`.
    pub converged: bool,
}

const SERIES_RATIO: f64 = 1e-12;

fn check_exterior(func: &'static str, r: f64, geom: &GyroGeometry, strict: bool) -> Result<()> {
    let ok = if strict {
        r > geom.r_g
    } else {
        r >= geom.r_g * (1.0 - 1e-12)
    };
    if !ok || !r.is_finite() {
        return Err(Error::domain(
            func,
            format!(
                "observation radius {r} is not exterior to the rotor (r_g = {})",
                geom.r_g
            ),
        ));
    }
    Ok(())
}

fn legendre_sum(func: &'static str, x: f64, q: f64, l_max: usize, coef: impl Fn(usize) -> f64) -> SeriesSum {
    let mut p_prev = 1.0;
    let mut p = x;
    let mut qpow = q;
    let mut sum = coef(0) * qpow;
    let mut last = sum;
    for l in 1..=l_max {
        if l > 1 {
            let n = (l - 1) as f64;
            let next = ((2.0 * n + 1.0) * x * p - n * p_prev) / (n + 1.0);
            p_prev = p;
            p = next;
        }
        qpow *= q;
        last = coef(l) * qpow * p;
        sum += last;
    }
    let converged = last.abs() <= SERIES_RATIO * sum.abs();
    if !converged {
        log::warn!("{func}: series truncated at l = {l_max} before convergence");
    }
    SeriesSum { value: sum, converged }
}

/// Neumann potential as the single Legendre series in `cos γ`.
pub fn psi_series(obs: FieldPoint, src: SourcePoint, geom: &GyroGeometry, l_max: usize) -> Result<SeriesSum> {
    check_exterior("psi_series", obs.r, geom, true)?;
    let a = geom.r_g;
    let mut s = legendre_sum("psi_series", cos_gamma(obs, src), a / obs.r, l_max, |l| {
        (2 * l + 1) as f64 / (l + 1) as f64
    });
    s.value /= 4.0 * PI * a;
    Ok(s)
}

/// Radial field `B_r = −∂Ψ/∂r` from the term-by-term differentiated series.
pub fn br_series(obs: FieldPoint, src: SourcePoint, geom: &GyroGeometry, l_max: usize) -> Result<SeriesSum> {
    check_exterior("br_series", obs.r, geom, true)?;
    let a = geom.r_g;
    let mut s = legendre_sum("br_series", cos_gamma(obs, src), a / obs.r, l_max, |l| {
        (2 * l + 1) as f64
    });
    s.value /= 4.0 * PI * a * obs.r;
    Ok(s)
}

struct Geometry {
    r: Vec3,
    rhat: Vec3,
    rn: f64,
    rf: Vec3,
    a: f64,
    c: f64,
    diff: Vec3,
    d: f64,
}

fn setup(func: &'static str, x: Vec3, src: SourcePoint, geom: &GyroGeometry) -> Result<Geometry> {
    let rn = norm(x);
    check_exterior(func, rn, geom, false)?;
    let a = geom.r_g;
    let n_f = src.direction();
    let rf = scale(n_f, a);
    let rhat = scale(x, 1.0 / rn);
    let diff = sub(x, rf);
    // |r − r_f|² = (r − a)² + r a |r̂ − n_f|², free of cancellation near the source
    let dn = sub(rhat, n_f);
    let d = ((rn - a).powi(2) + rn * a * dot(dn, dn)).sqrt();
    if d == 0.0 || d < 1e-14 * a {
        return Err(Error::singular(func, "observation point coincides with the source"));
    }
    let c = (1.0 - 0.5 * dot(dn, dn)).clamp(-1.0, 1.0);
    Ok(Geometry {
        r: x,
        rhat,
        rn,
        rf,
        a,
        c,
        diff,
        d,
    })
}

// ln(N/D) with N = a² − r·r_f + a d, D = r a − r·r_f.
fn log_ratio(g: &Geometry) -> f64 {
    if g.c >= 0.0 {
        // N/D = r(1 + c)/(d − a + r c), finite on the ray through the source
        (g.rn * (1.0 + g.c) / (g.d - g.a + g.rn * g.c)).ln()
    } else {
        let p = g.rn * g.a * g.c;
        let n = g.a * g.a - p + g.a * g.d;
        let dd = g.rn * g.a * (1.0 - g.c);
        (n / dd).ln()
    }
}

fn grad_log_ratio(g: &Geometry) -> Vec3 {
    let a = g.a;
    let p = dot(g.r, g.rf);
    let rf_a = scale(g.rf, 1.0 / a);
    if g.c >= 0.0 {
        let t1 = scale(add(g.rhat, rf_a), 1.0 / (g.rn + p / a));
        let t2 = scale(add(scale(g.diff, 1.0 / g.d), rf_a), 1.0 / (g.d - a + p / a));
        sub(t1, t2)
    } else {
        let n = a * a - p + a * g.d;
        let dd = g.rn * a * (1.0 - g.c);
        let gn = scale(add(scale(g.rf, -1.0), scale(g.diff, a / g.d)), 1.0 / n);
        let gd = scale(sub(scale(g.rhat, a), g.rf), 1.0 / dd);
        sub(gn, gd)
    }
}

/// Closed-form Neumann potential at a Cartesian point.
pub fn psi_closed_at(x: Vec3, src: SourcePoint, geom: &GyroGeometry) -> Result<f64> {
    let g = setup("psi_closed", x, src, geom)?;
    Ok((1.0 / g.d - log_ratio(&g) / (2.0 * g.a)) / (2.0 * PI))
}

/// Closed-form Neumann potential.
pub fn psi_closed(obs: FieldPoint, src: SourcePoint, geom: &GyroGeometry) -> Result<f64> {
    psi_closed_at(obs.to_cartesian(), src, geom)
}

/// `B = −∇Ψ` in Cartesian components at a Cartesian point.
pub fn b_field_at(x: Vec3, src: SourcePoint, geom: &GyroGeometry) -> Result<Vec3> {
    let g = setup("b_field", x, src, geom)?;
    // −∇(1/d) = (r − r_f)/d³
    let t1 = scale(g.diff, 1.0 / (g.d * g.d * g.d));
    let t2 = scale(grad_log_ratio(&g), 1.0 / (2.0 * g.a));
    Ok(scale(add(t1, t2), 1.0 / (2.0 * PI)))
}

/// `B = −∇Ψ` as spherical components `(B_r, B_θ, B_φ)`.
pub fn b_field(obs: FieldPoint, src: SourcePoint, geom: &GyroGeometry) -> Result<Vec3> {
    let b = b_field_at(obs.to_cartesian(), src, geom)?;
    let [er, et, ep] = obs.basis();
    Ok([dot(b, er), dot(b, et), dot(b, ep)])
}

/// Green's function of the exterior Dirichlet problem.
pub fn greens_dirichlet(obs: FieldPoint, src: SourcePoint, geom: &GyroGeometry) -> Result<f64> {
    let g = setup("greens_dirichlet", obs.to_cartesian(), src, geom)?;
    let a = g.a;
    Ok((g.rn - a) * (g.rn + a) / (4.0 * PI * g.d.powi(3)))
}

/// `B_z` on the loop plane `z = 0` at polar radius `rho` and azimuth `phi`,
/// with the source azimuth rotated to zero and the loop normal along `z`.
pub fn bz_on_loop_plane(rho: f64, phi: f64, src: SourcePoint, geom: &GyroGeometry) -> Result<f64> {
    if !(rho.is_finite() && rho >= 0.0) {
        return Err(Error::domain(
            "bz_on_loop_plane",
            format!("rho must be >= 0, got {rho}"),
        ));
    }
    let cf = src.theta_f.cos();
    if cf.abs() < 1e-15 {
        return Ok(0.0);
    }
    if rho == 0.0 {
        return Err(Error::singular(
            "bz_on_loop_plane",
            "the expression diverges at rho = 0",
        ));
    }
    let a = geom.r_g;
    let st = src.theta_f.sin();
    let sc = st * phi.cos();
    let x2 = a * a - 2.0 * a * rho * sc + rho * rho;
    if x2 <= 1e-28 * a * a {
        return Err(Error::singular(
            "bz_on_loop_plane",
            "evaluation point coincides with the source",
        ));
    }
    let x = x2.sqrt();
    let yp = 1.0 + sc;
    let ym = 1.0 - sc;
    let k = 2.0 * a * a * rho;
    let bracket = 1.0 / (x2 * x) + (rho - a * sc) / (k * x * yp * ym) + sc / (k * yp * ym) - 1.0 / (k * ym);
    Ok(-a * cf / (2.0 * PI) * bracket)
}
