//! Torque-free symmetric-top kinematics of the rotor and the rolling pick-up
//! loop, expressed in the angular-momentum frame `{x_L, y_L, z_L}`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::Vec3;

/// GP-B spin frequency, Hz.
pub const GPB_SPIN_HZ: f64 = 100.0;
/// GP-B roll period, s.
pub const GPB_ROLL_PERIOD: f64 = 180.0;
/// GP-B polhode period, s (43.6 min).
pub const GPB_POLHODE_PERIOD: f64 = 2616.0;
/// Default angle between `z_L` and the body symmetry axis.
pub const DEFAULT_GAMMA_B: f64 = 0.5;

/// Kinematic parameters of the rotor and the spacecraft roll.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotorDynamics {
    /// Spin angular frequency `L/I`, rad/s.
    pub omega_s: f64,
    /// Roll angular frequency, rad/s.
    pub omega_r: f64,
    /// Signed `ΔI/I`.
    pub inertia_ratio: f64,
    pub gamma_b: f64,
    /// Roll axis to loop plane misalignment.
    pub alpha: f64,
    /// Roll axis to angular momentum misalignment.
    pub beta0: f64,
    pub theta_s0: f64,
    pub theta_p0: f64,
    pub theta_r0: f64,
    pub omega_p_override: Option<f64>,
}

impl Default for RotorDynamics {
    fn default() -> Self {
        Self::gpb()
    }
}

impl RotorDynamics {
    /// GP-B parameters: 100 Hz spin, 3 min roll, 43.6 min polhode period,
    /// `α = 1e-5`, `β₀ = 5e-5`.
    pub fn gpb() -> Self {
        let omega_s = 2.0 * PI * GPB_SPIN_HZ;
        let omega_p = 2.0 * PI / GPB_POLHODE_PERIOD;
        Self {
            omega_s,
            omega_r: 2.0 * PI / GPB_ROLL_PERIOD,
            inertia_ratio: omega_p / (omega_s * DEFAULT_GAMMA_B.cos()),
            gamma_b: DEFAULT_GAMMA_B,
            alpha: 1e-5,
            beta0: 5e-5,
            theta_s0: 0.0,
            theta_p0: 0.0,
            theta_r0: 0.0,
            omega_p_override: None,
        }
    }

    /// Perfectly spherical rotor with aligned axes.
    pub fn spherical(omega_s: f64, omega_r: f64) -> Self {
        Self {
            omega_s,
            omega_r,
            inertia_ratio: 0.0,
            gamma_b: 0.0,
            alpha: 0.0,
            beta0: 0.0,
            theta_s0: 0.0,
            theta_p0: 0.0,
            theta_r0: 0.0,
            omega_p_override: None,
        }
    }

    /// Sets `ΔI/I` so that the polhode period equals `period`.
    pub fn with_polhode_period(mut self, period: f64) -> Self {
        self.inertia_ratio = 2.0 * PI / (period * self.omega_s * self.gamma_b.cos());
        self
    }

    fn derived_omega_p(&self) -> f64 {
        self.omega_s * self.inertia_ratio.abs() * self.gamma_b.cos()
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.omega_s,
            self.omega_r,
            self.inertia_ratio,
            self.gamma_b,
            self.alpha,
            self.beta0,
            self.theta_s0,
            self.theta_p0,
            self.theta_r0,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter(
                "rotor dynamics contain a non-finite value".into(),
            ));
        }
        if self.omega_s <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "omega_s must be > 0, got {}",
                self.omega_s
            )));
        }
        if !(0.0..=PI).contains(&self.gamma_b) {
            return Err(Error::InvalidParameter(format!(
                "gamma_B must lie in [0, π], got {}",
                self.gamma_b
            )));
        }
        if self.alpha < 0.0 || self.beta0 < 0.0 {
            return Err(Error::InvalidParameter(
                "misalignments alpha, beta0 must be >= 0".into(),
            ));
        }
        if self.inertia_ratio.abs() > 0.01 {
            log::warn!(
                "|ΔI/I| = {} is not small; the symmetric-top model may not apply",
                self.inertia_ratio.abs()
            );
        }
        if let Some(wp) = self.omega_p_override {
            if !wp.is_finite() {
                return Err(Error::InvalidParameter("omega_p override must be finite".into()));
            }
            let derived = self.derived_omega_p();
            if self.inertia_ratio != 0.0 && (wp - derived).abs() > 1e-9 * derived.abs().max(wp.abs()) {
                return Err(Error::InvalidParameter(format!(
                    "omega_p override {wp} conflicts with ω_s|ΔI/I|cos γ_B = {derived}"
                )));
            }
        }
        Ok(())
    }

    /// Polhode frequency `ω_s |ΔI/I| cos γ_B`, or the override.
    pub fn omega_p(&self) -> f64 {
        self.omega_p_override.unwrap_or_else(|| self.derived_omega_p())
    }

    /// Body rotation rate about the symmetry axis, `ω_s cos γ_B / (1 + ΔI/I)`.
    /// Reported only; the signal path does not use it.
    pub fn omega_rot(&self) -> f64 {
        self.omega_s * self.gamma_b.cos() / (1.0 + self.inertia_ratio)
    }

    /// Unwrapped spin, polhode and roll phases.
    pub fn phases(&self, t: f64) -> Phases {
        Phases {
            theta_s: self.omega_s * t + self.theta_s0,
            theta_p: self.omega_p() * t + self.theta_p0,
            theta_r: self.omega_r * t + self.theta_r0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Phases {
    pub theta_s: f64,
    pub theta_p: f64,
    pub theta_r: f64,
}

/// A fluxon (`polarity = +1`) or antifluxon (`−1`) at body angles `(ξ, η)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fluxon {
    pub xi: f64,
    pub eta: f64,
    pub polarity: i8,
}

impl Fluxon {
    pub fn new(xi: f64, eta: f64, polarity: i8) -> Result<Self> {
        if !(0.0..=PI).contains(&xi) {
            return Err(Error::InvalidParameter(format!("xi must lie in [0, π], got {xi}")));
        }
        if !eta.is_finite() {
            return Err(Error::InvalidParameter(format!("eta must be finite, got {eta}")));
        }
        if polarity != 1 && polarity != -1 {
            return Err(Error::InvalidParameter(format!("polarity must be ±1, got {polarity}")));
        }
        Ok(Self {
            xi,
            eta: eta.rem_euclid(2.0 * PI),
            polarity,
        })
    }

    pub fn sign(&self) -> f64 {
        f64::from(self.polarity)
    }

    pub(crate) fn trig(&self) -> FluxonTrig {
        let (sx, cx) = self.xi.sin_cos();
        let (se, ce) = self.eta.sin_cos();
        FluxonTrig { sx, cx, se, ce }
    }
}

/// Cached sines and cosines of a fluxon's body angles.
#[derive(Clone, Copy, Debug)]
pub(crate) struct FluxonTrig {
    sx: f64,
    cx: f64,
    se: f64,
    ce: f64,
}

/// Orthonormal body frame in L-coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BodyFrame {
    pub x_b: Vec3,
    pub y_b: Vec3,
    pub z_b: Vec3,
}

/// Everything about the rotor and loop orientation at one instant that is
/// shared by all fluxons.
#[derive(Clone, Copy, Debug)]
pub(crate) struct KinematicState {
    cg: f64,
    sg: f64,
    cs: f64,
    ss: f64,
    cp: f64,
    sp: f64,
    z: Vec3,
}

impl KinematicState {
    pub(crate) fn new(dynamics: &RotorDynamics, t: f64) -> Self {
        let ph = dynamics.phases(t);
        let (sg, cg) = dynamics.gamma_b.sin_cos();
        let (ss, cs) = ph.theta_s.sin_cos();
        let (sp, cp) = ph.theta_p.sin_cos();
        Self {
            cg,
            sg,
            cs,
            ss,
            cp,
            sp,
            z: normal_at(dynamics, ph.theta_r),
        }
    }

    fn frame(&self) -> BodyFrame {
        let Self {
            cg, sg, cs, ss, cp, sp, ..
        } = *self;
        BodyFrame {
            x_b: [cg * cs * sp + ss * cp, cg * ss * sp - cs * cp, -sg * sp],
            y_b: [cg * cs * cp - ss * sp, cg * ss * cp + cs * sp, -sg * cp],
            z_b: [sg * cs, sg * ss, cg],
        }
    }

    #[inline]
    fn direction(&self, f: &FluxonTrig) -> Vec3 {
        // sin(θ_p + η), cos(θ_p + η)
        let s = self.sp * f.ce + self.cp * f.se;
        let c = self.cp * f.ce - self.sp * f.se;
        let Self { cg, sg, cs, ss, .. } = *self;
        [
            f.sx * (cg * cs * s + ss * c) + f.cx * sg * cs,
            f.sx * (cg * ss * s - cs * c) + f.cx * sg * ss,
            -f.sx * sg * s + f.cx * cg,
        ]
    }

    #[inline]
    pub(crate) fn cos_theta(&self, f: &FluxonTrig) -> f64 {
        let e = self.direction(f);
        (e[0] * self.z[0] + e[1] * self.z[1] + e[2] * self.z[2]).clamp(-1.0, 1.0)
    }
}

fn normal_at(dynamics: &RotorDynamics, theta_r: f64) -> Vec3 {
    let (sa, ca) = dynamics.alpha.sin_cos();
    let (sb, cb) = dynamics.beta0.sin_cos();
    let (sr, cr) = theta_r.sin_cos();
    // x_r = x_L, y_r = (0, cos β₀, sin β₀), z_r = (0, −sin β₀, cos β₀)
    [ca * cr, ca * sr * cb - sa * sb, ca * sr * sb + sa * cb]
}

/// Body frame `(x_B, y_B, z_B)` at time `t`.
pub fn body_frame(dynamics: &RotorDynamics, t: f64) -> BodyFrame {
    KinematicState::new(dynamics, t).frame()
}

/// Unit vector toward the fluxon, `e_f = cos ξ z_B + sin ξ (cos η x_B + sin η y_B)`.
pub fn fluxon_direction(fluxon: &Fluxon, dynamics: &RotorDynamics, t: f64) -> Vec3 {
    KinematicState::new(dynamics, t).direction(&fluxon.trig())
}

/// Pick-up loop normal `z(t) = sin α z_r + cos α (cos θ_r x_r + sin θ_r y_r)`.
pub fn loop_normal(dynamics: &RotorDynamics, t: f64) -> Vec3 {
    normal_at(dynamics, dynamics.phases(t).theta_r)
}

/// `cos ϑ_f(t) = e_f(t)·z(t)`.
pub fn cos_theta_exact(fluxon: &Fluxon, dynamics: &RotorDynamics, t: f64) -> f64 {
    KinematicState::new(dynamics, t).cos_theta(&fluxon.trig())
}

/// Carrier amplitude, carrier phase offset and axial amplitude at slow phase `τ = ω_p t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CarrierAmplitudes {
    pub a_s_minus_r: f64,
    pub q_s_minus_r: f64,
    pub a: f64,
}

/// `a_{s−r}`, `q_{s−r}` and `a` at slow phase `tau = ω_p t`.
pub fn slow_amplitudes(fluxon: &Fluxon, dynamics: &RotorDynamics, tau: f64) -> CarrierAmplitudes {
    let (sx, cx) = fluxon.xi.sin_cos();
    let (sg, cg) = dynamics.gamma_b.sin_cos();
    let (s, c) = (tau + dynamics.theta_p0 + fluxon.eta).sin_cos();
    let p = cx * sg + sx * cg * s;
    let q = sx * c;
    CarrierAmplitudes {
        a_s_minus_r: p.hypot(q),
        q_s_minus_r: p.atan2(q),
        a: cx * cg - sx * sg * s,
    }
}

/// First order in `α`, `β₀`:
/// `a_{s−r} sin(θ_s − θ_r + q_{s−r}) + a (β₀ sin θ_r + α)`.
pub fn cos_theta_first_order(fluxon: &Fluxon, dynamics: &RotorDynamics, t: f64) -> f64 {
    let ph = dynamics.phases(t);
    let amp = slow_amplitudes(fluxon, dynamics, dynamics.omega_p() * t);
    amp.a_s_minus_r * (ph.theta_s - ph.theta_r + amp.q_s_minus_r).sin()
        + amp.a * (dynamics.beta0 * ph.theta_r.sin() + dynamics.alpha)
}
