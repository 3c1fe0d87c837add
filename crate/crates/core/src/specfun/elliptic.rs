//! Complete elliptic integrals via Carlson's symmetric forms.
//!
//! All entry points take the modulus `k` (not the parameter `m = k²`):
//!
//! * `K(k) = R_F(0, 1−k², 1)`
//! * `E(k) = R_F(0, 1−k², 1) − (k²/3) R_D(0, 1−k², 1)`
//! * `Π(ν, k) = R_F(0, 1−k², 1) + (ν/3) R_J(0, 1−k², 1, 1−ν)` for `ν < 1`,
//!   and the Cauchy principal value `K(k) − Π(k²/ν, k)` for `ν > 1`.

use crate::error::{Error, Result};

const TOL: f64 = 1e-16;

/// A validated elliptic modulus `0 ≤ k < 1`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct EllipticModulus(f64);

impl EllipticModulus {
    pub fn new(k: f64) -> Result<Self> {
        if k.is_nan() || !(0.0..1.0).contains(&k) {
            return Err(Error::domain(
                "EllipticModulus",
                format!("modulus must satisfy 0 <= k < 1, got {k}"),
            ));
        }
        Ok(Self(k))
    }

    pub fn k(self) -> f64 {
        self.0
    }

    /// Complementary parameter `1 − k²`, formed as `(1−k)(1+k)`.
    pub fn complementary_parameter(self) -> f64 {
        (1.0 - self.0) * (1.0 + self.0)
    }
}

/// Carlson's `R_F(x, y, z)`; at most one argument may be zero.
pub fn carlson_rf(x: f64, y: f64, z: f64) -> f64 {
    let (mut x, mut y, mut z) = (x, y, z);
    let a0 = (x + y + z) / 3.0;
    let q = (3.0 * TOL).powf(-1.0 / 6.0) * (a0 - x).abs().max((a0 - y).abs()).max((a0 - z).abs());
    let (x0, y0) = (x, y);
    let mut a = a0;
    let mut pow4 = 1.0;
    while pow4 * q >= a.abs() {
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lambda = sx * sy + sy * sz + sz * sx;
        x = 0.25 * (x + lambda);
        y = 0.25 * (y + lambda);
        z = 0.25 * (z + lambda);
        a = 0.25 * (a + lambda);
        pow4 *= 0.25;
    }
    let xx = (a0 - x0) * pow4 / a;
    let yy = (a0 - y0) * pow4 / a;
    let zz = -xx - yy;
    let e2 = xx * yy - zz * zz;
    let e3 = xx * yy * zz;
    (1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0) / a.sqrt()
}

/// Carlson's `R_D(x, y, z)`.
pub fn carlson_rd(x: f64, y: f64, z: f64) -> f64 {
    let (mut x, mut y, mut z) = (x, y, z);
    let a0 = (x + y + 3.0 * z) / 5.0;
    let q = (0.25 * TOL).powf(-1.0 / 6.0) * (a0 - x).abs().max((a0 - y).abs()).max((a0 - z).abs());
    let (x0, y0) = (x, y);
    let mut a = a0;
    let mut pow4 = 1.0;
    let mut sum = 0.0;
    while pow4 * q >= a.abs() {
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lambda = sx * sy + sy * sz + sz * sx;
        sum += pow4 / (sz * (z + lambda));
        x = 0.25 * (x + lambda);
        y = 0.25 * (y + lambda);
        z = 0.25 * (z + lambda);
        a = 0.25 * (a + lambda);
        pow4 *= 0.25;
    }
    let xx = (a0 - x0) * pow4 / a;
    let yy = (a0 - y0) * pow4 / a;
    let zz = -(xx + yy) / 3.0;
    let xy = xx * yy;
    let z2 = zz * zz;
    let e2 = xy - 6.0 * z2;
    let e3 = (3.0 * xy - 8.0 * z2) * zz;
    let e4 = 3.0 * (xy - z2) * z2;
    let e5 = xy * z2 * zz;
    let series = 1.0 - 3.0 * e2 / 14.0 + e3 / 6.0 + 9.0 * e2 * e2 / 88.0 - 3.0 * e4 / 22.0 - 9.0 * e2 * e3 / 52.0
        + 3.0 * e5 / 26.0;
    pow4 * series / (a * a.sqrt()) + 3.0 * sum
}

/// `R_C(1, 1 + e)` for `e > −1`.
fn rc_one(e: f64) -> f64 {
    if e.abs() < 1e-4 {
        1.0 - e / 3.0 + e * e / 5.0 - e * e * e / 7.0
    } else if e > 0.0 {
        let s = e.sqrt();
        s.atan() / s
    } else {
        let s = (-e).sqrt();
        s.atanh() / s
    }
}

/// Carlson's `R_J(x, y, z, p)` for `p > 0`.
pub fn carlson_rj(x: f64, y: f64, z: f64, p: f64) -> f64 {
    let (mut x, mut y, mut z, mut p) = (x, y, z, p);
    let a0 = (x + y + z + 2.0 * p) / 5.0;
    let delta = (p - x) * (p - y) * (p - z);
    let q = (0.25 * TOL).powf(-1.0 / 6.0)
        * (a0 - x)
            .abs()
            .max((a0 - y).abs())
            .max((a0 - z).abs())
            .max((a0 - p).abs());
    let (x0, y0, z0) = (x, y, z);
    let mut a = a0;
    let mut pow4 = 1.0;
    let mut sum = 0.0;
    while pow4 * q >= a.abs() {
        let (sx, sy, sz, sp) = (x.sqrt(), y.sqrt(), z.sqrt(), p.sqrt());
        let lambda = sx * sy + sy * sz + sz * sx;
        let d = (sp + sx) * (sp + sy) * (sp + sz);
        let e = pow4 * pow4 * pow4 * delta / (d * d);
        sum += pow4 / d * rc_one(e);
        x = 0.25 * (x + lambda);
        y = 0.25 * (y + lambda);
        z = 0.25 * (z + lambda);
        p = 0.25 * (p + lambda);
        a = 0.25 * (a + lambda);
        pow4 *= 0.25;
    }
    let xx = (a0 - x0) * pow4 / a;
    let yy = (a0 - y0) * pow4 / a;
    let zz = (a0 - z0) * pow4 / a;
    let pp = -(xx + yy + zz) / 2.0;
    let e2 = xx * yy + xx * zz + yy * zz - 3.0 * pp * pp;
    let e3 = xx * yy * zz + 2.0 * e2 * pp + 4.0 * pp * pp * pp;
    let e4 = (2.0 * xx * yy * zz + e2 * pp + 3.0 * pp * pp * pp) * pp;
    let e5 = xx * yy * zz * pp * pp;
    let series = 1.0 - 3.0 * e2 / 14.0 + e3 / 6.0 + 9.0 * e2 * e2 / 88.0 - 3.0 * e4 / 22.0 - 9.0 * e2 * e3 / 52.0
        + 3.0 * e5 / 26.0;
    pow4 * series / (a * a.sqrt()) + 6.0 * sum
}

/// Complete elliptic integral of the first kind `K(k)`.
pub fn ellip_k(k: f64) -> Result<f64> {
    let m = EllipticModulus::new(k)?;
    Ok(carlson_rf(0.0, m.complementary_parameter(), 1.0))
}

/// Complete elliptic integral of the second kind `E(k)`; accepts `k = 1`.
pub fn ellip_e(k: f64) -> Result<f64> {
    if k == 1.0 {
        return Ok(1.0);
    }
    let m = EllipticModulus::new(k)?;
    let kc2 = m.complementary_parameter();
    Ok(carlson_rf(0.0, kc2, 1.0) - k * k / 3.0 * carlson_rd(0.0, kc2, 1.0))
}

/// Complete elliptic integral of the third kind
/// `Π(ν, k) = ∫₀^{π/2} dψ / ((1 − ν sin²ψ) √(1 − k² sin²ψ))`,
/// as a Cauchy principal value when `ν > 1`.
pub fn ellip_pi(nu: f64, k: f64) -> Result<f64> {
    let m = EllipticModulus::new(k)?;
    if !nu.is_finite() {
        return Err(Error::domain(
            "ellip_pi",
            format!("characteristic must be finite, got {nu}"),
        ));
    }
    if nu == 1.0 {
        return Err(Error::singular("ellip_pi", "characteristic ν = 1 diverges"));
    }
    let kc2 = m.complementary_parameter();
    if nu < 1.0 {
        return Ok(carlson_rf(0.0, kc2, 1.0) + nu / 3.0 * carlson_rj(0.0, kc2, 1.0, 1.0 - nu));
    }
    let k2 = k * k;
    let conj = k2 / nu;
    if conj == 1.0 {
        return Err(Error::singular("ellip_pi", "principal value undefined for k = 1"));
    }
    Ok(carlson_rf(0.0, kc2, 1.0) - ellip_pi(conj, k)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::quad;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn k_oracle(k: f64) -> f64 {
        quad(
            |t: f64| 1.0 / (1.0 - k * k * t.sin().powi(2)).sqrt(),
            0.0,
            FRAC_PI_2,
            1e-15,
            1e-15,
        )
        .unwrap()
    }

    fn e_oracle(k: f64) -> f64 {
        quad(
            |t: f64| (1.0 - k * k * t.sin().powi(2)).sqrt(),
            0.0,
            FRAC_PI_2,
            1e-15,
            1e-15,
        )
        .unwrap()
    }

    fn pi_oracle(nu: f64, k: f64) -> f64 {
        quad(
            |t: f64| {
                let s2 = t.sin().powi(2);
                1.0 / ((1.0 - nu * s2) * (1.0 - k * k * s2).sqrt())
            },
            0.0,
            FRAC_PI_2,
            1e-15,
            1e-15,
        )
        .unwrap()
    }

    // Arithmetic–geometric mean route, independent of Carlson's forms.
    fn k_agm(k: f64) -> f64 {
        let (mut a, mut b) = (1.0f64, (1.0 - k * k).sqrt());
        for _ in 0..40 {
            let an = 0.5 * (a + b);
            b = (a * b).sqrt();
            a = an;
        }
        PI / (2.0 * a)
    }

    #[test]
    fn degenerate_modulus() {
        assert!((ellip_k(0.0).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!((ellip_e(0.0).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(ellip_e(1.0).unwrap(), 1.0);
    }

    #[test]
    fn against_quadrature() {
        for &k in &[0.1, 0.5, 0.8, 0.95, 0.975] {
            let kv = ellip_k(k).unwrap();
            let ev = ellip_e(k).unwrap();
            assert!((kv - k_oracle(k)).abs() < 1e-10 * kv, "K({k})");
            assert!((ev - e_oracle(k)).abs() < 1e-10 * ev, "E({k})");
            assert!((kv - k_agm(k)).abs() < 1e-13 * kv, "K({k}) agm");
        }
        for &k in &[0.99, 0.999_9] {
            let kv = ellip_k(k).unwrap();
            assert!((kv - k_agm(k)).abs() < 1e-12 * kv);
        }
    }

    #[test]
    fn third_kind() {
        for &k in &[0.0, 0.3, 0.6, 0.9] {
            assert!((ellip_pi(0.0, k).unwrap() - ellip_k(k).unwrap()).abs() < 1e-14);
        }
        for &nu in &[-3.0, -0.5, 0.2, 0.9] {
            let expect = FRAC_PI_2 / (1.0f64 - nu).sqrt();
            assert!((ellip_pi(nu, 0.0).unwrap() - expect).abs() < 1e-13);
        }
        let v = ellip_pi(-0.8, 0.6).unwrap();
        assert!((v - pi_oracle(-0.8, 0.6)).abs() < 1e-10);
        for &(nu, k) in &[(-12.0, 0.95), (0.5, 0.7), (0.95, 0.2), (-100.0, 0.99)] {
            let v = ellip_pi(nu, k).unwrap();
            assert!((v - pi_oracle(nu, k)).abs() < 1e-10 * v.abs(), "Π({nu},{k})");
        }
    }

    #[test]
    fn principal_value() {
        // PV of the defining integral, computed by subtracting the pole.
        let (nu, k): (f64, f64) = (3.0, 0.6);
        let t0 = (1.0 / nu.sqrt()).asin();
        // 1/(1 − ν sin²t) has residue-like behaviour −1/(ν sin 2t0 (t − t0)).
        let c = -1.0 / (nu * (2.0 * t0).sin());
        let g = |t: f64| (1.0 - k * k * t.sin().powi(2)).sqrt().recip();
        let regular = quad(
            |t: f64| {
                let s2 = t.sin().powi(2);
                let f = g(t) / (1.0 - nu * s2);
                if (t - t0).abs() < 1e-9 {
                    0.0
                } else {
                    f - c * g(t0) / (t - t0)
                }
            },
            0.0,
            FRAC_PI_2,
            1e-13,
            1e-13,
        )
        .unwrap();
        let pv = regular + c * g(t0) * ((FRAC_PI_2 - t0) / t0).ln();
        let v = ellip_pi(nu, k).unwrap();
        assert!((v - pv).abs() < 1e-8, "{v} vs {pv}");
    }

    #[test]
    fn errors() {
        assert!(ellip_k(1.0).is_err());
        assert!(ellip_k(f64::NAN).is_err());
        assert!(ellip_e(1.1).is_err());
        assert!(ellip_pi(1.0, 0.5).is_err());
        assert!(ellip_pi(0.5, 1.0).is_err());
    }

    #[test]
    fn ordering_and_monotonicity() {
        let mut prev_k = ellip_k(0.0).unwrap();
        let mut prev_e = ellip_e(0.0).unwrap();
        for i in 1..1000 {
            let k = i as f64 / 1000.0;
            let kv = ellip_k(k).unwrap();
            let ev = ellip_e(k).unwrap();
            assert!(ev <= kv);
            assert!(kv > prev_k);
            assert!(ev < prev_e);
            prev_k = kv;
            prev_e = ev;
        }
    }
}
