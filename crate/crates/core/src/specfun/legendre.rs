//! Legendre polynomials and associated Legendre functions of the first kind.
//!
//! Associated functions carry no Condon–Shortley phase:
//! `P_l^m(x) = (1 - x²)^{m/2} d^m P_l / dx^m`.

use crate::error::{Error, Result};

fn check_x(func: &'static str, x: f64) -> Result<()> {
    if !x.is_finite() || x.abs() > 1.0 {
        return Err(Error::domain(func, format!("|x| must be <= 1, got {x}")));
    }
    Ok(())
}

/// `P_l(x)` by the three-term recurrence.
pub fn legendre_p(l: usize, x: f64) -> Result<f64> {
    check_x("legendre_p", x)?;
    Ok(legendre_p_unchecked(l, x))
}

pub(crate) fn legendre_p_unchecked(l: usize, x: f64) -> f64 {
    if x == 1.0 {
        return 1.0;
    }
    if x == -1.0 {
        return if l.is_multiple_of(2) { 1.0 } else { -1.0 };
    }
    let mut p_prev = 1.0;
    if l == 0 {
        return p_prev;
    }
    let mut p = x;
    for n in 1..l {
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0) * x * p - nf * p_prev) / (nf + 1.0);
        p_prev = p;
        p = next;
    }
    p
}

/// All of `P_0(x) ..= P_{l_max}(x)` in one recurrence pass.
pub fn legendre_p_all(l_max: usize, x: f64) -> Result<Vec<f64>> {
    check_x("legendre_p_all", x)?;
    let mut out = Vec::with_capacity(l_max + 1);
    out.push(1.0);
    if l_max == 0 {
        return Ok(out);
    }
    out.push(x);
    for n in 1..l_max {
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0) * x * out[n] - nf * out[n - 1]) / (nf + 1.0);
        out.push(next);
    }
    if x.abs() == 1.0 {
        for (l, v) in out.iter_mut().enumerate() {
            *v = if x > 0.0 || l % 2 == 0 { 1.0 } else { -1.0 };
        }
    }
    Ok(out)
}

/// `dP_l/dx`, via `P'_{n+1} = P'_{n-1} + (2n+1) P_n`, which stays accurate
/// at the endpoints where the usual `(x² − 1)` form degenerates.
pub fn legendre_p_deriv(l: usize, x: f64) -> Result<f64> {
    check_x("legendre_p_deriv", x)?;
    Ok(legendre_p_deriv_all(l, x).pop().unwrap_or(0.0))
}

/// `P'_0(x) ..= P'_{l_max}(x)`.
pub fn legendre_p_deriv_all(l_max: usize, x: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(l_max + 1);
    let mut dp = Vec::with_capacity(l_max + 1);
    p.push(1.0);
    dp.push(0.0);
    if l_max == 0 {
        return dp;
    }
    p.push(x);
    dp.push(1.0);
    for n in 1..l_max {
        let nf = n as f64;
        p.push(((2.0 * nf + 1.0) * x * p[n] - nf * p[n - 1]) / (nf + 1.0));
        dp.push(dp[n - 1] + (2.0 * nf + 1.0) * p[n]);
    }
    dp
}

/// Associated Legendre function `P_l^m(x)` without the Condon–Shortley phase.
pub fn legendre_p_assoc(l: usize, m: usize, x: f64) -> Result<f64> {
    check_x("legendre_p_assoc", x)?;
    if m > l {
        return Err(Error::domain(
            "legendre_p_assoc",
            format!("order m = {m} exceeds degree l = {l}"),
        ));
    }
    // P_m^m = (2m-1)!! (1-x²)^{m/2}
    let somx2 = ((1.0 - x) * (1.0 + x)).sqrt();
    let mut pmm = 1.0;
    let mut fact = 1.0;
    for _ in 0..m {
        pmm *= fact * somx2;
        fact += 2.0;
    }
    if l == m {
        return Ok(pmm);
    }
    let mut pmm1 = x * (2 * m + 1) as f64 * pmm;
    if l == m + 1 {
        return Ok(pmm1);
    }
    for n in (m + 1)..l {
        let nf = n as f64;
        let mf = m as f64;
        let next = ((2.0 * nf + 1.0) * x * pmm1 - (nf + mf) * pmm) / (nf - mf + 1.0);
        pmm = pmm1;
        pmm1 = next;
    }
    Ok(pmm1)
}

/// `P_l(0)`: zero for odd `l`, `(−1)^k (2k−1)!!/(2k)!!` for `l = 2k`.
pub fn legendre_p_at_zero(l: usize) -> f64 {
    if l % 2 == 1 {
        return 0.0;
    }
    let k = l / 2;
    let mut v = 1.0;
    for j in 1..=k {
        v *= -((2 * j - 1) as f64) / ((2 * j) as f64);
    }
    v
}

/// `P_l(1) = 1`.
pub fn legendre_p_at_one(_l: usize) -> f64 {
    1.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::quad;
    use std::f64::consts::PI;

    // Γ(k + 1/2) / (√π k!) = (2k)! / (4^k (k!)²), evaluated through lgamma-free
    // products of independent factors.
    fn p2k_zero_gamma(k: usize) -> f64 {
        let mut num = 1.0;
        for j in 1..=2 * k {
            num *= j as f64;
        }
        let mut den = 1.0;
        for j in 1..=k {
            den *= (j * j) as f64 * 4.0;
        }
        let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        sign * num / den
    }

    #[test]
    fn trivial_values() {
        assert_eq!(legendre_p(0, 0.37).unwrap(), 1.0);
        assert!((legendre_p(2, 0.0).unwrap() + 0.5).abs() < 1e-15);
        assert_eq!(legendre_p(7, 1.0).unwrap(), 1.0);
        assert_eq!(legendre_p(7, -1.0).unwrap(), -1.0);
    }

    #[test]
    fn even_values_at_zero() {
        for k in 0..=10 {
            let v = legendre_p(2 * k, 0.0).unwrap();
            let expect = p2k_zero_gamma(k);
            assert!((v - expect).abs() < 1e-14, "k={k}: {v} vs {expect}");
            assert!((legendre_p_at_zero(2 * k) - expect).abs() < 1e-15);
            assert_eq!(legendre_p(2 * k + 1, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn domain_errors() {
        assert!(legendre_p(3, 1.0001).is_err());
        assert!(legendre_p(3, f64::NAN).is_err());
        assert!(legendre_p_assoc(2, 3, 0.1).is_err());
        assert!(legendre_p_deriv(2, -1.5).is_err());
    }

    #[test]
    fn derivative_values() {
        assert!((legendre_p_deriv(1, 0.9).unwrap() - 1.0).abs() < 1e-15);
        for k in 0..=6 {
            let d = legendre_p_deriv(2 * k + 1, 0.0).unwrap();
            let expect = (2 * k + 1) as f64 * legendre_p_at_zero(2 * k);
            assert!((d - expect).abs() < 1e-13, "k={k}");
        }
        let h = 1e-6;
        let fd = (legendre_p(5, 0.3 + h).unwrap() - legendre_p(5, 0.3 - h).unwrap()) / (2.0 * h);
        assert!((legendre_p_deriv(5, 0.3).unwrap() - fd).abs() < 1e-8);
        // endpoint: P'_l(1) = l(l+1)/2
        assert!((legendre_p_deriv(10, 1.0).unwrap() - 55.0).abs() < 1e-12);
        assert!((legendre_p_deriv(10, -1.0).unwrap() + 55.0).abs() < 1e-12);
    }

    #[test]
    fn recurrence_residual() {
        for i in 0..=40 {
            let x = -1.0 + 2.0 * i as f64 / 40.0;
            let p = legendre_p_all(201, x).unwrap();
            for l in 1..=200 {
                let lf = l as f64;
                let r = (lf + 1.0) * p[l + 1] - (2.0 * lf + 1.0) * x * p[l] + lf * p[l - 1];
                assert!(r.abs() < 1e-12, "l={l} x={x} r={r}");
            }
            for (l, v) in p.iter().enumerate().take(60) {
                assert!((v - legendre_p(l, x).unwrap()).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn orthogonality() {
        for l in 0..=12 {
            for m in 0..=12 {
                let v = quad(
                    |x| legendre_p_unchecked(l, x) * legendre_p_unchecked(m, x),
                    -1.0,
                    1.0,
                    1e-13,
                    1e-13,
                )
                .unwrap();
                let expect = if l == m { 2.0 / (2.0 * l as f64 + 1.0) } else { 0.0 };
                assert!((v - expect).abs() < 1e-9, "l={l} m={m}");
            }
        }
    }

    #[test]
    fn derivative_identity() {
        // P_l = (P'_{l+1} − P'_{l−1}) / (2l+1)
        for i in 0..=20 {
            let x = -1.0 + 2.0 * i as f64 / 20.0;
            let dp = legendre_p_deriv_all(51, x);
            for l in 1..=50 {
                let lhs = legendre_p(l, x).unwrap();
                let rhs = (dp[l + 1] - dp[l - 1]) / (2.0 * l as f64 + 1.0);
                assert!((lhs - rhs).abs() < 1e-10, "l={l} x={x}");
            }
        }
    }

    #[test]
    fn assoc_values() {
        assert!((legendre_p_assoc(1, 1, 0.0).unwrap() - 1.0).abs() < 1e-15);
        let x: f64 = 0.3;
        // P_2^1 = 3x√(1−x²), P_2^2 = 3(1−x²), P_3^2 = 15x(1−x²)
        let s = (1.0 - x * x).sqrt();
        assert!((legendre_p_assoc(2, 1, x).unwrap() - 3.0 * x * s).abs() < 1e-14);
        assert!((legendre_p_assoc(2, 2, x).unwrap() - 3.0 * (1.0 - x * x)).abs() < 1e-14);
        assert!((legendre_p_assoc(3, 2, x).unwrap() - 15.0 * x * (1.0 - x * x)).abs() < 1e-13);
        for l in 0..10 {
            assert!((legendre_p_assoc(l, 0, x).unwrap() - legendre_p(l, x).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn addition_theorem() {
        // P_l(cos γ) = P_l(cos θ)P_l(cos θ') + 2 Σ_{m≥1} (l−m)!/(l+m)! P_l^m P_l^m cos mΔφ
        let mut state = 0x2545_f491_4f6c_dd1du64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..50 {
            let th = PI * next();
            let thf = PI * next();
            let dphi = 2.0 * PI * next();
            let cg = th.cos() * thf.cos() + th.sin() * thf.sin() * dphi.cos();
            for l in 0..=8usize {
                let mut rhs = legendre_p(l, th.cos()).unwrap() * legendre_p(l, thf.cos()).unwrap();
                for m in 1..=l {
                    let mut ratio = 1.0;
                    for j in (l - m + 1)..=(l + m) {
                        ratio /= j as f64;
                    }
                    rhs += 2.0
                        * ratio
                        * legendre_p_assoc(l, m, th.cos()).unwrap()
                        * legendre_p_assoc(l, m, thf.cos()).unwrap()
                        * (m as f64 * dphi).cos();
                }
                let lhs = legendre_p(l, cg.clamp(-1.0, 1.0)).unwrap();
                assert!((lhs - rhs).abs() < 1e-12, "l={l}: {lhs} vs {rhs}");
            }
        }
    }
}
