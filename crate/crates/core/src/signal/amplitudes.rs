//! Slow Fourier amplitudes of the flux at the carrier harmonics.
//!
//! For a carrier of amplitude `a`, `F_δ(a sin Θ) = a Σ_k A_k sin((2k+1)Θ)` and
//! `F_δ'(a sin Θ) = Σ_k B_k cos(2kΘ)`.

use std::f64::consts::PI;

use crate::error::Result;
use crate::kinematics::{slow_amplitudes, Fluxon, RotorDynamics};
use crate::quad::{integrate_vec, QuadOptions};
use crate::transfer::TransferCurve;

const OPTS: QuadOptions = QuadOptions {
    abs_tol: 1e-12,
    rel_tol: 1e-10,
    max_intervals: 4000,
};

/// Harmonic amplitudes `(A_k, B_k)` for `k = 0..=k_max` at carrier amplitude `a`.
pub fn harmonic_amplitudes(a: f64, curve: &TransferCurve, k_max: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = k_max + 1;
    let raw = integrate_vec(
        |psi, out: &mut [f64]| {
            let s = a * psi.sin();
            // a NaN here makes the quadrature report failure
            let d = curve.deriv(s).unwrap_or(f64::NAN);
            let cp = psi.cos();
            // cos(mψ) by the Chebyshev recurrence
            let mut c_prev = 1.0;
            let mut c = cp;
            out[n] = d;
            for k in 0..n {
                // c = cos((2k+1)ψ), c_prev = cos(2kψ)
                out[k] = c * cp * d;
                if k > 0 {
                    out[n + k] = c_prev * d;
                }
                let next_even = 2.0 * cp * c - c_prev;
                let next_odd = 2.0 * cp * next_even - c;
                c_prev = next_even;
                c = next_odd;
            }
        },
        2 * n,
        0.0,
        PI,
        OPTS,
    )?;
    let a_k = (0..n).map(|k| 2.0 / (PI * (2 * k + 1) as f64) * raw[k]).collect();
    let b_k = (0..n)
        .map(|k| if k == 0 { raw[n] / PI } else { 2.0 / PI * raw[n + k] })
        .collect();
    Ok((a_k, b_k))
}

/// Polarity-weighted sums over fluxons of the harmonic amplitudes, on a grid of
/// slow times.
#[derive(Clone, Debug, PartialEq)]
pub struct SlowAmplitudes {
    pub tau: Vec<f64>,
    /// `a[i][k]`: Σ p_f a_f A_k(a_f) at `tau[i]`, the coefficient of `sin((2k+1)Θ)`.
    pub a: Vec<Vec<f64>>,
    /// `b[i][k]`: Σ p_f a_f B_k at `tau[i]`, with `a_f` the polhode factor; the
    /// coefficient of `(β₀ sin θ_r + α) cos(2kΘ)`.
    pub b: Vec<Vec<f64>>,
}

pub fn slow_fourier_amplitudes(
    fluxons: &[Fluxon],
    curve: &TransferCurve,
    dynamics: &RotorDynamics,
    tau: &[f64],
    k_max: usize,
) -> Result<SlowAmplitudes> {
    let mut a = Vec::with_capacity(tau.len());
    let mut b = Vec::with_capacity(tau.len());
    for &t in tau {
        let mut sa = vec![0.0; k_max + 1];
        let mut sb = vec![0.0; k_max + 1];
        for f in fluxons {
            let slow = slow_amplitudes(f, dynamics, t);
            let carrier = slow.a_s_minus_r;
            let (ak, bk) = harmonic_amplitudes(carrier, curve, k_max)?;
            for k in 0..=k_max {
                sa[k] += f.sign() * carrier * ak[k];
                sb[k] += f.sign() * slow.a * bk[k];
            }
        }
        a.push(sa);
        b.push(sb);
    }
    Ok(SlowAmplitudes {
        tau: tau.to_vec(),
        a,
        b,
    })
}
