//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! The interval with the largest error estimate is bisected until the
//! summed estimate meets `max(abs_tol, rel_tol * |I|)`. A vector variant
//! shares one subdivision between several integrands that are expensive
//! to evaluate jointly (harmonic amplitudes sharing one transfer-curve
//! derivative per node).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the centre.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_INTERVALS: usize = 4000;

/// Options shared by both integrators.
#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-12,
            max_intervals: MAX_INTERVALS,
        }
    }
}

impl QuadOptions {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

struct Segment {
    a: f64,
    b: f64,
    values: Vec<f64>,
    errors: Vec<f64>,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn gk15_vec<F>(f: &mut F, a: f64, b: f64, dim: usize, scratch: &mut [f64]) -> (Vec<f64>, Vec<f64>)
where
    F: FnMut(f64, &mut [f64]),
{
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kron = vec![0.0; dim];
    let mut gauss = vec![0.0; dim];

    let (lo, hi) = scratch.split_at_mut(dim);
    f(centre, lo);
    for d in 0..dim {
        kron[d] = WGK[7] * lo[d];
        gauss[d] = WG[3] * lo[d];
    }
    for j in 0..7 {
        let dx = half * XGK[j];
        f(centre - dx, lo);
        f(centre + dx, hi);
        for d in 0..dim {
            let pair = lo[d] + hi[d];
            kron[d] += WGK[j] * pair;
            if j % 2 == 1 {
                gauss[d] += WG[j / 2] * pair;
            }
        }
    }
    let errors = kron.iter().zip(&gauss).map(|(k, g)| ((k - g) * half).abs()).collect();
    let values = kron.iter().map(|k| k * half).collect();
    (values, errors)
}

/// Integrates a vector-valued function over `[a, b]`. The error criterion is
/// applied to every component separately; the interval with the largest
/// error (summed over components) is refined first.
pub fn integrate_vec<F>(f: F, dim: usize, a: f64, b: f64, opts: QuadOptions) -> Result<Vec<f64>>
where
    F: FnMut(f64, &mut [f64]),
{
    adapt(f, dim, a, b, opts).map(|(v, _)| v)
}

fn adapt<F>(mut f: F, dim: usize, a: f64, b: f64, opts: QuadOptions) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: FnMut(f64, &mut [f64]),
{
    if a == b {
        return Ok((vec![0.0; dim], vec![0.0; dim]));
    }
    let mut scratch = vec![0.0; 2 * dim];
    let (values, errors) = gk15_vec(&mut f, a, b, dim, &mut scratch);
    let mut total = values.clone();
    let mut total_err = errors.clone();
    let mut heap = BinaryHeap::new();
    heap.push(Segment {
        a,
        b,
        err: errors.iter().sum(),
        values,
        errors,
    });

    let converged = |total: &[f64], total_err: &[f64]| {
        total
            .iter()
            .zip(total_err)
            .all(|(v, e)| v.is_finite() && *e <= opts.abs_tol.max(opts.rel_tol * v.abs()))
    };

    let mut count = 1;
    while !converged(&total, &total_err) {
        let Some(seg) = heap.pop() else { break };
        let mid = 0.5 * (seg.a + seg.b);
        let finite = total.iter().chain(&total_err).all(|v| v.is_finite());
        if !finite || count >= opts.max_intervals || mid <= seg.a || mid >= seg.b {
            let (error, estimate) =
                total_err
                    .iter()
                    .zip(&total)
                    .fold((0.0, 0.0), |acc, (e, v)| if *e > acc.0 { (*e, *v) } else { acc });
            return Err(Error::Quadrature {
                estimate,
                error,
                tolerance: opts.abs_tol.max(opts.rel_tol * estimate.abs()),
            });
        }
        let (lv, le) = gk15_vec(&mut f, seg.a, mid, dim, &mut scratch);
        let (rv, re) = gk15_vec(&mut f, mid, seg.b, dim, &mut scratch);
        for d in 0..dim {
            total[d] += lv[d] + rv[d] - seg.values[d];
            total_err[d] += le[d] + re[d] - seg.errors[d];
        }
        heap.push(Segment {
            a: seg.a,
            b: mid,
            err: le.iter().sum(),
            values: lv,
            errors: le,
        });
        heap.push(Segment {
            a: mid,
            b: seg.b,
            err: re.iter().sum(),
            values: rv,
            errors: re,
        });
        count += 1;
    }
    // Re-sum from the leaves to shed the rounding of the running updates.
    let mut out = vec![0.0; dim];
    let mut err = vec![0.0; dim];
    for seg in heap.iter() {
        for d in 0..dim {
            out[d] += seg.values[d];
            err[d] += seg.errors[d];
        }
    }
    Ok((out, err))
}

/// Integrates a scalar function over `[a, b]`.
pub fn integrate<F>(mut f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult>
where
    F: FnMut(f64) -> f64,
{
    let mut evaluations = 0;
    let g = |x: f64, out: &mut [f64]| {
        evaluations += 1;
        out[0] = f(x);
    };
    let (value, error) = adapt(g, 1, a, b, opts)?;
    Ok(QuadResult {
        value: value[0],
        error: error[0],
        evaluations,
    })
}

/// Convenience wrapper returning only the value.
pub fn quad<F>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    integrate(f, a, b, QuadOptions::new(abs_tol, rel_tol)).map(|r| r.value)
}
