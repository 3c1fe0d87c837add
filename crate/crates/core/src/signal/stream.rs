//! Sampled flux signal, produced block by block.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kinematics::{cos_theta_first_order, KinematicState, RotorDynamics};
use crate::transfer::{f_integral, TransferCurve};

use super::population::FluxonPopulation;

/// How `cos ϑ` is computed for each fluxon.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum KinematicsMode {
    #[default]
    Exact,
    FirstOrder,
}

impl std::str::FromStr for KinematicsMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Self::Exact),
            "first_order" => Ok(Self::FirstOrder),
            other => Err(Error::Config(format!(
                "unknown kinematics `{other}` (expected exact or first_order)"
            ))),
        }
    }
}

/// Uniformly sampled flux in units of Φ₀, sample `i` at `t_start + i dt`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SampledSignal {
    pub t_start: f64,
    pub dt: f64,
    pub samples: Vec<f64>,
}

impl SampledSignal {
    pub fn time(&self, i: usize) -> f64 {
        self.t_start + i as f64 * self.dt
    }

    pub fn sample_rate(&self) -> f64 {
        1.0 / self.dt
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Appends `other`, which must continue this signal on the same grid.
    pub fn extend(&mut self, other: &SampledSignal) {
        if self.samples.is_empty() {
            self.t_start = other.t_start;
            self.dt = other.dt;
        }
        self.samples.extend_from_slice(&other.samples);
    }
}

/// Consumer of consecutive signal blocks.
pub trait BlockSink {
    fn write_block(&mut self, block: &SampledSignal) -> Result<()>;

    fn finish(&mut self) -> Result<()> {
        Ok(())
    }
}

impl BlockSink for SampledSignal {
    fn write_block(&mut self, block: &SampledSignal) -> Result<()> {
        self.extend(block);
        Ok(())
    }
}

/// Adapts a closure into a [`BlockSink`].
pub struct FnSink<F>(pub F);

impl<F: FnMut(&SampledSignal) -> Result<()>> BlockSink for FnSink<F> {
    fn write_block(&mut self, block: &SampledSignal) -> Result<()> {
        (self.0)(block)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct StreamConfig {
    pub t_start: f64,
    pub duration: f64,
    pub sample_rate: f64,
    /// Samples are produced and handed to the sink in blocks of this length.
    pub block_seconds: f64,
    pub kinematics: KinematicsMode,
    pub parallel: bool,
}

impl Default for StreamConfig {
    fn default() -> Self {
        Self {
            t_start: 0.0,
            duration: 60.0,
            sample_rate: 2200.0,
            block_seconds: 2.0,
            kinematics: KinematicsMode::Exact,
            parallel: true,
        }
    }
}

impl StreamConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if !(self.sample_rate > 0.0 && self.sample_rate.is_finite()) {
            return bad("sample rate must be positive");
        }
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            return bad("duration must be non-negative");
        }
        if !self.t_start.is_finite() {
            return bad("start time must be finite");
        }
        if !(self.block_seconds > 0.0 && self.block_seconds.is_finite()) {
            return bad("block length must be positive");
        }
        Ok(())
    }

    pub fn total_samples(&self) -> usize {
        (self.duration * self.sample_rate).round() as usize
    }

    pub fn block_samples(&self) -> usize {
        ((self.block_seconds * self.sample_rate).round() as usize).max(1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StreamSummary {
    pub blocks: usize,
    pub samples: usize,
}

// Highest odd carrier harmonic we expect to resolve without warning.
const RESOLVED_HARMONIC: f64 = 7.0;

fn check_sampling(rate: f64, dynamics: &RotorDynamics) {
    let carrier = (dynamics.omega_s - dynamics.omega_r).abs() / (2.0 * std::f64::consts::PI);
    if rate < 2.0 * RESOLVED_HARMONIC * carrier {
        log::warn!(
            "sample rate {rate} Hz is below twice the 7th harmonic of the {carrier:.3} Hz carrier; the flux steps will alias"
        );
    }
}

struct Evaluator<'a> {
    pop: &'a FluxonPopulation,
    trig: Vec<crate::kinematics::FluxonTrig>,
    signs: Vec<f64>,
    curve: &'a TransferCurve,
    dynamics: &'a RotorDynamics,
    mode: KinematicsMode,
    exact_curve: bool,
}

impl<'a> Evaluator<'a> {
    fn new(
        pop: &'a FluxonPopulation,
        curve: &'a TransferCurve,
        dynamics: &'a RotorDynamics,
        mode: KinematicsMode,
    ) -> Self {
        Self {
            pop,
            trig: pop.fluxons.iter().map(|f| f.trig()).collect(),
            signs: pop.fluxons.iter().map(|f| f.sign()).collect(),
            curve,
            dynamics,
            mode,
            exact_curve: curve.method().is_exact(),
        }
    }

    fn value(&self, s: f64) -> Result<f64> {
        if self.exact_curve {
            match self.curve.eval(s) {
                // the closed form is ill-conditioned near s = 0
                Err(Error::Conditioning { .. }) => f_integral(s, self.curve.delta()),
                other => other,
            }
        } else {
            Ok(self.curve.eval_approx(s))
        }
    }

    fn flux(&self, t: f64) -> Result<f64> {
        let mut sum = 0.0;
        match self.mode {
            KinematicsMode::Exact => {
                let state = KinematicState::new(self.dynamics, t);
                if self.exact_curve {
                    for (f, sign) in self.trig.iter().zip(&self.signs) {
                        sum += sign * self.value(state.cos_theta(f))?;
                    }
                } else {
                    for (f, sign) in self.trig.iter().zip(&self.signs) {
                        sum += sign * self.curve.eval_approx(state.cos_theta(f));
                    }
                }
            }
            KinematicsMode::FirstOrder => {
                for (f, sign) in self.pop.fluxons.iter().zip(&self.signs) {
                    let s = cos_theta_first_order(f, self.dynamics, t).clamp(-1.0, 1.0);
                    sum += sign * self.value(s)?;
                }
            }
        }
        Ok(0.5 * sum)
    }

    fn block(&self, t_start: f64, dt: f64, first: usize, len: usize) -> Result<SampledSignal> {
        let samples = (first..first + len)
            .map(|i| self.flux(t_start + i as f64 * dt))
            .collect::<Result<Vec<_>>>()?;
        Ok(SampledSignal {
            t_start: t_start + first as f64 * dt,
            dt,
            samples,
        })
    }
}

/// Total flux `Φ(t)/Φ₀ = ½ Σ p_i F_δ(cos ϑ_i(t))` at a single instant.
pub fn total_flux(
    pop: &FluxonPopulation,
    curve: &TransferCurve,
    dynamics: &RotorDynamics,
    t: f64,
    mode: KinematicsMode,
) -> Result<f64> {
    Evaluator::new(pop, curve, dynamics, mode).flux(t)
}

/// Samples the flux over `cfg.duration` and feeds it to `sink` in order.
///
/// Blocks are computed in parallel batches but delivered sequentially; the
/// output does not depend on the thread count.
pub fn generate_stream(
    pop: &FluxonPopulation,
    curve: &TransferCurve,
    dynamics: &RotorDynamics,
    cfg: &StreamConfig,
    sink: &mut dyn BlockSink,
) -> Result<StreamSummary> {
    cfg.validate()?;
    dynamics.validate()?;
    check_sampling(cfg.sample_rate, dynamics);

    let eval = Evaluator::new(pop, curve, dynamics, cfg.kinematics);
    let dt = 1.0 / cfg.sample_rate;
    let total = cfg.total_samples();
    let per_block = cfg.block_samples();
    let n_blocks = total.div_ceil(per_block);
    let batch = if cfg.parallel {
        2 * rayon::current_num_threads()
    } else {
        1
    };

    let mut written = 0;
    let mut start = 0;
    while start < n_blocks {
        let end = (start + batch).min(n_blocks);
        let make = |b: usize| {
            let first = b * per_block;
            eval.block(cfg.t_start, dt, first, per_block.min(total - first))
        };
        let blocks: Vec<Result<SampledSignal>> = if cfg.parallel {
            (start..end).into_par_iter().map(make).collect()
        } else {
            (start..end).map(make).collect()
        };
        for block in blocks {
            let block = block?;
            written += block.len();
            sink.write_block(&block)?;
        }
        start = end;
    }
    sink.finish()?;
    Ok(StreamSummary {
        blocks: n_blocks,
        samples: written,
    })
}

/// Convenience wrapper collecting the whole signal in memory.
pub fn generate_signal(
    pop: &FluxonPopulation,
    curve: &TransferCurve,
    dynamics: &RotorDynamics,
    cfg: &StreamConfig,
) -> Result<SampledSignal> {
    let mut out = SampledSignal {
        t_start: cfg.t_start,
        dt: 1.0 / cfg.sample_rate,
        samples: Vec::with_capacity(cfg.total_samples()),
    };
    generate_stream(pop, curve, dynamics, cfg, &mut out)?;
    Ok(out)
}
