//! Block-maximum envelope of a sampled signal.

use crate::error::{Error, Result};

use super::stream::{BlockSink, SampledSignal};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EnvelopeMode {
    /// `max |Φ|` per block.
    #[default]
    Absolute,
    /// `max Φ` per block.
    Signed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopePoint {
    /// Start time of the block.
    pub t: f64,
    pub value: f64,
}

/// Streaming envelope. Feed it blocks of any length; it emits one point per
/// `block_seconds` of input.
#[derive(Clone, Debug)]
pub struct Envelope {
    block_seconds: f64,
    mode: EnvelopeMode,
    per_block: Option<usize>,
    t0: f64,
    dt: f64,
    seen: usize,
    t_block: f64,
    count: usize,
    current: f64,
    pub points: Vec<EnvelopePoint>,
}

impl Envelope {
    pub fn new(block_seconds: f64, mode: EnvelopeMode) -> Result<Self> {
        if !(block_seconds > 0.0 && block_seconds.is_finite()) {
            return Err(Error::InvalidParameter("envelope block must be positive".into()));
        }
        Ok(Self {
            block_seconds,
            mode,
            per_block: None,
            t0: 0.0,
            dt: 0.0,
            seen: 0,
            t_block: 0.0,
            count: 0,
            current: f64::NEG_INFINITY,
            points: Vec::new(),
        })
    }

    pub fn push(&mut self, block: &SampledSignal) -> Result<()> {
        let per_block = match self.per_block {
            Some(n) => n,
            None => {
                let n = (self.block_seconds / block.dt).round() as usize;
                if n == 0 {
                    return Err(Error::InvalidParameter(
                        "envelope block is shorter than one sample".into(),
                    ));
                }
                self.per_block = Some(n);
                self.t0 = block.t_start;
                self.dt = block.dt;
                n
            }
        };
        for &v in &block.samples {
            if self.count == 0 {
                self.t_block = self.t0 + self.seen as f64 * self.dt;
            }
            self.seen += 1;
            let v = match self.mode {
                EnvelopeMode::Absolute => v.abs(),
                EnvelopeMode::Signed => v,
            };
            self.current = self.current.max(v);
            self.count += 1;
            if self.count == per_block {
                self.points.push(EnvelopePoint {
                    t: self.t_block,
                    value: self.current,
                });
                self.count = 0;
                self.current = f64::NEG_INFINITY;
            }
        }
        Ok(())
    }

    /// Drops any trailing partial block and returns the points.
    pub fn finish(mut self) -> Vec<EnvelopePoint> {
        self.flush_partial();
        self.points
    }

    fn flush_partial(&mut self) {
        if self.count > 0 {
            log::warn!(
                "dropping a partial envelope block of {} samples at t = {}",
                self.count,
                self.t_block
            );
            self.count = 0;
            self.current = f64::NEG_INFINITY;
        }
    }
}

impl BlockSink for Envelope {
    fn write_block(&mut self, block: &SampledSignal) -> Result<()> {
        self.push(block)
    }

    fn finish(&mut self) -> Result<()> {
        self.flush_partial();
        Ok(())
    }
}

/// Envelope of an in-memory signal.
pub fn envelope(signal: &SampledSignal, block_seconds: f64, mode: EnvelopeMode) -> Result<Vec<EnvelopePoint>> {
    let mut env = Envelope::new(block_seconds, mode)?;
    env.push(signal)?;
    Ok(env.finish())
}
