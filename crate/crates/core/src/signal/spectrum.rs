//! One-sided amplitude-normalized power spectrum.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

use super::stream::SampledSignal;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Window {
    #[default]
    Rectangular,
    Hann,
}

impl std::str::FromStr for Window {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rect" | "rectangular" => Ok(Self::Rectangular),
            "hann" => Ok(Self::Hann),
            other => Err(Error::Config(format!(
                "unknown window `{other}` (expected rect or hann)"
            ))),
        }
    }
}

impl Window {
    fn weights(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; n],
            Window::Hann => (0..n)
                .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
                .collect(),
        }
    }
}

/// Power per frequency bin, scaled so that a sinusoid of amplitude `A` centred
/// on a bin shows power `A²` there.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub frequency: Vec<f64>,
    pub power: Vec<f64>,
}

impl Spectrum {
    pub fn resolution(&self) -> f64 {
        self.frequency.get(1).copied().unwrap_or(0.0)
    }

    /// Index of the bin nearest `f`.
    pub fn bin(&self, f: f64) -> usize {
        let df = self.resolution();
        if df == 0.0 {
            return 0;
        }
        ((f / df).round().max(0.0) as usize).min(self.power.len() - 1)
    }

    /// Largest power within `half_width` Hz of `f`.
    pub fn peak_near(&self, f: f64, half_width: f64) -> (f64, f64) {
        let lo = self.bin(f - half_width);
        let hi = self.bin(f + half_width);
        (lo..=hi)
            .map(|i| (self.frequency[i], self.power[i]))
            .fold((f, 0.0), |best, x| if x.1 > best.1 { x } else { best })
    }
}

/// Zero-pads to the next power of two and returns the one-sided spectrum.
pub fn power_spectrum(signal: &SampledSignal, window: Window) -> Result<Spectrum> {
    let n = signal.len();
    if n < 2 {
        return Err(Error::InvalidParameter("spectrum needs at least two samples".into()));
    }
    let w = window.weights(n);
    let gain: f64 = w.iter().sum();
    let m = n.next_power_of_two();
    let mut buf: Vec<Complex<f64>> = signal
        .samples
        .iter()
        .zip(&w)
        .map(|(x, w)| Complex::new(x * w, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(m)
        .collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);

    let half = m / 2;
    let df = signal.sample_rate() / m as f64;
    let frequency = (0..=half).map(|k| k as f64 * df).collect();
    let power = (0..=half)
        .map(|k| {
            let scale = if k == 0 || k == half { 1.0 } else { 2.0 };
            (scale * buf[k].norm() / gain).powi(2)
        })
        .collect();
    Ok(Spectrum { frequency, power })
}
