//! Run configuration: flat `section.key = value` text.
//!
//! Frequencies accept `Hz`/`kHz` suffixes or period strings (`180s`, `3min`,
//! `43.6min`, `1h`); bare numbers are Hz. Durations accept `s`, `ms`, `min`
//! and `h`; bare numbers are seconds. Angles are radians.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::field::GyroGeometry;
use crate::kinematics::{RotorDynamics, DEFAULT_GAMMA_B, GPB_POLHODE_PERIOD, GPB_ROLL_PERIOD, GPB_SPIN_HZ};
use crate::signal::{DipoleBias, EnvelopeMode, Format, KinematicsMode, PopulationSpec, StreamConfig, Window};
use crate::transfer::{Method, TransferCurve};

#[derive(Clone, Debug, PartialEq)]
pub struct GeometryConfig {
    pub delta: f64,
    pub loop_radius: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurveConfig {
    pub method: Method,
    pub series_terms: Option<usize>,
    /// Grid size for the `curve` table.
    pub points: usize,
}

/// Rotor parameters in user units.
#[derive(Clone, Debug, PartialEq)]
pub struct DynamicsConfig {
    pub spin_hz: f64,
    pub roll_hz: f64,
    /// Polhode frequency; sets `ΔI/I` when `inertia_ratio` is absent.
    pub polhode_hz: Option<f64>,
    pub inertia_ratio: Option<f64>,
    pub gamma_b: f64,
    pub alpha: f64,
    pub beta0: f64,
    pub theta_s0: f64,
    pub theta_p0: f64,
    pub theta_r0: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum PopulationMode {
    #[default]
    Uniform,
    Dipole,
    File,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PopulationConfig {
    pub mode: PopulationMode,
    pub pairs: usize,
    pub bias_flux: f64,
    pub bias_axis: Option<[f64; 3]>,
    pub bias_pairs: Option<usize>,
    pub file: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SamplingConfig {
    pub rate: f64,
    pub duration: f64,
    pub t_start: f64,
    pub block: f64,
    pub kinematics: KinematicsMode,
    pub format: Format,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopeConfig {
    pub block: f64,
    pub mode: EnvelopeMode,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeConfig {
    pub k_max: usize,
    pub tau_start: f64,
    pub tau_end: f64,
    pub tau_points: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub geometry: GeometryConfig,
    pub curve: CurveConfig,
    pub dynamics: DynamicsConfig,
    pub population: PopulationConfig,
    pub sampling: SamplingConfig,
    pub envelope: EnvelopeConfig,
    pub window: Window,
    pub amplitudes: AmplitudeConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            geometry: GeometryConfig {
                delta: 0.025,
                loop_radius: 1.0,
            },
            curve: CurveConfig {
                method: Method::ArctanAdjusted,
                series_terms: None,
                points: 401,
            },
            dynamics: DynamicsConfig {
                spin_hz: GPB_SPIN_HZ,
                roll_hz: 1.0 / GPB_ROLL_PERIOD,
                polhode_hz: Some(1.0 / GPB_POLHODE_PERIOD),
                inertia_ratio: None,
                gamma_b: DEFAULT_GAMMA_B,
                alpha: 1e-5,
                beta0: 5e-5,
                theta_s0: 0.0,
                theta_p0: 0.0,
                theta_r0: 0.0,
            },
            population: PopulationConfig {
                mode: PopulationMode::Uniform,
                pairs: 100,
                bias_flux: 0.0,
                bias_axis: None,
                bias_pairs: None,
                file: None,
            },
            sampling: SamplingConfig {
                rate: 2200.0,
                duration: 60.0,
                t_start: 0.0,
                block: 2.0,
                kinematics: KinematicsMode::Exact,
                format: Format::Binary,
            },
            envelope: EnvelopeConfig {
                block: 2.0,
                mode: EnvelopeMode::Absolute,
            },
            window: Window::Hann,
            amplitudes: AmplitudeConfig {
                k_max: 40,
                tau_start: 0.0,
                tau_end: 2.0 * PI,
                tau_points: 64,
            },
        }
    }
}

fn split_unit(v: &str) -> (&str, &str) {
    let v = v.trim();
    let idx = v
        .char_indices()
        .find(|&(i, c)| c.is_ascii_alphabetic() && !is_exponent(v, i))
        .map_or(v.len(), |(i, _)| i);
    (v[..idx].trim(), v[idx..].trim())
}

// `e`/`E` followed by a digit or sign, after a digit, is part of a float literal.
fn is_exponent(v: &str, i: usize) -> bool {
    let b = v.as_bytes();
    matches!(b[i], b'e' | b'E')
        && i > 0
        && (b[i - 1].is_ascii_digit() || b[i - 1] == b'.')
        && b.get(i + 1)
            .is_some_and(|c| c.is_ascii_digit() || *c == b'-' || *c == b'+')
}

fn number(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("`{key}`: `{v}` is not a number")))?;
    if !x.is_finite() {
        return Err(Error::Config(format!("`{key}`: value must be finite")));
    }
    Ok(x)
}

fn seconds_per(unit: &str) -> Option<f64> {
    Some(match unit {
        "ms" => 1e-3,
        "s" | "sec" => 1.0,
        "min" => 60.0,
        "h" => 3600.0,
        _ => return None,
    })
}

/// Frequency in Hz from `100`, `100Hz`, `2.2kHz`, `180s` or `3min`.
pub fn parse_frequency(key: &str, v: &str) -> Result<f64> {
    let (num, unit) = split_unit(v);
    let x = number(key, num)?;
    let hz = match unit {
        "" | "Hz" | "hz" => x,
        "kHz" | "khz" => 1e3 * x,
        u => match seconds_per(u) {
            Some(s) if x != 0.0 => 1.0 / (x * s),
            Some(_) => return Err(Error::Config(format!("`{key}`: zero period"))),
            None => return Err(Error::Config(format!("`{key}`: unknown unit `{u}`"))),
        },
    };
    if hz < 0.0 {
        return Err(Error::Config(format!("`{key}`: frequency must be >= 0")));
    }
    Ok(hz)
}

/// Duration in seconds from `60`, `60s`, `3min` or `1.5h`.
pub fn parse_duration(key: &str, v: &str) -> Result<f64> {
    let (num, unit) = split_unit(v);
    let x = number(key, num)?;
    match unit {
        "" => Ok(x),
        u => seconds_per(u)
            .map(|s| x * s)
            .ok_or_else(|| Error::Config(format!("`{key}`: unknown unit `{u}`"))),
    }
}

fn integer(key: &str, v: &str) -> Result<usize> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("`{key}`: `{v}` is not a non-negative integer")))
}

fn vec3(key: &str, v: &str) -> Result<[f64; 3]> {
    let parts: Vec<&str> = v.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::Config(format!("`{key}`: expected `x, y, z`")));
    }
    Ok([number(key, parts[0])?, number(key, parts[1])?, number(key, parts[2])?])
}

fn with_key<T>(key: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Config(m) => Error::Config(m),
        other => Error::Config(format!("`{key}`: {other}")),
    })
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
            let k = k.trim().to_string();
            if entries.insert(k.clone(), v.trim().to_string()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key `{k}`", n + 1)));
            }
        }
        if entries.contains_key("dynamics.polhode") && entries.contains_key("dynamics.inertia_ratio") {
            return Err(Error::Config(
                "give either `dynamics.polhode` or `dynamics.inertia_ratio`, not both".into(),
            ));
        }
        let mut cfg = Self::default();
        for (k, v) in &entries {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Assigns one key. Unknown keys are rejected.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        let k = key;
        match key {
            "seed" => self.seed = v.trim().parse().map_err(|_| Error::Config(format!("`seed`: `{v}`")))?,
            "geometry.delta" => self.geometry.delta = number(k, v)?,
            "geometry.loop_radius" => self.geometry.loop_radius = number(k, v)?,
            "curve.method" => self.curve.method = with_key(k, v.parse())?,
            "curve.series_terms" => self.curve.series_terms = Some(integer(k, v)?),
            "curve.points" => self.curve.points = integer(k, v)?,
            "dynamics.spin" => self.dynamics.spin_hz = parse_frequency(k, v)?,
            "dynamics.roll" => self.dynamics.roll_hz = parse_frequency(k, v)?,
            "dynamics.polhode" => {
                self.dynamics.polhode_hz = Some(parse_frequency(k, v)?);
                self.dynamics.inertia_ratio = None;
            }
            "dynamics.inertia_ratio" => {
                self.dynamics.inertia_ratio = Some(number(k, v)?);
                self.dynamics.polhode_hz = None;
            }
            "dynamics.gamma_b" => self.dynamics.gamma_b = number(k, v)?,
            "dynamics.alpha" => self.dynamics.alpha = number(k, v)?,
            "dynamics.beta0" => self.dynamics.beta0 = number(k, v)?,
            "dynamics.theta_s0" => self.dynamics.theta_s0 = number(k, v)?,
            "dynamics.theta_p0" => self.dynamics.theta_p0 = number(k, v)?,
            "dynamics.theta_r0" => self.dynamics.theta_r0 = number(k, v)?,
            "population.mode" => {
                self.population.mode = match v.trim() {
                    "uniform" => PopulationMode::Uniform,
                    "dipole" | "dipole_biased" => PopulationMode::Dipole,
                    "file" => PopulationMode::File,
                    other => {
                        return Err(Error::Config(format!(
                            "`population.mode`: `{other}` (expected uniform, dipole or file)"
                        )))
                    }
                }
            }
            "population.pairs" => self.population.pairs = integer(k, v)?,
            "population.bias_flux" => self.population.bias_flux = number(k, v)?,
            "population.bias_axis" => self.population.bias_axis = Some(vec3(k, v)?),
            "population.bias_pairs" => self.population.bias_pairs = Some(integer(k, v)?),
            "population.file" => self.population.file = Some(PathBuf::from(v.trim())),
            "sampling.rate" => self.sampling.rate = parse_frequency(k, v)?,
            "sampling.duration" => self.sampling.duration = parse_duration(k, v)?,
            "sampling.t_start" => self.sampling.t_start = parse_duration(k, v)?,
            "sampling.block" => self.sampling.block = parse_duration(k, v)?,
            "sampling.kinematics" => self.sampling.kinematics = with_key(k, v.trim().parse())?,
            "sampling.format" => self.sampling.format = with_key(k, v.trim().parse())?,
            "envelope.block" => self.envelope.block = parse_duration(k, v)?,
            "envelope.mode" => {
                self.envelope.mode = match v.trim() {
                    "abs" | "absolute" => EnvelopeMode::Absolute,
                    "signed" => EnvelopeMode::Signed,
                    other => {
                        return Err(Error::Config(format!(
                            "`envelope.mode`: `{other}` (expected abs or signed)"
                        )))
                    }
                }
            }
            "spectrum.window" => self.window = with_key(k, v.trim().parse())?,
            "amplitudes.k_max" => self.amplitudes.k_max = integer(k, v)?,
            "amplitudes.tau_start" => self.amplitudes.tau_start = number(k, v)?,
            "amplitudes.tau_end" => self.amplitudes.tau_end = number(k, v)?,
            "amplitudes.tau_points" => self.amplitudes.tau_points = integer(k, v)?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Re-checks every module-level invariant.
    pub fn validate(&self) -> Result<()> {
        let cfg_err = |e: Error| match e {
            Error::InvalidParameter(m) | Error::Domain { detail: m, .. } => Error::Config(m),
            other => other,
        };
        self.geometry().map_err(cfg_err)?;
        self.dynamics().map_err(cfg_err)?;
        self.stream_config().validate().map_err(cfg_err)?;
        if !(self.envelope.block > 0.0 && self.envelope.block.is_finite()) {
            return Err(Error::Config("`envelope.block` must be positive".into()));
        }
        if self.curve.points < 2 {
            return Err(Error::Config("`curve.points` must be at least 2".into()));
        }
        if self.population.mode == PopulationMode::File && self.population.file.is_none() {
            return Err(Error::Config("`population.mode = file` needs `population.file`".into()));
        }
        if let Some(axis) = self.population.bias_axis {
            if axis.iter().all(|&c| c == 0.0) {
                return Err(Error::Config("`population.bias_axis` must be nonzero".into()));
            }
        }
        Ok(())
    }

    pub fn geometry(&self) -> Result<GyroGeometry> {
        let g = &self.geometry;
        if !(g.delta > 0.0 && g.delta < 1.0) {
            return Err(Error::Config(format!(
                "`geometry.delta` must lie in (0, 1), got {}",
                g.delta
            )));
        }
        GyroGeometry::new(g.loop_radius * (1.0 - g.delta), g.loop_radius)
    }

    pub fn transfer_curve(&self) -> Result<TransferCurve> {
        let c = TransferCurve::new(self.geometry.delta, self.curve.method)?;
        Ok(match self.curve.series_terms {
            Some(k) => c.with_series_terms(k),
            None => c,
        })
    }

    pub fn dynamics(&self) -> Result<RotorDynamics> {
        let d = &self.dynamics;
        let mut out = RotorDynamics {
            omega_s: 2.0 * PI * d.spin_hz,
            omega_r: 2.0 * PI * d.roll_hz,
            inertia_ratio: d.inertia_ratio.unwrap_or(0.0),
            gamma_b: d.gamma_b,
            alpha: d.alpha,
            beta0: d.beta0,
            theta_s0: d.theta_s0,
            theta_p0: d.theta_p0,
            theta_r0: d.theta_r0,
            omega_p_override: None,
        };
        if d.inertia_ratio.is_none() {
            if let Some(f) = d.polhode_hz {
                if f > 0.0 {
                    if (d.gamma_b - PI / 2.0).abs() < 1e-12 {
                        return Err(Error::Config(
                            "a polhode frequency cannot be realized with gamma_b = π/2".into(),
                        ));
                    }
                    out = out.with_polhode_period(1.0 / f);
                }
            }
        }
        out.validate()?;
        Ok(out)
    }

    pub fn stream_config(&self) -> StreamConfig {
        StreamConfig {
            t_start: self.sampling.t_start,
            duration: self.sampling.duration,
            sample_rate: self.sampling.rate,
            block_seconds: self.sampling.block,
            kinematics: self.sampling.kinematics,
            parallel: true,
        }
    }

    pub fn population_spec(&self) -> PopulationSpec {
        let p = &self.population;
        match p.mode {
            PopulationMode::Dipole => PopulationSpec::DipoleBiased {
                n_pairs: p.pairs,
                bias: DipoleBias {
                    flux: p.bias_flux,
                    axis: p.bias_axis,
                    pairs: p.bias_pairs,
                },
            },
            _ => PopulationSpec::Uniform { n_pairs: p.pairs },
        }
    }

    /// Complete `key = value` listing that parses back to `self`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("seed", self.seed.to_string());
        kv("geometry.delta", self.geometry.delta.to_string());
        kv("geometry.loop_radius", self.geometry.loop_radius.to_string());
        kv("curve.method", self.curve.method.to_string());
        if let Some(k) = self.curve.series_terms {
            kv("curve.series_terms", k.to_string());
        }
        kv("curve.points", self.curve.points.to_string());
        let d = &self.dynamics;
        kv("dynamics.spin", format!("{}Hz", d.spin_hz));
        kv("dynamics.roll", format!("{}Hz", d.roll_hz));
        if let Some(r) = d.inertia_ratio {
            kv("dynamics.inertia_ratio", r.to_string());
        } else if let Some(f) = d.polhode_hz {
            kv("dynamics.polhode", format!("{f}Hz"));
        }
        kv("dynamics.gamma_b", d.gamma_b.to_string());
        kv("dynamics.alpha", d.alpha.to_string());
        kv("dynamics.beta0", d.beta0.to_string());
        kv("dynamics.theta_s0", d.theta_s0.to_string());
        kv("dynamics.theta_p0", d.theta_p0.to_string());
        kv("dynamics.theta_r0", d.theta_r0.to_string());
        let p = &self.population;
        let mode = match p.mode {
            PopulationMode::Uniform => "uniform",
            PopulationMode::Dipole => "dipole",
            PopulationMode::File => "file",
        };
        kv("population.mode", mode.into());
        kv("population.pairs", p.pairs.to_string());
        kv("population.bias_flux", p.bias_flux.to_string());
        if let Some(a) = p.bias_axis {
            kv("population.bias_axis", format!("{}, {}, {}", a[0], a[1], a[2]));
        }
        if let Some(n) = p.bias_pairs {
            kv("population.bias_pairs", n.to_string());
        }
        if let Some(f) = &p.file {
            kv("population.file", f.display().to_string());
        }
        let sm = &self.sampling;
        kv("sampling.rate", format!("{}Hz", sm.rate));
        kv("sampling.duration", format!("{}s", sm.duration));
        kv("sampling.t_start", format!("{}s", sm.t_start));
        kv("sampling.block", format!("{}s", sm.block));
        let kin = match sm.kinematics {
            KinematicsMode::Exact => "exact",
            KinematicsMode::FirstOrder => "first_order",
        };
        kv("sampling.kinematics", kin.into());
        let fmt = match sm.format {
            Format::Binary => "binary",
            Format::Csv => "csv",
        };
        kv("sampling.format", fmt.into());
        kv("envelope.block", format!("{}s", self.envelope.block));
        let em = match self.envelope.mode {
            EnvelopeMode::Absolute => "abs",
            EnvelopeMode::Signed => "signed",
        };
        kv("envelope.mode", em.into());
        let w = match self.window {
            Window::Rectangular => "rect",
            Window::Hann => "hann",
        };
        kv("spectrum.window", w.into());
        let a = &self.amplitudes;
        kv("amplitudes.k_max", a.k_max.to_string());
        kv("amplitudes.tau_start", a.tau_start.to_string());
        kv("amplitudes.tau_end", a.tau_end.to_string());
        kv("amplitudes.tau_points", a.tau_points.to_string());
        s
    }
}
