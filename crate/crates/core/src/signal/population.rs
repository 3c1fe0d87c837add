//! Fluxon populations: uniform random, dipole-biased, or read from a file.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::Vec3;
use crate::kinematics::Fluxon;
use crate::quad::quad;
use crate::transfer::{f_integral, TransferCurve};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    File,
    UniformRandom,
    DipoleBiased,
}

impl Provenance {
    pub fn name(self) -> &'static str {
        match self {
            Provenance::File => "file",
            Provenance::UniformRandom => "uniform_random",
            Provenance::DipoleBiased => "dipole_biased",
        }
    }
}

/// An ordered set of fluxons and antifluxons.
#[derive(Clone, Debug, PartialEq)]
pub struct FluxonPopulation {
    pub fluxons: Vec<Fluxon>,
    pub seed: Option<u64>,
    pub provenance: Provenance,
}

/// Parameters of a dipole-biased population.
#[derive(Clone, Copy, Debug)]
pub struct DipoleBias {
    /// Target net flux along the bias axis, in Φ₀.
    pub flux: f64,
    /// Bias direction in body coordinates; random when `None`.
    pub axis: Option<Vec3>,
    /// Pairs devoted to the bias; defaults to `ceil(|flux|)` capped at the total.
    pub pairs: Option<usize>,
}

/// How to build a population.
#[derive(Clone, Copy, Debug)]
pub enum PopulationSpec {
    Uniform { n_pairs: usize },
    DipoleBiased { n_pairs: usize, bias: DipoleBias },
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    let u: f64 = rng.gen_range(-1.0..=1.0);
    let phi: f64 = rng.gen_range(0.0..2.0 * PI);
    let s = (1.0 - u * u).max(0.0).sqrt();
    [s * phi.cos(), s * phi.sin(), u]
}

fn to_angles(v: Vec3) -> (f64, f64) {
    let xi = v[2].clamp(-1.0, 1.0).acos();
    let eta = v[1].atan2(v[0]).rem_euclid(2.0 * PI);
    (xi, eta)
}

fn normalize(v: Vec3) -> Result<Vec3> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::InvalidParameter(
            "bias axis must be a nonzero finite vector".into(),
        ));
    }
    Ok([v[0] / n, v[1] / n, v[2] / n])
}

// Two unit vectors completing `axis` to an orthonormal basis.
fn complete_basis(axis: Vec3) -> (Vec3, Vec3) {
    let helper = if axis[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let t1 = [
        axis[1] * helper[2] - axis[2] * helper[1],
        axis[2] * helper[0] - axis[0] * helper[2],
        axis[0] * helper[1] - axis[1] * helper[0],
    ];
    let n = (t1[0] * t1[0] + t1[1] * t1[1] + t1[2] * t1[2]).sqrt();
    let t1 = [t1[0] / n, t1[1] / n, t1[2] / n];
    let t2 = [
        axis[1] * t1[2] - axis[2] * t1[1],
        axis[2] * t1[0] - axis[0] * t1[2],
        axis[0] * t1[1] - axis[1] * t1[0],
    ];
    (t1, t2)
}

// Uniform point on the cap {v : v·axis ≥ c_min}.
fn cap_point(rng: &mut ChaCha8Rng, axis: Vec3, basis: (Vec3, Vec3), c_min: f64) -> Vec3 {
    let u: f64 = if c_min >= 1.0 { 1.0 } else { rng.gen_range(c_min..=1.0) };
    let phi: f64 = rng.gen_range(0.0..2.0 * PI);
    let s = (1.0 - u * u).max(0.0).sqrt();
    let (t1, t2) = basis;
    let (sp, cp) = phi.sin_cos();
    std::array::from_fn(|i| u * axis[i] + s * (cp * t1[i] + sp * t2[i]))
}

fn eval_curve(curve: &TransferCurve, s: f64) -> f64 {
    if curve.method().is_exact() {
        curve
            .eval(s)
            .or_else(|_| f_integral(s, curve.delta()))
            .unwrap_or(f64::NAN)
    } else {
        curve.eval_approx(s)
    }
}

// Mean of F over u uniform in [c, 1]: the expected flux of one biased pair
// (fluxon in the cap around the axis, antifluxon in the opposite cap).
fn mean_pair_flux(curve: &TransferCurve, c: f64) -> Result<f64> {
    if c >= 1.0 {
        return Ok(curve.f_delta());
    }
    let lo = c.abs();
    // ∫_c^1 F = ∫_{|c|}^1 F because F is odd
    let mut brk = vec![lo, 1.0];
    let w = curve.delta_width();
    if w > lo && w < 1.0 {
        brk.insert(1, w);
    }
    let mut total = 0.0;
    for pair in brk.windows(2) {
        total += quad(|u| eval_curve(curve, u), pair[0], pair[1], 1e-12, 1e-10)?;
    }
    Ok(total / (1.0 - c))
}

/// Cap size (cosine of the half-angle) at which `pairs` biased pairs carry
/// an expected net flux `target`.
pub fn bias_cap(curve: &TransferCurve, pairs: usize, target: f64) -> Result<f64> {
    let target = target.abs();
    let n = pairs as f64;
    if target > n {
        return Err(Error::BiasInfeasible {
            target,
            max: n * curve.f_delta(),
            pairs,
        });
    }
    if target >= n * curve.f_delta() {
        log::warn!(
            "bias target {target} exceeds the saturated maximum {} of {pairs} pairs; using a point-like cap",
            n * curve.f_delta()
        );
        return Ok(1.0);
    }
    if target == 0.0 {
        return Ok(-1.0);
    }
    // mean_pair_flux decreases from f_δ at c = 1 to 0 at c = −1
    let (mut lo, mut hi) = (-1.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if n * mean_pair_flux(curve, mid)? > target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

impl FluxonPopulation {
    pub fn empty() -> Self {
        Self {
            fluxons: Vec::new(),
            seed: None,
            provenance: Provenance::File,
        }
    }

    /// `2 n_pairs` fluxons drawn uniformly on the sphere, polarities alternating `+1, −1`.
    pub fn uniform(n_pairs: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fluxons = (0..2 * n_pairs)
            .map(|i| {
                let (xi, eta) = to_angles(random_unit(&mut rng));
                Fluxon {
                    xi,
                    eta,
                    polarity: if i % 2 == 0 { 1 } else { -1 },
                }
            })
            .collect();
        Self {
            fluxons,
            seed: Some(seed),
            provenance: Provenance::UniformRandom,
        }
    }

    /// Uniform pairs plus biased pairs: fluxons uniform within a cap around
    /// the bias axis and antifluxons within the opposite cap. The cap is sized
    /// so that the expected net flux of the whole population along the axis
    /// equals the target, given the realized uniform part.
    pub fn dipole_biased(n_pairs: usize, bias: DipoleBias, curve: &TransferCurve, seed: u64) -> Result<Self> {
        if !bias.flux.is_finite() {
            return Err(Error::InvalidParameter("bias flux must be finite".into()));
        }
        let n_bias = bias
            .pairs
            .unwrap_or_else(|| (bias.flux.abs().ceil() as usize).min(n_pairs));
        if n_bias > n_pairs {
            return Err(Error::InvalidParameter(format!(
                "{n_bias} biased pairs requested out of {n_pairs}"
            )));
        }
        if bias.flux.abs() > n_bias as f64 {
            return Err(Error::BiasInfeasible {
                target: bias.flux.abs(),
                max: n_bias as f64 * curve.f_delta(),
                pairs: n_bias,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let axis = match bias.axis {
            Some(a) => normalize(a)?,
            None => random_unit(&mut rng),
        };
        let mut pop = Self::uniform(n_pairs - n_bias, rng.gen());
        // the biased pairs make up whatever the uniform part leaves over
        let residual = bias.flux - pop.net_flux_along(axis, curve)?;
        let capacity = n_bias as f64;
        let c_min = bias_cap(curve, n_bias, residual.abs().min(capacity))?;
        let axis = if residual < 0.0 { axis.map(|v| -v) } else { axis };
        let basis = complete_basis(axis);
        let anti = axis.map(|v| -v);
        let anti_basis = complete_basis(anti);
        for _ in 0..n_bias {
            let (xi, eta) = to_angles(cap_point(&mut rng, axis, basis, c_min));
            pop.fluxons.push(Fluxon { xi, eta, polarity: 1 });
            let (xi, eta) = to_angles(cap_point(&mut rng, anti, anti_basis, c_min));
            pop.fluxons.push(Fluxon { xi, eta, polarity: -1 });
        }
        pop.seed = Some(seed);
        pop.provenance = Provenance::DipoleBiased;
        Ok(pop)
    }

    pub fn generate(spec: PopulationSpec, curve: &TransferCurve, seed: u64) -> Result<Self> {
        match spec {
            PopulationSpec::Uniform { n_pairs } => Ok(Self::uniform(n_pairs, seed)),
            PopulationSpec::DipoleBiased { n_pairs, bias } => Self::dipole_biased(n_pairs, bias, curve, seed),
        }
    }

    pub fn len(&self) -> usize {
        self.fluxons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fluxons.is_empty()
    }

    /// `½ Σ pol_i F_δ(e_i·n)` for a loop normal `n` fixed in body coordinates.
    pub fn net_flux_along(&self, axis: Vec3, curve: &TransferCurve) -> Result<f64> {
        let n = normalize(axis)?;
        let mut sum = 0.0;
        for f in &self.fluxons {
            let (sx, cx) = f.xi.sin_cos();
            let (se, ce) = f.eta.sin_cos();
            let s = (sx * ce * n[0] + sx * se * n[1] + cx * n[2]).clamp(-1.0, 1.0);
            sum += f.sign() * eval_curve(curve, s);
        }
        Ok(0.5 * sum)
    }

    /// Counts of `(+1, −1)` polarities.
    pub fn polarity_counts(&self) -> (usize, usize) {
        let plus = self.fluxons.iter().filter(|f| f.polarity > 0).count();
        (plus, self.fluxons.len() - plus)
    }

    /// Population with every polarity flipped.
    pub fn flipped(&self) -> Self {
        let mut out = self.clone();
        for f in &mut out.fluxons {
            f.polarity = -f.polarity;
        }
        out
    }

    /// Text form: one `xi eta polarity` line per fluxon.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# xi eta polarity");
        let _ = writeln!(s, "# provenance = {}", self.provenance.name());
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "# seed = {seed}");
        }
        for f in &self.fluxons {
            let _ = writeln!(s, "{} {} {:+}", f.xi, f.eta, f.polarity);
        }
        s
    }

    /// Parses the text form. Errors carry the byte offset of the bad line.
    pub fn parse(text: &str, path: &str) -> Result<Self> {
        let mut fluxons = Vec::new();
        let mut offset = 0;
        for raw in text.split_inclusive('\n') {
            let line_start = offset;
            offset += raw.len();
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |detail: String| Error::Parse {
                path: path.to_string(),
                offset: line_start,
                detail,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(bad(format!(
                    "expected `xi eta polarity`, found {} fields",
                    fields.len()
                )));
            }
            let xi: f64 = fields[0].parse().map_err(|_| bad(format!("bad xi `{}`", fields[0])))?;
            let eta: f64 = fields[1].parse().map_err(|_| bad(format!("bad eta `{}`", fields[1])))?;
            let pol: i8 = match fields[2] {
                "1" | "+1" => 1,
                "-1" => -1,
                other => return Err(bad(format!("polarity must be +1 or -1, found `{other}`"))),
            };
            if !(0.0..=PI).contains(&xi) {
                return Err(bad(format!("xi = {xi} outside [0, π]")));
            }
            if !(0.0..2.0 * PI).contains(&eta) {
                return Err(bad(format!("eta = {eta} outside [0, 2π)")));
            }
            fluxons.push(Fluxon { xi, eta, polarity: pol });
        }
        Ok(Self {
            fluxons,
            seed: None,
            provenance: Provenance::File,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}
