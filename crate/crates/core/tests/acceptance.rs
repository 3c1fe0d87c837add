//! Acceptance suite. Prints one line per criterion and exits nonzero if a
//! criterion fails that is not on the known-red list.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use trapflux::field::{
    b_field, br_series, greens_dirichlet, psi_closed, psi_closed_at, psi_series, FieldPoint, GyroGeometry, SourcePoint,
    Vec3,
};
use trapflux::kinematics::{
    body_frame, cos_theta_exact, cos_theta_first_order, fluxon_direction, loop_normal, Fluxon, RotorDynamics,
    GPB_POLHODE_PERIOD, GPB_ROLL_PERIOD,
};
use trapflux::quad::quad;
use trapflux::signal::{
    generate_signal, generate_stream, power_spectrum, slow_fourier_amplitudes, DipoleBias, Envelope, EnvelopeMode,
    FluxonPopulation, KinematicsMode, StreamConfig, Window,
};
use trapflux::specfun::{legendre_p_all, legendre_p_deriv_all};
use trapflux::transfer::{
    f_arctan, f_arctan_adjusted, f_integral, f_piecewise_linear, saturation, slope_at_zero, Method, TransferCurve,
};

#[derive(Clone, Copy, PartialEq)]
enum Status {
    Pass,
    Fail,
    Red,
}

struct Line {
    id: &'static str,
    title: &'static str,
    status: Status,
    detail: String,
    notes: Vec<String>,
}

/// Sub-check accumulator for one criterion.
struct Criterion {
    line: Line,
}

impl Criterion {
    fn new(id: &'static str, title: &'static str) -> Self {
        Self {
            line: Line {
                id,
                title,
                status: Status::Pass,
                detail: String::new(),
                notes: Vec::new(),
            },
        }
    }

    fn check(&mut self, ok: bool, what: String) {
        self.record(ok, false, what);
    }

    /// A sub-check whose failure is expected and documented.
    fn check_known_red(&mut self, ok: bool, what: String) {
        self.record(ok, true, what);
    }

    fn record(&mut self, ok: bool, known_red: bool, what: String) {
        let tag = match (ok, known_red) {
            (true, _) => "ok",
            (false, true) => "red",
            (false, false) => "FAIL",
        };
        if !ok {
            if known_red {
                if self.line.status == Status::Pass {
                    self.line.status = Status::Red;
                }
            } else {
                self.line.status = Status::Fail;
            }
        }
        self.line.notes.push(format!("[{tag}] {what}"));
    }

    fn note(&mut self, what: String) {
        self.line.notes.push(format!("[info] {what}"));
    }

    fn error(&mut self, what: String) {
        self.line.status = Status::Fail;
        self.line.notes.push(format!("[FAIL] error: {what}"));
    }

    fn done(mut self, started: Instant) -> Line {
        self.line.detail = format!("{:.1} s", started.elapsed().as_secs_f64());
        self.line
    }
}

fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    linear_fit(&lx, &ly).0
}

fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (a.ln() + (b.ln() - a.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

fn criterion_1() -> Line {
    let t0 = Instant::now();
    let mut c = Criterion::new("C1", "cross-representation agreement at delta = 0.3");
    let delta = 0.3;
    let run = || -> trapflux::Result<(f64, f64, f64)> {
        let series = TransferCurve::new(delta, Method::Series)?.with_series_terms(400);
        let integral = TransferCurve::new(delta, Method::Integral)?;
        let closed = TransferCurve::new(delta, Method::ClosedForm)?;
        let (mut si, mut sc, mut ic) = (0.0f64, 0.0f64, 0.0f64);
        for i in 0..401 {
            let s = -1.0 + 2.0 * i as f64 / 400.0;
            let fs = series.eval(s)?;
            let fi = integral.eval(s)?;
            si = si.max((fs - fi).abs());
            if s.abs() >= 0.05 {
                let fc = closed.eval(s)?;
                sc = sc.max((fs - fc).abs());
                ic = ic.max((fi - fc).abs());
            }
        }
        Ok((si, sc, ic))
    };
    match run() {
        Ok((si, sc, ic)) => {
            c.check(si <= 1e-6, format!("max |series - integral| = {si:.2e} (<= 1e-6)"));
            c.check(sc <= 1e-6, format!("max |series - closed| = {sc:.2e} (<= 1e-6)"));
            c.check(ic <= 1e-6, format!("max |integral - closed| = {ic:.2e} (<= 1e-6)"));
        }
        Err(e) => c.error(e.to_string()),
    }
    let secs = t0.elapsed().as_secs_f64();
    c.check(secs < 30.0, format!("runtime {secs:.2} s (< 30 s)"));
    c.done(t0)
}

fn richardson_slope(delta: f64) -> trapflux::Result<f64> {
    let d = |h: f64| -> trapflux::Result<f64> { Ok((f_integral(h, delta)? - f_integral(-h, delta)?) / (2.0 * h)) };
    let h = 1e-4;
    Ok((4.0 * d(h / 2.0)? - d(h)?) / 3.0)
}

fn richardson_limit_at_one(delta: f64) -> trapflux::Result<f64> {
    let h = 1e-4;
    Ok(2.0 * f_integral(1.0 - h / 2.0, delta)? - f_integral(1.0 - h, delta)?)
}

fn criterion_2() -> Line {
    let t0 = Instant::now();
    let mut c = Criterion::new("C2", "exact constants and small-gap asymptotics");
    let run = |c: &mut Criterion| -> trapflux::Result<()> {
        for delta in [0.025, 0.1, 0.3] {
            let f = saturation(delta)?;
            let f_lim = richardson_limit_at_one(delta)?;
            let k = slope_at_zero(delta)?;
            let k_fd = richardson_slope(delta)?;
            c.check(
                (f - f_lim).abs() <= 1e-5,
                format!(
                    "delta = {delta}: f = {f:.11}, limit = {f_lim:.11}, diff {:.1e}",
                    (f - f_lim).abs()
                ),
            );
            c.check(
                (k - k_fd).abs() <= 1e-5,
                format!(
                    "delta = {delta}: kappa = {k:.10}, finite difference = {k_fd:.10}, diff {:.1e}",
                    (k - k_fd).abs()
                ),
            );
        }
        let deltas = logspace(1e-3, 1e-1, 9);
        let mut rf = Vec::new();
        let mut rk = Vec::new();
        let mut rk_lead = Vec::new();
        for &d in &deltas {
            rf.push(saturation(d)? - (1.0 - (2f64.sqrt() - 1.0) * d));
            let k = slope_at_zero(d)?;
            rk.push(k - 2.0 / PI * (1.0 / d + 2.0));
            rk_lead.push(k - 2.0 / (PI * d));
        }
        let pf = log_slope(&deltas, &rf);
        c.check(
            (1.7..=2.3).contains(&pf),
            format!("saturation residual ~ delta^{pf:.3} (expect 2 +- 0.3)"),
        );
        let pk = log_slope(&deltas, &rk);
        c.check_known_red(
            (0.7..=1.3).contains(&pk),
            format!(
                "slope residual against (2/pi)(1/delta + 2) ~ delta^{pk:.3} (expect ~1); residual tends to {:.4}",
                rk[0]
            ),
        );
        let pl = log_slope(&deltas, &rk_lead);
        let ratio: Vec<f64> = deltas
            .iter()
            .zip(&rk_lead)
            .map(|(d, r)| r / (d * (1.0 / d).ln()))
            .collect();
        c.note(format!(
            "slope residual against (2/pi)/delta ~ delta^{pl:.3}; residual/(delta ln(1/delta)) from {:.3} to {:.3}",
            ratio[0],
            ratio[ratio.len() - 1]
        ));
        Ok(())
    };
    if let Err(e) = run(&mut c) {
        c.error(e.to_string());
    }
    c.done(t0)
}

/// Maximum relative error of `approx` against the integral on (0, 1], located
/// on a grid and refined by golden-section search.
fn max_rel_error(delta: f64, approx: fn(f64, f64) -> trapflux::Result<f64>) -> trapflux::Result<(f64, f64)> {
    let err = |s: f64| -> trapflux::Result<f64> {
        let f = f_integral(s, delta)?;
        Ok((approx(s, delta)? - f).abs() / f.abs())
    };
    let n = 2000;
    let mut best = (0.0, 0.0);
    for i in 1..=n {
        let s = i as f64 / n as f64;
        let e = err(s)?;
        if e > best.0 {
            best = (e, s);
        }
    }
    let h = 1.0 / n as f64;
    let (mut a, mut b) = ((best.1 - h).max(1e-9), (best.1 + h).min(1.0));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..60 {
        let x1 = b - g * (b - a);
        let x2 = a + g * (b - a);
        if err(x1)? > err(x2)? {
            b = x2;
        } else {
            a = x1;
        }
    }
    let s = 0.5 * (a + b);
    let e = err(s)?;
    Ok(if e > best.0 { (e, s) } else { best })
}

fn criterion_3() -> Line {
    let t0 = Instant::now();
    let mut c = Criterion::new("C3", "approximation errors against the integral");
    type Approx = fn(f64, f64) -> trapflux::Result<f64>;
    let cases: [(&str, Approx, f64, f64, bool); 6] = [
        ("piecewise linear", f_piecewise_linear, 0.025, 1.0 / 3.0, true),
        ("piecewise linear", f_piecewise_linear, 0.3, 1.0 / 3.0, true),
        ("arctan", f_arctan, 0.025, 0.020, false),
        ("arctan", f_arctan, 0.3, 0.22, false),
        ("adjusted arctan", f_arctan_adjusted, 0.025, 0.004, false),
        ("adjusted arctan", f_arctan_adjusted, 0.3, 0.008, false),
    ];
    for (name, f, delta, tol, may_be_red) in cases {
        match max_rel_error(delta, f) {
            Ok((e, s)) => {
                let msg = format!("{name} at delta = {delta}: max relative error {e:.5} at s = {s:.4} (<= {tol:.4})");
                if may_be_red {
                    c.check_known_red(e <= tol, msg);
                } else {
                    c.check(e <= tol, msg);
                }
            }
            Err(e) => c.error(e.to_string()),
        }
    }
    for delta in [0.025, 0.3] {
        let abs = (1..=2000).try_fold(0.0f64, |m, i| -> trapflux::Result<f64> {
            let s = i as f64 / 2000.0;
            Ok(m.max((f_piecewise_linear(s, delta)? - f_integral(s, delta)?).abs()))
        });
        if let Ok(a) = abs {
            c.note(format!(
                "piecewise linear at delta = {delta}: max absolute error {a:.4}"
            ));
        }
    }
    c.done(t0)
}

fn random_source(rng: &mut ChaCha8Rng) -> SourcePoint {
    SourcePoint::new(rng.gen_range(0.0..PI), rng.gen_range(0.0..2.0 * PI)).unwrap()
}

fn criterion_4() -> Line {
    let t0 = Instant::now();
    let mut c = Criterion::new("C4", "field correctness");
    let run = |c: &mut Criterion| -> trapflux::Result<()> {
        let geom = GyroGeometry::from_delta(0.025)?;
        let a = geom.r_g();
        let mut rng = ChaCha8Rng::seed_from_u64(4);

        // Harmonicity: 7-point Laplacian relative to the size of its terms.
        let mut worst: f64 = 0.0;
        for _ in 0..200 {
            let src = random_source(&mut rng);
            let obs = FieldPoint::new(
                a * rng.gen_range(1.05..5.0),
                rng.gen_range(0.0..PI),
                rng.gen_range(0.0..2.0 * PI),
            );
            let x = obs.to_cartesian();
            let h = 1e-4 * a;
            let p0 = psi_closed_at(x, src, &geom)?;
            let (mut lap, mut scale) = (0.0, 0.0);
            for i in 0..3 {
                let mut xp = x;
                let mut xm = x;
                xp[i] += h;
                xm[i] -= h;
                let d2 = psi_closed_at(xp, src, &geom)? + psi_closed_at(xm, src, &geom)? - 2.0 * p0;
                lap += d2;
                scale += d2.abs();
            }
            worst = worst.max(lap.abs() / scale);
        }
        c.check(
            worst < 1e-4,
            format!("relative Laplacian residual {worst:.2e} over 200 points (< 1e-4)"),
        );

        // Flux through spheres of four radii.
        let src = SourcePoint::new(0.7, 0.3)?;
        for r in [1.1, 1.5, 3.0, 10.0] {
            let r = r * a;
            let inner = |theta: f64| -> f64 {
                let g = |phi: f64| {
                    b_field(FieldPoint::new(r, theta, phi), src, &geom)
                        .map(|b| b[0])
                        .unwrap_or(f64::NAN)
                };
                let lo = quad(g, 0.0, src.phi_f, 1e-14, 1e-13).unwrap_or(f64::NAN);
                let hi = quad(g, src.phi_f, 2.0 * PI, 1e-14, 1e-13).unwrap_or(f64::NAN);
                (lo + hi) * r * r * theta.sin()
            };
            let flux = quad(inner, 0.0, src.theta_f, 1e-13, 1e-12)? + quad(inner, src.theta_f, PI, 1e-13, 1e-12)?;
            c.check(
                (flux - 1.0).abs() <= 1e-8,
                format!("flux through r = {:.2} r_g: {flux:.12} (|err| <= 1e-8)", r / a),
            );
        }

        // Dirichlet Green's function on the boundary.
        let mut worst: f64 = 0.0;
        for _ in 0..500 {
            let src = random_source(&mut rng);
            let obs = FieldPoint::new(a, rng.gen_range(0.0..PI), rng.gen_range(0.0..2.0 * PI));
            let d = {
                let p = obs.to_cartesian();
                let q: Vec3 = src.direction().map(|v| v * a);
                ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt()
            };
            if d < 1e-3 * a {
                continue;
            }
            worst = worst.max((greens_dirichlet(obs, src, &geom)? * d * d).abs());
        }
        c.check(
            worst <= 1e-12,
            format!("max |G_D| d^2 on the rotor surface {worst:.2e} (<= 1e-12)"),
        );

        // Series against closed form.
        let (mut wp, mut wb): (f64, f64) = (0.0, 0.0);
        for _ in 0..300 {
            let src = random_source(&mut rng);
            let obs = FieldPoint::new(
                a * rng.gen_range(1.2..4.0),
                rng.gen_range(0.0..PI),
                rng.gen_range(0.0..2.0 * PI),
            );
            let ps = psi_series(obs, src, &geom, 400)?;
            let pc = psi_closed(obs, src, &geom)?;
            wp = wp.max((ps.value - pc).abs() / pc.abs().max(1.0));
            let bs = br_series(obs, src, &geom, 400)?;
            let bc = b_field(obs, src, &geom)?[0];
            wb = wb.max((bs.value - bc).abs() / bc.abs().max(1.0));
        }
        c.check(
            wp <= 1e-10,
            format!("potential series vs closed form {wp:.2e} at r >= 1.2 r_g (<= 1e-10)"),
        );
        c.check(
            wb <= 1e-10,
            format!("radial field series vs closed form {wb:.2e} at r >= 1.2 r_g (<= 1e-10)"),
        );
        Ok(())
    };
    if let Err(e) = run(&mut c) {
        c.error(e.to_string());
    }
    let secs = t0.elapsed().as_secs_f64();
    c.check(secs < 60.0, format!("runtime {secs:.2} s (< 60 s)"));
    c.done(t0)
}

fn first_order_error(fluxon: &Fluxon, dynamics: &RotorDynamics) -> f64 {
    let n = 20_000;
    (0..n)
        .map(|i| {
            let t = GPB_POLHODE_PERIOD * i as f64 / n as f64 + 0.37;
            (cos_theta_exact(fluxon, dynamics, t) - cos_theta_first_order(fluxon, dynamics, t)).abs()
        })
        .fold(0.0, f64::max)
}

fn criterion_5() -> Line {
    let t0 = Instant::now();
    let mut c = Criterion::new("C5", "kinematics");
    let dot = |a: Vec3, b: Vec3| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let dynamics = RotorDynamics::gpb();
    let fluxon = Fluxon::new(1.1, 2.3, 1).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let t = rng.gen_range(0.0..1e4);
        let f = body_frame(&dynamics, t);
        let v = [f.x_b, f.y_b, f.z_b];
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(v[i], v[j]) - target).abs());
            }
        }
        let e = fluxon_direction(&fluxon, &dynamics, t);
        let z = loop_normal(&dynamics, t);
        worst = worst.max((dot(e, e) - 1.0).abs()).max((dot(z, z) - 1.0).abs());
    }
    c.check(
        worst <= 1e-12,
        format!("frame and direction norms/orthogonality {worst:.2e} over 1e4 times (<= 1e-12)"),
    );

    let base = first_order_error(&fluxon, &dynamics);
    let scaled = RotorDynamics {
        alpha: 10.0 * dynamics.alpha,
        beta0: 10.0 * dynamics.beta0,
        ..dynamics
    };
    let big = first_order_error(&fluxon, &scaled);
    let growth = big / base;
    c.check(
        (30.0..=300.0).contains(&growth),
        format!("first-order error {base:.2e} -> {big:.2e} for x10 misalignment, growth {growth:.1} (in [30, 300])"),
    );
    c.done(t0)
}

fn resolved(power: &[f64], b0: usize, b1: usize) -> bool {
    if b0 == b1 || b1 == 0 || b1 + 1 >= power.len() {
        return false;
    }
    let local_max = power[b1] >= power[b1 - 1] && power[b1] >= power[b1 + 1];
    let (lo, hi) = (b0.min(b1), b0.max(b1));
    let dip = (lo + 1..hi).any(|i| power[i] < 0.5 * power[b0].min(power[b1]));
    local_max && dip
}

fn criterion_6() -> Line {
    let t0 = Instant::now();
    let mut c = Criterion::new("C6", "spectral comb of a single fluxon over 1800 s");
    let run = |c: &mut Criterion| -> trapflux::Result<()> {
        let curve = TransferCurve::new(0.025, Method::ArctanAdjusted)?;
        let dynamics = RotorDynamics::gpb();
        let pop = FluxonPopulation {
            fluxons: vec![Fluxon::new(1.0, 0.7, 1)?],
            seed: None,
            provenance: trapflux::signal::Provenance::File,
        };
        let cfg = StreamConfig {
            duration: 1800.0,
            sample_rate: 2200.0,
            ..StreamConfig::default()
        };
        let signal = generate_signal(&pop, &curve, &dynamics, &cfg)?;
        let spec = power_spectrum(&signal, Window::Hann)?;
        let fc = 100.0 - 1.0 / GPB_ROLL_PERIOD;
        let fr = 1.0 / GPB_ROLL_PERIOD;
        let res = spec.resolution();

        // Each line is a cluster of unresolved polhode sidebands, so the
        // band maximum may sit a few f_p away from the nominal frequency.
        let cluster = 0.01;
        let mut dominant = true;
        let mut peaks = Vec::new();
        for k in 0..4 {
            let f = (2 * k + 1) as f64 * fc;
            let (pf, _) = spec.peak_near(f, 40.0);
            dominant &= (pf - f).abs() <= cluster;
            peaks.push(format!("{:+.4}", pf - f));
        }
        c.check(
            dominant,
            format!(
                "maxima of the +-40 Hz bands around (2k+1) f_c, k = 0..3, offset by {} Hz (<= {cluster} Hz)",
                peaks.join(", ")
            ),
        );

        let (_, carrier) = spec.peak_near(fc, cluster);
        for (name, f) in [
            ("2f_c", 2.0 * fc),
            ("2f_c - f_r", 2.0 * fc - fr),
            ("2f_c + f_r", 2.0 * fc + fr),
        ] {
            let (_, p) = spec.peak_near(f, fr / 3.0);
            let ratio = (carrier / p).sqrt();
            c.check(
                (10f64.powf(3.3)..=1e6).contains(&ratio),
                format!(
                    "carrier/{name} amplitude ratio 10^{:.2} (in [10^3.3, 10^6])",
                    ratio.log10()
                ),
            );
        }

        let tp = GPB_POLHODE_PERIOD;
        let b0 = spec.bin(fc);
        for m in 1..=2 {
            let off = m as f64 / tp;
            let ok = resolved(&spec.power, b0, spec.bin(fc + off)) && resolved(&spec.power, b0, spec.bin(fc - off));
            c.check_known_red(
                ok,
                format!(
                    "polhode sidebands at f_c +- {m}/T_p ({:.2e} Hz) resolved; bin width {res:.2e} Hz, record {:.0} s",
                    off,
                    signal.len() as f64 * signal.dt
                ),
            );
        }
        Ok(())
    };
    if let Err(e) = run(&mut c) {
        c.error(e.to_string());
    }
    c.done(t0)
}

fn criterion_7() -> Line {
    let t0 = Instant::now();
    let mut c = Criterion::new("C7", "sqrt(N) scaling of the signal maxima");
    let run = |c: &mut Criterion| -> trapflux::Result<()> {
        let curve = TransferCurve::new(0.025, Method::ArctanAdjusted)?;
        let dynamics = RotorDynamics::gpb();
        let cfg = StreamConfig {
            duration: GPB_ROLL_PERIOD,
            sample_rate: 220.0,
            ..StreamConfig::default()
        };
        let ns = [4usize, 16, 64, 256];
        let mut means = Vec::new();
        for &n in &ns {
            let mut sum = 0.0;
            for seed in 0..50u64 {
                let pop = FluxonPopulation::uniform(n / 2, 7000 + 100 * n as u64 + seed);
                let s = generate_signal(&pop, &curve, &dynamics, &cfg)?;
                sum += s.samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            }
            means.push(sum / 50.0);
        }
        let x: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
        let p = log_slope(&x, &means);
        let shown: Vec<String> = ns.iter().zip(&means).map(|(n, m)| format!("N={n}: {m:.3}")).collect();
        c.check(
            (0.35..=0.65).contains(&p),
            format!("mean max|flux| {}; exponent {p:.3} (0.5 +- 0.15)", shown.join(", ")),
        );
        Ok(())
    };
    if let Err(e) = run(&mut c) {
        c.error(e.to_string());
    }
    c.done(t0)
}

fn criterion_8() -> Line {
    let t0 = Instant::now();
    let mut c = Criterion::new("C8", "harmonic amplitude decay");
    let run = |c: &mut Criterion| -> trapflux::Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let fluxons: Vec<Fluxon> = (0..10)
            .map(|_| Fluxon::new(rng.gen_range(-1.0f64..1.0).acos(), rng.gen_range(0.0..2.0 * PI), 1))
            .collect::<trapflux::Result<_>>()?;
        let dynamics = RotorDynamics::gpb();
        let ks: Vec<f64> = (5..=40).map(|k| k as f64).collect();
        for (method, primary) in [(Method::Integral, true), (Method::ArctanAdjusted, false)] {
            let curve = TransferCurve::new(0.025, method)?;
            let amps = slow_fourier_amplitudes(&fluxons, &curve, &dynamics, &[0.0], 40)?;
            let sa = log_slope(&ks, &amps.a[0][5..=40]);
            let sb = log_slope(&ks, &amps.b[0][5..=40]);
            let msg = format!(
                "{} curve: A_k slope {sa:.3} (-2 +- 0.4), B_k slope {sb:.3} (-1 +- 0.4)",
                method.name()
            );
            if primary {
                c.check((-2.4..=-1.6).contains(&sa) && (-1.4..=-0.6).contains(&sb), msg);
            } else {
                c.note(msg);
            }
        }
        Ok(())
    };
    if let Err(e) = run(&mut c) {
        c.error(e.to_string());
    }
    c.done(t0)
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

fn criterion_9() -> Line {
    let t0 = Instant::now();
    let mut c = Criterion::new("C9", "envelope periodicity over two polhode periods");
    let run = |c: &mut Criterion| -> trapflux::Result<()> {
        let curve = TransferCurve::new(0.025, Method::ArctanAdjusted)?;
        let dynamics = RotorDynamics::gpb();
        let bias = DipoleBias {
            flux: 40.0,
            axis: None,
            pairs: Some(40),
        };
        let pop = FluxonPopulation::dipole_biased(100, bias, &curve, 9)?;
        let cfg = StreamConfig {
            duration: 2.0 * GPB_POLHODE_PERIOD,
            sample_rate: 220.0,
            ..StreamConfig::default()
        };
        let mut env = Envelope::new(2.0, EnvelopeMode::Absolute)?;
        generate_stream(&pop, &curve, &dynamics, &cfg, &mut env)?;
        let values: Vec<f64> = env.finish().iter().map(|p| p.value).collect();
        let lag = (GPB_POLHODE_PERIOD / 2.0).round() as usize;
        let r = pearson(&values[..values.len() - lag], &values[lag..]);
        c.check(
            r > 0.9,
            format!("autocorrelation at lag T_p ({lag} blocks) = {r:.6} (> 0.9)"),
        );
        c.check(
            r < 1.0 - 1e-6,
            format!("no exact repetition: 1 - r = {:.2e} (> 1e-6)", 1.0 - r),
        );
        Ok(())
    };
    if let Err(e) = run(&mut c) {
        c.error(e.to_string());
    }
    c.done(t0)
}

/// Complete elliptic integrals by the arithmetic-geometric mean.
fn agm_k_e(k: f64) -> (f64, f64) {
    let (mut a, mut b) = (1.0f64, (1.0 - k * k).sqrt());
    let mut pow = 0.5;
    let mut sum = 0.5 * k * k;
    for _ in 0..40 {
        let c = 0.5 * (a - b);
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
        pow *= 2.0;
        sum += pow * c * c;
        if c.abs() < 1e-17 {
            break;
        }
    }
    let kk = PI / (2.0 * a);
    (kk, kk * (1.0 - sum))
}

fn criterion_10() -> Line {
    let t0 = Instant::now();
    let mut c = Criterion::new("C10", "appendix series of Legendre polynomials");
    let run = |c: &mut Criterion| -> trapflux::Result<()> {
        let terms = 8000;
        let n_max = 2 * terms + 1;
        let p1 = legendre_p_all(n_max, 1.0)?;
        let d1 = legendre_p_deriv_all(n_max, 1.0);
        let d0 = legendre_p_deriv_all(n_max, 0.0);
        for eta in [0.5, 0.7, 0.975] {
            let z: f64 = eta * eta;
            // (−η²)^k (1/2)_k / k!, and the same over (k+1)
            let (mut f1, mut f2, mut f1d0, mut f2d0, mut f1d1, mut f2d1) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
            let mut w = 1.0f64;
            for k in 0..terms {
                let n = 2 * k + 1;
                let w2 = w / (k as f64 + 1.0);
                f1 += w * p1[n];
                f2 += w2 * p1[n];
                f1d0 += w * d0[n];
                f2d0 += w2 * d0[n];
                f1d1 += w * d1[n];
                f2d1 += w2 * d1[n];
                w *= -z * (k as f64 + 0.5) / (k as f64 + 1.0);
            }
            let (f1, f2) = (2.0 * eta * f1, 0.5 * eta * f2);
            let (f1d0, f2d0) = (2.0 * eta * f1d0, 0.5 * eta * f2d0);
            let (f1d1, f2d1) = (2.0 * eta * f1d1, 0.5 * eta * f2d1);

            let (kk, ee) = agm_k_e(eta);
            let u = (1.0 + z).powf(-0.5);
            let du = -0.5 * (1.0 + z).powf(-1.5);
            let ddu = 0.75 * (1.0 + z).powf(-2.5);
            let refs = [
                ("F1(1)", f1, 2.0 * eta / (1.0 + z).sqrt()),
                ("F2(1)", f2, ((1.0 + z).sqrt() - 1.0) / eta),
                ("F1'(0)", f1d0, 4.0 * eta * ee / (PI * (1.0 - z))),
                ("F2'(0)", f2d0, -2.0 / (PI * eta) * (ee - kk)),
                (
                    "F1'(1)",
                    f1d1,
                    2.0 * eta * (2.0 * z * (du + z * ddu) + 3.0 * z * du + u),
                ),
                ("F2'(1)", f2d1, 0.5 * eta * (2.0 * z * du + u)),
            ];
            let worst = refs
                .iter()
                .map(|(_, s, r)| (s - r).abs() / r.abs().max(1.0))
                .fold(0.0, f64::max);
            let list: Vec<String> = refs.iter().map(|(n, s, _)| format!("{n}={s:.12}")).collect();
            c.check(
                worst <= 1e-10,
                format!(
                    "eta = {eta}: worst deviation {worst:.1e} (<= 1e-10); {}",
                    list.join(" ")
                ),
            );
        }
        Ok(())
    };
    if let Err(e) = run(&mut c) {
        c.error(e.to_string());
    }
    c.done(t0)
}

fn runtime_budget() -> Line {
    let t0 = Instant::now();
    let mut c = Criterion::new("B", "100 pairs x 60 s at 2200 Hz, single thread");
    let run = |c: &mut Criterion| -> trapflux::Result<()> {
        let curve = TransferCurve::new(0.025, Method::ArctanAdjusted)?;
        let pop = FluxonPopulation::uniform(100, 1);
        let cfg = StreamConfig {
            parallel: false,
            kinematics: KinematicsMode::Exact,
            ..StreamConfig::default()
        };
        let start = Instant::now();
        let s = generate_signal(&pop, &curve, &RotorDynamics::gpb(), &cfg)?;
        let secs = start.elapsed().as_secs_f64();
        c.check(
            s.len() == 132_000 && secs < 300.0,
            format!("{} samples in {secs:.2} s (< 300 s)", s.len()),
        );
        Ok(())
    };
    if let Err(e) = run(&mut c) {
        c.error(e.to_string());
    }
    c.done(t0)
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    // `cargo test` passes harness flags; a bare word filters criteria by id.
    let filter: Vec<&str> = args
        .iter()
        .filter(|a| !a.starts_with('-'))
        .map(String::as_str)
        .collect();
    let wanted = |id: &str| filter.is_empty() || filter.iter().any(|f| f.eq_ignore_ascii_case(id));

    type Run = fn() -> Line;
    let all: [(&str, Run); 11] = [
        ("C1", criterion_1),
        ("C2", criterion_2),
        ("C3", criterion_3),
        ("C4", criterion_4),
        ("C5", criterion_5),
        ("C6", criterion_6),
        ("C7", criterion_7),
        ("C8", criterion_8),
        ("C9", criterion_9),
        ("C10", criterion_10),
        ("B", runtime_budget),
    ];
    let mut failed = 0;
    let mut red = 0;
    for (id, f) in all {
        if !wanted(id) {
            continue;
        }
        let line = f();
        let tag = match line.status {
            Status::Pass => "PASS",
            Status::Fail => {
                failed += 1;
                "FAIL"
            }
            Status::Red => {
                red += 1;
                "RED "
            }
        };
        println!("{tag} {:<4} {} ({})", line.id, line.title, line.detail);
        for n in &line.notes {
            println!("       {n}");
        }
    }
    println!("acceptance: {failed} failed, {red} known red");
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
