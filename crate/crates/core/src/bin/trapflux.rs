use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sha2::{Digest, Sha256};

use trapflux::config::{PopulationMode, RunConfig};
use trapflux::signal::{
    envelope, file_sink, format_f64, generate_signal, generate_stream, power_spectrum, read_signal,
    slow_fourier_amplitudes, Envelope, FluxonPopulation, Format,
};
use trapflux::transfer::{Method, TransferCurve, CLOSED_FORM_S_MIN};
use trapflux::{Error, Result};

#[derive(Parser)]
#[command(
    name = "trapflux",
    version,
    about = "Trapped-flux signal simulator for a spherical rotor and pick-up loop"
)]
struct Cli {
    /// Configuration file of `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// RNG seed; overrides `seed` from the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output path; CSV outputs go to stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Extra `key=value` settings applied after the configuration file.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    /// Log progress at info level.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the transfer curve by every method.
    Curve {
        /// Tabulate the curve constants against δ instead.
        #[arg(long)]
        sweep: bool,
    },
    /// Sample the flux signal to a binary or CSV file.
    Generate,
    /// Block maxima of a signal file, or of a freshly generated signal.
    Envelope {
        /// Signal file (binary or CSV).
        input: Option<PathBuf>,
    },
    /// Power spectrum of a signal file, or of a freshly generated signal.
    Spectrum {
        /// Signal file (binary or CSV).
        input: Option<PathBuf>,
    },
    /// Slow Fourier amplitudes of the carrier harmonics over the polhode phase.
    Amplitudes,
    /// Write the configured fluxon population, or summarize a population file.
    Population {
        /// Population file to summarize instead.
        #[arg(long)]
        inspect: Option<PathBuf>,
    },
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::read(p).map_err(|e| match e {
            Error::Io { path, source } => Error::Config(format!("{}: {source}", path.display())),
            other => other,
        })?,
        None => RunConfig::default(),
    };
    for kv in &cli.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn population(cfg: &RunConfig, curve: &TransferCurve) -> Result<FluxonPopulation> {
    match (&cfg.population.mode, &cfg.population.file) {
        (PopulationMode::File, Some(path)) => FluxonPopulation::read(path),
        _ => FluxonPopulation::generate(cfg.population_spec(), curve, cfg.seed),
    }
}

fn sha256_file(path: &Path) -> Result<String> {
    let mut f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut h = Sha256::new();
    io::copy(&mut f, &mut h).map_err(|e| Error::io(path, e))?;
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest");
    PathBuf::from(name)
}

/// `<out>.manifest`: provenance as comments, then the full configuration.
fn write_manifest(out: &Path, command: &str, cfg: &RunConfig, extra: &[(String, String)]) -> Result<()> {
    let mut text = String::new();
    text.push_str(&format!("# trapflux {}\n", env!("CARGO_PKG_VERSION")));
    text.push_str(&format!("# command = {command}\n"));
    text.push_str(&format!("# output = {}\n", out.display()));
    text.push_str(&format!("# sha256 = {}\n", sha256_file(out)?));
    for (k, v) in extra {
        text.push_str(&format!("# {k} = {v}\n"));
    }
    text.push_str(&cfg.to_text());
    let path = manifest_path(out);
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

/// CSV destination: the `--out` file, or stdout.
fn csv_out(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| Error::io(p, e))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn finish_csv(
    mut w: Box<dyn Write>,
    out: Option<&Path>,
    command: &str,
    cfg: &RunConfig,
    extra: &[(String, String)],
) -> Result<()> {
    w.flush()
        .map_err(|e| Error::io(out.unwrap_or(Path::new("<stdout>")), e))?;
    drop(w);
    if let Some(p) = out {
        write_manifest(p, command, cfg, extra)?;
    }
    Ok(())
}

fn io_err(out: Option<&Path>) -> impl Fn(io::Error) -> Error + '_ {
    move |e| Error::io(out.unwrap_or(Path::new("<stdout>")), e)
}

fn constants(curve: &TransferCurve) -> Vec<(String, String)> {
    vec![
        ("delta".into(), curve.delta().to_string()),
        ("f_delta".into(), curve.f_delta().to_string()),
        ("kappa_delta".into(), curve.kappa_delta().to_string()),
        ("delta_width".into(), curve.delta_width().to_string()),
        ("a_delta".into(), curve.a_delta().to_string()),
    ]
}

fn cmd_curve(cfg: &RunConfig, out: Option<&Path>, sweep: bool) -> Result<()> {
    let err = io_err(out);
    let mut w = csv_out(out)?;
    if sweep {
        writeln!(w, "delta,f_delta,kappa_delta,delta_width,a_delta").map_err(&err)?;
        let n = cfg.curve.points.max(2);
        let (lo, hi) = (0.01f64.ln(), 0.5f64.ln());
        for i in 0..n {
            let d = (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp();
            let c = TransferCurve::new(d, Method::ArctanAdjusted)?;
            let row: Vec<String> = [d, c.f_delta(), c.kappa_delta(), c.delta_width(), c.a_delta()]
                .iter()
                .map(|&v| format_f64(v))
                .collect();
            writeln!(w, "{}", row.join(",")).map_err(&err)?;
        }
        return finish_csv(w, out, "curve --sweep", cfg, &[]);
    }

    let delta = cfg.geometry.delta;
    let curves: Vec<TransferCurve> = Method::ALL
        .iter()
        .map(|&m| {
            let c = TransferCurve::new(delta, m)?;
            Ok(match (m, cfg.curve.series_terms) {
                (Method::Series, Some(k)) => c.with_series_terms(k),
                _ => c,
            })
        })
        .collect::<Result<_>>()?;
    let reference = TransferCurve::new(delta, Method::Integral)?;
    for (k, v) in constants(&reference) {
        eprintln!("{k} = {v}");
    }

    let mut header = String::from("s");
    for m in Method::ALL {
        header.push(',');
        header.push_str(m.name());
    }
    for m in Method::ALL.iter().filter(|m| !m.is_exact()) {
        header.push_str(&format!(",err_{}", m.name()));
    }
    writeln!(w, "{header}").map_err(&err)?;

    let n = cfg.curve.points;
    for i in 0..n {
        let s = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
        let exact = reference.eval(s)?;
        let mut row = format_f64(s);
        let mut errs = String::new();
        for c in &curves {
            let v = if c.method() == Method::ClosedForm && s.abs() < CLOSED_FORM_S_MIN {
                f64::NAN
            } else {
                c.eval(s)?
            };
            row.push_str(&format!(",{}", format_f64(v)));
            if !c.method().is_exact() {
                errs.push_str(&format!(",{}", format_f64(v - exact)));
            }
        }
        writeln!(w, "{row}{errs}").map_err(&err)?;
    }
    finish_csv(w, out, "curve", cfg, &constants(&reference))
}

fn cmd_generate(cfg: &RunConfig, out: Option<&Path>) -> Result<()> {
    let curve = cfg.transfer_curve()?;
    let dynamics = cfg.dynamics()?;
    let pop = population(cfg, &curve)?;
    let default_name = match cfg.sampling.format {
        Format::Binary => "signal.bin",
        Format::Csv => "signal.csv",
    };
    let path = out.map_or_else(|| PathBuf::from(default_name), Path::to_path_buf);
    let format = if out.is_some() {
        Format::from_path(&path)
    } else {
        cfg.sampling.format
    };
    log::info!(
        "generating {} fluxons for {} s into {}",
        pop.len(),
        cfg.sampling.duration,
        path.display()
    );
    let mut sink = file_sink(&path, format)?;
    let summary = generate_stream(&pop, &curve, &dynamics, &cfg.stream_config(), sink.as_mut())?;
    drop(sink);
    let extra = [
        ("samples".to_string(), summary.samples.to_string()),
        ("fluxons".to_string(), pop.len().to_string()),
        ("provenance".to_string(), pop.provenance.name().to_string()),
    ];
    write_manifest(&path, "generate", cfg, &extra)?;
    eprintln!("wrote {} samples to {}", summary.samples, path.display());
    Ok(())
}

fn cmd_envelope(cfg: &RunConfig, out: Option<&Path>, input: Option<&Path>) -> Result<()> {
    let points = match input {
        Some(p) => envelope(&read_signal(p)?, cfg.envelope.block, cfg.envelope.mode)?,
        None => {
            let curve = cfg.transfer_curve()?;
            let pop = population(cfg, &curve)?;
            let mut env = Envelope::new(cfg.envelope.block, cfg.envelope.mode)?;
            generate_stream(&pop, &curve, &cfg.dynamics()?, &cfg.stream_config(), &mut env)?;
            env.points
        }
    };
    let err = io_err(out);
    let mut w = csv_out(out)?;
    writeln!(w, "t,envelope").map_err(&err)?;
    for p in &points {
        writeln!(w, "{},{}", format_f64(p.t), format_f64(p.value)).map_err(&err)?;
    }
    finish_csv(w, out, "envelope", cfg, &input_extra(input))
}

fn input_extra(input: Option<&Path>) -> Vec<(String, String)> {
    input
        .map(|p| vec![("input".to_string(), p.display().to_string())])
        .unwrap_or_default()
}

fn cmd_spectrum(cfg: &RunConfig, out: Option<&Path>, input: Option<&Path>) -> Result<()> {
    let signal = match input {
        Some(p) => read_signal(p)?,
        None => {
            let curve = cfg.transfer_curve()?;
            let pop = population(cfg, &curve)?;
            generate_signal(&pop, &curve, &cfg.dynamics()?, &cfg.stream_config())?
        }
    };
    let sp = power_spectrum(&signal, cfg.window)?;
    let err = io_err(out);
    let mut w = csv_out(out)?;
    writeln!(w, "frequency,power").map_err(&err)?;
    for (f, p) in sp.frequency.iter().zip(&sp.power) {
        writeln!(w, "{},{}", format_f64(*f), format_f64(*p)).map_err(&err)?;
    }
    finish_csv(w, out, "spectrum", cfg, &input_extra(input))
}

fn cmd_amplitudes(cfg: &RunConfig, out: Option<&Path>) -> Result<()> {
    let curve = cfg.transfer_curve()?;
    let pop = population(cfg, &curve)?;
    let a = &cfg.amplitudes;
    let n = a.tau_points.max(1);
    let tau: Vec<f64> = (0..n)
        .map(|i| {
            if n == 1 {
                a.tau_start
            } else {
                a.tau_start + (a.tau_end - a.tau_start) * i as f64 / (n - 1) as f64
            }
        })
        .collect();
    let amps = slow_fourier_amplitudes(&pop.fluxons, &curve, &cfg.dynamics()?, &tau, a.k_max)?;
    let err = io_err(out);
    let mut w = csv_out(out)?;
    let mut header = String::from("tau");
    for k in 0..=a.k_max {
        header.push_str(&format!(",A{k}"));
    }
    for k in 0..=a.k_max {
        header.push_str(&format!(",B{k}"));
    }
    writeln!(w, "{header}").map_err(&err)?;
    for (i, t) in amps.tau.iter().enumerate() {
        let mut row = format_f64(*t);
        for v in amps.a[i].iter().chain(&amps.b[i]) {
            row.push_str(&format!(",{}", format_f64(*v)));
        }
        writeln!(w, "{row}").map_err(&err)?;
    }
    finish_csv(w, out, "amplitudes", cfg, &[])
}

fn cmd_population(cfg: &RunConfig, out: Option<&Path>, inspect: Option<&Path>) -> Result<()> {
    let curve = cfg.transfer_curve()?;
    if let Some(p) = inspect {
        let pop = FluxonPopulation::read(p)?;
        let (plus, minus) = pop.polarity_counts();
        println!("fluxons = {}", pop.len());
        println!("positive = {plus}");
        println!("negative = {minus}");
        for (name, axis) in [("x", [1.0, 0.0, 0.0]), ("y", [0.0, 1.0, 0.0]), ("z", [0.0, 0.0, 1.0])] {
            println!("net_flux_{name} = {}", pop.net_flux_along(axis, &curve)?);
        }
        return Ok(());
    }
    let pop = population(cfg, &curve)?;
    let text = pop.to_text();
    match out {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| Error::io(p, e))?;
            write_manifest(p, "population", cfg, &[("fluxons".into(), pop.len().to_string())])?;
        }
        None => io::stdout().write_all(text.as_bytes()).map_err(io_err(None))?,
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Curve { sweep } => cmd_curve(&cfg, out, *sweep),
        Command::Generate => cmd_generate(&cfg, out),
        Command::Envelope { input } => cmd_envelope(&cfg, out, input.as_deref()),
        Command::Spectrum { input } => cmd_spectrum(&cfg, out, input.as_deref()),
        Command::Amplitudes => cmd_amplitudes(&cfg, out),
        Command::Population { inspect } => cmd_population(&cfg, out, inspect.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        // Output piped into `head` and the like.
        Err(Error::Io { source, .. }) if source.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                e if e.is_config() => 2,
                Error::Io { .. } | Error::Sink(_) => 1,
                _ => 3,
            })
        }
    }
}
