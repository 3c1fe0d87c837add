//! Signal files: raw little-endian binary with a text header, or CSV.
//!
//! The binary header is 64 bytes of ASCII, `TFLUX1 t0=<s> dt=<s> n=<count>`
//! padded with spaces and ending in a newline, followed by `n` f64 samples.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::stream::{BlockSink, SampledSignal};

pub const HEADER_LEN: usize = 64;
const MAGIC: &str = "TFLUX1";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Binary,
    Csv,
}

impl Format {
    /// `.csv` means CSV, anything else binary.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Binary,
        }
    }
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bin" | "binary" => Ok(Self::Binary),
            "csv" => Ok(Self::Csv),
            other => Err(Error::Config(format!(
                "unknown format `{other}` (expected binary or csv)"
            ))),
        }
    }
}

/// Shortest round-trip text for `x`, switching to exponent form for very
/// small or large magnitudes.
pub fn format_f64(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn header(t0: f64, dt: f64, n: usize) -> Result<[u8; HEADER_LEN]> {
    let text = format!("{MAGIC} t0={t0:e} dt={dt:e} n={n}");
    if text.len() >= HEADER_LEN {
        return Err(Error::InvalidParameter("signal header does not fit in 64 bytes".into()));
    }
    let mut out = [b' '; HEADER_LEN];
    out[..text.len()].copy_from_slice(text.as_bytes());
    out[HEADER_LEN - 1] = b'\n';
    Ok(out)
}

/// Writes blocks as CSV lines `t,flux`.
pub struct CsvSink<W: Write> {
    out: W,
    path: PathBuf,
    started: bool,
}

impl<W: Write> CsvSink<W> {
    pub fn new(out: W, path: impl Into<PathBuf>) -> Self {
        Self {
            out,
            path: path.into(),
            started: false,
        }
    }

    fn write_inner(&mut self, block: &SampledSignal) -> std::io::Result<()> {
        if !self.started {
            writeln!(self.out, "t,flux")?;
            self.started = true;
        }
        for (i, v) in block.samples.iter().enumerate() {
            writeln!(self.out, "{},{}", format_f64(block.time(i)), format_f64(*v))?;
        }
        Ok(())
    }
}

impl<W: Write> BlockSink for CsvSink<W> {
    fn write_block(&mut self, block: &SampledSignal) -> Result<()> {
        let path = self.path.clone();
        self.write_inner(block).map_err(|e| Error::io(path, e))
    }

    fn finish(&mut self) -> Result<()> {
        if !self.started {
            writeln!(self.out, "t,flux").map_err(|e| Error::io(&self.path, e))?;
            self.started = true;
        }
        self.out.flush().map_err(|e| Error::io(&self.path, e))
    }
}

/// Writes the binary format; the sample count in the header is patched on finish.
pub struct BinarySink<W: Write + Seek> {
    out: W,
    path: PathBuf,
    t0: Option<f64>,
    dt: f64,
    n: usize,
}

impl<W: Write + Seek> BinarySink<W> {
    pub fn new(out: W, path: impl Into<PathBuf>) -> Self {
        Self {
            out,
            path: path.into(),
            t0: None,
            dt: 0.0,
            n: 0,
        }
    }

    fn write_inner(&mut self, block: &SampledSignal) -> Result<()> {
        if self.t0.is_none() {
            self.t0 = Some(block.t_start);
            self.dt = block.dt;
            self.out.write_all(&header(block.t_start, block.dt, 0)?)?;
        }
        for v in &block.samples {
            self.out.write_all(&v.to_le_bytes())?;
        }
        self.n += block.len();
        Ok(())
    }

    fn finish_inner(&mut self) -> Result<()> {
        let h = header(self.t0.unwrap_or(0.0), self.dt, self.n)?;
        self.out.seek(SeekFrom::Start(0))?;
        self.out.write_all(&h)?;
        self.out.seek(SeekFrom::End(0))?;
        self.out.flush()?;
        Ok(())
    }

    fn with_path(&self, e: Error) -> Error {
        match e {
            Error::Sink(e) => Error::io(&self.path, e),
            other => other,
        }
    }
}

impl<W: Write + Seek> BlockSink for BinarySink<W> {
    fn write_block(&mut self, block: &SampledSignal) -> Result<()> {
        self.write_inner(block).map_err(|e| self.with_path(e))
    }

    fn finish(&mut self) -> Result<()> {
        self.finish_inner().map_err(|e| self.with_path(e))
    }
}

/// Opens a file sink in the given format.
pub fn file_sink(path: &Path, format: Format) -> Result<Box<dyn BlockSink>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(match format {
        Format::Csv => Box::new(CsvSink::new(BufWriter::new(file), path)),
        Format::Binary => Box::new(BinarySink::new(BufWriter::new(file), path)),
    })
}

pub fn write_signal(path: &Path, format: Format, signal: &SampledSignal) -> Result<()> {
    let mut sink = file_sink(path, format)?;
    sink.write_block(signal)?;
    sink.finish()
}

fn parse_header(bytes: &[u8], path: &str) -> Result<(f64, f64, usize)> {
    let bad = |detail: &str| Error::Parse {
        path: path.to_string(),
        offset: 0,
        detail: detail.to_string(),
    };
    let text = std::str::from_utf8(bytes).map_err(|_| bad("header is not ASCII"))?;
    let mut fields = text.split_whitespace();
    if fields.next() != Some(MAGIC) {
        return Err(bad("missing TFLUX1 magic"));
    }
    let mut t0 = None;
    let mut dt = None;
    let mut n = None;
    for f in fields {
        match f.split_once('=') {
            Some(("t0", v)) => t0 = v.parse::<f64>().ok(),
            Some(("dt", v)) => dt = v.parse::<f64>().ok(),
            Some(("n", v)) => n = v.parse::<usize>().ok(),
            _ => return Err(bad("unexpected header field")),
        }
    }
    match (t0, dt, n) {
        (Some(t0), Some(dt), Some(n)) if dt > 0.0 => Ok((t0, dt, n)),
        _ => Err(bad("incomplete header")),
    }
}

pub fn read_binary(path: &Path) -> Result<SampledSignal> {
    let name = path.display().to_string();
    let mut r = BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?);
    let mut head = [0u8; HEADER_LEN];
    r.read_exact(&mut head).map_err(|e| Error::io(path, e))?;
    let (t0, dt, n) = parse_header(&head, &name)?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes).map_err(|e| Error::io(path, e))?;
    if bytes.len() != 8 * n {
        return Err(Error::Parse {
            path: name,
            offset: HEADER_LEN + bytes.len() / 8 * 8,
            detail: format!("header promises {n} samples, file holds {} bytes", bytes.len()),
        });
    }
    let samples = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok(SampledSignal {
        t_start: t0,
        dt,
        samples,
    })
}

pub fn read_csv(path: &Path) -> Result<SampledSignal> {
    let name = path.display().to_string();
    let r = BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?);
    let mut times = Vec::new();
    let mut samples = Vec::new();
    let mut offset = 0;
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let start = offset;
        offset += line.len() + 1;
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.starts_with('t')) {
            continue;
        }
        let bad = |detail: String| Error::Parse {
            path: name.clone(),
            offset: start,
            detail,
        };
        let (t, v) = line.split_once(',').ok_or_else(|| bad("expected `t,flux`".into()))?;
        times.push(t.trim().parse::<f64>().map_err(|_| bad(format!("bad time `{t}`")))?);
        samples.push(v.trim().parse::<f64>().map_err(|_| bad(format!("bad flux `{v}`")))?);
    }
    if samples.len() < 2 {
        return Err(Error::Parse {
            path: name,
            offset,
            detail: "need at least two samples".into(),
        });
    }
    let t0 = times[0];
    let dt = (times[times.len() - 1] - t0) / (times.len() - 1) as f64;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Parse {
            path: name,
            offset: 0,
            detail: "times must increase".into(),
        });
    }
    Ok(SampledSignal {
        t_start: t0,
        dt,
        samples,
    })
}

pub fn read_signal(path: &Path) -> Result<SampledSignal> {
    match Format::from_path(path) {
        Format::Csv => read_csv(path),
        Format::Binary => read_binary(path),
    }
}
