//! CSV and PGM writers, and the object CSV loader.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so
//! identical inputs always give identical bytes.

use std::io::{Read, Write};

use num_complex::Complex64;
use pdcsim_core::correlations::CorrelationReport;
use pdcsim_core::fock::{MomentSet, TwoModeFockState};
use pdcsim_core::ghost::{G2Map, Reconstruction, SampledObject};

/// Written in place of a value that is undefined at the point.
pub const UNDEFINED: &str = "undefined";

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("object file line {line}: {message}")]
    Object { line: u64, message: String },
    #[error(transparent)]
    Core(#[from] pdcsim_core::Error),
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| UNDEFINED.to_string(), num)
}

pub const CORRELATION_HEADER: [&str; 8] = ["mu_t", "mu_r", "n_pdc", "tau", "gamma", "nrf", "margin", "separable"];

pub fn write_correlations<W: Write>(out: W, rows: &[CorrelationReport]) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CORRELATION_HEADER)?;
    for r in rows {
        w.write_record([
            num(r.params.mu_t()),
            num(r.params.mu_r()),
            num(r.params.n_pdc()),
            num(r.tau),
            opt(r.gamma),
            opt(r.nrf),
            num(r.verdict.margin),
            r.verdict.separable.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_reconstruction<W: Write>(out: W, rec: &Reconstruction) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "value_raw", "value_normalized"])?;
    for ((x, raw), norm) in rec.x.iter().zip(&rec.raw).zip(&rec.normalized) {
        w.write_record([num(*x), num(*raw), num(*norm)])?;
    }
    w.flush()?;
    Ok(())
}

/// `P(n_T, n_R)` for every retained pair of photon numbers.
pub fn write_photon_distribution<W: Write>(out: W, state: &TwoModeFockState) -> Result<(), IoError> {
    let dim = state.cutoff() + 1;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n_t", "n_r", "probability"])?;
    for (i, p) in state.photon_distribution().iter().enumerate() {
        w.write_record([(i / dim).to_string(), (i % dim).to_string(), num(*p)])?;
    }
    w.flush()?;
    Ok(())
}

pub const MOMENT_NAMES: [&str; 5] = ["mean_t", "mean_r", "var_t", "var_r", "cross"];

pub fn write_moments<W: Write>(out: W, oracle: &MomentSet, reference: &MomentSet) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["quantity", "oracle", "closed_form", "relative_error"])?;
    for ((name, a), b) in MOMENT_NAMES.iter().zip(oracle.as_array()).zip(reference.as_array()) {
        let rel = (a - b).abs() / b.abs().max(1e-9);
        w.write_record([name.to_string(), num(a), num(b), num(rel)])?;
    }
    w.flush()?;
    Ok(())
}

/// 8-bit binary graymap, one image row per `x_R`, scaled so the map maximum is 255.
pub fn write_pgm<W: Write>(mut out: W, map: &G2Map) -> Result<(), IoError> {
    let (height, width) = (map.x_r().len(), map.x_t().len());
    write!(out, "P5\n{width} {height}\n255\n")?;
    let max = map.max();
    let pixels: Vec<u8> = map
        .values()
        .iter()
        .map(|&v| if max > 0.0 { (255.0 * v / max).round().clamp(0.0, 255.0) as u8 } else { 0 })
        .collect();
    out.write_all(&pixels)?;
    Ok(())
}

/// Reads a transmission function from CSV with columns `x, re, im`.
pub fn read_object<R: Read>(input: R) -> Result<SampledObject, IoError> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != ["x", "re", "im"] {
        return Err(IoError::Object { line: 1, message: "header must be `x,re,im`".into() });
    }
    let mut x = Vec::new();
    let mut t = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |i: usize| -> Result<f64, IoError> {
            rec.get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| IoError::Object { line, message: format!("column {} is not a number", &header[i]) })
        };
        x.push(field(0)?);
        t.push(Complex64::new(field(1)?, field(2)?));
    }
    Ok(SampledObject::new(&x, t)?)
}
