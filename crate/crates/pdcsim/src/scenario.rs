//! Runs a scenario: evaluates it on a worker pool, writes its artifacts and a
//! manifest with their hashes and the outcome of every built-in check.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use pdcsim_core::correlations::{nrf_threshold, report, report_lossy, CorrelationReport, ParamGrid};
use pdcsim_core::fock::{default_cutoff, evolve_thermal_pair, moments, DisentangledCoefficients, MomentSet};
use pdcsim_core::gaussian::ModeParams;
use pdcsim_core::ghost::{
    geometric_image, normalized_cross_correlation, reduce_diffraction, reduce_image, GhostResult,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::checks::{expected_diffraction, minimum_offset, single_slit_zero};
use crate::config::{
    ConfigError, Experiment, GhostConfig, GhostSetup, ObjectConfig, OracleConfig, ScenarioConfig, SweepConfig,
};
use crate::fast::g2_map_parallel;
use crate::io::{self, IoError};

/// Environment variable overriding the configured output directory.
pub const OUT_DIR_ENV: &str = "PDCSIM_OUT_DIR";

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Core(#[from] pdcsim_core::Error),
    #[error("worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.to_string(), passed, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileEntry {
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub kind: String,
    pub seed: u64,
    pub files: Vec<FileEntry>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

/// `--out`, then the environment variable, then the config, then `./out`.
pub fn resolve_out_dir(cli: Option<&Path>, env: Option<OsString>, config: Option<&Path>) -> PathBuf {
    cli.map(Path::to_path_buf)
        .or_else(|| env.filter(|v| !v.is_empty()).map(PathBuf::from))
        .or_else(|| config.map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from("out"))
}

struct Outputs {
    files: Vec<(String, Vec<u8>)>,
    checks: Vec<Check>,
}

impl Outputs {
    fn new() -> Self {
        Self { files: Vec::new(), checks: Vec::new() }
    }

    fn file(&mut self, name: &str, write: impl FnOnce(&mut Vec<u8>) -> Result<(), IoError>) -> Result<(), RunError> {
        let mut buf = Vec::new();
        write(&mut buf)?;
        self.files.push((name.to_string(), buf));
        Ok(())
    }
}

/// Evaluates `config` with `workers` threads (all cores when `None`) and
/// writes everything under `out_dir`.
pub fn run(config: &ScenarioConfig, out_dir: &Path, workers: Option<usize>) -> Result<Manifest, RunError> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.unwrap_or(0)).build()?;
    let outputs = pool.install(|| evaluate(config))?;

    fs::create_dir_all(out_dir).map_err(|source| RunError::Write { path: out_dir.to_path_buf(), source })?;
    let mut files = Vec::with_capacity(outputs.files.len());
    for (name, bytes) in &outputs.files {
        let path = out_dir.join(name);
        fs::write(&path, bytes).map_err(|source| RunError::Write { path, source })?;
        files.push(FileEntry {
            path: name.clone(),
            sha256: hex::encode(Sha256::digest(bytes)),
            bytes: bytes.len() as u64,
        });
    }
    let manifest = Manifest {
        kind: config.experiment.kind().to_string(),
        seed: config.seed,
        files,
        passed: outputs.checks.iter().all(|c| c.passed),
        checks: outputs.checks,
    };
    let path = out_dir.join(MANIFEST_NAME);
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(&path, text).map_err(|source| RunError::Write { path, source })?;
    Ok(manifest)
}

fn evaluate(config: &ScenarioConfig) -> Result<Outputs, RunError> {
    match &config.experiment {
        Experiment::SeparabilitySweep(s) => separability_sweep(s, config.seed),
        Experiment::NrfSweep(s) => nrf_sweep(s, config.seed),
        Experiment::OracleValidate(o) => oracle_validate(o),
        Experiment::GhostImage(g) => ghost_image(g, &g.imaging(&config.base_dir)?),
        Experiment::GhostDiffraction(g) => ghost_diffraction(g, &g.diffraction(&config.base_dir)?),
    }
}

/// Rows in [`ParamGrid`] order with `τ` fastest.
pub fn parallel_sweep(grid: &ParamGrid, taus: &[f64]) -> Result<Vec<CorrelationReport>, pdcsim_core::Error> {
    let rows: Vec<Vec<CorrelationReport>> = grid
        .points()?
        .par_iter()
        .map(|p| taus.iter().map(|&t| report_lossy(p, t)).collect())
        .collect::<Result<_, _>>()?;
    Ok(rows.concat())
}

fn sweep_rows(s: &SweepConfig, out: &mut Outputs) -> Result<Vec<CorrelationReport>, RunError> {
    let rows = parallel_sweep(&s.param_grid()?, &s.taus()?)?;
    out.file("correlations.csv", |b| io::write_correlations(b, &rows))?;
    Ok(rows)
}

fn random_params(rng: &mut ChaCha8Rng) -> ModeParams {
    ModeParams::from_npdc(
        rng.gen_range(0.0..=10.0),
        rng.gen_range(0.0..=10.0),
        rng.gen_range(0.0..=10.0),
        rng.gen_range(-3.2..3.2),
    )
    .expect("draws are in range")
}

fn separability_sweep(s: &SweepConfig, seed: u64) -> Result<Outputs, RunError> {
    let mut out = Outputs::new();
    let rows = sweep_rows(s, &mut out)?;

    let boundary = rows.iter().filter(|r| r.verdict.is_boundary()).count();
    let disagree = rows.iter().filter(|r| !r.verdict.routes_agree()).count();
    out.checks.push(Check::new(
        "ppt-routes-agree",
        disagree == 0,
        format!("{} rows, {boundary} within the boundary band, {disagree} disagreements", rows.len()),
    ));

    let changed = rows.iter().filter(|r| r.verdict.separable != report(&r.params).verdict.separable).count();
    out.checks.push(Check::new("loss-invariance", changed == 0, format!("{changed} rows change verdict under loss")));

    if s.random_checks > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut failures = 0;
        for _ in 0..s.random_checks {
            let p = random_params(&mut rng);
            let tau = 1.0 - rng.gen::<f64>();
            let lossy = report_lossy(&p, tau)?.verdict;
            let lossless = report(&p).verdict;
            if lossy.separable != lossless.separable || !lossy.routes_agree() || !lossless.routes_agree() {
                failures += 1;
            }
        }
        out.checks.push(Check::new(
            "random-loss-invariance",
            failures == 0,
            format!("{failures} of {} draws failed", s.random_checks),
        ));
    }
    Ok(out)
}

fn nrf_sweep(s: &SweepConfig, seed: u64) -> Result<Outputs, RunError> {
    let mut out = Outputs::new();
    let rows = sweep_rows(s, &mut out)?;

    let sub_shot = |r: &CorrelationReport| r.nrf.is_some_and(|x| x < 1.0);
    let counter = rows.iter().filter(|r| sub_shot(r) && r.verdict.margin >= 0.0).count();
    out.checks.push(Check::new(
        "sub-shot-noise-implies-entanglement",
        counter == 0,
        format!("{} sub-shot-noise rows, {counter} counterexamples", rows.iter().filter(|r| sub_shot(r)).count()),
    ));

    let mut misplaced = 0;
    for r in &rows {
        let n = r.params.n_pdc();
        let threshold = nrf_threshold(r.params.mu_t(), r.params.mu_r())?;
        if r.nrf.is_some() && (n - threshold).abs() > 1e-9 * (1.0 + threshold) && sub_shot(r) != (n > threshold) {
            misplaced += 1;
        }
    }
    out.checks.push(Check::new(
        "nrf-threshold",
        misplaced == 0,
        format!("{misplaced} rows on the wrong side of the closed-form threshold"),
    ));

    if s.random_checks > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let failures = (0..s.random_checks)
            .map(|_| report(&random_params(&mut rng)))
            .filter(|r| sub_shot(r) && r.sep_margin() >= 0.0)
            .count();
        out.checks.push(Check::new(
            "random-sub-shot-noise",
            failures == 0,
            format!("{failures} counterexamples in {} draws", s.random_checks),
        ));
    }
    Ok(out)
}

fn oracle_validate(o: &OracleConfig) -> Result<Outputs, RunError> {
    let mut out = Outputs::new();
    let p = o.params()?;
    let reference = MomentSet::closed_form(&p);
    let cutoff = o.cutoff.unwrap_or_else(|| default_cutoff(reference.mean_t.max(reference.mean_r)));
    let state = match evolve_thermal_pair(p.mu_t(), p.mu_r(), &DisentangledCoefficients::from_params(&p), cutoff) {
        Ok(s) => s,
        Err(e @ pdcsim_core::Error::CutoffTooSmall { .. }) => {
            out.checks.push(Check::new("truncation", false, e.to_string()));
            return Ok(out);
        }
        Err(e) => return Err(e.into()),
    };
    out.checks.push(Check::new(
        "truncation",
        true,
        format!("cutoff {cutoff}, trace deficit {:e}", state.trace_deficit()),
    ));
    let m = moments(&state);
    let err = m.max_relative_error(&reference);
    out.checks.push(Check::new(
        "moments",
        err < o.tolerance,
        format!("max relative error {err:e} (tolerance {:e})", o.tolerance),
    ));
    let herm = state.hermiticity_error();
    out.checks.push(Check::new("hermitian", herm <= 1e-10, format!("{herm:e}")));
    out.file("moments.csv", |b| io::write_moments(b, &m, &reference))?;
    out.file("photon_distribution.csv", |b| io::write_photon_distribution(b, &state))?;
    Ok(out)
}

fn ghost_files(res: &GhostResult, profile_name: &str, out: &mut Outputs) -> Result<(), RunError> {
    out.file("g2_map.pgm", |b| io::write_pgm(b, &res.map))?;
    out.file(profile_name, |b| io::write_reconstruction(b, &res.profile))?;
    let negative = res.map.values().iter().filter(|&&v| v < 0.0).count();
    out.checks.push(Check::new("non-negative", negative == 0, format!("{negative} negative samples")));
    Ok(())
}

fn ncc_check(name: &str, got: &[f64], want: &[f64], min: f64) -> Check {
    match normalized_cross_correlation(got, want) {
        Some(v) => Check::new(name, v >= min, format!("{v:.6} (minimum {min})")),
        None => Check::new(name, false, "undefined: a profile is constant"),
    }
}

fn ghost_image(g: &GhostConfig, s: &GhostSetup) -> Result<Outputs, RunError> {
    let mut out = Outputs::new();
    let map = g2_map_parallel(&s.geometry, &s.object, &s.profile, &s.grids, g.method.into())?;
    let res = reduce_image(&s.geometry, map)?;
    ghost_files(&res, "reconstruction.csv", &mut out)?;
    let geo = &s.geometry;
    let in_focus = (geo.thin_lens_residual() * (geo.d1 + geo.d2)).abs() <= 1e-9;
    if in_focus {
        let want = geometric_image(&s.object, &res.profile.x, geo.magnification());
        out.checks.push(ncc_check("image-ncc", &res.profile.normalized, &want, g.min_ncc.unwrap_or(0.95)));
    }
    Ok(out)
}

fn ghost_diffraction(g: &GhostConfig, s: &GhostSetup) -> Result<Outputs, RunError> {
    let mut out = Outputs::new();
    let map = g2_map_parallel(&s.geometry, &s.object, &s.profile, &s.grids, g.method.into())?;
    let res = reduce_diffraction(map)?;
    ghost_files(&res, "diffraction.csv", &mut out)?;
    if let Some(apertures) = g.object.apertures() {
        let want = expected_diffraction(&s.geometry, &apertures, &res.profile.x);
        out.checks.push(ncc_check("pattern-ncc", &res.profile.normalized, &want, g.min_ncc.unwrap_or(0.99)));
    }
    if let ObjectConfig::SingleSlit { width } = g.object {
        let mut worst: f64 = 0.0;
        let mut located = 0;
        let mut passed = true;
        for order in [-2, -1, 1, 2] {
            let x = single_slit_zero(&s.geometry, width, order);
            if let Some((offset, step)) = minimum_offset(&res.profile, x, 3) {
                located += 1;
                worst = worst.max(offset / step);
                passed &= offset <= 0.5 * step * (1.0 + 1e-9);
            }
        }
        out.checks.push(Check::new(
            "slit-zeros",
            passed && located > 0,
            format!("{located} zeros on the grid, worst offset {worst:.3} steps"),
        ));
    }
    Ok(out)
}
