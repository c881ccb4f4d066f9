//! Intensity-correlation diagnostics: the cross-covariance `Γ`, the
//! normalized index `γ`, the noise reduction factor and its threshold.
//!
//! Undefined 0/0 points are reported as `None`.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{non_negative, Error, Result};
use crate::fock::MomentSet;
use crate::gaussian::{
    apply_loss, build_covariance, check_separability_lossy, CovarianceBlock, ModeParams, SeparabilityVerdict,
};

/// `1 + μ_T + μ_R`
fn seed_factor(p: &ModeParams) -> f64 {
    1.0 + p.mu_t() + p.mu_r()
}

/// `Γ = n_PDC (1 + n_PDC)(1 + μ_T + μ_R)²`
pub fn big_gamma(p: &ModeParams) -> f64 {
    let n = p.n_pdc();
    let s = seed_factor(p);
    n * (1.0 + n) * s * s
}

/// Normalized intensity-correlation index `Γ / (σ_T σ_R)`.
///
/// `None` when either arm has zero variance, which forces `Γ = 0` as well.
pub fn gamma_tr(p: &ModeParams) -> Option<f64> {
    let n = p.n_pdc();
    let s = seed_factor(p);
    let mean_t = p.mu_t() + n * s;
    let mean_r = p.mu_r() + n * s;
    let sigmas = (mean_t * (mean_t + 1.0) * mean_r * (mean_r + 1.0)).sqrt();
    (sigmas > 0.0).then(|| (big_gamma(p) / sigmas).min(1.0))
}

/// Noise reduction factor `⟨(Δ(n_T − n_R))²⟩ / (⟨n_T⟩ + ⟨n_R⟩)`.
pub fn nrf(p: &ModeParams) -> Option<f64> {
    let (mt, mr) = (p.mu_t(), p.mu_r());
    let den = mt + mr + 2.0 * p.n_pdc() * seed_factor(p);
    (den > 0.0).then(|| (mt * (1.0 + mt) + mr * (1.0 + mr)) / den)
}

/// The `n_PDC` above which the pair is sub-shot-noise correlated.
pub fn nrf_threshold(mu_t: f64, mu_r: f64) -> Result<f64> {
    let mu_t = non_negative("mu_t", mu_t)?;
    let mu_r = non_negative("mu_r", mu_r)?;
    Ok((mu_t * mu_t + mu_r * mu_r) / (2.0 * (1.0 + mu_t + mu_r)))
}

/// Photon-number statistics of a zero-mean two-mode Gaussian state.
///
/// Uses the Gaussian moment theorem, so
/// `⟨Δn_T Δn_R⟩ = |⟨a_T a_R⟩|² + |⟨a_T† a_R⟩|²` and
/// `⟨Δn²⟩ = ⟨n⟩(⟨n⟩ + 1) + |⟨a²⟩|²`.
pub fn intensity_moments(v: &CovarianceBlock) -> MomentSet {
    let m = v.entries();
    let single = |o: usize| {
        let mean = 0.5 * (m[(o, o)] + m[(o + 1, o + 1)]) - 0.5;
        let aa_re = 0.5 * (m[(o, o)] - m[(o + 1, o + 1)]);
        let aa_im = m[(o, o + 1)];
        (mean, mean * (mean + 1.0) + aa_re * aa_re + aa_im * aa_im)
    };
    let (mean_t, var_t) = single(0);
    let (mean_r, var_r) = single(2);
    let (xx, yy, xy, yx) = (m[(0, 2)], m[(1, 3)], m[(0, 3)], m[(1, 2)]);
    let pair = ((xx - yy) * (xx - yy) + (xy + yx) * (xy + yx)) / 4.0;
    let mixed = ((xx + yy) * (xx + yy) + (yx - xy) * (yx - xy)) / 4.0;
    MomentSet { mean_t, mean_r, var_t, var_r, cross: pair + mixed }
}

/// `γ` from measured or simulated moments.
pub fn gamma_from_moments(m: &MomentSet) -> Option<f64> {
    let sigmas = (m.var_t * m.var_r).sqrt();
    (sigmas > 0.0).then(|| m.cross / sigmas)
}

/// NRF from measured or simulated moments.
pub fn nrf_from_moments(m: &MomentSet) -> Option<f64> {
    let den = m.mean_t + m.mean_r;
    (den > 0.0).then(|| (m.var_t + m.var_r - 2.0 * m.cross) / den)
}

/// One row of a correlation sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationReport {
    pub params: ModeParams,
    pub tau: f64,
    pub gamma: Option<f64>,
    pub big_gamma: f64,
    pub nrf: Option<f64>,
    pub nrf_threshold_npdc: f64,
    pub verdict: SeparabilityVerdict,
}

impl CorrelationReport {
    pub fn sep_margin(&self) -> f64 {
        self.verdict.margin
    }
}

/// Closed-form report for the lossless pair.
pub fn report(p: &ModeParams) -> CorrelationReport {
    let verdict = check_separability_lossy(p, 1.0).expect("τ = 1 is valid");
    CorrelationReport {
        params: *p,
        tau: 1.0,
        gamma: gamma_tr(p),
        big_gamma: big_gamma(p),
        nrf: nrf(p),
        nrf_threshold_npdc: nrf_threshold(p.mu_t(), p.mu_r()).expect("validated seeds"),
        verdict,
    }
}

/// Report after symmetric loss `τ` on both arms.
///
/// `τ = 1` gives the closed forms exactly. Otherwise γ, Γ and NRF come from
/// the lossy covariance; the threshold refers to the lossless parameters
/// and is unchanged by loss.
pub fn report_lossy(p: &ModeParams, tau: f64) -> Result<CorrelationReport> {
    if tau == 1.0 {
        return Ok(report(p));
    }
    let lossy = apply_loss(&build_covariance(p), tau)?;
    let m = intensity_moments(&lossy);
    Ok(CorrelationReport {
        params: *p,
        tau,
        gamma: gamma_from_moments(&m),
        big_gamma: m.cross,
        nrf: nrf_from_moments(&m),
        nrf_threshold_npdc: nrf_threshold(p.mu_t(), p.mu_r())?,
        verdict: check_separability_lossy(p, tau)?,
    })
}

/// Cartesian grid of seed means and PDC photon numbers at a fixed phase.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamGrid {
    pub mu_t: Vec<f64>,
    pub mu_r: Vec<f64>,
    pub n_pdc: Vec<f64>,
    pub phi: f64,
}

impl ParamGrid {
    /// Points in row order: `mu_t` slowest, then `mu_r`, then `n_pdc`.
    pub fn points(&self) -> Result<Vec<ModeParams>> {
        if self.mu_t.is_empty() || self.mu_r.is_empty() || self.n_pdc.is_empty() {
            return Err(Error::InvalidGrid("empty parameter axis"));
        }
        let mut out = Vec::with_capacity(self.len());
        for &mt in &self.mu_t {
            for &mr in &self.mu_r {
                for &n in &self.n_pdc {
                    out.push(ModeParams::from_npdc(mt, mr, n, self.phi)?);
                }
            }
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.mu_t.len() * self.mu_r.len() * self.n_pdc.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Evaluates every grid point at every `τ`, `τ` varying fastest.
pub fn sweep(grid: &ParamGrid, taus: &[f64]) -> Result<Vec<CorrelationReport>> {
    if taus.is_empty() {
        return Err(Error::InvalidGrid("empty transmission list"));
    }
    let mut rows = Vec::with_capacity(grid.len() * taus.len());
    for p in grid.points()? {
        for &tau in taus {
            rows.push(report_lossy(&p, tau)?);
        }
    }
    Ok(rows)
}
