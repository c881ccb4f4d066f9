//! Transverse-momentum grid and the per-mode coupling profile.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::gaussian::ModeParams;

/// Relative mismatch allowed between `C_q` and `C_{−q}`.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Symmetric grid `q_m = m dq`, `m = −n_half..=n_half`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QGrid {
    n_half: usize,
    dq: f64,
}

impl QGrid {
    pub fn new(n_half: usize, dq: f64) -> Result<Self> {
        if !(dq.is_finite() && dq > 0.0) {
            return Err(Error::InvalidGrid("dq must be positive"));
        }
        Ok(Self { n_half, dq })
    }

    /// Grid whose window `(2N + 1) dq` spans eight times the main spectral
    /// lobe `4π / feature` of the narrowest object feature.
    pub fn for_feature(feature: f64, n_half: usize) -> Result<Self> {
        if !(feature.is_finite() && feature > 0.0) {
            return Err(Error::InvalidGrid("feature size must be positive"));
        }
        let window = 8.0 * 4.0 * core::f64::consts::PI / feature;
        Self::new(n_half, window / (2 * n_half + 1) as f64)
    }

    pub fn n_half(&self) -> usize {
        self.n_half
    }

    pub fn dq(&self) -> f64 {
        self.dq
    }

    /// `2N + 1`
    pub fn len(&self) -> usize {
        2 * self.n_half + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn q(&self, m: isize) -> f64 {
        m as f64 * self.dq
    }

    /// Mode labels `−N..=N` in ascending order.
    pub fn indices(&self) -> core::ops::RangeInclusive<isize> {
        let n = self.n_half as isize;
        -n..=n
    }

    pub fn values(&self) -> Vec<f64> {
        self.indices().map(|m| self.q(m)).collect()
    }

    /// Label of the sample at `q`, if `q` is on the grid.
    pub fn index_of(&self, q: f64) -> Result<isize> {
        let s = q / self.dq;
        let m = s.round();
        if (s - m).abs() > 1e-6 || m.abs() > self.n_half as f64 {
            return Err(Error::ModeNotOnGrid(q));
        }
        Ok(m as isize)
    }

    /// Spacing `2π / ((2N + 1) dq)` of the position grid for which the
    /// q-sum is an exact discrete Fourier transform.
    pub fn conjugate_dx(&self) -> f64 {
        2.0 * core::f64::consts::PI / (self.len() as f64 * self.dq)
    }
}

/// Coupling and seeds of every q-mode pair.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelProfile {
    /// The same pair parameters for every q.
    Constant(ModeParams),
    /// Phase-matching profile `|κ_q| = κ₀ |sinc(β q²)|`; `base` carries the
    /// seeds, `κ₀` and the phase. Negative lobes add `π` to the phase.
    Sinc { base: ModeParams, bandwidth: f64 },
    /// Explicit parameters for `m = −N..=N`.
    PerMode(Vec<ModeParams>),
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

impl KernelProfile {
    /// Pair parameters of mode `m` of `grid`.
    pub fn mode(&self, grid: &QGrid, m: isize) -> Result<ModeParams> {
        match self {
            Self::Constant(p) => Ok(*p),
            Self::Sinc { base, bandwidth } => {
                let q = grid.q(m);
                let s = sinc(bandwidth * q * q);
                let phi = if s < 0.0 { base.phi() + core::f64::consts::PI } else { base.phi() };
                ModeParams::new(base.mu_t(), base.mu_r(), base.kappa_abs() * s.abs(), phi)
            }
            Self::PerMode(modes) => {
                if modes.len() != grid.len() {
                    return Err(Error::InvalidGrid("per-mode profile length must be 2N + 1"));
                }
                let i = m + grid.n_half() as isize;
                if i < 0 || i as usize >= modes.len() {
                    return Err(Error::ModeNotOnGrid(grid.q(m)));
                }
                Ok(modes[i as usize])
            }
        }
    }

    /// Rejects profiles with `C_q ≠ C_{−q}`.
    pub fn check_symmetric(&self, grid: &QGrid) -> Result<()> {
        for m in 1..=grid.n_half() as isize {
            let plus = kernel_c(&self.mode(grid, m)?);
            let minus = kernel_c(&self.mode(grid, -m)?);
            if (plus - minus).abs() > SYMMETRY_TOL * plus.abs().max(minus.abs()) {
                return Err(Error::AsymmetricProfile(grid.q(m)));
            }
        }
        Ok(())
    }

    /// `C_q e^{iφ_q}` for every mode of `grid`, in ascending `q`.
    pub fn amplitudes(&self, grid: &QGrid) -> Result<Vec<Complex64>> {
        self.check_symmetric(grid)?;
        grid.indices()
            .map(|m| {
                let p = self.mode(grid, m)?;
                Ok(Complex64::from_polar(kernel_c(&p), p.phi()))
            })
            .collect()
    }
}

/// Pair correlation `C_q = u v (1 + μ_T + μ_R)`.
pub fn kernel_c(p: &ModeParams) -> f64 {
    p.u() * p.v() * (1.0 + p.mu_t() + p.mu_r())
}
