//! Truncated Fock-space evolution of one thermally seeded mode pair.
//!
//! The pair evolution is applied in its disentangled (normal-ordered) form,
//! so every matrix element of the output state is a finite sum of
//! closed-form amplitudes. This module is deliberately independent of the
//! Gaussian formulas and serves as their brute-force reference.
//!
//! The evolution conserves `n_T − n_R`, so the density matrix is exactly
//! block diagonal in that difference. Each block is stored densely.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{non_negative, Error, Result};
use crate::gaussian::{CovarianceBlock, ModeParams};

/// Default bound on the weight lost to truncation.
pub const DEFAULT_TRUNCATION_TOL: f64 = 1e-6;

/// Cutoff rule `ceil(12 (1 + max mean))`.
pub fn default_cutoff(max_mean: f64) -> usize {
    (12.0 * (1.0 + max_mean.max(0.0))).ceil() as usize
}

/// Parameters of the normal-ordered form of the pair evolution,
/// `exp(ζ a_T† a_R†) exp(−η (n_T + n_R + 1)) exp(−ζ* a_T a_R)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisentangledCoefficients {
    zeta: Complex64,
    eta: f64,
}

impl DisentangledCoefficients {
    /// `ζ = −i e^{−iφ} tanh|κ|`, `η = ln cosh|κ|`.
    pub fn new(kappa_abs: f64, phi: f64) -> Result<Self> {
        let kappa_abs = non_negative("kappa_abs", kappa_abs)?;
        let rotation = Complex64::from_polar(1.0, -phi);
        Ok(Self { zeta: Complex64::new(0.0, -1.0) * rotation * kappa_abs.tanh(), eta: kappa_abs.cosh().ln() })
    }

    pub fn from_params(p: &ModeParams) -> Self {
        // ModeParams already validated kappa_abs
        Self::new(p.kappa_abs(), p.phi()).expect("validated coupling")
    }

    pub fn zeta(&self) -> Complex64 {
        self.zeta
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Phase `θ` of the output anomalous correlation `⟨a_T a_R⟩ = e^{iθ} C`.
    pub fn pair_phase(&self) -> f64 {
        self.zeta.arg()
    }
}

/// `ln k!` for `k = 0..len`.
struct LogFactorials(Vec<f64>);

impl LogFactorials {
    fn new(len: usize) -> Self {
        let mut table = Vec::with_capacity(len.max(1));
        let mut acc = 0.0;
        table.push(0.0);
        for k in 1..len {
            acc += (k as f64).ln();
            table.push(acc);
        }
        Self(table)
    }

    #[inline]
    fn get(&self, k: usize) -> f64 {
        self.0[k]
    }
}

/// Evaluates `C(m, n, k, l)` with factorial ratios in log space.
struct AmplitudeKernel {
    log_fact: LogFactorials,
    log_abs_zeta: Option<f64>,
    arg_zeta: f64,
    arg_minus_conj: f64,
    eta: f64,
}

impl AmplitudeKernel {
    fn new(coeffs: &DisentangledCoefficients, max_index: usize) -> Self {
        let abs = coeffs.zeta.norm();
        let arg = coeffs.zeta.arg();
        Self {
            log_fact: LogFactorials::new(max_index + 1),
            log_abs_zeta: (abs > 0.0).then(|| abs.ln()),
            arg_zeta: arg,
            arg_minus_conj: (-coeffs.zeta.conj()).arg(),
            eta: coeffs.eta,
        }
    }

    fn amplitude(&self, m: usize, n: usize, k: usize, l: usize) -> Complex64 {
        let lf = |i| self.log_fact.get(i);
        let mut log_mag = -self.eta * (n + m + 1 - 2 * k) as f64
            + 0.5 * (lf(n) + lf(m) + lf(n - k + l) + lf(m - k + l))
            - lf(k)
            - lf(l)
            - lf(n - k)
            - lf(m - k);
        match self.log_abs_zeta {
            Some(log_abs) => log_mag += (k + l) as f64 * log_abs,
            // ζ = 0: only the k = l = 0 term survives (0⁰ = 1)
            None if k + l > 0 => return Complex64::new(0.0, 0.0),
            None => {}
        }
        let phase = l as f64 * self.arg_zeta + k as f64 * self.arg_minus_conj;
        Complex64::from_polar(log_mag.exp(), phase)
    }
}

/// Amplitude of `|n − k + l⟩_T |m − k + l⟩_R` in the evolved `|n⟩_T |m⟩_R`.
pub fn action_coefficient(
    m: usize,
    n: usize,
    k: usize,
    l: usize,
    coeffs: &DisentangledCoefficients,
) -> Result<Complex64> {
    if k > m.min(n) {
        return Err(Error::IndexRange("k must not exceed min(m, n)"));
    }
    let top = n.max(m) - k + l;
    Ok(AmplitudeKernel::new(coeffs, top.max(n).max(m)).amplitude(m, n, k, l))
}

/// Truncated two-mode density matrix, block diagonal in `d = n_T − n_R`.
///
/// Block `d` holds the states with `n_T − n_R = d` and `max(n_T, n_R) ≤ cutoff`,
/// indexed by `s = min(n_T, n_R) = 0..=cutoff − |d|`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeFockState {
    cutoff: usize,
    blocks: Vec<Vec<Complex64>>,
    trace_deficit: f64,
}

impl TwoModeFockState {
    fn zeros(cutoff: usize) -> Self {
        let blocks = (0..=2 * cutoff)
            .map(|i| {
                let size = cutoff + 1 - i.abs_diff(cutoff);
                vec![Complex64::new(0.0, 0.0); size * size]
            })
            .collect();
        Self { cutoff, blocks, trace_deficit: 1.0 }
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// `1 − Tr ρ`, the weight lost to truncation.
    pub fn trace_deficit(&self) -> f64 {
        self.trace_deficit
    }

    /// Dimension of the full two-mode space, `(cutoff + 1)²`.
    pub fn dimension(&self) -> usize {
        (self.cutoff + 1) * (self.cutoff + 1)
    }

    fn block_size(&self, d: isize) -> usize {
        self.cutoff + 1 - d.unsigned_abs()
    }

    fn block(&self, d: isize) -> &[Complex64] {
        &self.blocks[(d + self.cutoff as isize) as usize]
    }

    fn locate(&self, n_t: usize, n_r: usize) -> Option<(isize, usize)> {
        (n_t <= self.cutoff && n_r <= self.cutoff).then(|| (n_t as isize - n_r as isize, n_t.min(n_r)))
    }

    /// `⟨n_T, n_R| ρ |n_T', n_R'⟩`
    pub fn element(&self, n_t: usize, n_r: usize, n_t2: usize, n_r2: usize) -> Complex64 {
        match (self.locate(n_t, n_r), self.locate(n_t2, n_r2)) {
            (Some((d1, s1)), Some((d2, s2))) if d1 == d2 => self.block(d1)[s1 * self.block_size(d1) + s2],
            _ => Complex64::new(0.0, 0.0),
        }
    }

    /// Full matrix, row-major over the index `n_T (cutoff + 1) + n_R`.
    /// Only sensible for small cutoffs.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let side = self.cutoff + 1;
        let dim = side * side;
        let mut out = vec![Complex64::new(0.0, 0.0); dim * dim];
        for row in 0..dim {
            for col in 0..dim {
                out[row * dim + col] = self.element(row / side, row % side, col / side, col % side);
            }
        }
        out
    }

    pub fn trace(&self) -> f64 {
        self.photon_distribution().iter().sum()
    }

    /// Joint photon-number distribution `P(n_T, n_R)`, row-major in `n_T`.
    pub fn photon_distribution(&self) -> Vec<f64> {
        let side = self.cutoff + 1;
        let mut out = vec![0.0; side * side];
        for n_t in 0..side {
            for n_r in 0..side {
                out[n_t * side + n_r] = self.element(n_t, n_r, n_t, n_r).re;
            }
        }
        out
    }

    /// Largest `|ρ_ij − ρ_ji*|`.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, block) in self.blocks.iter().enumerate() {
            let size = self.block_size(i as isize - self.cutoff as isize);
            for r in 0..size {
                for c in r..size {
                    worst = worst.max((block[r * size + c] - block[c * size + r].conj()).norm());
                }
            }
        }
        worst
    }

    /// Smallest eigenvalue over all blocks. Cost grows as `cutoff⁴`.
    pub fn min_eigenvalue(&self) -> f64 {
        let mut lowest = f64::INFINITY;
        for (i, block) in self.blocks.iter().enumerate() {
            let size = self.block_size(i as isize - self.cutoff as isize);
            let m = DMatrix::from_fn(size, size, |r, c| 0.5 * (block[r * size + c] + block[c * size + r].conj()));
            let eig = SymmetricEigen::new(m);
            lowest = lowest.min(eig.eigenvalues.min());
        }
        lowest
    }

    /// `Tr[ρ (a_T†)^p a_T^q (a_R†)^r a_R^s]`.
    pub fn expect_normal_ordered(&self, p: usize, q: usize, r: usize, s: usize) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        // ρ only couples states with equal n_T − n_R
        if p as isize - q as isize != r as isize - s as isize {
            return acc;
        }
        let ladder = |n: usize, lower: usize, raise: usize| -> f64 {
            // sqrt(n! / (n − lower)!) sqrt((n − lower + raise)! / (n − lower)!)
            let mut sq = 1.0;
            for j in 0..lower {
                sq *= (n - j) as f64;
            }
            for j in 1..=raise {
                sq *= (n - lower + j) as f64;
            }
            sq.sqrt()
        };
        for n_t in q..=self.cutoff {
            let out_t = n_t - q + p;
            if out_t > self.cutoff {
                continue;
            }
            for n_r in s..=self.cutoff {
                let out_r = n_r - s + r;
                if out_r > self.cutoff {
                    continue;
                }
                let weight = ladder(n_t, q, p) * ladder(n_r, s, r);
                acc += self.element(n_t, n_r, out_t, out_r) * weight;
            }
        }
        acc
    }

    /// Quadrature covariance over `(X_T, Y_T, X_R, Y_R)` computed from the
    /// second moments of the truncated state (first moments vanish).
    pub fn covariance(&self) -> CovarianceBlock {
        let e = |p, q, r, s| self.expect_normal_ordered(p, q, r, s);
        let n_t = e(1, 1, 0, 0).re;
        let n_r = e(0, 0, 1, 1).re;
        let aa_t = e(0, 2, 0, 0);
        let aa_r = e(0, 0, 0, 2);
        let ab = e(0, 1, 0, 1);
        let abd = e(0, 1, 1, 0); // ⟨a_T a_R†⟩

        let mut v = nalgebra::Matrix4::zeros();
        // single-mode blocks: ⟨X²⟩ = n + 1/2 + Re⟨a²⟩, ⟨Y²⟩ = n + 1/2 − Re⟨a²⟩,
        // ½⟨{X, Y}⟩ = Im⟨a²⟩
        for (o, n, aa) in [(0, n_t, aa_t), (2, n_r, aa_r)] {
            v[(o, o)] = n + 0.5 + aa.re;
            v[(o + 1, o + 1)] = n + 0.5 - aa.re;
            v[(o, o + 1)] = aa.im;
            v[(o + 1, o)] = aa.im;
        }
        // cross block from ⟨a_T a_R⟩ and ⟨a_T a_R†⟩
        let xx = ab.re + abd.re;
        let yy = -ab.re + abd.re;
        let xy = ab.im - abd.im; // ⟨X_T Y_R⟩
        let yx = ab.im + abd.im; // ⟨Y_T X_R⟩
        v[(0, 2)] = xx;
        v[(2, 0)] = xx;
        v[(1, 3)] = yy;
        v[(3, 1)] = yy;
        v[(0, 3)] = xy;
        v[(3, 0)] = xy;
        v[(1, 2)] = yx;
        v[(2, 1)] = yx;
        CovarianceBlock::from_matrix(v).expect("symmetric by construction")
    }
}

/// Thermal occupation `P(n) = μⁿ / (1 + μ)^{n+1}`.
fn thermal_weights(mu: f64, cutoff: usize) -> Vec<f64> {
    let ratio = mu / (1.0 + mu);
    let mut w = Vec::with_capacity(cutoff + 1);
    let mut cur = 1.0 / (1.0 + mu);
    for _ in 0..=cutoff {
        w.push(cur);
        cur *= ratio;
    }
    w
}

/// [`evolve_thermal_pair_with_tolerance`] with [`DEFAULT_TRUNCATION_TOL`].
pub fn evolve_thermal_pair(
    mu_t: f64,
    mu_r: f64,
    coeffs: &DisentangledCoefficients,
    cutoff: usize,
) -> Result<TwoModeFockState> {
    evolve_thermal_pair_with_tolerance(mu_t, mu_r, coeffs, cutoff, DEFAULT_TRUNCATION_TOL)
}

/// Output state of a pair seeded by thermal light of means `mu_t`, `mu_r`.
///
/// Input photon numbers and output photon numbers are both restricted to
/// `0..=cutoff`; every amplitude that would land above the cutoff is dropped
/// and shows up in the trace deficit. Fails when the input thermal tail
/// exceeds `tol / 10` or the final trace deficit exceeds `tol`.
pub fn evolve_thermal_pair_with_tolerance(
    mu_t: f64,
    mu_r: f64,
    coeffs: &DisentangledCoefficients,
    cutoff: usize,
    tol: f64,
) -> Result<TwoModeFockState> {
    let mu_t = non_negative("mu_t", mu_t)?;
    let mu_r = non_negative("mu_r", mu_r)?;
    let p_t = thermal_weights(mu_t, cutoff);
    let p_r = thermal_weights(mu_r, cutoff);

    let input_deficit = 1.0 - p_t.iter().sum::<f64>() * p_r.iter().sum::<f64>();
    if input_deficit > tol / 10.0 {
        return Err(Error::CutoffTooSmall { cutoff, deficit: input_deficit, tolerance: tol / 10.0 });
    }

    let kernel = AmplitudeKernel::new(coeffs, 2 * cutoff + 1);
    let mut state = TwoModeFockState::zeros(cutoff);
    let mut psi = Vec::with_capacity(cutoff + 1);

    for (n, &wn) in p_t.iter().enumerate() {
        for (m, &wm) in p_r.iter().enumerate() {
            let weight = wn * wm;
            if weight == 0.0 {
                continue;
            }
            let d = n as isize - m as isize;
            let size = state.block_size(d);
            let low = n.min(m);
            // |n, m⟩ → Σ_j ψ_j |n + j, m + j⟩ with j = l − k ≥ −min(n, m)
            psi.clear();
            for s_out in 0..size {
                let mut amp = Complex64::new(0.0, 0.0);
                // j = s_out − low, k runs over max(0, −j)..=low
                let k_start = low.saturating_sub(s_out);
                for k in k_start..=low {
                    let l = s_out + k - low;
                    amp += kernel.amplitude(m, n, k, l);
                }
                psi.push(amp);
            }
            let block = &mut state.blocks[(d + cutoff as isize) as usize];
            for (r, a) in psi.iter().enumerate() {
                let wa = a * weight;
                let row = &mut block[r * size..(r + 1) * size];
                for (slot, b) in row.iter_mut().zip(psi.iter()) {
                    *slot += wa * b.conj();
                }
            }
        }
    }

    state.trace_deficit = 1.0 - state.trace();
    if state.trace_deficit > tol {
        return Err(Error::CutoffTooSmall { cutoff, deficit: state.trace_deficit, tolerance: tol });
    }
    Ok(state)
}

/// Photon-number statistics of one pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSet {
    pub mean_t: f64,
    pub mean_r: f64,
    pub var_t: f64,
    pub var_r: f64,
    /// `⟨Δn_T Δn_R⟩`
    pub cross: f64,
}

impl MomentSet {
    /// Thermal-marginal closed forms for the lossless output pair.
    pub fn closed_form(p: &ModeParams) -> Self {
        let n = p.n_pdc();
        let s = 1.0 + p.mu_t() + p.mu_r();
        let mean_t = p.mu_t() + n * s;
        let mean_r = p.mu_r() + n * s;
        Self {
            mean_t,
            mean_r,
            var_t: mean_t * (mean_t + 1.0),
            var_r: mean_r * (mean_r + 1.0),
            cross: n * (1.0 + n) * s * s,
        }
    }

    pub fn as_array(&self) -> [f64; 5] {
        [self.mean_t, self.mean_r, self.var_t, self.var_r, self.cross]
    }

    /// Largest entrywise `|self − reference| / max(|reference|, 1e-9)`.
    pub fn max_relative_error(&self, reference: &MomentSet) -> f64 {
        self.as_array()
            .iter()
            .zip(reference.as_array().iter())
            .map(|(a, b)| (a - b).abs() / b.abs().max(1e-9))
            .fold(0.0, f64::max)
    }
}

/// Means, variances and the intensity cross-covariance of a truncated state.
/// Central moments are accumulated in a second pass to avoid cancellation.
pub fn moments(state: &TwoModeFockState) -> MomentSet {
    let side = state.cutoff + 1;
    let dist = state.photon_distribution();
    let cells = || (0..side).flat_map(move |t| (0..side).map(move |r| (t, r)));
    let (mut m_t, mut m_r) = (0.0, 0.0);
    for (t, r) in cells() {
        let p = dist[t * side + r];
        m_t += t as f64 * p;
        m_r += r as f64 * p;
    }
    let (mut v_t, mut v_r, mut c_tr) = (0.0, 0.0, 0.0);
    for (t, r) in cells() {
        let p = dist[t * side + r];
        let (x, y) = (t as f64 - m_t, r as f64 - m_r);
        v_t += x * x * p;
        v_r += y * y * p;
        c_tr += x * y * p;
    }
    MomentSet { mean_t: m_t, mean_r: m_r, var_t: v_t, var_r: v_r, cross: c_tr }
}
