//! Numerical check of the Gaussian factorization of the fourth-order field
//! moment, using the Fock oracle for a few independent q-mode pairs.
//!
//! Fields are built from the pairs as `b_T(x) = Σ_q e^{iqx} t_q` and
//! `b_R(x) = Σ_q e^{−iqx} r_q`, where `(t_q, r_q)` is the pair of Test mode
//! `q` and Reference mode `−q`.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fock::{evolve_thermal_pair, DisentangledCoefficients};
use crate::gaussian::ModeParams;

use super::profile::kernel_c;

/// Agreement floor added to the truncation-driven tolerance.
pub const FACTORIZATION_FLOOR: f64 = 1e-12;

/// Outcome of [`validate_factorization`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorizationReport {
    pub cutoff: usize,
    /// Largest trace deficit over the pairs.
    pub trace_deficit: f64,
    /// `10 · trace_deficit + FACTORIZATION_FLOOR`
    pub tolerance: f64,
    /// Largest relative mismatch between the fourth moment and its factorized form.
    pub fourth_moment_error: f64,
    /// Largest relative mismatch between `|⟨r_q t_q⟩|` and `C_q`.
    pub pair_correlation_error: f64,
    /// Number of position tuples compared.
    pub samples: usize,
}

impl FactorizationReport {
    pub fn passed(&self) -> bool {
        self.fourth_moment_error <= self.tolerance && self.pair_correlation_error <= self.tolerance
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Op {
    RDag,
    R,
    TDag,
    T,
}

/// Trace-normalized `⟨(t†)^a t^b (r†)^c r^d⟩` for `a, b, c, d ∈ {0, 1}`,
/// indexed by `8a + 4b + 2c + d`.
struct PairMoments([Complex64; 16]);

impl PairMoments {
    fn get(&self, ops: &[Op]) -> Complex64 {
        let has = |o| ops.contains(&o) as usize;
        self.0[8 * has(Op::TDag) + 4 * has(Op::T) + 2 * has(Op::RDag) + has(Op::R)]
    }
}

/// Compares `⟨b_R†(x₁) b_R(x₂) b_T†(x₃) b_T(x₄)⟩` with
/// `⟨b_R†b_R⟩⟨b_T†b_T⟩ + ⟨b_R†b_T†⟩⟨b_R b_T⟩` over a fixed set of position
/// tuples, each pair `(q, params)` evolved independently at `cutoff`.
pub fn validate_factorization(modes: &[(f64, ModeParams)], cutoff: usize) -> Result<FactorizationReport> {
    if modes.is_empty() {
        return Err(Error::InvalidGrid("need at least one mode pair"));
    }
    let mut pairs = Vec::with_capacity(modes.len());
    let mut deficit: f64 = 0.0;
    let mut pair_error: f64 = 0.0;
    for (_, p) in modes {
        let state = evolve_thermal_pair(p.mu_t(), p.mu_r(), &DisentangledCoefficients::from_params(p), cutoff)?;
        deficit = deficit.max(state.trace_deficit().abs());
        let norm = state.trace();
        let mut table = [Complex64::new(0.0, 0.0); 16];
        for (i, slot) in table.iter_mut().enumerate() {
            *slot = state.expect_normal_ordered(i >> 3 & 1, i >> 2 & 1, i >> 1 & 1, i & 1) / norm;
        }
        let moments = PairMoments(table);
        let c = kernel_c(p);
        let got = moments.get(&[Op::T, Op::R]).norm();
        let den = if c > 0.0 { c } else { 1.0 };
        pair_error = pair_error.max((got - c).abs() / den);
        pairs.push(moments);
    }

    let scale = modes.iter().fold(0.0f64, |a, (q, _)| a.max(q.abs()));
    let unit = if scale > 0.0 { 1.0 / scale } else { 1.0 };
    let tuples = [
        [0.0, 0.0, 0.0, 0.0],
        [0.3, -0.7, 1.1, 0.2],
        [-1.3, 0.4, 0.9, -0.5],
        [2.1, 1.7, -0.6, 0.8],
        [0.5, 0.5, -0.5, -0.5],
    ];

    let qs: Vec<f64> = modes.iter().map(|(q, _)| *q).collect();
    let mut fourth_error: f64 = 0.0;
    for t in &tuples {
        let [x1, x2, x3, x4] = t.map(|v| v * unit);
        let field = [(Op::RDag, x1), (Op::R, x2), (Op::TDag, x3), (Op::T, x4)];
        let lhs = correlator(&pairs, &qs, &field);
        let rhs = correlator(&pairs, &qs, &field[..2]) * correlator(&pairs, &qs, &field[2..])
            + correlator(&pairs, &qs, &[field[0], field[2]]) * correlator(&pairs, &qs, &[field[1], field[3]]);
        let den = lhs.norm().max(rhs.norm());
        if den > 0.0 {
            fourth_error = fourth_error.max((lhs - rhs).norm() / den);
        }
    }

    Ok(FactorizationReport {
        cutoff,
        trace_deficit: deficit,
        tolerance: 10.0 * deficit + FACTORIZATION_FLOOR,
        fourth_moment_error: fourth_error,
        pair_correlation_error: pair_error,
        samples: tuples.len(),
    })
}

/// Expectation of a product of field operators at given positions, expanded
/// over every assignment of operators to pairs.
fn correlator(pairs: &[PairMoments], qs: &[f64], field: &[(Op, f64)]) -> Complex64 {
    let n = pairs.len();
    let mut total = Complex64::new(0.0, 0.0);
    let mut assign = alloc::vec![0usize; field.len()];
    loop {
        let mut phase = 0.0;
        for (&(op, x), &p) in field.iter().zip(&assign) {
            phase += match op {
                Op::RDag | Op::T => qs[p] * x,
                Op::R | Op::TDag => -qs[p] * x,
            };
        }
        let mut value = Complex64::from_polar(1.0, phase);
        for (p, moments) in pairs.iter().enumerate() {
            let ops: Vec<Op> = field.iter().zip(&assign).filter(|(_, &a)| a == p).map(|(&(op, _), _)| op).collect();
            value *= moments.get(&ops);
        }
        total += value;

        // next assignment in base n
        let mut k = 0;
        while k < assign.len() {
            assign[k] += 1;
            if assign[k] < n {
                break;
            }
            assign[k] = 0;
            k += 1;
        }
        if k == assign.len() {
            return total;
        }
    }
}
