//! Row-parallel evaluation of `G²` maps, with an FFT path for the
//! object-plane variant on commensurate grids.

use std::sync::Arc;

use num_complex::Complex64;
use pdcsim_core::ghost::{Branch, EvalGrids, G2Evaluator, G2Map, GhostGeometry, KernelProfile, SampledObject, Variant};
use pdcsim_core::{Error, Result};
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

/// Relative tolerance on `dq · dx · (2N + 1) = 2π` and on grid uniformity.
pub const COMMENSURATE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// FFT whenever the grids allow it, direct summation otherwise.
    #[default]
    Auto,
    Direct,
    Fft,
}

/// Start and spacing of `x_T` if the q-sum over `grids` is an exact DFT.
pub fn commensurate_start(grids: &EvalGrids) -> Option<(f64, f64)> {
    let x = &grids.x_t;
    let len = grids.q.len();
    if x.len() < 2 || x.len() > len {
        return None;
    }
    let dx = (x[x.len() - 1] - x[0]) / (x.len() - 1) as f64;
    let uniform = x.iter().enumerate().all(|(j, &v)| (v - (x[0] + j as f64 * dx)).abs() <= COMMENSURATE_TOL * dx.abs());
    let phase = grids.q.dq() * dx * len as f64;
    let matched = (phase - 2.0 * std::f64::consts::PI).abs() <= COMMENSURATE_TOL * phase;
    (uniform && matched).then_some((x[0], dx))
}

/// Whether [`Method::Fft`] applies to this configuration.
pub fn fft_applicable(geometry: &GhostGeometry, grids: &EvalGrids) -> bool {
    geometry.variant == Variant::ObjectPlane
        && matches!(geometry.branch(), Ok(Branch::Imaging { .. }))
        && commensurate_start(grids).is_some()
}

struct FftRows {
    fft: Arc<dyn Fft<f64>>,
    // P_q e^{i q x_T,0}, ascending q
    prefactor: Vec<Complex64>,
    object: Vec<f64>,
}

impl FftRows {
    fn new(eval: &G2Evaluator<'_>, object: &SampledObject, x0: f64) -> Option<Self> {
        let (prop, t) = eval.object_plane_factors(object)?;
        let q = &eval.grids().q;
        let prefactor = q.indices().zip(prop).map(|(m, p)| p * Complex64::from_polar(1.0, q.q(m) * x0)).collect();
        let fft = FftPlanner::new().plan_fft_inverse(q.len());
        Some(Self { fft, prefactor, object: t.iter().map(|v| v.norm_sqr()).collect() })
    }

    fn row(&self, eval: &G2Evaluator<'_>, i_r: usize) -> Result<Vec<f64>> {
        let mut buf: Vec<Complex64> =
            eval.row_weights(i_r)?.into_iter().zip(&self.prefactor).map(|(w, p)| w * p).collect();
        self.fft.process(&mut buf);
        Ok(buf.iter().zip(&self.object).map(|(s, t)| s.norm_sqr() * t).collect())
    }
}

/// Evaluates `G²` over `grids`, one `x_R` row per task.
pub fn g2_map_parallel(
    geometry: &GhostGeometry,
    object: &SampledObject,
    profile: &KernelProfile,
    grids: &EvalGrids,
    method: Method,
) -> Result<G2Map> {
    let eval = G2Evaluator::new(geometry, object, profile, grids)?;
    let use_fft = match method {
        Method::Direct => false,
        Method::Auto => fft_applicable(geometry, grids),
        Method::Fft if fft_applicable(geometry, grids) => true,
        Method::Fft => return Err(Error::InvalidGrid("FFT path needs object-plane imaging on commensurate grids")),
    };
    let rows: Vec<Vec<f64>> = if use_fft {
        let (x0, _) = commensurate_start(grids).expect("checked above");
        let plan = FftRows::new(&eval, object, x0).expect("object-plane variant");
        (0..grids.x_r.len()).into_par_iter().map(|i| plan.row(&eval, i)).collect::<Result<_>>()?
    } else {
        (0..grids.x_r.len()).into_par_iter().map(|i| eval.row(i)).collect::<Result<_>>()?
    };
    G2Map::from_rows(grids.x_r.clone(), grids.x_t.clone(), rows.concat())
}
