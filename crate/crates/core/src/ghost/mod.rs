//! Fourth-order correlation maps for ghost imaging and ghost diffraction
//! in one transverse dimension.
//!
//! `G²(x_R, x_T) = |Σ_q h̃_R(x_R, −q) h̃_T(x_T, q) C_q e^{iφ_q}|²` is
//! evaluated by direct summation over a symmetric q grid.

mod factorization;
mod object;
mod profile;

pub use factorization::{validate_factorization, FactorizationReport};
pub use object::{centered_grid, SampledObject};
pub use profile::{kernel_c, KernelProfile, QGrid, SYMMETRY_TOL};

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// `|1 − d₃/f_R|` at or below this is the Fourier configuration.
pub const FOURIER_BRANCH_TOL: f64 = 1e-12;
/// `|1 − d₃/f_R|` below this (but above the Fourier tolerance) is rejected.
pub const ILL_CONDITIONED_BAND: f64 = 1e-6;

/// Collection optics in the Test arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Bucket detector directly behind the object.
    ObjectPlane,
    /// Lens of focal length `f_T` in a Fourier configuration behind the object.
    FourierLens,
}

/// Which form the Reference-arm response takes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Branch {
    /// `f_R ≠ d₃`, with `defocus = 1/d₃ − 1/f_R`.
    Imaging { defocus: f64 },
    /// `f_R = d₃`
    Fourier,
}

/// Distances and focal lengths of the two arms, in metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhostGeometry {
    pub lambda: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub f_r: f64,
    pub f_t: f64,
    pub variant: Variant,
}

impl GhostGeometry {
    pub fn new(lambda: f64, d1: f64, d2: f64, d3: f64, f_r: f64, f_t: f64, variant: Variant) -> Result<Self> {
        for v in [lambda, d1, d2, d3, f_r, f_t] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidGeometry("lengths must be finite and positive"));
            }
        }
        Ok(Self { lambda, d1, d2, d3, f_r, f_t, variant })
    }

    /// `M = d₃ / (d₁ + d₂)`
    pub fn magnification(&self) -> f64 {
        self.d3 / (self.d1 + self.d2)
    }

    /// `1/(d₁ + d₂) + 1/d₃ − 1/f_R`, zero when the thin-lens relation holds.
    pub fn thin_lens_residual(&self) -> f64 {
        1.0 / (self.d1 + self.d2) + 1.0 / self.d3 - 1.0 / self.f_r
    }

    pub fn branch(&self) -> Result<Branch> {
        let defocus = 1.0 / self.d3 - 1.0 / self.f_r;
        let scaled = (defocus * self.d3).abs();
        if scaled <= FOURIER_BRANCH_TOL {
            Ok(Branch::Fourier)
        } else if scaled < ILL_CONDITIONED_BAND {
            Err(Error::IllConditionedGeometry(scaled))
        } else {
            Ok(Branch::Imaging { defocus })
        }
    }

    /// Coefficient `a` of the residual phase `e^{−i a q²}` left in the
    /// imaging q-sum, `(λ/4π)(d₁ + d₂ + 1/(1/d₃ − 1/f_R))`.
    pub fn residual_phase_coefficient(&self) -> Result<f64> {
        match self.branch()? {
            Branch::Imaging { defocus } => Ok(self.lambda / (4.0 * PI) * (self.d1 + self.d2 + 1.0 / defocus)),
            Branch::Fourier => Err(Error::FourierBranch),
        }
    }

    /// Momentum selected at `x_R` in the Fourier configuration.
    pub fn fourier_selected_q(&self, x_r: f64) -> f64 {
        -2.0 * PI * x_r / (self.lambda * self.d3)
    }

    fn free_phase(&self, d: f64, q: f64) -> Complex64 {
        Complex64::from_polar(1.0, -self.lambda * d * q * q / (4.0 * PI))
    }
}

/// `h̃_T(x_T, q)` for the configured Test arm.
pub fn transfer_t(geometry: &GhostGeometry, object: &SampledObject, q: f64, x_t: f64) -> Complex64 {
    let free = geometry.free_phase(geometry.d1, q);
    match geometry.variant {
        Variant::ObjectPlane => free * Complex64::from_polar(1.0, q * x_t) * object.value_at(x_t),
        Variant::FourierLens => {
            let k = -q - 2.0 * PI * x_t / (geometry.lambda * geometry.f_t);
            free * object.spectrum(k)
        }
    }
}

/// `h̃_R(x_R, −q_m)` for mode `m` of `grid`.
///
/// In the Fourier configuration the response is a Kronecker selection of the
/// grid mode at `q = −2π x_R/(λ d₃)`, which must lie on the grid.
pub fn transfer_r(geometry: &GhostGeometry, grid: &QGrid, m: isize, x_r: f64) -> Result<Complex64> {
    let q = grid.q(m);
    match geometry.branch()? {
        Branch::Imaging { defocus } => {
            let quad = geometry.free_phase(geometry.d2 + 1.0 / defocus, q);
            Ok(quad * Complex64::from_polar(1.0, -q * x_r / (geometry.d3 * defocus)))
        }
        Branch::Fourier => {
            let selected = grid.index_of(geometry.fourier_selected_q(x_r))?;
            Ok(if selected == m { geometry.free_phase(geometry.d2, q) } else { Complex64::new(0.0, 0.0) })
        }
    }
}

/// Momentum grid plus the Reference and Test detector positions.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalGrids {
    pub q: QGrid,
    pub x_r: Vec<f64>,
    pub x_t: Vec<f64>,
}

impl EvalGrids {
    pub fn new(q: QGrid, x_r: Vec<f64>, x_t: Vec<f64>) -> Result<Self> {
        if x_r.is_empty() || x_t.is_empty() {
            return Err(Error::InvalidGrid("detector grids must be non-empty"));
        }
        if x_r.iter().chain(x_t.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("detector positions must be finite"));
        }
        Ok(Self { q, x_r, x_t })
    }

    /// Grids on which the imaging q-sum is an exact DFT.
    ///
    /// The q spacing is conjugate to the object sampling, `x_T` is the object
    /// grid (variant (a)) or the single point `x_T = 0` (variant (b)), and each
    /// `x_R` is the image point `d₃(1/d₃ − 1/f_R) x` of an object sample `x`.
    pub fn imaging(geometry: &GhostGeometry, object: &SampledObject, n_half: usize) -> Result<Self> {
        let defocus = match geometry.branch()? {
            Branch::Imaging { defocus } => defocus,
            Branch::Fourier => return Err(Error::FourierBranch),
        };
        let len = (2 * n_half + 1) as f64;
        if (object.len() as f64) > len {
            return Err(Error::InvalidGrid("object has more samples than the q grid"));
        }
        let q = QGrid::new(n_half, 2.0 * PI / (len * object.dx()))?;
        let scale = geometry.d3 * defocus;
        let mut x_r: Vec<f64> = object.positions().iter().map(|x| scale * x).collect();
        x_r.sort_by(f64::total_cmp);
        let x_t = match geometry.variant {
            Variant::ObjectPlane => object.positions(),
            Variant::FourierLens => vec![0.0],
        };
        Self::new(q, x_r, x_t)
    }

    /// One `x_R` per grid mode, `x_R = −q λ d₃ / 2π`, ascending; `x_T = 0`.
    pub fn diffraction(geometry: &GhostGeometry, q: QGrid) -> Result<Self> {
        let step = geometry.lambda * geometry.d3 / (2.0 * PI);
        let x_r = q.indices().rev().map(|m| -q.q(m) * step).collect();
        Self::new(q, x_r, vec![0.0])
    }
}

/// Row-wise evaluator of `G²`, with all kernel data precomputed.
#[derive(Debug, Clone)]
pub struct G2Evaluator<'a> {
    geometry: GhostGeometry,
    grids: &'a EvalGrids,
    branch: Branch,
    amplitudes: Vec<Complex64>,
    // h̃_T(x_T, q), row per x_T
    test_table: Vec<Complex64>,
    test_zero: Vec<bool>,
}

impl<'a> G2Evaluator<'a> {
    pub fn new(
        geometry: &GhostGeometry,
        object: &SampledObject,
        profile: &KernelProfile,
        grids: &'a EvalGrids,
    ) -> Result<Self> {
        let branch = geometry.branch()?;
        let amplitudes = profile.amplitudes(&grids.q)?;
        let len = grids.q.len();
        let mut test_table = Vec::with_capacity(grids.x_t.len() * len);
        let mut test_zero = Vec::with_capacity(grids.x_t.len());
        for &x_t in &grids.x_t {
            let start = test_table.len();
            test_table.extend(grids.q.indices().map(|m| transfer_t(geometry, object, grids.q.q(m), x_t)));
            test_zero.push(test_table[start..].iter().all(|v| v.norm_sqr() == 0.0));
        }
        Ok(Self { geometry: *geometry, grids, branch, amplitudes, test_table, test_zero })
    }

    pub fn grids(&self) -> &EvalGrids {
        self.grids
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    /// `h̃_R(x_R, −q) C_q e^{iφ_q}` for row `i_r`, ascending in `q`.
    pub fn row_weights(&self, i_r: usize) -> Result<Vec<Complex64>> {
        let x_r = self.grids.x_r[i_r];
        self.grids
            .q
            .indices()
            .zip(self.amplitudes.iter())
            .map(|(m, k)| Ok(transfer_r(&self.geometry, &self.grids.q, m, x_r)? * k))
            .collect()
    }

    /// For the object-plane variant `h̃_T(x_T, q) = P_q e^{iqx_T} t(x_T)`;
    /// returns `P_q` (ascending in `q`) and `t(x_T)` on the `x_T` grid.
    pub fn object_plane_factors(&self, object: &SampledObject) -> Option<(Vec<Complex64>, Vec<Complex64>)> {
        (self.geometry.variant == Variant::ObjectPlane).then(|| {
            let q = &self.grids.q;
            let prop = q.indices().map(|m| self.geometry.free_phase(self.geometry.d1, q.q(m))).collect();
            let t = self.grids.x_t.iter().map(|&x| object.value_at(x)).collect();
            (prop, t)
        })
    }

    /// `G²(x_R, ·)` over the `x_T` grid.
    pub fn row(&self, i_r: usize) -> Result<Vec<f64>> {
        let len = self.grids.q.len();
        let n_t = self.grids.x_t.len();
        let mut out = vec![0.0; n_t];
        match self.branch {
            Branch::Imaging { .. } => {
                let w = self.row_weights(i_r)?;
                for (i_t, slot) in out.iter_mut().enumerate() {
                    if self.test_zero[i_t] {
                        continue;
                    }
                    let row = &self.test_table[i_t * len..(i_t + 1) * len];
                    let s: Complex64 = w.iter().zip(row).map(|(a, b)| a * b).sum();
                    *slot = s.norm_sqr();
                }
            }
            Branch::Fourier => {
                let q = &self.grids.q;
                let x_r = self.grids.x_r[i_r];
                let m = q.index_of(self.geometry.fourier_selected_q(x_r))?;
                let idx = (m + q.n_half() as isize) as usize;
                let w = transfer_r(&self.geometry, q, m, x_r)? * self.amplitudes[idx];
                for (i_t, slot) in out.iter_mut().enumerate() {
                    *slot = (w * self.test_table[i_t * len + idx]).norm_sqr();
                }
            }
        }
        Ok(out)
    }
}

/// `G²(x_R, x_T)` sampled on a grid, row-major in `x_R`.
#[derive(Debug, Clone, PartialEq)]
pub struct G2Map {
    x_r: Vec<f64>,
    x_t: Vec<f64>,
    values: Vec<f64>,
}

impl G2Map {
    pub fn from_rows(x_r: Vec<f64>, x_t: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != x_r.len() * x_t.len() {
            return Err(Error::InvalidGrid("map size does not match its axes"));
        }
        Ok(Self { x_r, x_t, values })
    }

    pub fn x_r(&self) -> &[f64] {
        &self.x_r
    }

    pub fn x_t(&self) -> &[f64] {
        &self.x_t
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i_r: usize, i_t: usize) -> f64 {
        self.values[i_r * self.x_t.len() + i_t]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Bucket integral over the whole `x_T` grid (uniform spacing assumed;
    /// a single column has unit weight).
    pub fn bucket(&self) -> Reconstruction {
        let n_t = self.x_t.len();
        let dx = if n_t > 1 { (self.x_t[n_t - 1] - self.x_t[0]) / (n_t - 1) as f64 } else { 1.0 };
        let raw = self.values.chunks(n_t).map(|row| row.iter().sum::<f64>() * dx).collect();
        Reconstruction::from_raw(self.x_r.clone(), raw)
    }

    /// The column at `x_T = x_t[i_t]`.
    pub fn slice(&self, i_t: usize) -> Reconstruction {
        let n_t = self.x_t.len();
        let raw = self.values.chunks(n_t).map(|row| row[i_t]).collect();
        Reconstruction::from_raw(self.x_r.clone(), raw)
    }

    /// Index of the column at `x_T = x`, if present.
    pub fn column_at(&self, x: f64) -> Option<usize> {
        let scale = self.x_t.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
        self.x_t.iter().position(|&v| (v - x).abs() <= 1e-9 * scale)
    }
}

/// A reduced profile over `x_R`, raw and max-normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub x: Vec<f64>,
    pub raw: Vec<f64>,
    pub normalized: Vec<f64>,
}

impl Reconstruction {
    /// An all-zero profile normalizes to zeros.
    pub fn from_raw(x: Vec<f64>, raw: Vec<f64>) -> Self {
        let peak = raw.iter().copied().fold(0.0, f64::max);
        let normalized = if peak > 0.0 { raw.iter().map(|v| v / peak).collect() } else { vec![0.0; raw.len()] };
        Self { x, raw, normalized }
    }
}

/// Full map plus its reduced profile.
#[derive(Debug, Clone, PartialEq)]
pub struct GhostResult {
    pub map: G2Map,
    pub profile: Reconstruction,
}

/// Direct evaluation of `G²` on every `(x_R, x_T)` of `grids`.
pub fn g2_map(
    geometry: &GhostGeometry,
    object: &SampledObject,
    profile: &KernelProfile,
    grids: &EvalGrids,
) -> Result<G2Map> {
    let eval = G2Evaluator::new(geometry, object, profile, grids)?;
    let mut values = Vec::with_capacity(grids.x_r.len() * grids.x_t.len());
    for i_r in 0..grids.x_r.len() {
        values.extend(eval.row(i_r)?);
    }
    G2Map::from_rows(grids.x_r.clone(), grids.x_t.clone(), values)
}

/// Reduces a map to the ghost image: bucket integral for the object-plane
/// variant, the `x_T = 0` column for the Fourier-lens variant.
pub fn reduce_image(geometry: &GhostGeometry, map: G2Map) -> Result<GhostResult> {
    let profile = match geometry.variant {
        Variant::ObjectPlane => map.bucket(),
        Variant::FourierLens => map.slice(zero_column(&map)?),
    };
    Ok(GhostResult { map, profile })
}

/// Reduces a map to the diffraction pattern at `x_T = 0`.
pub fn reduce_diffraction(map: G2Map) -> Result<GhostResult> {
    let profile = map.slice(zero_column(&map)?);
    Ok(GhostResult { map, profile })
}

fn zero_column(map: &G2Map) -> Result<usize> {
    map.column_at(0.0).ok_or(Error::InvalidGrid("x_t grid must contain x_T = 0"))
}

/// Ghost image in the imaging configuration `f_R ≠ d₃`.
pub fn ghost_image(
    geometry: &GhostGeometry,
    object: &SampledObject,
    profile: &KernelProfile,
    grids: &EvalGrids,
) -> Result<GhostResult> {
    check_image_config(geometry)?;
    reduce_image(geometry, g2_map(geometry, object, profile, grids)?)
}

pub fn check_image_config(geometry: &GhostGeometry) -> Result<()> {
    match geometry.branch()? {
        Branch::Imaging { .. } => Ok(()),
        Branch::Fourier => Err(Error::FourierBranch),
    }
}

/// Ghost diffraction pattern in the configuration `f_R = d₃` with the
/// Fourier-lens Test arm.
pub fn ghost_diffraction(
    geometry: &GhostGeometry,
    object: &SampledObject,
    profile: &KernelProfile,
    grids: &EvalGrids,
) -> Result<GhostResult> {
    check_diffraction_config(geometry)?;
    reduce_diffraction(g2_map(geometry, object, profile, grids)?)
}

pub fn check_diffraction_config(geometry: &GhostGeometry) -> Result<()> {
    if geometry.variant == Variant::ObjectPlane {
        return Err(Error::ObjectPlaneDiffraction);
    }
    match geometry.branch()? {
        Branch::Fourier => Ok(()),
        Branch::Imaging { .. } => Err(Error::ImagingBranch),
    }
}

/// `|t(−x_R/M)|²` on the given positions.
pub fn geometric_image(object: &SampledObject, x_r: &[f64], magnification: f64) -> Vec<f64> {
    x_r.iter().map(|&x| object.value_at(-x / magnification).norm_sqr()).collect()
}

/// Pearson correlation of two equally long profiles; `None` if either is
/// constant.
pub fn normalized_cross_correlation(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.is_empty() {
        return None;
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    (saa > 0.0 && sbb > 0.0).then(|| sab / (saa * sbb).sqrt())
}
