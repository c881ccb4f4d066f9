//! Analytic references for the ghost scenarios.

use std::f64::consts::PI;

use num_complex::Complex64;
use pdcsim_core::ghost::{GhostGeometry, Reconstruction};

/// `|∫ t(x) e^{−ikx} dx|²` for a binary object made of open intervals.
pub fn slit_far_field(apertures: &[(f64, f64)], k: f64) -> f64 {
    let amp: Complex64 = apertures
        .iter()
        .map(|&(a, b)| {
            if (k * (b - a)).abs() < 1e-12 {
                Complex64::new(b - a, 0.0)
            } else {
                (Complex64::from_polar(1.0, -k * a) - Complex64::from_polar(1.0, -k * b)) / Complex64::new(0.0, k)
            }
        })
        .sum();
    amp.norm_sqr()
}

/// Spatial frequency probed at `x_R` in the Fourier configuration.
pub fn diffraction_wavenumber(geometry: &GhostGeometry, x_r: f64) -> f64 {
    2.0 * PI * x_r / (geometry.lambda * geometry.d3)
}

/// Far-field pattern of `apertures` on the positions of `rec`.
pub fn expected_diffraction(geometry: &GhostGeometry, apertures: &[(f64, f64)], x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| slit_far_field(apertures, diffraction_wavenumber(geometry, v))).collect()
}

/// Positions `m λ d₃ / width` of the single-slit zeros.
pub fn single_slit_zero(geometry: &GhostGeometry, width: f64, order: i32) -> f64 {
    order as f64 * geometry.lambda * geometry.d3 / width
}

/// Distance from `predicted` to the smallest sample within `radius` steps of
/// it, and the grid step. `None` when `predicted` is off the grid.
pub fn minimum_offset(rec: &Reconstruction, predicted: f64, radius: usize) -> Option<(f64, f64)> {
    let x = &rec.x;
    if x.len() < 2 {
        return None;
    }
    let step = (x[x.len() - 1] - x[0]) / (x.len() - 1) as f64;
    let centre = ((predicted - x[0]) / step).round();
    if centre < 0.0 || centre >= x.len() as f64 {
        return None;
    }
    let centre = centre as usize;
    let lo = centre.saturating_sub(radius);
    let hi = (centre + radius).min(x.len() - 1);
    let best = (lo..=hi).min_by(|&a, &b| rec.normalized[a].total_cmp(&rec.normalized[b]))?;
    Some(((x[best] - predicted).abs(), step.abs()))
}
