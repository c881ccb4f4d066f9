//! Sampled transmission functions and their generators.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Relative tolerance on grid uniformity and on `|t| ≤ 1`.
const GRID_TOL: f64 = 1e-9;

/// `n` points `x_j = (j − (n − 1)/2) dx`, symmetric about zero.
pub fn centered_grid(n: usize, dx: f64) -> Vec<f64> {
    let mid = (n as f64 - 1.0) / 2.0;
    (0..n).map(|j| (j as f64 - mid) * dx).collect()
}

/// Uniformly sampled complex transmission `t(x)`, zero outside the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledObject {
    x0: f64,
    dx: f64,
    t: Vec<Complex64>,
}

impl SampledObject {
    pub fn new(x: &[f64], t: Vec<Complex64>) -> Result<Self> {
        if x.len() < 2 || x.len() != t.len() {
            return Err(Error::InvalidObject("need at least two samples and one value per position"));
        }
        let dx = (x[x.len() - 1] - x[0]) / (x.len() - 1) as f64;
        if !(dx.is_finite() && dx > 0.0) {
            return Err(Error::InvalidObject("positions must be increasing"));
        }
        for (j, &xj) in x.iter().enumerate() {
            if (xj - (x[0] + j as f64 * dx)).abs() > GRID_TOL * dx {
                return Err(Error::InvalidObject("positions must be uniformly spaced"));
            }
        }
        for v in &t {
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::InvalidObject("transmission must be finite"));
            }
            if v.norm() > 1.0 + GRID_TOL {
                return Err(Error::InvalidObject("|t| must not exceed 1"));
            }
        }
        Ok(Self { x0: x[0], dx, t })
    }

    /// Samples a real aperture function given as a list of open intervals.
    ///
    /// Each sample is the open fraction of its cell `[x − dx/2, x + dx/2]`,
    /// so the discrete spectrum keeps the exact zeros of the continuous one.
    pub fn from_apertures(x: &[f64], apertures: &[(f64, f64)]) -> Result<Self> {
        if x.len() < 2 {
            return Err(Error::InvalidObject("need at least two samples"));
        }
        let dx = (x[x.len() - 1] - x[0]) / (x.len() - 1) as f64;
        let t = x
            .iter()
            .map(|&xc| {
                let (lo, hi) = (xc - 0.5 * dx, xc + 0.5 * dx);
                let open: f64 = apertures.iter().map(|&(a, b)| (hi.min(b) - lo.max(a)).max(0.0)).sum();
                Complex64::new((open / dx).min(1.0), 0.0)
            })
            .collect();
        Self::new(x, t)
    }

    pub fn single_slit(x: &[f64], width: f64) -> Result<Self> {
        if width.is_nan() || width <= 0.0 {
            return Err(Error::InvalidObject("slit width must be positive"));
        }
        Self::from_apertures(x, &[(-0.5 * width, 0.5 * width)])
    }

    /// Two slits of `width` whose centres are `separation` apart.
    pub fn double_slit(x: &[f64], width: f64, separation: f64) -> Result<Self> {
        if !(width > 0.0 && separation >= width) {
            return Err(Error::InvalidObject("need 0 < width <= separation"));
        }
        let h = 0.5 * separation;
        let w = 0.5 * width;
        Self::from_apertures(x, &[(-h - w, -h + w), (h - w, h + w)])
    }

    /// `count` slits of `width` at pitch `period`, centred on zero.
    pub fn grating(x: &[f64], width: f64, period: f64, count: usize) -> Result<Self> {
        if !(width > 0.0 && period >= width) || count == 0 {
            return Err(Error::InvalidObject("need count > 0 and 0 < width <= period"));
        }
        let first = -0.5 * (count as f64 - 1.0) * period;
        let apertures: Vec<_> = (0..count)
            .map(|i| {
                let c = first + i as f64 * period;
                (c - 0.5 * width, c + 0.5 * width)
            })
            .collect();
        Self::from_apertures(x, &apertures)
    }

    /// Fully transmitting over the whole grid.
    pub fn flat(x: &[f64]) -> Result<Self> {
        Self::new(x, x.iter().map(|_| Complex64::new(1.0, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x0 + j as f64 * self.dx
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.x(j)).collect()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.t
    }

    /// Linear interpolation between samples, zero outside the grid.
    pub fn value_at(&self, x: f64) -> Complex64 {
        let s = (x - self.x0) / self.dx;
        let last = (self.len() - 1) as f64;
        if !(s >= -GRID_TOL && s <= last + GRID_TOL) {
            return Complex64::new(0.0, 0.0);
        }
        let s = if (s - s.round()).abs() <= GRID_TOL { s.round() } else { s }.clamp(0.0, last);
        let j = (s.floor() as usize).min(self.len() - 2);
        let frac = s - j as f64;
        self.t[j] * (1.0 - frac) + self.t[j + 1] * frac
    }

    /// `t̃(k) = Σ_j t(x_j) e^{−i k x_j} dx`
    pub fn spectrum(&self, k: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, v) in self.t.iter().enumerate() {
            if v.re != 0.0 || v.im != 0.0 {
                acc += v * Complex64::from_polar(1.0, -k * self.x(j));
            }
        }
        acc * self.dx
    }

    /// Index of the sample at `x`, if `x` lies on the grid.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let s = (x - self.x0) / self.dx;
        let j = s.round();
        ((s - j).abs() <= 1e-6 && j >= 0.0 && j < self.len() as f64).then_some(j as usize)
    }
}
