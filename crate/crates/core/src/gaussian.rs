//! Two-mode Gaussian description of a `(T, q)`–`(R, -q)` pair.
//!
//! Every pair produced by the bilinear interaction is an independent zero-mean
//! Gaussian state, so its 4×4 covariance block over `(X_T, Y_T, X_R, Y_R)`
//! carries everything needed for separability. The vacuum is `identity / 2`.
//! A multimode source is a list of independent blocks, one per pair.

use core::f64::consts::FRAC_PI_2;

use nalgebra::{Matrix2, Matrix4, SymmetricEigen};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{finite, non_negative, Error, Result};

/// Absolute tolerance on symplectic eigenvalues for physicality and PPT tests.
pub const SYMPLECTIC_TOL: f64 = 1e-9;
/// Relative tolerance when accepting a matrix as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Margins with magnitude at or below this are flagged as boundary points.
pub const BOUNDARY_BAND: f64 = 1e-6;

/// Physical inputs of one mode pair: the two seed intensities and the coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeParams {
    mu_t: f64,
    mu_r: f64,
    kappa_abs: f64,
    n_pdc: f64,
    phi: f64,
}

impl ModeParams {
    /// `mu_t`, `mu_r` are mean photon numbers of the thermal seeds, `kappa_abs`
    /// the modulus of the coupling and `phi` its phase.
    pub fn new(mu_t: f64, mu_r: f64, kappa_abs: f64, phi: f64) -> Result<Self> {
        let kappa_abs = non_negative("kappa_abs", kappa_abs)?;
        let v = kappa_abs.sinh();
        Ok(Self {
            mu_t: non_negative("mu_t", mu_t)?,
            mu_r: non_negative("mu_r", mu_r)?,
            kappa_abs,
            n_pdc: finite("n_pdc", v * v)?,
            phi: finite("phi", phi)?,
        })
    }

    /// Builds the parameters from the spontaneous photon number `n_pdc = sinh²|κ|`.
    /// The given `n_pdc` is kept exactly rather than recomputed from `|κ|`.
    pub fn from_npdc(mu_t: f64, mu_r: f64, n_pdc: f64, phi: f64) -> Result<Self> {
        let n_pdc = non_negative("n_pdc", n_pdc)?;
        Ok(Self { n_pdc, ..Self::new(mu_t, mu_r, n_pdc.sqrt().asinh(), phi)? })
    }

    pub fn mu_t(&self) -> f64 {
        self.mu_t
    }

    pub fn mu_r(&self) -> f64 {
        self.mu_r
    }

    pub fn kappa_abs(&self) -> f64 {
        self.kappa_abs
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Mean number of spontaneously generated photons per mode.
    pub fn n_pdc(&self) -> f64 {
        self.n_pdc
    }

    /// `cosh|κ| = sqrt(1 + n_PDC)`
    pub fn u(&self) -> f64 {
        (1.0 + self.n_pdc).sqrt()
    }

    /// `sinh|κ| = sqrt(n_PDC)`
    pub fn v(&self) -> f64 {
        self.n_pdc.sqrt()
    }

    /// Seeds exchanged between the two arms.
    pub fn swapped(&self) -> Self {
        Self { mu_t: self.mu_r, mu_r: self.mu_t, ..*self }
    }

    /// Closed-form separability margin `μ_T μ_R − n_PDC (1 + μ_T + μ_R)`.
    pub fn separability_margin(&self) -> f64 {
        self.mu_t * self.mu_r - self.n_pdc() * (1.0 + self.mu_t + self.mu_r)
    }
}

/// The block-diagonal symplectic form `ω ⊕ ω` of one mode pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SymplecticForm;

impl SymplecticForm {
    pub fn matrix(&self) -> Matrix4<f64> {
        let mut m = Matrix4::zeros();
        m[(0, 1)] = 1.0;
        m[(1, 0)] = -1.0;
        m[(2, 3)] = 1.0;
        m[(3, 2)] = -1.0;
        m
    }
}

/// Real symmetric covariance of one pair, basis `(X_T, Y_T, X_R, Y_R)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceBlock {
    entries: Matrix4<f64>,
}

impl CovarianceBlock {
    /// Wraps an arbitrary matrix after checking symmetry.
    pub fn from_matrix(entries: Matrix4<f64>) -> Result<Self> {
        let scale = entries.amax().max(f64::MIN_POSITIVE);
        let asym = (entries - entries.transpose()).amax() / scale;
        if !asym.is_finite() || asym > SYMMETRY_TOL {
            return Err(Error::NotSymmetric(asym));
        }
        Ok(Self { entries })
    }

    /// The vacuum state, `identity / 2`.
    pub fn vacuum() -> Self {
        Self { entries: Matrix4::identity() * 0.5 }
    }

    /// Places `(A, A, B, B)` on the diagonal and `C`, `−C` on the
    /// `X_T X_R` and `Y_T Y_R` correlations.
    pub fn from_abc(a: f64, b: f64, c: f64) -> Self {
        let mut m = Matrix4::zeros();
        m[(0, 0)] = a;
        m[(1, 1)] = a;
        m[(2, 2)] = b;
        m[(3, 3)] = b;
        m[(0, 2)] = c;
        m[(2, 0)] = c;
        m[(1, 3)] = -c;
        m[(3, 1)] = -c;
        Self { entries: m }
    }

    pub fn entries(&self) -> &Matrix4<f64> {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[(row, col)]
    }

    /// `V_{X_T X_T}`
    pub fn a(&self) -> f64 {
        self.entries[(0, 0)]
    }

    /// `V_{X_R X_R}`
    pub fn b(&self) -> f64 {
        self.entries[(2, 2)]
    }

    /// `V_{X_T X_R}`
    pub fn c(&self) -> f64 {
        self.entries[(0, 2)]
    }

    pub fn determinant(&self) -> f64 {
        self.entries.determinant()
    }

    /// Both symplectic eigenvalues are at least 1/2 (up to [`SYMPLECTIC_TOL`]).
    pub fn is_physical(&self) -> bool {
        matches!(symplectic_eigenvalues(self), Ok((nu_min, _)) if nu_min >= 0.5 - SYMPLECTIC_TOL)
    }
}

/// Covariance of the output pair in the `φ = 0` phase-space gauge.
pub fn build_covariance(p: &ModeParams) -> CovarianceBlock {
    let u2 = p.u() * p.u();
    let v2 = p.v() * p.v();
    let a = (u2 * (2.0 * p.mu_t + 1.0) + v2 * (2.0 * p.mu_r + 1.0)) / 2.0;
    let b = (u2 * (2.0 * p.mu_r + 1.0) + v2 * (2.0 * p.mu_t + 1.0)) / 2.0;
    let c = p.u() * p.v() * (p.mu_t + p.mu_r + 1.0);
    CovarianceBlock::from_abc(a, b, c)
}

/// Rotates the phase space of the Reference mode, `a_R → e^{iθ} a_R`.
///
/// Applied to a `φ = 0` block this yields the covariance of a pair whose
/// anomalous correlation is `⟨a_T a_R⟩ = e^{iθ} C`.
pub fn rotate_reference_mode(v: &CovarianceBlock, theta: f64) -> CovarianceBlock {
    let (s, c) = theta.sin_cos();
    let mut rot = Matrix4::identity();
    rot.fixed_view_mut::<2, 2>(2, 2).copy_from(&Matrix2::new(c, -s, s, c));
    CovarianceBlock { entries: rot * v.entries * rot.transpose() }
}

/// Covariance matching a pair whose anomalous correlation carries phase `θ`.
pub fn build_covariance_with_phase(p: &ModeParams, theta: f64) -> CovarianceBlock {
    rotate_reference_mode(&build_covariance(p), theta)
}

/// Phase of `⟨a_T a_R⟩` produced by the disentangled evolution for coupling
/// phase `φ`: the squeezing parameter is `−i e^{−iφ} tanh|κ|`.
pub fn evolution_pair_phase(phi: f64) -> f64 {
    -phi - FRAC_PI_2
}

/// Beam-splitter loss with equal transmission on both arms,
/// `V_τ = τ V + (1 − τ) identity / 2`.
pub fn apply_loss(v: &CovarianceBlock, tau: f64) -> Result<CovarianceBlock> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::Transmission(tau));
    }
    Ok(CovarianceBlock { entries: v.entries * tau + Matrix4::identity() * ((1.0 - tau) / 2.0) })
}

/// Partial transposition of the Reference mode: `Y_R → −Y_R`.
pub fn partial_transpose(v: &CovarianceBlock) -> CovarianceBlock {
    let flip = Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, 1.0, 1.0, -1.0));
    CovarianceBlock { entries: flip * v.entries * flip }
}

/// Symplectic eigenvalues `(ν₁, ν₂)`, ascending.
///
/// These are the moduli of the `±iν` eigenvalue pairs of `Ω V`. For positive
/// definite `V` the matrix `Ω V` is similar to the antisymmetric
/// `W = V^{1/2} Ω V^{1/2}`, so the `ν²` are the (doubly degenerate)
/// eigenvalues of the symmetric `Wᵀ W`. Both steps use a dense symmetric
/// eigensolver and no assumption about the sparsity of `V`.
pub fn symplectic_eigenvalues(v: &CovarianceBlock) -> Result<(f64, f64)> {
    let eig = SymmetricEigen::new(v.entries);
    let min = eig.eigenvalues.min();
    if min.is_nan() || min <= 0.0 {
        return Err(Error::NotPositiveDefinite(min));
    }
    let sqrt_diag = Matrix4::from_diagonal(&eig.eigenvalues.map(|x| x.sqrt()));
    let root = eig.eigenvectors * sqrt_diag * eig.eigenvectors.transpose();
    let w = root * SymplecticForm.matrix() * root;
    let gram = w.transpose() * w;
    let mut nu_sq = SymmetricEigen::new(0.5 * (gram + gram.transpose())).eigenvalues;
    nu_sq.as_mut_slice().sort_by(|a, b| a.total_cmp(b));
    let nu = |a: f64, b: f64| (0.5 * (a + b)).max(0.0).sqrt();
    Ok((nu(nu_sq[0], nu_sq[1]), nu(nu_sq[2], nu_sq[3])))
}

/// Checked variant of [`symplectic_eigenvalues`] for raw matrices.
pub fn symplectic_eigenvalues_of(m: Matrix4<f64>) -> Result<(f64, f64)> {
    symplectic_eigenvalues(&CovarianceBlock::from_matrix(m)?)
}

/// Outcome of the PPT test on one pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparabilityVerdict {
    /// Classification from the sign of the closed-form margin.
    pub separable: bool,
    /// `τ² [μ_T μ_R − n_PDC (1 + μ_T + μ_R)]` (`τ = 1` when lossless).
    pub margin: f64,
    /// Smallest symplectic eigenvalue of the partially transposed covariance.
    pub min_pt_symplectic_eigenvalue: f64,
}

impl SeparabilityVerdict {
    fn from_parts(margin: f64, pt: &CovarianceBlock) -> Self {
        // partial transposition and loss keep a physical block positive definite
        let nu_min = symplectic_eigenvalues(pt).map_or(f64::NAN, |(nu, _)| nu);
        Self { separable: margin >= 0.0, margin, min_pt_symplectic_eigenvalue: nu_min }
    }

    /// `|margin|` is within [`BOUNDARY_BAND`]; the sign still decides.
    pub fn is_boundary(&self) -> bool {
        self.margin.abs() <= BOUNDARY_BAND
    }

    /// What the partially transposed spectrum alone says.
    pub fn pt_separable(&self) -> bool {
        self.min_pt_symplectic_eigenvalue >= 0.5 - SYMPLECTIC_TOL
    }

    /// The closed form and the spectrum agree, or the point is a boundary point.
    pub fn routes_agree(&self) -> bool {
        self.is_boundary() || self.pt_separable() == self.separable
    }
}

/// PPT verdict for the lossless output pair.
pub fn check_separability(p: &ModeParams) -> SeparabilityVerdict {
    let pt = partial_transpose(&build_covariance(p));
    SeparabilityVerdict::from_parts(p.separability_margin(), &pt)
}

/// PPT verdict after equal loss `τ` on both arms.
pub fn check_separability_lossy(p: &ModeParams, tau: f64) -> Result<SeparabilityVerdict> {
    let lossy = apply_loss(&build_covariance(p), tau)?;
    let pt = partial_transpose(&lossy);
    Ok(SeparabilityVerdict::from_parts(tau * tau * p.separability_margin(), &pt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::SQRT_2;

    // Independent route: roots of ν⁴ − Δν² + det V = 0 for the standard
    // pattern, Δ = A² + B² ∓ 2C² (minus for V, plus after transposition).
    fn quartic_nu(a: f64, b: f64, c: f64, transposed: bool) -> (f64, f64) {
        let delta = a * a + b * b + if transposed { 2.0 } else { -2.0 } * c * c;
        let det = (a * b - c * c) * (a * b - c * c);
        let disc = (delta * delta - 4.0 * det).max(0.0).sqrt();
        (((delta - disc) / 2.0).sqrt(), ((delta + disc) / 2.0).sqrt())
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn vacuum_without_interaction() {
        let v = build_covariance(&ModeParams::new(0.0, 0.0, 0.0, 0.0).unwrap());
        assert_eq!(v, CovarianceBlock::vacuum());
    }

    #[test]
    fn one_arm_seed_at_unit_npdc() {
        let v = build_covariance(&ModeParams::new(1.0, 0.0, 1.0f64.asinh(), 0.0).unwrap());
        assert!(close(v.a(), 3.5, 1e-12));
        assert!(close(v.b(), 2.5, 1e-12));
        assert!(close(v.c(), 2.0 * SQRT_2, 1e-12));
        assert!(close(v.get(1, 3), -2.0 * SQRT_2, 1e-12));
    }

    #[test]
    fn uncoupled_thermal_states() {
        let v = build_covariance(&ModeParams::new(2.0, 1.0, 0.0, 0.0).unwrap());
        let expected = Matrix4::from_diagonal(&nalgebra::Vector4::new(2.5, 2.5, 1.5, 1.5));
        assert_eq!(*v.entries(), expected);
    }

    #[test]
    fn rejects_negative_inputs() {
        assert!(matches!(ModeParams::new(-1.0, 0.0, 0.0, 0.0), Err(Error::Negative { field: "mu_t", .. })));
        assert!(ModeParams::new(0.0, -0.1, 0.0, 0.0).is_err());
        assert!(ModeParams::new(0.0, 0.0, -0.1, 0.0).is_err());
        assert!(ModeParams::new(0.0, 0.0, f64::NAN, 0.0).is_err());
        assert!(ModeParams::from_npdc(0.0, 0.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn u_and_v_are_hyperbolic() {
        let p = ModeParams::from_npdc(0.0, 0.0, 3.7, 0.0).unwrap();
        assert!(close(p.u() * p.u() - p.v() * p.v(), 1.0, 1e-12));
        assert!(close(p.n_pdc(), 3.7, 1e-12));
    }

    #[test]
    fn loss_edge_cases() {
        let p = ModeParams::new(1.0, 1.0, 1.0f64.asinh(), 0.0).unwrap();
        let v = build_covariance(&p);
        assert_eq!(apply_loss(&v, 1.0).unwrap(), v);
        let vac = apply_loss(&CovarianceBlock::vacuum(), 0.37).unwrap();
        assert!((vac.entries() - CovarianceBlock::vacuum().entries()).amax() < 1e-15);
        for bad in [0.0, -0.2, 1.0001, f64::NAN] {
            assert!(matches!(apply_loss(&v, bad), Err(Error::Transmission(_))));
        }
    }

    #[test]
    fn loss_matches_attenuated_diagonal_formula() {
        let p = ModeParams::new(1.0, 1.0, 1.0f64.asinh(), 0.0).unwrap();
        let tau = 0.5;
        let v = apply_loss(&build_covariance(&p), tau).unwrap();
        let (u2, v2) = (p.u() * p.u(), p.v() * p.v());
        let a_tau = (1.0 + 2.0 * tau * (u2 * p.mu_t() + v2 * (p.mu_r() + 1.0))) / 2.0;
        let b_tau = (1.0 + 2.0 * tau * (u2 * p.mu_r() + v2 * (p.mu_t() + 1.0))) / 2.0;
        assert!(close(v.a(), a_tau, 1e-12));
        assert!(close(v.b(), b_tau, 1e-12));
        assert!(close(v.c(), tau * build_covariance(&p).c(), 1e-12));
        // halfway between V and identity / 2
        let mid = (build_covariance(&p).entries() + Matrix4::identity() * 0.5) * 0.5;
        assert!((v.entries() - mid).amax() < 1e-12);
    }

    #[test]
    fn partial_transpose_flips_momentum_correlation() {
        let p = ModeParams::new(0.3, 1.2, 0.8, 0.0).unwrap();
        let v = build_covariance(&p);
        let t = partial_transpose(&v);
        assert_eq!(t.get(1, 3), v.c());
        assert_eq!(t.get(3, 1), v.c());
        assert_eq!(t.get(0, 2), v.c());
        assert_eq!(partial_transpose(&t), v);
        let product = build_covariance(&ModeParams::new(0.3, 1.2, 0.0, 0.0).unwrap());
        assert_eq!(partial_transpose(&product), product);
    }

    #[test]
    fn vacuum_symplectic_spectrum() {
        let (a, b) = symplectic_eigenvalues(&CovarianceBlock::vacuum()).unwrap();
        assert!(close(a, 0.5, 1e-14) && close(b, 0.5, 1e-14));
    }

    #[test]
    fn squeezed_vacuum_is_pure_and_entangled() {
        let kappa = 1.0f64.asinh();
        let v = build_covariance(&ModeParams::new(0.0, 0.0, kappa, 0.0).unwrap());
        let (n1, n2) = symplectic_eigenvalues(&v).unwrap();
        assert!(close(n1, 0.5, 1e-12) && close(n2, 0.5, 1e-12));
        let (m1, _) = symplectic_eigenvalues(&partial_transpose(&v)).unwrap();
        assert!(close(m1, (-2.0 * kappa).exp() / 2.0, 1e-12));
        assert!(close(m1, 0.085786437626905, 1e-12));
    }

    #[test]
    fn spectrum_matches_quartic_closed_form() {
        for &(mt, mr, k) in &[(0.0, 0.0, 0.4), (1.0, 2.0, 0.9), (4.0, 0.5, 1.7), (3.0, 3.0, 0.1)] {
            let v = build_covariance(&ModeParams::new(mt, mr, k, 0.0).unwrap());
            let got = symplectic_eigenvalues(&v).unwrap();
            let want = quartic_nu(v.a(), v.b(), v.c(), false);
            assert!(close(got.0, want.0, 1e-9 * want.1) && close(got.1, want.1, 1e-9 * want.1));
            let got = symplectic_eigenvalues(&partial_transpose(&v)).unwrap();
            let want = quartic_nu(v.a(), v.b(), v.c(), true);
            assert!(close(got.0, want.0, 1e-9 * want.1) && close(got.1, want.1, 1e-9 * want.1));
        }
    }

    #[test]
    fn non_symmetric_input_is_rejected() {
        let mut m = Matrix4::identity() * 0.5;
        m[(0, 1)] = 0.1;
        assert!(matches!(symplectic_eigenvalues_of(m), Err(Error::NotSymmetric(_))));
        m[(1, 0)] = 0.1;
        assert!(symplectic_eigenvalues_of(m).is_ok());
        m[(0, 0)] = -1.0;
        assert!(matches!(symplectic_eigenvalues_of(m), Err(Error::NotPositiveDefinite(_))));
    }

    #[test]
    fn separability_examples() {
        let spont = check_separability(&ModeParams::from_npdc(0.0, 0.0, 0.4, 0.0).unwrap());
        assert!(!spont.separable && close(spont.margin, -0.4, 1e-12));
        let one_arm = check_separability(&ModeParams::from_npdc(3.0, 0.0, 0.01, 0.0).unwrap());
        assert!(!one_arm.separable);
        let sep = check_separability(&ModeParams::from_npdc(1.0, 1.0, 0.2, 0.0).unwrap());
        assert!(sep.separable && sep.pt_separable());
        let ent = check_separability(&ModeParams::from_npdc(1.0, 1.0, 0.5, 0.0).unwrap());
        assert!(!ent.separable && !ent.pt_separable());
        for v in [spont, one_arm, sep, ent] {
            assert!(v.routes_agree());
        }
    }

    #[test]
    fn lossy_examples() {
        let ent = ModeParams::from_npdc(1.0, 1.0, 0.5, 0.0).unwrap();
        let lossy = check_separability_lossy(&ent, 0.1).unwrap();
        assert!(!lossy.separable && !lossy.pt_separable());
        let sep = ModeParams::from_npdc(1.0, 1.0, 0.2, 0.0).unwrap();
        let lossy = check_separability_lossy(&sep, 0.9).unwrap();
        assert!(lossy.separable && lossy.pt_separable());
        assert_eq!(check_separability_lossy(&sep, 1.0).unwrap(), check_separability(&sep));
        assert!(check_separability_lossy(&sep, 0.0).is_err());
    }

    #[test]
    fn phase_rotation_moves_correlation_into_cross_quadratures() {
        let p = ModeParams::new(0.5, 0.2, 0.6, 0.0).unwrap();
        let base = build_covariance(&p);
        let theta = 0.7;
        let rot = rotate_reference_mode(&base, theta);
        let c = base.c();
        assert!(close(rot.get(0, 2), c * theta.cos(), 1e-12));
        assert!(close(rot.get(1, 3), -c * theta.cos(), 1e-12));
        assert!(close(rot.get(0, 3), c * theta.sin(), 1e-12));
        assert!(close(rot.get(1, 2), c * theta.sin(), 1e-12));
        // local rotations leave the symplectic spectrum alone
        let (a, b) = symplectic_eigenvalues(&base).unwrap();
        let (ra, rb) = symplectic_eigenvalues(&rot).unwrap();
        assert!(close(a, ra, 1e-10) && close(b, rb, 1e-10));
    }
}
