//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

use std::cell::RefCell;
use std::process::ExitCode;
use std::time::Instant;

use pdcsim::checks::{minimum_offset, single_slit_zero};
use pdcsim_core::correlations::{gamma_tr, nrf_threshold, report};
use pdcsim_core::fock::{evolve_thermal_pair, moments, DisentangledCoefficients, MomentSet};
use pdcsim_core::gaussian::{check_separability, check_separability_lossy, ModeParams};
use pdcsim_core::ghost::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn params(mt: f64, mr: f64, n: f64) -> ModeParams {
    ModeParams::from_npdc(mt, mr, n, 0.0).unwrap()
}

fn separability_boundary() -> Outcome {
    let axis = linspace(0.0, 5.0, 50);
    let (mut compared, mut mismatched) = (0, 0);
    for &mt in &axis {
        for &mr in &axis {
            for &n in &axis {
                let v = check_separability(&params(mt, mr, n));
                if v.margin.abs() > 1e-6 {
                    compared += 1;
                    if v.separable != v.pt_separable() {
                        mismatched += 1;
                    }
                }
            }
        }
    }
    // boundary from the spectral route alone
    let mut worst: f64 = 0.0;
    for mu in linspace(0.1, 5.0, 50) {
        let excess = |n: f64| check_separability(&params(mu, mu, n)).min_pt_symplectic_eigenvalue - 0.5;
        let (mut lo, mut hi) = (0.0, 5.0 * mu);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if excess(mid) >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let n = 0.5 * (lo + hi);
        worst = worst.max((mu * mu - n * (1.0 + 2.0 * mu)).abs());
    }
    outcome(
        mismatched == 0 && worst < 1e-9,
        format!(
            "{compared} points off the boundary band, {mismatched} mismatches; bisected boundary residual {worst:.2e}"
        ),
    )
}

fn loss_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut closed, mut spectral, mut skipped) = (0, 0, 0);
    for _ in 0..1000 {
        let p = ModeParams::from_npdc(
            rng.gen_range(0.0..=5.0),
            rng.gen_range(0.0..=5.0),
            rng.gen_range(0.0..=5.0),
            rng.gen_range(-3.2..3.2),
        )
        .unwrap();
        let tau = 1.0 - rng.gen::<f64>();
        let lossless = check_separability(&p);
        let lossy = check_separability_lossy(&p, tau).unwrap();
        if lossy.separable != lossless.separable {
            closed += 1;
        }
        if lossy.is_boundary() || lossless.is_boundary() {
            skipped += 1;
        } else if lossy.pt_separable() != lossless.pt_separable() {
            spectral += 1;
        }
    }
    outcome(
        closed == 0 && spectral == 0,
        format!("1000 draws: {closed} closed-form and {spectral} spectral disagreements ({skipped} draws in the boundary band)"),
    )
}

fn oracle_moments() -> (Outcome, String) {
    let mut worst: f64 = 0.0;
    for mt in [0.0, 0.5, 1.0] {
        for mr in [0.0, 0.5, 1.0] {
            for n in [0.0, 0.2, 0.4] {
                let p = params(mt, mr, n);
                let s = evolve_thermal_pair(mt, mr, &DisentangledCoefficients::from_params(&p), 60).unwrap();
                worst = worst.max(moments(&s).max_relative_error(&MomentSet::closed_form(&p)));
            }
        }
    }
    let p = params(0.0, 0.0, 1.0);
    let s = evolve_thermal_pair(0.0, 0.0, &DisentangledCoefficients::from_params(&p), 60).unwrap();
    let dist = s.photon_distribution();
    let tmsv = (0..=60).map(|k| (dist[k * 61 + k] - 0.5f64.powi(k as i32 + 1)).abs()).fold(0.0, f64::max);

    let corner = params(1.0, 1.0, 1.0);
    let info = match evolve_thermal_pair(1.0, 1.0, &DisentangledCoefficients::from_params(&corner), 60) {
        Ok(s) => format!(
            "(1, 1, 1) corner at cutoff 60: max relative error {:.2e}",
            moments(&s).max_relative_error(&MomentSet::closed_form(&corner))
        ),
        Err(e) => format!("(1, 1, 1) corner at cutoff 60: {e}"),
    };
    (
        outcome(
            worst < 1e-6 && tmsv < 1e-8,
            format!("grid mu in {{0, 0.5, 1}}, n_pdc in {{0, 0.2, 0.4}}: max relative error {worst:.2e}; TMSV weight error {tmsv:.2e}"),
        ),
        info,
    )
}

fn sub_shot_noise() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut below, mut counter) = (0, 0);
    for _ in 0..10_000 {
        let r = report(
            &ModeParams::from_npdc(
                rng.gen_range(0.0..=10.0),
                rng.gen_range(0.0..=10.0),
                rng.gen_range(0.0..=10.0),
                0.0,
            )
            .unwrap(),
        );
        if r.nrf.is_some_and(|x| x < 1.0) {
            below += 1;
            if r.sep_margin() >= 0.0 {
                counter += 1;
            }
        }
    }
    let worst = linspace(0.0, 10.0, 101)
        .into_iter()
        .map(|mu| (nrf_threshold(mu, mu).unwrap() - mu * mu / (1.0 + 2.0 * mu)).abs())
        .fold(0.0, f64::max);
    outcome(
        counter == 0 && worst < 1e-12,
        format!("{below} sub-shot-noise draws, {counter} counterexamples; equal-seed threshold offset {worst:.2e}"),
    )
}

fn gamma_asymptotics() -> Outcome {
    let n = 100.0;
    let mu = 1e4;
    let one_arm_want = 1.0 / (2.0 * mu * n * (1.0 + n));
    let equal_want = 1.0 / ((1.0 + 2.0 * n) * (1.0 + 2.0 * n));
    let one_arm = 1.0 - gamma_tr(&params(mu, 0.0, n)).unwrap();
    let equal = 1.0 - gamma_tr(&params(mu, mu, n)).unwrap();
    let e1 = (one_arm - one_arm_want).abs() / one_arm_want;
    let e2 = (equal - equal_want).abs() / equal_want;
    outcome(
        e1 < 0.01 && e2 < 0.01,
        format!(
            "n_pdc = 100, mu = 1e4: one-arm correction off by {:.3}%, equal-seed by {:.3}%",
            100.0 * e1,
            100.0 * e2
        ),
    )
}

const LAMBDA: f64 = 0.7e-6;

fn double_slit() -> SampledObject {
    let width = 40e-6;
    SampledObject::double_slit(&centered_grid(513, width / 16.0), width, 160e-6).unwrap()
}

fn ghost_image_criterion() -> Outcome {
    let g = GhostGeometry::new(LAMBDA, 0.1, 0.1, 0.6, 0.15, 0.2, Variant::ObjectPlane).unwrap();
    let obj = double_slit();
    let grids = EvalGrids::imaging(&g, &obj, 512).unwrap();
    let entangled = params(0.0, 0.0, 1.0);
    let separable = params(5.0, 5.0, 0.5);
    assert!(!check_separability(&entangled).separable && check_separability(&separable).separable);
    let a = ghost_image(&g, &obj, &KernelProfile::Constant(entangled), &grids).unwrap().profile;
    let b = ghost_image(&g, &obj, &KernelProfile::Constant(separable), &grids).unwrap().profile;
    let want = geometric_image(&obj, &a.x, g.magnification());
    let ncc_a = normalized_cross_correlation(&a.normalized, &want).unwrap_or(f64::NAN);
    let ncc_b = normalized_cross_correlation(&b.normalized, &want).unwrap_or(f64::NAN);
    let diff = a.normalized.iter().zip(&b.normalized).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    outcome(
        ncc_a >= 0.95 && ncc_b >= 0.95 && diff <= 1e-12,
        format!(
            "M = {:.3}; NCC entangled {ncc_a:.6}, separable {ncc_b:.6}; max difference {diff:.2e}",
            g.magnification()
        ),
    )
}

fn ghost_diffraction_criterion() -> Outcome {
    let width = 40e-6;
    let g = GhostGeometry::new(LAMBDA, 0.1, 0.1, 0.3, 0.3, 0.2, Variant::FourierLens).unwrap();
    let obj = SampledObject::single_slit(&centered_grid(513, width / 16.0), width).unwrap();
    let grids = EvalGrids::diffraction(&g, QGrid::for_feature(width, 512).unwrap()).unwrap();
    let pattern = ghost_diffraction(&g, &obj, &KernelProfile::Constant(params(0.0, 0.0, 1.0)), &grids).unwrap().profile;
    let mut zeros_ok = true;
    let mut worst: f64 = 0.0;
    for m in [-2, -1, 1, 2] {
        match minimum_offset(&pattern, single_slit_zero(&g, width, m), 3) {
            Some((offset, step)) => {
                worst = worst.max(offset / step);
                zeros_ok &= offset <= 0.5 * step * (1.0 + 1e-9);
            }
            None => zeros_ok = false,
        }
    }

    let obj = double_slit();
    let prof = KernelProfile::Constant(params(0.3, 0.2, 1.0));
    let ga = GhostGeometry::new(LAMBDA, 0.1, 0.1, 0.6, 0.15, 0.2, Variant::ObjectPlane).unwrap();
    let gb = GhostGeometry { variant: Variant::FourierLens, ..ga };
    let a = ghost_image(&ga, &obj, &prof, &EvalGrids::imaging(&ga, &obj, 512).unwrap()).unwrap().profile;
    let b = ghost_image(&gb, &obj, &prof, &EvalGrids::imaging(&gb, &obj, 512).unwrap()).unwrap().profile;
    let diff = a.normalized.iter().zip(&b.normalized).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    outcome(
        zeros_ok && diff <= 1e-10,
        format!(
            "zeros at m * {:.3} mm, worst offset {worst:.3} grid steps; lens-without-bucket vs bucket max difference {diff:.2e}",
            1e3 * single_slit_zero(&g, width, 1)
        ),
    )
}

fn factorization_modes(mt: f64, mr: f64, scale: f64) -> Vec<(f64, ModeParams)> {
    [(-1e5, 0.5), (0.0, 1.0), (1e5, 0.5)]
        .iter()
        .map(|&(q, n)| (q, ModeParams::from_npdc(mt, mr, scale * n, 0.4).unwrap()))
        .collect()
}

fn factorization() -> Outcome {
    let points = [("vacuum", 0.0, 0.0), ("one-arm", 0.3, 0.0), ("two-arm", 0.3, 0.2)];
    let mut passed = true;
    let mut parts = Vec::new();
    for (name, mt, mr) in points {
        let r = validate_factorization(&factorization_modes(mt, mr, 0.1), 40).unwrap();
        passed &= r.passed();
        parts.push(format!(
            "{name}: error {:.1e} / {:.1e} (tolerance {:.1e})",
            r.fourth_moment_error, r.pair_correlation_error, r.tolerance
        ));
    }
    outcome(passed, parts.join("; "))
}

/// Larger seeds, where the truncated tail is weighted by `n²` in the
/// fourth moments and the error outgrows ten times the deficit.
fn factorization_tail() -> String {
    let modes = factorization_modes(0.5, 0.0, 0.2);
    [40, 60]
        .iter()
        .map(|&c| {
            let r = validate_factorization(&modes, c).unwrap();
            format!("cutoff {c}: error {:.1e}, deficit {:.1e}", r.fourth_moment_error, r.trace_deficit)
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut show = |id: u32, name: &str, run: &dyn Fn() -> Outcome| {
        let start = Instant::now();
        let o = run();
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!("{tag} [{id}] {name}: {} ({:.1} s)", o.detail, start.elapsed().as_secs_f64());
        if !o.passed {
            failed += 1;
        }
    };
    show(1, "separability boundary", &separability_boundary);
    show(2, "loss invariance", &loss_invariance);
    let corner = RefCell::new(String::new());
    show(3, "oracle vs closed-form moments", &|| {
        let (o, info) = oracle_moments();
        *corner.borrow_mut() = info;
        o
    });
    println!("INFO [3] {}", corner.borrow());
    show(4, "sub-shot-noise implies entanglement", &sub_shot_noise);
    show(5, "correlation index asymptotics", &gamma_asymptotics);
    show(6, "ghost image", &ghost_image_criterion);
    show(7, "ghost diffraction", &ghost_diffraction_criterion);
    show(8, "fourth-moment factorization", &factorization);
    println!("INFO [8] one-arm seed 0.5, n_pdc up to 0.2: {}", factorization_tail());
    if failed == 0 {
        println!("acceptance: all 8 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of 8 criteria failed");
        ExitCode::FAILURE
    }
}
