use std::f64::consts::PI;

use affine_limit::solver::{
    continuation_sweep, corner_residual, extract_limit, hole_translation, solve_prevertex, trivial_solution,
    AsymptoticFit, FitConfig, SolverConfig,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn c(x: f64, y: f64) -> Complex64 {
    Complex64::new(x, y)
}

/// Brute-force minimisation of the corner residual: a grid over a box that
/// shrinks around the best node.
fn grid_search(k: f64, mut lo: Complex64, mut hi: Complex64) -> Complex64 {
    let cfg = SolverConfig::default();
    let n = 12;
    let mut best = (f64::INFINITY, lo);
    for _ in 0..14 {
        for a in 0..=n {
            for b in 0..=n {
                let z = c(
                    lo.re + (hi.re - lo.re) * a as f64 / n as f64,
                    lo.im + (hi.im - lo.im) * b as f64 / n as f64,
                );
                if let Ok(r) = corner_residual(k, z, &cfg.quad) {
                    if r.norm() < best.0 {
                        best = (r.norm(), z);
                    }
                }
            }
        }
        let half = (hi - lo) * 0.2;
        lo = best.1 - half;
        hi = best.1 + half;
    }
    best.1
}

#[test]
fn aspect_two_matches_grid_search() {
    let oracle = grid_search(2.0, c(0.8, 0.3), c(1.8, 1.3));
    let s = solve_prevertex(2.0, c(1.0, 1.0), &SolverConfig::default()).unwrap();
    assert!((s.z1 - oracle).norm() < 1e-6, "{} vs {oracle}", s.z1);
    assert!(s.condition.is_finite() && s.condition >= 1.0);
}

#[test]
fn sweep_to_extreme_aspect_converges() {
    let cfg = SolverConfig::default();
    let sweep = continuation_sweep(&[2.0, 5.0, 1000.0, 1e20], trivial_solution(), &cfg).unwrap();
    assert!(sweep.completed(), "{:?}", sweep.failure);
    assert_eq!(sweep.rows.len(), 4);
    for r in &sweep.rows {
        assert!(r.residual < 1e-8, "{r:?}");
        assert!(r.z1.re > 0.0 && r.z1.im > 0.0);
    }
    assert!(sweep.non_monotone.is_empty());
    assert!(sweep.to_table().lines().count() == 5);
}

#[test]
fn warm_and_cold_starts_agree() {
    let cfg = SolverConfig::default();
    let sweep = continuation_sweep(&[2.0, 5.0, 1000.0], trivial_solution(), &cfg).unwrap();
    for r in &sweep.rows {
        let cold = solve_prevertex(r.k, c(1.5, 0.5), &cfg).unwrap();
        assert!((cold.z1 - r.z1).norm() < 1e-8, "K = {}: {} vs {}", r.k, cold.z1, r.z1);
    }
}

#[test]
fn prevertices_merge_toward_the_limit() {
    let cfg = SolverConfig::default();
    let grid: Vec<f64> = (1..=16).map(|n| 10f64.powi(n)).collect();
    let sweep = continuation_sweep(&grid, trivial_solution(), &cfg).unwrap();
    let fit = extract_limit(&sweep.rows, &FitConfig::default()).unwrap();
    assert!(fit.tau > 0.0 && fit.x_inf > 0.0);
    assert_eq!(fit.z_minus, -fit.z_plus);
    let k2 = solve_prevertex(2.0, c(1.0, 1.0), &cfg).unwrap();
    let k1000 = sweep.rows.iter().find(|r| r.k == 1000.0).unwrap();
    assert!(k1000.z1.im < k2.z1.im);
    assert!((k1000.z1.re - fit.x_inf).abs() < 0.1 * fit.x_inf);

    // The pole pair at z₁, z₄ merges into a double pole at x_inf.
    let last = sweep.rows.last().unwrap();
    let z = c(0.3, 2.0);
    let pair = -1.0 / (z - last.z1) + 1.0 / (z - last.z1.conj());
    let merged = c(0.0, -2.0 * last.z1.im) / ((z - last.z1.re) * (z - last.z1.re));
    assert!((pair - merged).norm() < 10.0 * last.z1.im.powi(3), "{pair} vs {merged}");

    let t = hole_translation(&fit, 256).unwrap();
    assert!((t.norm() - 2.0).abs() < 0.05 * 2.0, "{t}");
    let oracle = AsymptoticFit::new(1.91334807950467, 0.347148385024620).unwrap();
    let t_oracle = hole_translation(&oracle, 256).unwrap();
    assert!((t_oracle - c(0.0, 2.0)).norm() < 1e-9);
    assert!((fit.x_inf - 1.91334807950467).abs() < 1e-5, "{}", fit.x_inf);
    assert!((fit.tau - 0.347148385024620).abs() < 1e-5, "{}", fit.tau);
}

#[test]
fn observed_bound_is_stable_under_refinement() {
    let cfg = SolverConfig::default();
    let coarse: Vec<f64> = (0..=10).map(|n| 10f64.powi(2 * n)).collect();
    let fine: Vec<f64> = (0..=20).map(|n| 10f64.powi(n)).collect();
    let a = continuation_sweep(&coarse, trivial_solution(), &cfg).unwrap();
    let b = continuation_sweep(&fine, trivial_solution(), &cfg).unwrap();
    assert!(a.completed() && b.completed());
    assert!((a.max_abs_z1 - b.max_abs_z1).abs() < 1e-8);
    // Bounded well inside the tail radius used for anchoring.
    assert!(b.max_abs_z1 < 2.0);
}

#[test]
fn tau_from_the_table_is_positive() {
    let s = solve_prevertex(1e6, c(1.9, 0.08), &SolverConfig::default()).unwrap();
    let tau_k = 1e6f64.ln() / PI * s.z1.im;
    assert!(tau_k > 0.3 && tau_k < 0.4, "{tau_k}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn solutions_stay_in_the_quadrant(log_k in 0.1..12.0f64) {
        let k = 10f64.powf(log_k);
        let sweep = continuation_sweep(&[k], trivial_solution(), &SolverConfig::default()).unwrap();
        prop_assume!(sweep.completed());
        let z = sweep.rows[0].z1;
        prop_assert!(z.re > 0.0 && z.im > 0.0);
        prop_assert!(sweep.rows[0].residual < 1e-8);
        let cfg = SolverConfig::default();
        let r = corner_residual(k, z, &cfg.quad).unwrap();
        prop_assert!(r.norm() < 1e-8);
    }
}
