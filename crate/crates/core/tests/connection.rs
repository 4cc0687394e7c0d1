use std::f64::consts::PI;

use affine_limit::connection::{prevertices, DevelopedMap, RationalConnection, Side};
use affine_limit::solver::{solve_prevertex, SolverConfig};
use affine_limit::surface::{hole_monodromy, HoleSide};
use num_complex::Complex64;
use proptest::prelude::*;

fn c(x: f64, y: f64) -> Complex64 {
    Complex64::new(x, y)
}

fn solved(k: f64, guess: Complex64) -> RationalConnection {
    let s = solve_prevertex(k, guess, &SolverConfig::default()).unwrap();
    s.connection()
}

/// Counter-clockwise rectangle around the slit on the given side.
fn slit_loop(z1: Complex64, sign: f64) -> Vec<Complex64> {
    let (x, h, d) = (sign * z1.re, z1.im + 0.3, 0.3);
    vec![c(x + d, -h), c(x + d, h), c(x - d, h), c(x - d, -h), c(x + d, -h)]
}

#[test]
fn slit_loops_match_hole_translation() {
    for (k, guess) in [(2.0, c(1.25, 0.77)), (5.0, c(1.5, 0.55))] {
        let conn = solved(k, guess);
        let RationalConnection::FiniteK { z1, .. } = conn else {
            unreachable!()
        };
        let map = DevelopedMap::new(conn);
        let right = map.loop_integral(&slit_loop(z1, 1.0)).unwrap();
        let left = map.loop_integral(&slit_loop(z1, -1.0)).unwrap();
        let t = hole_monodromy(k, HoleSide::Right).unwrap().translation_part();
        assert!((right - t).norm() < 1e-6, "K = {k}: {right} vs {t}");
        assert!((left + right).norm() < 1e-8, "K = {k}: {left} + {right}");
    }
}

#[test]
fn residues_are_log_k_over_two_pi_i() {
    let conn = RationalConnection::finite(7.0, c(1.5, 0.4)).unwrap();
    let beta = 7f64.ln() / (2.0 * PI);
    for (z, e) in prevertices(c(1.5, 0.4)).iter().zip([-1.0, 1.0, -1.0, 1.0]) {
        let r = conn.residue_at(*z).unwrap();
        assert!((r - c(0.0, -e * beta)).norm() < 1e-15);
    }
    assert!(conn.residue_at(c(0.0, 0.0)).is_err());
}

#[test]
fn unit_aspect_connection_vanishes() {
    let conn = RationalConnection::finite(1.0, c(1.0, 1.0)).unwrap();
    for j in 0..100 {
        let z = c(-3.0 + 0.06 * j as f64, 0.5 + 0.01 * j as f64);
        assert_eq!(conn.zeta(z).unwrap(), c(0.0, 0.0));
    }
    let map = DevelopedMap::new(conn);
    let w = c(0.3, -0.2);
    assert!((map.value(w, Side::Below).unwrap() - w).norm() < 1e-12);
}

#[test]
fn limit_tail_agrees_with_quadrature() {
    let map = DevelopedMap::new(RationalConnection::limit(1.9, 0.35).unwrap());
    let w = c(0.0, 3.0);
    let v = map.value(w, Side::Above).unwrap();
    // g(iy) for the odd limit map is purely imaginary.
    assert!(v.re.abs() < 1e-12, "{v}");
    assert!(v.im > 0.0);
}

proptest! {
    #[test]
    fn zeta_is_real_on_the_real_axis(x in -5.0..5.0f64, re in 0.2..3.0f64, im in 0.05..2.0f64,
                                     k in 1.0..1e6f64) {
        let conn = RationalConnection::finite(k, c(re, im)).unwrap();
        let z = conn.zeta(c(x, 0.0)).unwrap();
        prop_assert!(z.im.abs() < 1e-10 * (1.0 + z.norm()));
        let lim = RationalConnection::limit(re, im).unwrap();
        if (x.abs() - re).abs() > 1e-3 {
            let z = lim.zeta(c(x, 0.0)).unwrap();
            prop_assert!(z.im.abs() < 1e-10 * (1.0 + z.norm()));
        }
    }

    #[test]
    fn zeta_is_odd_and_conjugate_symmetric(x in -3.0..3.0f64, y in -3.0..3.0f64,
                                           re in 0.2..3.0f64, im in 0.05..2.0f64) {
        let conn = RationalConnection::finite(50.0, c(re, im)).unwrap();
        let z = c(x, y);
        if let (Ok(a), Ok(b), Ok(m)) = (conn.zeta(z), conn.zeta(z.conj()), conn.zeta(-z)) {
            prop_assert!((a.conj() - b).norm() < 1e-9 * (1.0 + a.norm()));
            prop_assert!((a + m).norm() < 1e-9 * (1.0 + a.norm()));
        }
    }
}
