use std::f64::consts::PI;

use affine_limit::embedding::{
    box_grid, separation_check, transition_continuity_check, EmbedChart, StripSide, VirtualPointRep,
};
use affine_limit::surface::{corner_holonomy, hole_monodromy, Corner, HoleSide, Orientation, CORNERS};
use num_complex::Complex64;

fn c(x: f64, y: f64) -> Complex64 {
    Complex64::new(x, y)
}

#[test]
fn corner_loops_scale_about_the_corner() {
    for k in [2.0, 5.0, 1000.0] {
        for corner in CORNERS {
            let ccw = corner_holonomy(k, corner, Orientation::Ccw).unwrap();
            let cw = corner_holonomy(k, corner, Orientation::Cw).unwrap();
            let fixed = ccw.fixed_point().unwrap();
            assert!((fixed - corner.point()).norm() < 1e-12, "{corner:?}: {fixed}");
            let (a, b) = (ccw.linear(), cw.linear());
            let (big, small) = if a.norm() > b.norm() { (a, b) } else { (b, a) };
            assert!((big - k).norm() < 1e-12, "{corner:?} K = {k}: {big}");
            assert!((small - 1.0 / k).norm() < 1e-12);
        }
    }
}

#[test]
fn hole_translation_tends_to_two_i() {
    let t = |k: f64| hole_monodromy(k, HoleSide::Right).unwrap().translation_part();
    assert!((t(2.0) - c(0.0, 1.0)).norm() < 1e-14);
    assert!((t(f64::INFINITY) - c(0.0, 2.0)).norm() < 1e-15);
    assert!((hole_monodromy(5.0, HoleSide::Left).unwrap().translation_part() + t(5.0)).norm() < 1e-15);
}

fn t_grid() -> Vec<f64> {
    vec![0.1, 0.01, 0.001, 1e-4]
}

#[test]
fn transitions_are_continuous_in_t() {
    let strip = EmbedChart::Case3 { strip: StripSide::Left };
    let spiral = EmbedChart::spiral(Corner::UL, c(0.5f64.ln(), 0.3), 0.3).unwrap();
    let cases = [
        (EmbedChart::Case1, strip, box_grid(c(-3.0, -0.8), c(-1.2, 0.8), 6)),
        (
            EmbedChart::Case2,
            EmbedChart::Case1,
            box_grid(c(-0.8, 1.2), c(0.8, 2.0), 6),
        ),
        (
            EmbedChart::Case2,
            EmbedChart::Case1,
            box_grid(c(-0.8, -0.5), c(0.8, 0.5), 6),
        ),
        (strip, spiral, box_grid(c(0.3, 1.01), c(0.7, 1.2), 6)),
    ];
    for (a, b, compact) in cases {
        let r = transition_continuity_check(&a, &b, &compact, &t_grid(), 1e-3).unwrap();
        assert!(r.pass, "{r:?}");
        for (t, s) in r.t.iter().zip(&r.sup_diff) {
            assert!(*s <= 2.0 * t + 1e-9, "{r:?}");
        }
    }
}

#[test]
fn limit_points_separate() {
    let ks = [10.0, 100.0, 1e3, 1e4, 1e6];
    let strip = VirtualPointRep {
        a: c(1.0, 0.0),
        chart: EmbedChart::Case3 { strip: StripSide::Left },
    };
    let quadrant = Complex64::from_polar(1.0, -PI / 4.0);
    let sheet = |n: f64| VirtualPointRep {
        a: quadrant,
        chart: EmbedChart::spiral(Corner::UL, c(0.0, 2.0 * PI * n - PI / 4.0), 0.5).unwrap(),
    };
    let right = VirtualPointRep {
        a: c(-1.0, 0.0),
        chart: EmbedChart::Case3 {
            strip: StripSide::Right,
        },
    };
    for (x, y) in [(strip, sheet(1.0)), (sheet(1.0), sheet(2.0)), (strip, right)] {
        let rep = separation_check(&x, &y, &ks, 0.4, 0.4).unwrap();
        assert!(rep.records.iter().all(|r| r.disjoint), "{rep:?}");
        assert_eq!(rep.threshold_k, Some(10.0));
    }
    assert!(separation_check(&strip, &strip, &ks, 0.4, 0.4).is_err());
}
