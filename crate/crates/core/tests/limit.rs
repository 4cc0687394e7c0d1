use std::f64::consts::PI;

use affine_limit::cloud::{hausdorff_distance, symmetry_defect, PointCloud};
use affine_limit::connection::prevertices;
use affine_limit::limit::{image_c_infinity, image_c_k, truncation_growth, RegionSpec, Sampling};
use affine_limit::solver::{solve_prevertex, AsymptoticFit, SolverConfig};
use num_complex::Complex64;

fn oracle_fit() -> AsymptoticFit {
    AsymptoticFit::new(1.9133480795046733, 0.34714838502461956).unwrap()
}

#[test]
fn aspect_two_image_is_a_symmetric_closed_curve() {
    let s = solve_prevertex(2.0, Complex64::new(1.0, 1.0), &SolverConfig::default()).unwrap();
    let cloud = image_c_k(2.0, s.z1, &Sampling::default()).unwrap();
    assert!(symmetry_defect(&cloud).unwrap() < 1e-6);
    for z in prevertices(s.z1) {
        assert!(cloud.extra.contains(&z));
        // Two half-tracks end at every prevertex.
        let ends = cloud
            .curves
            .iter()
            .filter(|c| (c.last().unwrap() - z).norm() < 1e-4)
            .count();
        assert_eq!(ends, 2, "{z}");
    }
    assert!(cloud.density <= Sampling::default().spacing);
    let back = PointCloud::from_text(&cloud.to_text()).unwrap();
    assert_eq!(back.points(), cloud.points());
}

#[test]
fn image_is_cauchy_in_density() {
    let s = solve_prevertex(5.0, Complex64::new(1.5, 0.5), &SolverConfig::default()).unwrap();
    let at = |h: f64| {
        let mut sampling = Sampling {
            spacing: h,
            ..Sampling::default()
        };
        sampling.track.max_dw = h;
        image_c_k(5.0, s.z1, &sampling).unwrap()
    };
    let (a, b, c) = (at(8e-3), at(4e-3), at(2e-3));
    let d1 = hausdorff_distance(&a, &b).unwrap();
    let d2 = hausdorff_distance(&b, &c).unwrap();
    assert!(d1 < 8e-3 && d2 < 4e-3, "{d1} {d2}");
}

#[test]
fn limit_set_contains_the_limit_points_and_is_symmetric() {
    let fit = oracle_fit();
    let set = image_c_infinity(&fit, &RegionSpec::default(), &Sampling::default()).unwrap();
    let cloud = &set.cloud;
    assert!(cloud.extra.contains(&Complex64::new(fit.x_inf, 0.0)));
    assert!(cloud.extra.contains(&Complex64::new(-fit.x_inf, 0.0)));
    assert!(symmetry_defect(cloud).unwrap() < 1e-6);
    // Every side curve and ray into a corner ends at the clearance disk.
    assert!(!set.truncated.is_empty());
    // Nothing reaches past the real crossings of the square sides.
    let span = cloud.points().iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(span < 2.2, "{span}");
}

#[test]
fn more_winding_adds_points_only_near_the_limit_points() {
    let fit = oracle_fit();
    let build = |turns: f64| {
        image_c_infinity(&fit, &RegionSpec::new(turns * PI, 1e12).unwrap(), &Sampling::default())
            .unwrap()
            .cloud
    };
    let (a, b, c) = (build(4.0), build(6.0), build(8.0));
    let g1 = truncation_growth(&a, &b, fit.x_inf, 1e-6).unwrap();
    let g2 = truncation_growth(&b, &c, fit.x_inf, 1e-6).unwrap();
    assert!(g1 > 0.0 && g2 < g1, "{g1} {g2}");
    assert!(g1 < 0.05);
}
