use std::path::Path;
use std::process::Command;

use affine_limit::cloud::{symmetry_defect, PointCloud};
use num_complex::Complex64;
use serde_json::Value;
use sha2::{Digest, Sha256};

fn run(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_affine-limit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(dir: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn solve_at_unit_aspect() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "solve",
        "--k",
        "1",
        "--format",
        "json",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(dir.path());
    assert_eq!(r["status"], "PASS");
    let d = &r["steps"][0]["detail"];
    assert_eq!(d["z1"][0].as_f64(), Some(1.0));
    assert_eq!(d["z1"][1].as_f64(), Some(1.0));
    assert_eq!(d["residual"].as_f64(), Some(0.0));
}

/// Polylines of the first `<path>` elements, read back from the drawing.
fn svg_curves(svg: &str) -> Vec<Vec<Complex64>> {
    svg.split("<path d=\"")
        .skip(1)
        .map(|p| {
            let d = &p[..p.find('"').unwrap()];
            d.split(['M', 'L'])
                .filter(|t| !t.trim().is_empty())
                .map(|t| {
                    let mut xy = t.trim().split(|c: char| c == ',' || c.is_whitespace());
                    let x: f64 = xy.next().unwrap().parse().unwrap();
                    let y: f64 = xy.next().unwrap().parse().unwrap();
                    Complex64::new(x, y)
                })
                .collect()
        })
        .collect()
}

#[test]
fn render_draws_a_closed_symmetric_curve() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["render", "--k", "2", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let svg = std::fs::read_to_string(dir.path().join("render_K2e0.svg")).unwrap();
    assert!(svg.starts_with("<?xml") || svg.starts_with("<svg"));
    let curves = svg_curves(&svg);
    assert!(!curves.is_empty());
    // The track ends meet pairwise at the prevertices.
    let ends: Vec<Complex64> = curves.iter().flat_map(|c| [c[0], *c.last().unwrap()]).collect();
    for e in &ends {
        let partners = ends.iter().filter(|f| (*f - e).norm() < 1e-3).count();
        assert!(partners >= 2, "loose end at {e}");
    }
    let mut cloud = PointCloud::new("svg");
    cloud.curves = curves;
    assert!(symmetry_defect(&cloud).unwrap() < 1e-4);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(run(&["solve", "--k", "0.5"]).status.code(), Some(2));
    assert_eq!(run(&["solve", "--k-grid", "10,5"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"no_such_field": 1}"#).unwrap();
    assert_eq!(
        run(&["solve", "--config", cfg.to_str().unwrap()]).status.code(),
        Some(2)
    );
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"k": 5.0, "seed": 7}"#).unwrap();
    let out_dir = dir.path().join("o");
    let out = run(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--k",
        "2",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out_dir);
    assert_eq!(r["config"]["k"].as_f64(), Some(2.0));
    assert_eq!(r["config"]["seed"].as_u64(), Some(7));
}

#[test]
fn manifest_lists_every_output_with_its_hash() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "sweep",
        "--k-grid",
        "1e1,1e2,1e3,1e4,1e5,1e6,1e7,1e8",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path());
    let manifest = r["manifest"].as_array().unwrap();
    let mut listed: Vec<String> = manifest
        .iter()
        .map(|e| e["path"].as_str().unwrap().to_string())
        .collect();
    for e in manifest.iter().filter(|e| e["path"] != "report.json") {
        let bytes = std::fs::read(dir.path().join(e["path"].as_str().unwrap())).unwrap();
        assert_eq!(e["bytes"].as_u64(), Some(bytes.len() as u64));
        assert_eq!(e["sha256"].as_str().unwrap(), format!("{:x}", Sha256::digest(&bytes)));
    }
    let mut present: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    listed.sort();
    present.sort();
    assert_eq!(listed, present);
    assert!(present.contains(&"fit.json".to_string()));
}
