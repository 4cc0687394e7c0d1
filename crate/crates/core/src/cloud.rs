//! Finite samples of plane sets and their Hausdorff distance.

use std::fmt::Write as _;

use num_complex::Complex64;
use rstar::primitives::Line;
use rstar::{PointDistance, RTree};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    /// Polylines making up the set, in order of construction.
    pub curves: Vec<Vec<Complex64>>,
    /// Isolated points (prevertices, limit points).
    pub extra: Vec<Complex64>,
    pub provenance: String,
    /// Largest spacing between consecutive curve samples after densification.
    pub density: f64,
}

impl PointCloud {
    pub fn new(provenance: impl Into<String>) -> Self {
        Self {
            curves: Vec::new(),
            extra: Vec::new(),
            provenance: provenance.into(),
            density: 0.0,
        }
    }

    pub fn points(&self) -> Vec<Complex64> {
        self.curves.iter().flatten().chain(&self.extra).copied().collect()
    }

    pub fn len(&self) -> usize {
        self.curves.iter().map(Vec::len).sum::<usize>() + self.extra.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn max_spacing(&self) -> f64 {
        self.curves
            .iter()
            .flat_map(|c| c.windows(2).map(|w| (w[1] - w[0]).norm()))
            .fold(0.0, f64::max)
    }

    /// Inserts points on every polyline segment so that the spacing is at most `h`.
    pub fn densified(&self, h: f64) -> PointCloud {
        let curves = self
            .curves
            .iter()
            .map(|c| {
                let mut out = Vec::with_capacity(c.len());
                for w in c.windows(2) {
                    let n = ((w[1] - w[0]).norm() / h).ceil().max(1.0) as usize;
                    for j in 0..n {
                        out.push(w[0] + (w[1] - w[0]) * (j as f64 / n as f64));
                    }
                }
                if let Some(&l) = c.last() {
                    out.push(l);
                }
                out
            })
            .collect();
        let mut d = PointCloud {
            curves,
            extra: self.extra.clone(),
            provenance: self.provenance.clone(),
            density: 0.0,
        };
        d.density = d.max_spacing();
        d
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> PointCloud {
        PointCloud {
            curves: self.curves.iter().map(|c| c.iter().map(|&z| f(z)).collect()).collect(),
            extra: self.extra.iter().map(|&z| f(z)).collect(),
            provenance: self.provenance.clone(),
            density: self.density,
        }
    }

    /// Delimited text: `#` header lines, then `x,y` per point.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# provenance: {}", self.provenance);
        let _ = writeln!(s, "# density: {:e}", self.density);
        let _ = writeln!(s, "# points: {}", self.len());
        s.push_str("x,y\n");
        for z in self.points() {
            let _ = writeln!(s, "{:.17e},{:.17e}", z.re, z.im);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<PointCloud> {
        let mut cloud = PointCloud::new("");
        let mut pts = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line == "x,y" {
                continue;
            }
            if let Some(h) = line.strip_prefix('#') {
                let h = h.trim();
                if let Some(p) = h.strip_prefix("provenance:") {
                    cloud.provenance = p.trim().to_string();
                } else if let Some(d) = h.strip_prefix("density:") {
                    cloud.density = d
                        .trim()
                        .parse()
                        .map_err(|_| Error::Parse(format!("line {}: bad density", n + 1)))?;
                }
                continue;
            }
            let mut it = line.split(',');
            let parse = |s: Option<&str>| -> Result<f64> {
                s.and_then(|v| v.trim().parse().ok())
                    .ok_or_else(|| Error::Parse(format!("line {}: expected x,y", n + 1)))
            };
            let x = parse(it.next())?;
            let y = parse(it.next())?;
            pts.push(Complex64::new(x, y));
        }
        cloud.extra = pts;
        Ok(cloud)
    }
}

fn as_array(points: &[Complex64]) -> Vec<[f64; 2]> {
    points.iter().map(|z| [z.re, z.im]).collect()
}

/// `sup_{a ∈ A} inf_{b ∈ B} |a − b|`.
pub fn directed_hausdorff(a: &[Complex64], b: &[Complex64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let tree = RTree::bulk_load(as_array(b));
    let mut worst: f64 = 0.0;
    for z in a {
        let q = [z.re, z.im];
        if let Some(nn) = tree.nearest_neighbor(&q) {
            worst = worst.max(nn.distance_2(&q));
        }
    }
    Ok(worst.sqrt())
}

pub fn hausdorff_points(a: &[Complex64], b: &[Complex64]) -> Result<f64> {
    Ok(directed_hausdorff(a, b)?.max(directed_hausdorff(b, a)?))
}

pub fn hausdorff_distance(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    hausdorff_points(&a.points(), &b.points())
}

/// Distance from each point of `a` to the polylines and isolated points of
/// `b`, measured to segments rather than vertices.
pub fn distances_to_polylines(a: &[Complex64], b: &PointCloud) -> Result<Vec<f64>> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let p = |z: &Complex64| [z.re, z.im];
    let mut lines: Vec<Line<[f64; 2]>> = b
        .curves
        .iter()
        .flat_map(|c| c.windows(2).map(move |w| Line::new(p(&w[0]), p(&w[1]))))
        .collect();
    lines.extend(
        b.curves
            .iter()
            .filter(|c| c.len() == 1)
            .map(|c| Line::new(p(&c[0]), p(&c[0]))),
    );
    lines.extend(b.extra.iter().map(|z| Line::new(p(z), p(z))));
    let tree = RTree::bulk_load(lines);
    Ok(a.iter()
        .map(|z| {
            tree.nearest_neighbor(&p(z))
                .map_or(f64::INFINITY, |l| l.distance_2(&p(z)).sqrt())
        })
        .collect())
}

/// `sup` over points of `a` of the distance to the polylines of `b`.
pub fn directed_to_polylines(a: &[Complex64], b: &PointCloud) -> Result<f64> {
    Ok(distances_to_polylines(a, b)?.into_iter().fold(0.0, f64::max))
}

/// Largest distance from the cloud's images under `conj` and `−conj` to the
/// cloud itself.
pub fn symmetry_defect(cloud: &PointCloud) -> Result<f64> {
    let pts = cloud.points();
    let c: Vec<Complex64> = pts.iter().map(|z| z.conj()).collect();
    let m: Vec<Complex64> = pts.iter().map(|z| -z.conj()).collect();
    Ok(directed_to_polylines(&c, cloud)?.max(directed_to_polylines(&m, cloud)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cloud(points: Vec<Complex64>) -> PointCloud {
        let mut c = PointCloud::new("test");
        c.extra = points;
        c
    }

    #[test]
    fn trivial_distances() {
        let a = cloud(vec![Complex64::new(0.0, 0.0)]);
        let b = cloud(vec![Complex64::new(3.0, 0.0)]);
        assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(hausdorff_distance(&a, &b).unwrap(), 3.0);
        assert!(matches!(
            hausdorff_distance(&a, &PointCloud::new("empty")),
            Err(Error::EmptyCloud)
        ));
    }

    #[test]
    fn duplicates_are_fine() {
        let a = cloud(vec![Complex64::new(1.0, 1.0); 500]);
        let b = cloud(vec![Complex64::new(1.0, 2.0); 300]);
        assert!((hausdorff_distance(&a, &b).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn text_round_trip() {
        let mut c = PointCloud::new("C_K K=2");
        c.curves
            .push(vec![Complex64::new(0.1, -0.2), Complex64::new(1.0 / 3.0, 2.0)]);
        c.density = 0.5;
        let back = PointCloud::from_text(&c.to_text()).unwrap();
        assert_eq!(back.provenance, "C_K K=2");
        assert_eq!(back.points(), c.points());
        assert!(PointCloud::from_text("1.0;2.0\n").is_err());
    }

    #[test]
    fn symmetry_uses_segments() {
        // A square sampled asymmetrically along its sides is still symmetric.
        let mut c = PointCloud::new("square");
        c.curves.push(vec![
            Complex64::new(-1.0, -1.0),
            Complex64::new(0.3, -1.0),
            Complex64::new(1.0, -1.0),
            Complex64::new(1.0, 1.0),
            Complex64::new(-1.0, 1.0),
            Complex64::new(-1.0, -1.0),
        ]);
        assert!(symmetry_defect(&c).unwrap() < 1e-15);
        c.extra.push(Complex64::new(0.5, 0.1));
        // The mirror (−0.5, 0.1) is 0.5 from the left side.
        assert!((symmetry_defect(&c).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn densify_bounds_spacing() {
        let mut c = PointCloud::new("seg");
        c.curves.push(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
        let d = c.densified(0.1);
        assert!(d.max_spacing() <= 0.1 + 1e-15);
        assert_eq!(d.curves[0].len(), 11);
    }

    fn pts() -> impl Strategy<Value = Vec<Complex64>> {
        prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), 1..40)
            .prop_map(|v| v.into_iter().map(|(x, y)| Complex64::new(x, y)).collect())
    }

    fn brute(a: &[Complex64], b: &[Complex64]) -> f64 {
        let d = |p: &[Complex64], q: &[Complex64]| {
            p.iter()
                .map(|x| q.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min))
                .fold(0.0, f64::max)
        };
        d(a, b).max(d(b, a))
    }

    proptest! {
        #[test]
        fn matches_brute_force(a in pts(), b in pts()) {
            let h = hausdorff_points(&a, &b).unwrap();
            prop_assert!((h - brute(&a, &b)).abs() < 1e-12);
        }

        #[test]
        fn translation_invariant(a in pts(), b in pts(), cx in -5.0..5.0f64, cy in -5.0..5.0f64) {
            let c = Complex64::new(cx, cy);
            let a2: Vec<_> = a.iter().map(|z| z + c).collect();
            let b2: Vec<_> = b.iter().map(|z| z + c).collect();
            let h1 = hausdorff_points(&a, &b).unwrap();
            let h2 = hausdorff_points(&a2, &b2).unwrap();
            prop_assert!((h1 - h2).abs() < 1e-9);
        }

        #[test]
        fn triangle_inequality(a in pts(), b in pts(), c in pts()) {
            let ab = hausdorff_points(&a, &b).unwrap();
            let bc = hausdorff_points(&b, &c).unwrap();
            let ac = hausdorff_points(&a, &c).unwrap();
            prop_assert!(ac <= ab + bc + 1e-12);
        }
    }
}
