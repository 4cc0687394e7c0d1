//! The image of the rectangle at finite `K`, the limit set, and their
//! Hausdorff comparison.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use rayon::prelude::*;

use crate::cloud::{distances_to_polylines, hausdorff_distance, PointCloud};
use crate::connection::{prevertices, DevelopedMap, RationalConnection, Side};
use crate::error::{Error, Result};
use crate::quadrature::QuadConfig;
use crate::solver::{AsymptoticFit, Solution};
use crate::surface::{spiral_frame, ChartId, Corner, SurfacePoint, CORNERS};
use crate::tracking::{track_anchored, Anchor, LevelPath, TrackConfig, TrackEnd, TrackState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sampling {
    pub track: TrackConfig,
    pub quad: QuadConfig,
    /// Tracks stop once within this distance of their target prevertex.
    pub stop_radius: f64,
    /// Largest gap between consecutive cloud points.
    pub spacing: f64,
}

impl Default for Sampling {
    fn default() -> Self {
        Self {
            track: TrackConfig::default(),
            quad: QuadConfig::default(),
            stop_radius: 1e-5,
            spacing: 2e-3,
        }
    }
}

const U_MAX: f64 = 740.0;

/// Root of a continuous function on `[a, b]` with a sign change
/// (Illinois variant of regula falsi).
fn bracketed_root(f: &dyn Fn(f64) -> Result<f64>, mut a: f64, mut b: f64) -> Result<f64> {
    let (mut fa, mut fb) = (f(a)?, f(b)?);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa * fb > 0.0 {
        return Err(Error::InvalidArgument(format!("no sign change on [{a}, {b}]")));
    }
    let mut last = 0i8;
    for _ in 0..200 {
        let c = (a * fb - b * fa) / (fb - fa);
        let fc = f(c)?;
        if fc == 0.0 || (b - a).abs() <= 1e-15 * (1.0 + c.abs()) {
            return Ok(c);
        }
        if fa * fc < 0.0 {
            b = c;
            fb = fc;
            if last == -1 {
                fa *= 0.5;
            }
            last = -1;
        } else {
            a = c;
            fa = fc;
            if last == 1 {
                fb *= 0.5;
            }
            last = 1;
        }
        if (b - a).abs() <= 1e-14 * (1.0 + a.abs()) {
            return Ok(0.5 * (a + b));
        }
    }
    Ok(0.5 * (a + b))
}

/// Sign changes of `f` on a uniform scan of `[a, b]`, each refined to a root.
fn scan_roots(f: &dyn Fn(f64) -> Result<f64>, a: f64, b: f64, n: usize) -> Result<Vec<f64>> {
    let mut roots = Vec::new();
    let mut x0 = a;
    let mut f0 = f(a)?;
    for j in 1..=n {
        let x1 = a + (b - a) * j as f64 / n as f64;
        let f1 = f(x1)?;
        if f0 == 0.0 {
            roots.push(x0);
        } else if f0 * f1 < 0.0 {
            roots.push(bracketed_root(f, x0, x1)?);
        }
        x0 = x1;
        f0 = f1;
    }
    Ok(roots)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HalfTrack {
    start: Complex64,
    side: Side,
    target: usize,
}

fn track_to_prevertex(map: &DevelopedMap, h: HalfTrack, sampling: &Sampling) -> Result<Vec<Complex64>> {
    let z = prevertices(match map.connection() {
        RationalConnection::FiniteK { z1, .. } => *z1,
        RationalConnection::Limit { .. } => unreachable!("finite connection required"),
    });
    let target = z[h.target];
    let f0 = map.value(h.start, h.side)? - map.value(target, h.side)?;
    let path = LevelPath::Exponential {
        scale: f0,
        rate: Complex64::new(-1.0, 0.0),
    };
    let state = TrackState {
        branch: map.branch_at(h.start)?,
        value: f0,
        s: 0.0,
    };
    let anchor = Anchor {
        pole: target,
        radius: f64::INFINITY,
    };
    let t = track_anchored(
        map,
        &path,
        state,
        U_MAX,
        &[(target, stop_radius(map, sampling.stop_radius))],
        Some(anchor),
        &sampling.track,
    )?;
    let mut w = t.w;
    if t.end == TrackEnd::Stopped(0) {
        w.push(target);
    }
    Ok(w)
}

/// Near a prevertex `|g − g(zᵢ)| ≈ r^{1+a²}` with `a = log K / 2π`; the
/// stop radius is widened so that the target value stays above `e^{−300}`.
pub fn stop_radius(map: &DevelopedMap, requested: f64) -> f64 {
    let a = map.connection().beta().norm();
    requested.max((-300.0 / (1.0 + a * a)).exp())
}

fn finite_map(k: f64, z1: Complex64, quad: QuadConfig) -> Result<DevelopedMap> {
    Ok(DevelopedMap::new(RationalConnection::finite(k, z1)?).with_quad(quad))
}

/// Closure of the image of the rectangle at parameter `K`, sampled along its
/// boundary. Each of the four boundary arcs is the pull-back of one square
/// side and is tracked from its axis crossing toward both end prevertices.
pub fn image_c_k(k: f64, z1: Complex64, sampling: &Sampling) -> Result<PointCloud> {
    let map = finite_map(k, z1, sampling.quad)?;
    let z = prevertices(z1);
    let corner = map.value(z1, Side::Above)?;
    let r = map.tail_radius();

    // Imaginary axis: Im g(iv) increases with v.
    let fv = |v: f64| -> Result<f64> { Ok(map.value(Complex64::new(0.0, v), Side::Above)?.im - corner.im) };
    // For huge `K` the crossing is within rounding of the origin.
    let v_top = if fv(0.0)? >= 0.0 {
        0.0
    } else {
        bracketed_root(&fv, 0.0, r)?
    };
    let fb = |v: f64| -> Result<f64> { Ok(map.value(Complex64::new(0.0, -v), Side::Below)?.im + corner.im) };
    let v_bot = if fb(0.0)? <= 0.0 {
        0.0
    } else {
        bracketed_root(&fb, 0.0, r)?
    };

    let x_right = real_crossing(&map, corner.re, 1.0)?;
    let x_left = real_crossing(&map, corner.re, -1.0)?;

    let halves = [
        (Complex64::new(0.0, v_top), Side::Above, 0),
        (Complex64::new(0.0, v_top), Side::Above, 1),
        (Complex64::new(0.0, -v_bot), Side::Below, 3),
        (Complex64::new(0.0, -v_bot), Side::Below, 2),
        (Complex64::new(x_right, 0.0), Side::Above, 0),
        (Complex64::new(x_right, 0.0), Side::Below, 3),
        (Complex64::new(x_left, 0.0), Side::Above, 1),
        (Complex64::new(x_left, 0.0), Side::Below, 2),
    ];
    let mut cloud = PointCloud::new(format!("C_K K={k:e}"));
    for (start, side, target) in halves {
        cloud
            .curves
            .push(track_to_prevertex(&map, HalfTrack { start, side, target }, sampling)?);
    }
    cloud.extra.extend(z);
    let mut cloud = cloud.densified(sampling.spacing);
    cloud.provenance = format!("C_K K={k:e}");
    Ok(cloud)
}

/// Real point `t` on the `sign` half-axis with `Re g(t) = sign · level`,
/// values taken from above.
fn real_crossing(map: &DevelopedMap, level: f64, sign: f64) -> Result<f64> {
    let half = match map.connection() {
        RationalConnection::FiniteK { z1, .. } => z1.re,
        RationalConnection::Limit { x0, .. } => *x0,
    };
    let f = |t: f64| -> Result<f64> { Ok(sign * map.value(Complex64::new(sign * t, 0.0), Side::Above)?.re - level) };
    if f(half).map(|v| v.abs() <= 1e-14) == Ok(true) {
        return Ok(sign * half);
    }
    // `g` is real and increasing to the right of the slit; the bracket is
    // grown toward the slit only as far as needed, since `g′` is huge there.
    let r = map.tail_radius();
    let mut roots = Vec::new();
    if f(r)? > 0.0 {
        let mut lo = r;
        for _ in 0..60 {
            lo = half + 0.5 * (lo - half);
            match f(lo) {
                Ok(v) if v <= 0.0 => {
                    roots.push(bracketed_root(&f, lo, r)?);
                    break;
                }
                Ok(_) => {}
                Err(_) => break,
            }
        }
    }
    if roots.is_empty() {
        roots = scan_roots(&f, 0.0, half * (1.0 - 1e-4), 64)?;
    }
    match roots.as_slice() {
        [t] => Ok(sign * t),
        [] => Err(Error::InvalidArgument("no real crossing of the side level".into())),
        _ => Err(Error::InvalidArgument(format!("ambiguous real crossings {roots:?}"))),
    }
}

/// Truncation of the limit region `M_∞`: spiral sheets up to winding
/// `theta_max`, strips and spiral rays up to distance `strip_depth` from the
/// corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub theta_max: f64,
    pub strip_depth: f64,
}

impl Default for RegionSpec {
    fn default() -> Self {
        Self {
            theta_max: 8.0 * PI,
            strip_depth: 1e12,
        }
    }
}

impl RegionSpec {
    pub fn new(theta_max: f64, strip_depth: f64) -> Result<Self> {
        if !(theta_max > 0.0 && theta_max.is_finite() && strip_depth > 0.0 && strip_depth.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "truncation must be positive and finite, got theta_max = {theta_max}, depth = {strip_depth}"
            )));
        }
        Ok(Self { theta_max, strip_depth })
    }

    /// Winding intervals `[2πn − π/2, 2πn]`, `n ≥ 1`, clipped at `theta_max`.
    pub fn slices(&self) -> Vec<(f64, f64)> {
        (1..)
            .map(|n| (2.0 * PI * n as f64 - FRAC_PI_2, 2.0 * PI * n as f64))
            .take_while(|&(lo, _)| lo < self.theta_max)
            .map(|(lo, hi)| (lo, hi.min(self.theta_max)))
            .collect()
    }

    /// Membership in the truncated `M_∞`. Strip points belong to the strip
    /// closures; spiral points belong when the argument of their projection
    /// lies in the closed lower-right quadrant.
    pub fn contains(&self, p: &SurfacePoint) -> bool {
        match p.chart {
            ChartId::StripLeft => p.coord.re >= 0.0 && p.coord.re <= self.strip_depth && p.coord.im.abs() <= 1.0,
            ChartId::StripRight => p.coord.re <= 0.0 && -p.coord.re <= self.strip_depth && p.coord.im.abs() <= 1.0,
            c if c.is_spiral() => {
                let theta = p.coord.im;
                theta > 0.0
                    && theta <= self.theta_max
                    && p.coord.re <= self.strip_depth.ln()
                    && self
                        .slices()
                        .iter()
                        .any(|&(lo, hi)| theta >= lo - 1e-12 && theta <= hi + 1e-12)
            }
            _ => false,
        }
    }
}

/// Sample of `M_∞` with a flag for points on the boundary of their piece.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MSample {
    pub point: SurfacePoint,
    pub boundary: bool,
}

/// Samples the strip closures and the spiral slices of the truncated `M_∞`
/// on grids with `n` points per direction. Strip depth and spiral radii are
/// sampled logarithmically.
pub fn build_m_infinity(spec: &RegionSpec, n: usize) -> Result<Vec<MSample>> {
    if n < 2 {
        return Err(Error::InvalidArgument("at least two samples per direction".into()));
    }
    let depth = spec.strip_depth;
    let radii: Vec<f64> = (0..n)
        .map(|j| (1e-3f64.ln() + (depth.ln() - 1e-3f64.ln()) * j as f64 / (n - 1) as f64).exp())
        .collect();
    let mut out = Vec::new();
    for (chart, sign) in [(ChartId::StripLeft, 1.0), (ChartId::StripRight, -1.0)] {
        for (a, &x) in radii.iter().enumerate() {
            for b in 0..n {
                let y = -1.0 + 2.0 * b as f64 / (n - 1) as f64;
                out.push(MSample {
                    point: SurfacePoint {
                        chart,
                        coord: Complex64::new(sign * x, y),
                    },
                    boundary: b == 0 || b == n - 1 || a == n - 1,
                });
            }
        }
    }
    for chart in [
        ChartId::SpiralUL,
        ChartId::SpiralUR,
        ChartId::SpiralBL,
        ChartId::SpiralBR,
    ] {
        for (lo, hi) in spec.slices() {
            for (a, &r) in radii.iter().enumerate() {
                for b in 0..n {
                    let theta = lo + (hi - lo) * b as f64 / (n - 1) as f64;
                    out.push(MSample {
                        point: SurfacePoint {
                            chart,
                            coord: Complex64::new(r.ln(), theta),
                        },
                        boundary: b == 0 || b == n - 1 || a == 0 || a == n - 1,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Limit set with a record of where tracking was cut short.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSet {
    pub cloud: PointCloud,
    /// Curves that ended at the clearance disk around a hole, by label.
    pub truncated: Vec<String>,
}

struct Tracked {
    w: Vec<Complex64>,
    reached_hole: bool,
}

fn track_relative(
    map: &DevelopedMap,
    path: LevelPath,
    start: TrackState,
    s_end: f64,
    hole: Complex64,
    sampling: &Sampling,
) -> Result<(Tracked, TrackState)> {
    let clearance = 2.0 * map.clearance();
    let holes = [(hole, clearance), (-hole, clearance)];
    let anchor = Anchor {
        pole: hole,
        radius: f64::INFINITY,
    };
    let t = track_anchored(map, &path, start, s_end, &holes, Some(anchor), &sampling.track)?;
    let reached_hole = matches!(t.end, TrackEnd::Stopped(_));
    Ok((Tracked { w: t.w, reached_hole }, t.last))
}

/// Real root of `h` in `(hole, far)` where `h` increases, with the bracket
/// grown toward the hole only as far as needed.
fn root_toward_hole(h: &dyn Fn(f64) -> Result<f64>, hole: f64, far: f64) -> Result<f64> {
    if h(far)? <= 0.0 {
        return Err(Error::InvalidArgument(format!("no crossing below {far}")));
    }
    let mut lo = far;
    for _ in 0..80 {
        lo = hole + 0.5 * (lo - hole);
        if h(lo)? <= 0.0 {
            return bracketed_root(h, lo, far);
        }
    }
    Err(Error::InvalidArgument("crossing too close to the hole".into()))
}

/// Boundary curves of the image of the strip and spiral attached at one corner.
fn corner_curves(
    map: &DevelopedMap,
    corner: Corner,
    spec: &RegionSpec,
    sampling: &Sampling,
    truncated: &mut Vec<String>,
) -> Result<Vec<Vec<Complex64>>> {
    let RationalConnection::Limit { x0, .. } = *map.connection() else {
        return Err(Error::InvalidArgument("limit connection required".into()));
    };
    let frame = spiral_frame(corner.spiral()).ok_or_else(|| Error::InvalidArgument("corner without spiral".into()))?;
    let c = corner.point();
    let sx = c.re.signum();
    let hole = Complex64::new(sx * x0, 0.0);
    let side = if c.im > 0.0 { Side::Above } else { Side::Below };
    let g_real = |t: f64| -> Result<f64> { Ok(sx * map.value(Complex64::new(sx * t, 0.0), side)?.re) };
    let mut curves = Vec::new();

    // Square side through the real axis, followed into the corner.
    let side_level = |t: f64| -> Result<f64> { Ok(g_real(t)? - 1.0) };
    let t_side = root_toward_hole(&side_level, x0, map.tail_radius())?;
    let w_side = Complex64::new(sx * t_side, 0.0);
    // Values are measured from the limit at the hole, which is the corner up
    // to the accuracy of the fitted parameters.
    // The pole integral needs a point on the inner side of the hole, reached
    // around it on the corner's side.
    let g_side = map.value(w_side, side)?;
    let delta = 0.5 * (t_side - x0);
    let up = Complex64::new(0.0, c.im.signum() * delta);
    let bp = map.branch_at(w_side)?;
    let (d1, bp) = map.integrate_continued(&bp, w_side + up)?;
    let (d2, bp) = map.integrate_continued(&bp, hole - sx * delta + up)?;
    let base = g_side + d1 + d2 - map.integrate_from_pole(hole, &bp)?;
    let f0 = g_side - base;
    let state = TrackState {
        branch: map.branch_at(w_side)?,
        value: f0,
        s: 0.0,
    };
    let path = LevelPath::Exponential {
        scale: f0,
        rate: Complex64::new(-1.0, 0.0),
    };
    let (side_curve, _) = track_relative(map, path, state, U_MAX, hole, sampling)?;
    if side_curve.reached_hole {
        truncated.push(format!("{corner:?} side"));
    }
    curves.push(side_curve.w);

    // Strip midline point at unit distance from the corner, then up to the edge.
    let r0 = 1.0;
    let mid_level = |t: f64| -> Result<f64> { Ok(g_real(t)? - (1.0 - r0)) };
    let t_mid = root_toward_hole(&mid_level, x0, t_side)?;
    let w_mid = Complex64::new(sx * t_mid, 0.0);
    let v0 = map.value(w_mid, side)? - base;
    let edge = frame.offset(Complex64::new(r0.ln(), 0.0));
    let state = TrackState {
        branch: map.branch_at(w_mid)?,
        value: v0,
        s: 0.0,
    };
    let (_, mut state) = track_relative(
        map,
        LevelPath::Segment { from: v0, to: edge },
        state,
        1.0,
        hole,
        sampling,
    )?;

    // Boundary rays of the strip edge and of each slice, reached along the
    // arc of radius r0 around the corner.
    let mut angles = vec![0.0];
    for (lo, hi) in spec.slices() {
        angles.push(lo);
        angles.push(hi);
    }
    angles.dedup();
    let arc = LevelPath::Exponential {
        scale: edge,
        rate: Complex64::new(0.0, frame.orient),
    };
    let mut theta = 0.0;
    for &phi in &angles {
        if phi > theta {
            let s0 = TrackState { s: theta, ..state };
            let (_, last) = track_relative(map, arc, s0, phi, hole, sampling)?;
            state = last;
            theta = phi;
        }
        let on_ray = frame.offset(Complex64::new(r0.ln(), phi));
        let start = TrackState { s: 0.0, ..state };
        let inward = LevelPath::Exponential {
            scale: on_ray,
            rate: Complex64::new(-1.0, 0.0),
        };
        let outward = LevelPath::Exponential {
            scale: on_ray,
            rate: Complex64::new(1.0, 0.0),
        };
        let (inner, _) = track_relative(map, inward, start, U_MAX, hole, sampling)?;
        let (outer, _) = track_relative(map, outward, start, (spec.strip_depth / r0).ln(), hole, sampling)?;
        if inner.reached_hole || outer.reached_hole {
            truncated.push(format!("{corner:?} ray {:.4}", phi / PI));
        }
        let mut ray: Vec<Complex64> = inner.w.into_iter().rev().collect();
        ray.extend_from_slice(&outer.w[1..]);
        curves.push(ray);
    }
    Ok(curves)
}

/// Sampled boundary of the limit set: the images of the strip closures and
/// spiral slices, the segment `[−x₀, x₀]` and the two limit points.
pub fn image_c_infinity(fit: &AsymptoticFit, spec: &RegionSpec, sampling: &Sampling) -> Result<LimitSet> {
    let x0 = fit.x_inf;
    let map = DevelopedMap::new(fit.connection()).with_quad(sampling.quad);
    let mut truncated = Vec::new();
    let mut cloud = PointCloud::new("");
    for corner in CORNERS {
        cloud
            .curves
            .extend(corner_curves(&map, corner, spec, sampling, &mut truncated)?);
    }
    cloud
        .curves
        .push(vec![Complex64::new(-x0, 0.0), Complex64::new(x0, 0.0)]);
    cloud.extra.extend([Complex64::new(-x0, 0.0), Complex64::new(x0, 0.0)]);
    let mut cloud = cloud.densified(sampling.spacing);
    cloud.provenance = format!(
        "C_inf x0={x0:.12} theta_max={:.6} depth={:e}",
        spec.theta_max, spec.strip_depth
    );
    Ok(LimitSet { cloud, truncated })
}

/// Largest distance to the nearer limit point among points of `large` that
/// are farther than `tol` from `small`. Zero when nothing new was added.
pub fn truncation_growth(small: &PointCloud, large: &PointCloud, x_inf: f64, tol: f64) -> Result<f64> {
    let pts = large.points();
    let d = distances_to_polylines(&pts, small)?;
    Ok(pts
        .iter()
        .zip(d)
        .filter(|&(_, d)| d > tol)
        .map(|(p, _)| (p - x_inf).norm().min((p + x_inf).norm()))
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub region: RegionSpec,
    pub sampling: Sampling,
    /// Acceptance bound on the last distance.
    pub threshold: f64,
    /// Largest accepted truncation sensitivity, relative to the last distance.
    pub max_truncation: f64,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            region: RegionSpec::default(),
            sampling: Sampling::default(),
            threshold: DEFAULT_THRESHOLD,
            max_truncation: 0.2,
        }
    }
}

/// Acceptance bound for `d_H(C_K, C_∞)` at `K = 10⁶`, frozen from a
/// reference run with the default sampling.
pub const DEFAULT_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HausdorffEntry {
    pub k: f64,
    pub distance: f64,
    /// Distance to the limit set at the coarser truncation.
    pub coarse_distance: f64,
    /// Distance with both clouds sampled twice as densely.
    pub fine_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HausdorffReport {
    pub entries: Vec<HausdorffEntry>,
    pub coarse_region: RegionSpec,
    /// Largest change of any distance under the coarser truncation.
    pub truncation_sensitivity: f64,
    /// Largest relative change of any distance under doubled density.
    pub density_sensitivity: f64,
    pub decreasing: bool,
    pub threshold: f64,
    pub verdict: Verdict,
    pub truncated: Vec<String>,
}

impl HausdorffReport {
    pub fn last_distance(&self) -> Option<f64> {
        self.entries.last().map(|e| e.distance)
    }
}

fn finer(s: &Sampling) -> Sampling {
    let mut f = *s;
    f.spacing *= 0.5;
    f.track.max_dw *= 0.5;
    f.track.h_max *= 0.5;
    f
}

/// One winding less and a thousandfold shallower strip.
pub fn coarser(region: &RegionSpec) -> RegionSpec {
    RegionSpec {
        theta_max: (region.theta_max - 2.0 * PI).max(region.theta_max * 0.5),
        strip_depth: (region.strip_depth * 1e-3).max(region.strip_depth.sqrt()),
    }
}

/// Tabulates `d_H(C_K, C_∞)` over the solved rows. Passes when the distances
/// decrease strictly and the last one is below the threshold; reports
/// inconclusive when the truncation sensitivity is too large to tell.
pub fn convergence_report(rows: &[Solution], fit: &AsymptoticFit, cfg: &ReportConfig) -> Result<HausdorffReport> {
    if rows.is_empty() {
        return Err(Error::InvalidArgument("no solved rows".into()));
    }
    let fine = finer(&cfg.sampling);
    let coarse_region = coarser(&cfg.region);
    let (limit, (limit_coarse, limit_fine)) = rayon::join(
        || image_c_infinity(fit, &cfg.region, &cfg.sampling),
        || {
            rayon::join(
                || image_c_infinity(fit, &coarse_region, &cfg.sampling),
                || image_c_infinity(fit, &cfg.region, &fine),
            )
        },
    );
    let (limit, limit_coarse, limit_fine) = (limit?, limit_coarse?, limit_fine?);
    let entries = rows
        .par_iter()
        .map(|r| -> Result<HausdorffEntry> {
            let ck = image_c_k(r.k, r.z1, &cfg.sampling)?;
            let ck_fine = image_c_k(r.k, r.z1, &fine)?;
            Ok(HausdorffEntry {
                k: r.k,
                distance: hausdorff_distance(&ck, &limit.cloud)?,
                coarse_distance: hausdorff_distance(&ck, &limit_coarse.cloud)?,
                fine_distance: hausdorff_distance(&ck_fine, &limit_fine.cloud)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let truncation_sensitivity = entries
        .iter()
        .map(|e| (e.distance - e.coarse_distance).abs())
        .fold(0.0, f64::max);
    let density_sensitivity = entries
        .iter()
        .map(|e| (e.distance - e.fine_distance).abs() / e.distance.max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    let decreasing = entries.windows(2).all(|w| w[1].distance < w[0].distance);
    let last = entries.last().map_or(f64::INFINITY, |e| e.distance);
    let verdict = if truncation_sensitivity > cfg.max_truncation * last {
        Verdict::Inconclusive
    } else if decreasing && last < cfg.threshold {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(HausdorffReport {
        entries,
        coarse_region,
        truncation_sensitivity,
        density_sensitivity,
        decreasing,
        threshold: cfg.threshold,
        verdict,
        truncated: limit.truncated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spiral(theta: f64) -> SurfacePoint {
        SurfacePoint {
            chart: ChartId::SpiralUL,
            coord: Complex64::new(0.0, theta),
        }
    }

    #[test]
    fn region_membership() {
        let spec = RegionSpec::default();
        let strip = SurfacePoint {
            chart: ChartId::StripLeft,
            coord: Complex64::new(3.0, 0.0),
        };
        assert!(spec.contains(&strip));
        assert!(spec.contains(&spiral(7.0 * PI / 4.0)));
        assert!(spec.contains(&spiral(2.0 * PI)));
        assert!(!spec.contains(&spiral(FRAC_PI_2)));
        assert!(!spec.contains(&spiral(9.0 * PI)));
        assert!(RegionSpec::new(0.0, 1.0).is_err());
        assert!(RegionSpec::new(PI, 0.0).is_err());
    }

    #[test]
    fn slices_are_clipped() {
        assert_eq!(RegionSpec::default().slices().len(), 4);
        let s = RegionSpec::new(3.5 * PI, 10.0).unwrap().slices();
        assert_eq!(s.len(), 1);
        let s = RegionSpec::new(3.75 * PI, 10.0).unwrap().slices();
        assert_eq!(s.len(), 2);
        assert!((s[1].1 - 3.75 * PI).abs() < 1e-15);
    }

    #[test]
    fn m_samples_are_members() {
        let spec = RegionSpec::new(4.0 * PI, 1e3).unwrap();
        let samples = build_m_infinity(&spec, 5).unwrap();
        assert_eq!(samples.len(), 2 * 25 + 4 * 2 * 25);
        assert!(samples.iter().all(|s| spec.contains(&s.point)));
        assert!(samples.iter().any(|s| s.boundary) && samples.iter().any(|s| !s.boundary));
        assert!(build_m_infinity(&spec, 1).is_err());
    }

    #[test]
    fn illinois_root() {
        let f = |x: f64| -> Result<f64> { Ok(x * x - 2.0) };
        assert!((bracketed_root(&f, 0.0, 2.0).unwrap() - 2f64.sqrt()).abs() < 1e-13);
        let roots = scan_roots(&|x: f64| Ok(x.sin()), 0.5, 10.0, 200).unwrap();
        assert_eq!(roots.len(), 3);
    }

    #[test]
    fn unit_aspect_gives_the_square() {
        let c = image_c_k(1.0, Complex64::new(1.0, 1.0), &Sampling::default()).unwrap();
        let off = c
            .points()
            .iter()
            .map(|z| (z.re.abs().max(z.im.abs()) - 1.0).abs())
            .fold(0.0, f64::max);
        assert!(off < 1e-9, "{off}");
        assert!(c.extra.contains(&Complex64::new(-1.0, -1.0)));
    }

    #[test]
    fn coarser_truncation_is_smaller() {
        let c = coarser(&RegionSpec::default());
        assert!((c.theta_max - 6.0 * PI).abs() < 1e-12);
        assert!((c.strip_depth - 1e9).abs() < 1.0);
    }
}
