//! Embedding of the limit surface into the family `A_{1/t}`, `t ∈ [0, 1]`,
//! through the four kinds of charts of the leaf space `[0,1] × ℂ`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::similitude::Similitude;
use crate::surface::{spiral_frame, ChartId, Corner, SpiralFrame, SurfacePoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Leaf {
    t: f64,
}

impl Leaf {
    pub fn new(t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidArgument(format!("leaf parameter t = {t} not in [0, 1]")));
        }
        Ok(Self { t })
    }

    pub fn from_k(k: f64) -> Result<Self> {
        if !(k >= 1.0) {
            return Err(Error::InvalidAspect(k));
        }
        Self::new(1.0 / k)
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn k(&self) -> f64 {
        1.0 / self.t
    }

    pub fn is_limit(&self) -> bool {
        self.t == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StripSide {
    Left,
    Right,
}

impl StripSide {
    fn sign(self) -> f64 {
        match self {
            Self::Left => -1.0,
            Self::Right => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case")]
pub enum EmbedChart {
    /// Points of the square complement, same coordinate on every leaf.
    Case1,
    /// The vertical strip `|Re z| < 1` through the glued horizontal sides.
    Case2,
    /// A half strip with the rectangle end it collapses from.
    Case3 { strip: StripSide },
    /// Spiral at a corner; coordinates are the corner offset near the
    /// projection of `base` (a log-coordinate fixing the sheet), within `radius`.
    Case4 {
        corner: Corner,
        base: Complex64,
        radius: f64,
    },
}

impl EmbedChart {
    pub fn case(&self) -> u8 {
        match self {
            Self::Case1 => 1,
            Self::Case2 => 2,
            Self::Case3 { .. } => 3,
            Self::Case4 { .. } => 4,
        }
    }

    pub fn spiral(corner: Corner, base: Complex64, radius: f64) -> Result<Self> {
        if !(base.im > 0.0) || !(radius > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "spiral chart needs base angle > 0 and positive radius, got {base}, {radius}"
            )));
        }
        let f = frame(corner);
        let center = f.offset(base);
        if radius >= center.norm() {
            return Err(Error::InvalidArgument("spiral chart ball must avoid the corner".into()));
        }
        Ok(Self::Case4 { corner, base, radius })
    }

    /// Sheet of the base point: `θ ∈ [2nπ − π/2, 2nπ + 3π/2)`.
    pub fn sheet(&self) -> Option<u32> {
        match self {
            Self::Case4 { base, .. } => Some(sheet_of(base.im)),
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Case1 => "case1".into(),
            Self::Case2 => "case2".into(),
            Self::Case3 { strip } => format!("case3-{strip:?}").to_lowercase(),
            Self::Case4 { corner, base, .. } => format!("case4-{corner:?}-n{}", sheet_of(base.im)).to_lowercase(),
        }
    }
}

fn frame(corner: Corner) -> SpiralFrame {
    spiral_frame(corner.spiral()).expect("every corner has a spiral")
}

fn sheet_of(theta: f64) -> u32 {
    ((theta + FRAC_PI_2) / (2.0 * PI)).floor().max(0.0) as u32
}

/// Rectangle corner adjacent to a square corner.
fn rect_corner(corner: Corner, k: f64) -> Complex64 {
    let p = corner.point();
    Complex64::new(p.re, p.im / k)
}

/// Base point used in virtual-point fixtures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VirtualPointRep {
    pub a: Complex64,
    pub chart: EmbedChart,
}

/// Piece of a chart domain on a leaf `t > 0`: the similitude it applies,
/// its target chart, and the distance of the query point to the piece edge.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Piece {
    chart: ChartId,
    map: Similitude,
    margin: f64,
}

fn sim(a: Complex64, b: Complex64) -> Similitude {
    Similitude::new(a, b).expect("nonzero linear part")
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn out_of_domain(chart: &EmbedChart, z: Complex64) -> Error {
    Error::InvalidPoint {
        chart: chart.label(),
        coord: z,
    }
}

/// Distance from `z` to the closed square, negative inside.
fn square_clearance(z: Complex64) -> f64 {
    let dx = z.re.abs() - 1.0;
    let dy = z.im.abs() - 1.0;
    if dx <= 0.0 && dy <= 0.0 {
        dx.max(dy)
    } else {
        Complex64::new(dx.max(0.0), dy.max(0.0)).norm()
    }
}

/// Lift of a corner offset to the spiral log-coordinate closest to `theta_ref`.
fn lift(f: &SpiralFrame, offset: Complex64, theta_ref: f64) -> Complex64 {
    let q = offset / f.base;
    let a = f.orient * q.arg();
    let m = ((theta_ref - a) / (2.0 * PI)).round();
    Complex64::new(q.norm().ln(), a + 2.0 * PI * m)
}

/// Distance from `z` to the ray from the origin in direction `dir` (unit).
fn ray_distance(z: Complex64, dir: Complex64) -> f64 {
    let s = (z * dir.conj()).re;
    if s <= 0.0 {
        z.norm()
    } else {
        (z - dir * s).norm()
    }
}

fn piece(chart: &EmbedChart, k: f64, z: Complex64) -> Result<Piece> {
    let i = Complex64::new(0.0, 1.0);
    match *chart {
        EmbedChart::Case1 => {
            let m = square_clearance(z);
            if m <= 0.0 {
                return Err(out_of_domain(chart, z));
            }
            Ok(Piece {
                chart: ChartId::Outer,
                map: Similitude::identity(),
                margin: m,
            })
        }
        EmbedChart::Case2 => {
            let side = 1.0 - z.re.abs();
            if side <= 0.0 {
                return Err(out_of_domain(chart, z));
            }
            let low = 1.0 - 2.0 / k;
            let (chart, map, m) = if z.im > 1.0 {
                (ChartId::Outer, Similitude::identity(), z.im - 1.0)
            } else if z.im >= low {
                (
                    ChartId::Rect,
                    Similitude::translation(i / k - i),
                    (1.0 - z.im).min(z.im - low),
                )
            } else {
                (
                    ChartId::Outer,
                    Similitude::translation(-2.0 * i + 2.0 * i / k),
                    low - z.im,
                )
            };
            Ok(Piece {
                chart,
                map,
                margin: m.min(side),
            })
        }
        EmbedChart::Case3 { strip } => {
            // Mirror the right strip onto the left one: z ↦ −conj(z) swaps them.
            let s = strip.sign();
            let x = -s * z.re;
            let y = z.im;
            let two_k = 2.0 * k;
            let in_band = y.abs() < 1.0 && x <= two_k;
            let in_cols = x > 0.0 && x < two_k;
            if !(in_band || in_cols) {
                return Err(out_of_domain(chart, z));
            }
            let corner_up = Complex64::new(s, 1.0);
            let corner_dn = Complex64::new(s, -1.0);
            let (target, map, m) = if x <= 0.0 {
                (ChartId::Outer, Similitude::translation(re(s)), (1.0 - y.abs()).min(-x))
            } else if y.abs() <= 1.0 {
                (
                    ChartId::Rect,
                    sim(re(1.0 / k), re(s)),
                    (1.0 - y.abs()).min(x).min(two_k - x),
                )
            } else if y > 1.0 {
                (
                    ChartId::Outer,
                    sim(re(1.0 / k), corner_up - i / k),
                    (y - 1.0).min(x).min(two_k - x),
                )
            } else {
                (
                    ChartId::Outer,
                    sim(re(1.0 / k), corner_dn + i / k),
                    (-1.0 - y).min(x).min(two_k - x),
                )
            };
            Ok(Piece {
                chart: target,
                map,
                margin: m,
            })
        }
        EmbedChart::Case4 { corner, base, radius } => {
            let f = frame(corner);
            let center = f.offset(base);
            if (z - center).norm() >= radius {
                return Err(out_of_domain(chart, z));
            }
            let l = lift(&f, z, base.im);
            let n = sheet_of(l.im);
            let bound = 2.0 * k.powi(n as i32);
            if z.norm() >= bound {
                return Err(out_of_domain(chart, z));
            }
            let scale = k.powi(n as i32 + 1);
            let phase = l.im - 2.0 * PI * n as f64;
            // Edges of the branch pieces are the offset rays at θ ≡ 0 and θ ≡ −π/2.
            let ray0 = f.offset(Complex64::new(0.0, 0.0));
            let ray1 = f.offset(Complex64::new(0.0, -FRAC_PI_2));
            let m = ray_distance(z, ray0)
                .min(ray_distance(z, ray1))
                .min(bound - z.norm())
                .min(radius - (z - center).norm());
            if phase >= 0.0 {
                Ok(Piece {
                    chart: ChartId::Outer,
                    map: sim(re(1.0 / scale), corner.point()),
                    margin: m,
                })
            } else {
                if n == 0 {
                    return Err(out_of_domain(chart, z));
                }
                Ok(Piece {
                    chart: ChartId::Rect,
                    map: sim(re(1.0 / scale), rect_corner(corner, k)),
                    margin: m,
                })
            }
        }
    }
}

fn limit_embed(chart: &EmbedChart, z: Complex64) -> Result<SurfacePoint> {
    let i = Complex64::new(0.0, 1.0);
    let pt = |chart, coord| SurfacePoint { chart, coord };
    match *chart {
        EmbedChart::Case1 => {
            if square_clearance(z) <= 0.0 {
                return Err(out_of_domain(chart, z));
            }
            Ok(pt(ChartId::Outer, z))
        }
        EmbedChart::Case2 => {
            if z.re.abs() >= 1.0 {
                return Err(out_of_domain(chart, z));
            }
            Ok(if z.im >= 1.0 {
                pt(ChartId::Outer, z)
            } else {
                pt(ChartId::Outer, z - 2.0 * i)
            })
        }
        EmbedChart::Case3 { strip } => {
            let s = strip.sign();
            let x = -s * z.re;
            let y = z.im;
            if !((y.abs() < 1.0) || x > 0.0) {
                return Err(out_of_domain(chart, z));
            }
            let (strip_chart, up, dn) = match strip {
                StripSide::Left => (ChartId::StripLeft, Corner::UL, Corner::BL),
                StripSide::Right => (ChartId::StripRight, Corner::UR, Corner::BR),
            };
            if x <= 0.0 {
                Ok(pt(ChartId::Outer, z + s))
            } else if y.abs() < 1.0 {
                Ok(pt(strip_chart, z))
            } else {
                let cn = if y >= 1.0 { up } else { dn };
                let f = frame(cn);
                Ok(pt(cn.spiral(), lift(&f, z - f.strip_corner, FRAC_PI_4)))
            }
        }
        EmbedChart::Case4 { corner, base, radius } => {
            let f = frame(corner);
            if (z - f.offset(base)).norm() >= radius {
                return Err(out_of_domain(chart, z));
            }
            Ok(pt(corner.spiral(), lift(&f, z, base.im)))
        }
    }
}

const FRAC_PI_4: f64 = PI / 4.0;

/// The point of `A_{1/t}` (or `A_∞` at `t = 0`) assigned to `z` by the chart.
/// Points on a seam are returned in the closure of one adjacent chart.
pub fn embed_eval(chart: &EmbedChart, t: f64, z: Complex64) -> Result<SurfacePoint> {
    let leaf = Leaf::new(t)?;
    if leaf.is_limit() {
        return limit_embed(chart, z);
    }
    let p = piece(chart, leaf.k(), z)?;
    Ok(SurfacePoint {
        chart: p.chart,
        coord: p.map.apply(z),
    })
}

/// Inverse of [`embed_eval`] on a leaf.
pub fn embed_inverse(chart: &EmbedChart, t: f64, p: &SurfacePoint) -> Result<Complex64> {
    let leaf = Leaf::new(t)?;
    let miss = || Error::NotInOverlap {
        chart: p.chart.to_string(),
        target: chart.label(),
        coord: p.coord,
    };
    let candidates: Vec<Complex64> = if leaf.is_limit() {
        limit_preimages(chart, p)
    } else {
        let k = leaf.k();
        finite_preimages(chart, k, p)
    };
    for z in candidates {
        if let Ok(q) = embed_eval(chart, t, z) {
            if q.chart == p.chart && (q.coord - p.coord).norm() <= 1e-12 * (1.0 + p.coord.norm()) {
                return Ok(z);
            }
        }
    }
    Err(miss())
}

fn finite_preimages(chart: &EmbedChart, k: f64, p: &SurfacePoint) -> Vec<Complex64> {
    let i = Complex64::new(0.0, 1.0);
    let w = p.coord;
    match (*chart, p.chart) {
        (EmbedChart::Case1, ChartId::Outer) => vec![w],
        (EmbedChart::Case2, ChartId::Outer) => vec![w, w + 2.0 * i - 2.0 * i / k],
        (EmbedChart::Case2, ChartId::Rect) => vec![w - i / k + i],
        (EmbedChart::Case3 { strip }, ChartId::Outer) => {
            let s = strip.sign();
            vec![
                w - s,
                (w - Complex64::new(s, 1.0)) * k + i,
                (w - Complex64::new(s, -1.0)) * k - i,
            ]
        }
        (EmbedChart::Case3 { strip }, ChartId::Rect) => vec![(w - strip.sign()) * k],
        (EmbedChart::Case4 { corner, base, .. }, target) => {
            let n0 = sheet_of(base.im) as i32;
            let origin = match target {
                ChartId::Outer => corner.point(),
                ChartId::Rect => rect_corner(corner, k),
                _ => return Vec::new(),
            };
            (n0 - 1..=n0 + 1)
                .filter(|&n| n >= 0)
                .map(|n| (w - origin) * k.powi(n + 1))
                .collect()
        }
        _ => Vec::new(),
    }
}

fn limit_preimages(chart: &EmbedChart, p: &SurfacePoint) -> Vec<Complex64> {
    let i = Complex64::new(0.0, 1.0);
    let w = p.coord;
    match (*chart, p.chart) {
        (EmbedChart::Case1, ChartId::Outer) => vec![w],
        (EmbedChart::Case2, ChartId::Outer) => vec![w, w + 2.0 * i],
        (EmbedChart::Case3 { strip }, ChartId::Outer) => vec![w - strip.sign()],
        (EmbedChart::Case3 { strip }, c) if c.is_strip() => {
            let matches = matches!(
                (strip, c),
                (StripSide::Left, ChartId::StripLeft) | (StripSide::Right, ChartId::StripRight)
            );
            if matches {
                vec![w]
            } else {
                Vec::new()
            }
        }
        (EmbedChart::Case3 { .. }, c) if c.is_spiral() => {
            let f = spiral_frame(c).expect("spiral chart");
            vec![f.strip_corner + f.offset(w)]
        }
        (EmbedChart::Case4 { corner, .. }, c) if c == corner.spiral() => {
            vec![frame(corner).offset(w)]
        }
        _ => Vec::new(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    pub chart_a: String,
    pub chart_b: String,
    pub t: Vec<f64>,
    pub sup_diff: Vec<f64>,
    /// `max sup/t` over the grid; the Lipschitz-in-`t` constant observed.
    pub rate_constant: f64,
    pub overlap_points: usize,
    pub empty_overlap: bool,
    pub pass: bool,
}

/// Sup over `compact` (coordinates of chart `a`) of the difference between
/// the chart change `a → b` on leaf `t` and on the limit leaf.
pub fn transition_continuity_check(
    a: &EmbedChart,
    b: &EmbedChart,
    compact: &[Complex64],
    t_grid: &[f64],
    tol: f64,
) -> Result<ContinuityReport> {
    if t_grid.windows(2).any(|w| w[1] >= w[0]) || t_grid.iter().any(|&t| !(t > 0.0 && t <= 1.0)) {
        return Err(Error::InvalidArgument(
            "t grid must be strictly decreasing within (0, 1]".into(),
        ));
    }
    let change = |t: f64, z: Complex64| -> Option<Complex64> {
        let p = embed_eval(a, t, z).ok()?;
        embed_inverse(b, t, &p).ok()
    };
    let overlap: Vec<(Complex64, Complex64)> = compact
        .iter()
        .filter_map(|&z| {
            let z0 = change(0.0, z)?;
            t_grid.iter().all(|&t| change(t, z).is_some()).then_some((z, z0))
        })
        .collect();
    let mut sup_diff = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let s = overlap
            .iter()
            .map(|&(z, z0)| (change(t, z).expect("checked") - z0).norm())
            .fold(0.0, f64::max);
        sup_diff.push(s);
    }
    let rate_constant = t_grid.iter().zip(&sup_diff).map(|(t, s)| s / t).fold(0.0, f64::max);
    let empty = overlap.is_empty();
    // Chart changes on leaf `t` carry rounding of order `ε · scale / t`.
    let scale = 1.0
        + overlap
            .iter()
            .map(|(z, z0)| z.norm().max(z0.norm()))
            .fold(0.0, f64::max);
    let floor = |t: f64| 64.0 * f64::EPSILON * scale / t;
    let level: Vec<f64> = t_grid
        .iter()
        .zip(&sup_diff)
        .map(|(&t, &s)| if s <= floor(t) { 0.0 } else { s })
        .collect();
    let decreasing = level.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    let pass = !empty && decreasing && sup_diff.last().is_none_or(|&s| s <= tol);
    Ok(ContinuityReport {
        chart_a: a.label(),
        chart_b: b.label(),
        t: t_grid.to_vec(),
        sup_diff,
        rate_constant,
        overlap_points: overlap.len(),
        empty_overlap: empty,
        pass,
    })
}

/// Closed disk in a chart of `A_K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageDisk {
    pub chart: ChartId,
    pub center: Complex64,
    pub radius: f64,
    /// Whether the disk lies strictly inside its chart's open domain.
    pub interior: bool,
}

fn round_up(x: f64) -> f64 {
    x * (1.0 + 4.0 * f64::EPSILON) + f64::MIN_POSITIVE
}

fn chart_clearance(chart: ChartId, k: f64, w: Complex64) -> f64 {
    match chart {
        ChartId::Outer => square_clearance(w),
        ChartId::Rect => (1.0 - w.re.abs()).min(1.0 / k - w.im.abs()),
        _ => f64::NEG_INFINITY,
    }
}

/// Image of the closed ball `B(rep.a, r)` on the leaf `K`, which must lie
/// inside a single piece of the chart.
pub fn image_disk(rep: &VirtualPointRep, k: f64, r: f64) -> Result<ImageDisk> {
    let leaf = Leaf::from_k(k)?;
    let p = piece(&rep.chart, leaf.k(), rep.a)?;
    if p.margin <= r {
        return Err(Error::InvalidArgument(format!(
            "ball of radius {r} around {} straddles a piece boundary of {} at K = {k}",
            rep.a,
            rep.chart.label()
        )));
    }
    let center = p.map.apply(rep.a);
    let radius = round_up(r * p.map.ratio());
    let clearance = chart_clearance(p.chart, k, center);
    Ok(ImageDisk {
        chart: p.chart,
        center,
        radius,
        interior: clearance > round_up(radius + 4.0 * f64::EPSILON * (1.0 + center.norm())),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationRecord {
    pub k: f64,
    pub disjoint: bool,
    pub x: ImageDisk,
    pub y: ImageDisk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub records: Vec<SeparationRecord>,
    /// Smallest tested `K` from which on every verdict is disjoint.
    pub threshold_k: Option<f64>,
}

fn same_limit_point(x: &VirtualPointRep, y: &VirtualPointRep) -> bool {
    match (limit_embed(&x.chart, x.a), limit_embed(&y.chart, y.a)) {
        (Ok(p), Ok(q)) => p.chart == q.chart && (p.coord - q.coord).norm() <= 1e-12 * (1.0 + p.coord.norm()),
        _ => false,
    }
}

pub fn separation_check(
    x: &VirtualPointRep,
    y: &VirtualPointRep,
    k_list: &[f64],
    rx: f64,
    ry: f64,
) -> Result<SeparationReport> {
    if same_limit_point(x, y) {
        return Err(Error::InvalidArgument(
            "separation needs two distinct limit points".into(),
        ));
    }
    let mut ks = k_list.to_vec();
    ks.sort_by(f64::total_cmp);
    let mut records = Vec::with_capacity(ks.len());
    for &k in &ks {
        let dx = image_disk(x, k, rx)?;
        let dy = image_disk(y, k, ry)?;
        let disjoint = if dx.chart == dy.chart {
            let d = (dx.center - dy.center).norm();
            d * (1.0 - 4.0 * f64::EPSILON) > dx.radius + dy.radius
        } else {
            dx.interior && dy.interior
        };
        records.push(SeparationRecord {
            k,
            disjoint,
            x: dx,
            y: dy,
        });
    }
    let mut threshold_k = None;
    for r in records.iter().rev() {
        if r.disjoint {
            threshold_k = Some(r.k);
        } else {
            break;
        }
    }
    Ok(SeparationReport { records, threshold_k })
}

/// Sample grid of a closed box, `n × n` points.
pub fn box_grid(lo: Complex64, hi: Complex64, n: usize) -> Vec<Complex64> {
    let n = n.max(2);
    let mut out = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            let u = a as f64 / (n - 1) as f64;
            let v = b as f64 / (n - 1) as f64;
            out.push(Complex64::new(lo.re + u * (hi.re - lo.re), lo.im + v * (hi.im - lo.im)));
        }
    }
    out
}
