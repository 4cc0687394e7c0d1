//! The glued surfaces `A_K` (rectangle glued into the hole of the square
//! complement) and the limit surface `A_∞` (top and bottom sides glued, two
//! half strips and four spirals attached).

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::similitude::Similitude;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ChartId {
    Outer,
    Rect,
    StripLeft,
    StripRight,
    SpiralUL,
    SpiralUR,
    SpiralBL,
    SpiralBR,
}

impl fmt::Display for ChartId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl ChartId {
    pub fn is_spiral(self) -> bool {
        matches!(self, Self::SpiralUL | Self::SpiralUR | Self::SpiralBL | Self::SpiralBR)
    }

    pub fn is_strip(self) -> bool {
        matches!(self, Self::StripLeft | Self::StripRight)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Top,
    Bottom,
    Left,
    Right,
}

pub const SIDES: [Side; 4] = [Side::Top, Side::Bottom, Side::Left, Side::Right];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    RectToOuter,
    OuterToRect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Corner {
    UL,
    UR,
    BL,
    BR,
}

pub const CORNERS: [Corner; 4] = [Corner::UL, Corner::UR, Corner::BL, Corner::BR];

impl Corner {
    /// Corner coordinate in the Outer chart.
    pub fn point(self) -> Complex64 {
        match self {
            Self::UL => Complex64::new(-1.0, 1.0),
            Self::UR => Complex64::new(1.0, 1.0),
            Self::BL => Complex64::new(-1.0, -1.0),
            Self::BR => Complex64::new(1.0, -1.0),
        }
    }

    pub fn spiral(self) -> ChartId {
        match self {
            Self::UL => ChartId::SpiralUL,
            Self::UR => ChartId::SpiralUR,
            Self::BL => ChartId::SpiralBL,
            Self::BR => ChartId::SpiralBR,
        }
    }

    /// Sides met by a counter-clockwise loop around the corner, in order:
    /// the side crossed into the rectangle, then the side crossed out.
    fn ccw_sides(self) -> (Side, Side) {
        match self {
            Self::UL => (Side::Left, Side::Top),
            Self::UR => (Side::Top, Side::Right),
            Self::BL => (Side::Bottom, Side::Left),
            Self::BR => (Side::Right, Side::Bottom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    Ccw,
    Cw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HoleSide {
    Left,
    Right,
}

/// Placement of a spiral relative to its strip: physical offset from the
/// corner is `base · exp(ln r + i·orient·θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpiralFrame {
    pub corner: Corner,
    pub strip: ChartId,
    /// Corner in strip coordinates.
    pub strip_corner: Complex64,
    pub base: f64,
    pub orient: f64,
}

pub fn spiral_frame(chart: ChartId) -> Option<SpiralFrame> {
    let (corner, strip, im, base, orient) = match chart {
        ChartId::SpiralUL => (Corner::UL, ChartId::StripLeft, 1.0, 1.0, 1.0),
        ChartId::SpiralBL => (Corner::BL, ChartId::StripLeft, -1.0, 1.0, -1.0),
        ChartId::SpiralUR => (Corner::UR, ChartId::StripRight, 1.0, -1.0, -1.0),
        ChartId::SpiralBR => (Corner::BR, ChartId::StripRight, -1.0, -1.0, 1.0),
        _ => return None,
    };
    Some(SpiralFrame {
        corner,
        strip,
        strip_corner: Complex64::new(0.0, im),
        base,
        orient,
    })
}

impl SpiralFrame {
    /// Physical offset from the corner of the log-coordinate `ℓ = ln r + iθ`.
    pub fn offset(&self, log: Complex64) -> Complex64 {
        Complex64::from_polar(log.re.exp(), self.orient * log.im) * self.base
    }

    /// Offset in the intrinsic coordinate `q = r e^{iθ}` (sheet forgotten).
    fn intrinsic(&self, offset: Complex64) -> Complex64 {
        let q = offset / self.base;
        if self.orient < 0.0 {
            q.conj()
        } else {
            q
        }
    }

    fn intrinsic_velocity(&self, v: Complex64) -> Complex64 {
        self.intrinsic(v)
    }

    fn physical_velocity(&self, vq: Complex64) -> Complex64 {
        let v = if self.orient < 0.0 { vq.conj() } else { vq };
        v * self.base
    }

    /// Projection `π` of a spiral point to the punctured plane.
    pub fn projection(log: Complex64) -> Complex64 {
        log.exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSpec {
    k: f64,
}

impl SurfaceSpec {
    /// `K ≥ 1`; `f64::INFINITY` selects `A_∞`.
    pub fn new(k: f64) -> Result<Self> {
        if !(k >= 1.0) {
            return Err(Error::InvalidAspect(k));
        }
        Ok(Self { k })
    }

    pub fn limit() -> Self {
        Self { k: f64::INFINITY }
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn is_limit(&self) -> bool {
        self.k.is_infinite()
    }

    pub fn has_chart(&self, chart: ChartId) -> bool {
        match chart {
            ChartId::Outer => true,
            ChartId::Rect => !self.is_limit(),
            _ => self.is_limit(),
        }
    }
}

/// A point of `A_K` or `A_∞`. Spiral coordinates are `ln r + iθ`, `θ > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub chart: ChartId,
    pub coord: Complex64,
}

impl SurfacePoint {
    pub fn new(surface: &SurfaceSpec, chart: ChartId, coord: Complex64) -> Result<Self> {
        let p = Self { chart, coord };
        if p.is_valid(surface) {
            Ok(p)
        } else {
            Err(Error::InvalidPoint {
                chart: chart.to_string(),
                coord,
            })
        }
    }

    pub fn is_valid(&self, surface: &SurfaceSpec) -> bool {
        let z = self.coord;
        if !z.is_finite() || !surface.has_chart(self.chart) {
            return false;
        }
        match self.chart {
            ChartId::Outer => z.re.abs().max(z.im.abs()) > 1.0,
            ChartId::Rect => z.re.abs() < 1.0 && z.im.abs() < 1.0 / surface.k,
            ChartId::StripLeft => z.re > 0.0 && z.im.abs() < 1.0,
            ChartId::StripRight => z.re < 0.0 && z.im.abs() < 1.0,
            _ => z.im > 0.0,
        }
    }
}

fn i() -> Complex64 {
    Complex64::new(0.0, 1.0)
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Gluing of a rectangle side to the matching square side.
pub fn gluing_map(k: f64, side: Side, direction: Direction) -> Result<Similitude> {
    if !(k >= 1.0 && k.is_finite()) {
        return Err(Error::InvalidAspect(k));
    }
    let g = match side {
        Side::Top => Similitude::translation(i() - i() / k),
        Side::Bottom => Similitude::translation(-i() + i() / k),
        Side::Left => Similitude::new(c(k, 0.0), c(k - 1.0, 0.0))?,
        Side::Right => Similitude::new(c(k, 0.0), c(1.0 - k, 0.0))?,
    };
    Ok(match direction {
        Direction::RectToOuter => g,
        Direction::OuterToRect => g.inverse(),
    })
}

/// Width of the seam collars, in Outer units.
fn collar(k: f64) -> f64 {
    if k.is_finite() {
        0.5 / k
    } else {
        0.5
    }
}

/// Side whose Outer collar contains `w`: within `δ` of the side and at least
/// `δ` away from its corners.
fn outer_collar_side(w: Complex64, delta: f64) -> Option<Side> {
    let inner = 1.0 - delta;
    if w.re.abs() < inner {
        if (w.im - 1.0).abs() <= delta {
            return Some(Side::Top);
        }
        if (w.im + 1.0).abs() <= delta {
            return Some(Side::Bottom);
        }
    }
    if w.im.abs() < inner {
        if (w.re + 1.0).abs() <= delta {
            return Some(Side::Left);
        }
        if (w.re - 1.0).abs() <= delta {
            return Some(Side::Right);
        }
    }
    None
}

fn not_in_overlap(p: &SurfacePoint, target: ChartId) -> Error {
    Error::NotInOverlap {
        chart: p.chart.to_string(),
        target: target.to_string(),
        coord: p.coord,
    }
}

/// Coordinate of `p` in the chart `target`. Points must lie in a seam collar
/// shared by the two charts; coordinates there may extend across the seam.
pub fn transport(p: &SurfacePoint, target: ChartId, k: f64) -> Result<Complex64> {
    let surface = SurfaceSpec::new(k)?;
    if !surface.has_chart(p.chart) || !surface.has_chart(target) {
        return Err(Error::InvalidPoint {
            chart: p.chart.to_string(),
            coord: p.coord,
        });
    }
    if p.chart == target {
        return Ok(p.coord);
    }
    let delta = collar(k);
    let z = p.coord;
    use ChartId::*;
    match (p.chart, target) {
        (Outer, Rect) => {
            let side = outer_collar_side(z, delta).ok_or_else(|| not_in_overlap(p, target))?;
            Ok(gluing_map(k, side, Direction::OuterToRect)?.apply(z))
        }
        (Rect, Outer) => {
            // Rect collars are the images of the Outer collars.
            for side in SIDES {
                let g = gluing_map(k, side, Direction::RectToOuter)?;
                let w = g.apply(z);
                if outer_collar_side(w, delta) == Some(side) {
                    return Ok(w);
                }
            }
            Err(not_in_overlap(p, target))
        }
        (Outer, StripLeft) if outer_collar_side(z, delta) == Some(Side::Left) => Ok(z + 1.0),
        (Outer, StripRight) if outer_collar_side(z, delta) == Some(Side::Right) => Ok(z - 1.0),
        (StripLeft, Outer) if outer_collar_side(z - 1.0, delta) == Some(Side::Left) => Ok(z - 1.0),
        (StripRight, Outer) if outer_collar_side(z + 1.0, delta) == Some(Side::Right) => Ok(z + 1.0),
        (s, sp) if s.is_strip() && sp.is_spiral() => {
            let f = spiral_frame(sp).expect("spiral chart");
            if f.strip != s {
                return Err(not_in_overlap(p, target));
            }
            let off = z - f.strip_corner;
            let q = f.intrinsic(off);
            if off.norm() < delta || q.arg().abs() > 0.25 {
                return Err(not_in_overlap(p, target));
            }
            Ok(q.ln())
        }
        (sp, s) if sp.is_spiral() && s.is_strip() => {
            let f = spiral_frame(sp).expect("spiral chart");
            if f.strip != s || z.im.abs() > 0.25 || z.re.exp() < delta {
                return Err(not_in_overlap(p, target));
            }
            Ok(f.strip_corner + f.offset(z))
        }
        _ => Err(not_in_overlap(p, target)),
    }
}

/// Holonomy of a small loop around a corner of `A_K`, as a similitude of the
/// Outer chart.
pub fn corner_holonomy(k: f64, corner: Corner, orientation: Orientation) -> Result<Similitude> {
    if !(k >= 1.0 && k.is_finite()) {
        return Err(Error::InvalidAspect(k));
    }
    let (into, out) = corner.ccw_sides();
    let h = gluing_map(k, into, Direction::RectToOuter)?.compose(&gluing_map(k, out, Direction::OuterToRect)?);
    Ok(match orientation {
        Orientation::Ccw => h,
        Orientation::Cw => h.inverse(),
    })
}

/// Translation picked up by the Outer chart along a counter-clockwise loop
/// around the corner pair on the given side: `±(2i − 2i/K)`, `±2i` on `A_∞`.
pub fn hole_monodromy(k: f64, side: HoleSide) -> Result<Similitude> {
    if !(k >= 1.0) {
        return Err(Error::InvalidAspect(k));
    }
    let t = if k.is_finite() {
        // Down through the rectangle: top gluing continued, bottom gluing left.
        let top = gluing_map(k, Side::Top, Direction::RectToOuter)?;
        let bottom = gluing_map(k, Side::Bottom, Direction::RectToOuter)?;
        top.compose(&bottom.inverse()).translation_part()
    } else {
        c(0.0, 2.0)
    };
    Ok(Similitude::translation(match side {
        HoleSide::Right => t,
        HoleSide::Left => -t,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicPolicy {
    pub corner_tol: f64,
    pub max_events: usize,
}

impl Default for GeodesicPolicy {
    fn default() -> Self {
        Self {
            corner_tol: 1e-9,
            max_events: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeodesicStatus {
    Alive,
    HitCorner(Corner),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geodesic {
    /// Start, then the exit and entry points of every chart change, then the
    /// end point.
    pub points: Vec<SurfacePoint>,
    pub status: GeodesicStatus,
    /// Velocity in the final chart.
    pub velocity: Complex64,
    /// Parameter time actually travelled.
    pub time: f64,
}

enum Event {
    None,
    Corner(Corner, f64),
    Cross {
        t: f64,
        exit: SurfacePoint,
        entry: SurfacePoint,
        velocity: Complex64,
    },
}

fn near_corner(p: Complex64, tol: f64) -> Option<Corner> {
    CORNERS.into_iter().find(|cn| (p - cn.point()).norm() <= tol)
}

/// First time `t ∈ (0, t_max]` at which `z0 + v t` enters the closed box
/// `|Re| ≤ hx, |Im| ≤ hy`, with the side hit.
fn box_entry(z0: Complex64, v: Complex64, hx: f64, hy: f64, t_max: f64) -> Option<(f64, Side)> {
    let slab = |p: f64, d: f64, h: f64| -> Option<(f64, f64)> {
        if d == 0.0 {
            (p.abs() <= h).then_some((f64::NEG_INFINITY, f64::INFINITY))
        } else {
            let a = (-h - p) / d;
            let b = (h - p) / d;
            Some((a.min(b), a.max(b)))
        }
    };
    let (x0, x1) = slab(z0.re, v.re, hx)?;
    let (y0, y1) = slab(z0.im, v.im, hy)?;
    let t_in = x0.max(y0);
    let t_out = x1.min(y1);
    if t_in > t_out || t_in <= 0.0 || t_in > t_max {
        return None;
    }
    let side = if x0 >= y0 {
        if v.re > 0.0 {
            Side::Left
        } else {
            Side::Right
        }
    } else if v.im > 0.0 {
        Side::Bottom
    } else {
        Side::Top
    };
    Some((t_in, side))
}

/// Exit time from the open box around the origin, with the side.
fn box_exit(z0: Complex64, v: Complex64, hx: f64, hy: f64) -> (f64, Side) {
    let tx = if v.re > 0.0 {
        ((hx - z0.re) / v.re, Side::Right)
    } else if v.re < 0.0 {
        ((-hx - z0.re) / v.re, Side::Left)
    } else {
        (f64::INFINITY, Side::Right)
    };
    let ty = if v.im > 0.0 {
        ((hy - z0.im) / v.im, Side::Top)
    } else if v.im < 0.0 {
        ((-hy - z0.im) / v.im, Side::Bottom)
    } else {
        (f64::INFINITY, Side::Top)
    };
    if tx.0 <= ty.0 {
        (tx.0.max(0.0), tx.1)
    } else {
        (ty.0.max(0.0), ty.1)
    }
}

fn pt(chart: ChartId, coord: Complex64) -> SurfacePoint {
    SurfacePoint { chart, coord }
}

/// Straight-line geodesic, advanced analytically from one chart boundary to
/// the next.
pub fn trace_geodesic(
    surface: &SurfaceSpec,
    start: SurfacePoint,
    velocity: Complex64,
    t_max: f64,
    policy: &GeodesicPolicy,
) -> Result<Geodesic> {
    if velocity.norm() == 0.0 || !velocity.is_finite() {
        return Err(Error::InvalidArgument("geodesic velocity must be nonzero".into()));
    }
    if !(t_max >= 0.0) {
        return Err(Error::InvalidArgument("t_max must be nonnegative".into()));
    }
    if !start.is_valid(surface) {
        return Err(Error::InvalidPoint {
            chart: start.chart.to_string(),
            coord: start.coord,
        });
    }
    let k = surface.k();
    let tol = policy.corner_tol;
    let mut cur = start;
    let mut v = velocity;
    let mut t = 0.0;
    let mut points = vec![start];
    for _ in 0..policy.max_events {
        let remaining = t_max - t;
        let event = next_event(surface, &cur, v, remaining, tol)?;
        match event {
            Event::None => {
                let end = advance(&cur, v, remaining);
                points.push(end);
                return Ok(Geodesic {
                    points,
                    status: GeodesicStatus::Alive,
                    velocity: v,
                    time: t_max,
                });
            }
            Event::Corner(cn, dt) => {
                points.push(pt(ChartId::Outer, cn.point()));
                return Ok(Geodesic {
                    points,
                    status: GeodesicStatus::HitCorner(cn),
                    velocity: v,
                    time: t + dt,
                });
            }
            Event::Cross {
                t: dt,
                exit,
                entry,
                velocity: nv,
            } => {
                t += dt;
                points.push(exit);
                points.push(entry);
                cur = entry;
                v = nv;
            }
        }
    }
    // Events piling up without reaching t_max: the trace is spiralling into a corner.
    let last = points.last().copied().unwrap_or(start);
    let outer = to_outer_position(surface, &last, k);
    let corner = CORNERS
        .into_iter()
        .min_by(|a, b| (outer - a.point()).norm().total_cmp(&(outer - b.point()).norm()))
        .expect("four corners");
    Ok(Geodesic {
        points,
        status: GeodesicStatus::HitCorner(corner),
        velocity: v,
        time: t,
    })
}

/// Rough Outer-chart position, used only to name the nearest corner.
fn to_outer_position(surface: &SurfaceSpec, p: &SurfacePoint, k: f64) -> Complex64 {
    match p.chart {
        ChartId::Outer => p.coord,
        ChartId::Rect => {
            let z = p.coord;
            let side = if z.re.abs() * 1.0 > z.im.abs() * k {
                if z.re > 0.0 {
                    Side::Right
                } else {
                    Side::Left
                }
            } else if z.im > 0.0 {
                Side::Top
            } else {
                Side::Bottom
            };
            gluing_map(surface.k(), side, Direction::RectToOuter)
                .map(|g| g.apply(z))
                .unwrap_or(z)
        }
        ChartId::StripLeft => p.coord - 1.0,
        ChartId::StripRight => p.coord + 1.0,
        sp => {
            let f = spiral_frame(sp).expect("spiral chart");
            f.corner.point() + f.offset(p.coord)
        }
    }
}

fn advance(p: &SurfacePoint, v: Complex64, dt: f64) -> SurfacePoint {
    if let Some(f) = spiral_frame(p.chart) {
        let q0 = p.coord.exp();
        let q1 = q0 + f.intrinsic_velocity(v) * dt;
        let theta = p.coord.im + (q1 / q0).arg();
        pt(p.chart, c(q1.norm().ln(), theta))
    } else {
        pt(p.chart, p.coord + v * dt)
    }
}

fn next_event(surface: &SurfaceSpec, p: &SurfacePoint, v: Complex64, remaining: f64, tol: f64) -> Result<Event> {
    let k = surface.k();
    let z = p.coord;
    match p.chart {
        ChartId::Outer => {
            let Some((dt, side)) = box_entry(z, v, 1.0, 1.0, remaining) else {
                return Ok(Event::None);
            };
            let hit = z + v * dt;
            if let Some(cn) = near_corner(hit, tol) {
                return Ok(Event::Corner(cn, dt));
            }
            let exit = pt(ChartId::Outer, hit);
            let (entry, nv) = if surface.is_limit() {
                match side {
                    Side::Top => (pt(ChartId::Outer, hit - 2.0 * i()), v),
                    Side::Bottom => (pt(ChartId::Outer, hit + 2.0 * i()), v),
                    Side::Left => (pt(ChartId::StripLeft, hit + 1.0), v),
                    Side::Right => (pt(ChartId::StripRight, hit - 1.0), v),
                }
            } else {
                let g = gluing_map(k, side, Direction::OuterToRect)?;
                (pt(ChartId::Rect, g.apply(hit)), v * g.linear())
            };
            Ok(Event::Cross {
                t: dt,
                exit,
                entry,
                velocity: nv,
            })
        }
        ChartId::Rect => {
            let (dt, side) = box_exit(z, v, 1.0, 1.0 / k);
            if dt > remaining {
                return Ok(Event::None);
            }
            let hit = z + v * dt;
            let g = gluing_map(k, side, Direction::RectToOuter)?;
            let w = g.apply(hit);
            if let Some(cn) = near_corner(w, tol) {
                return Ok(Event::Corner(cn, dt));
            }
            Ok(Event::Cross {
                t: dt,
                exit: pt(ChartId::Rect, hit),
                entry: pt(ChartId::Outer, w),
                velocity: v * g.linear(),
            })
        }
        ChartId::StripLeft | ChartId::StripRight => {
            let left = p.chart == ChartId::StripLeft;
            // Times to reach the open edge Re = 0 and the two horizontal edges.
            let t_edge = if (left && v.re < 0.0) || (!left && v.re > 0.0) {
                -z.re / v.re
            } else {
                f64::INFINITY
            };
            let t_h = if v.im > 0.0 {
                (1.0 - z.im) / v.im
            } else if v.im < 0.0 {
                (-1.0 - z.im) / v.im
            } else {
                f64::INFINITY
            };
            let dt = t_edge.min(t_h);
            if dt > remaining {
                return Ok(Event::None);
            }
            let hit = z + v * dt;
            let shift = if left { -1.0 } else { 1.0 };
            if near_corner(hit + shift, tol).is_some() {
                return Ok(Event::Corner(near_corner(hit + shift, tol).unwrap(), dt));
            }
            let exit = pt(p.chart, hit);
            if t_edge <= t_h {
                return Ok(Event::Cross {
                    t: dt,
                    exit,
                    entry: pt(ChartId::Outer, hit + shift),
                    velocity: v,
                });
            }
            let up = v.im > 0.0;
            let sp = match (left, up) {
                (true, true) => ChartId::SpiralUL,
                (true, false) => ChartId::SpiralBL,
                (false, true) => ChartId::SpiralUR,
                (false, false) => ChartId::SpiralBR,
            };
            let f = spiral_frame(sp).expect("spiral chart");
            let q = f.intrinsic(hit - f.strip_corner);
            Ok(Event::Cross {
                t: dt,
                exit,
                entry: pt(sp, c(q.norm().ln(), 0.0)),
                velocity: v,
            })
        }
        sp => {
            let f = spiral_frame(sp).expect("spiral chart");
            let q0 = z.exp();
            let vq = f.intrinsic_velocity(v);
            // Closest approach to the corner.
            let t_min = -(q0 * vq.conj()).re / vq.norm_sqr();
            if t_min > 0.0 && t_min <= remaining && (q0 + vq * t_min).norm() <= tol {
                return Ok(Event::Corner(f.corner, t_min));
            }
            if vq.im != 0.0 {
                let ts = -q0.im / vq.im;
                if ts > 0.0 && ts <= remaining {
                    let qs = q0 + vq * ts;
                    let theta = z.im + (qs / q0).arg();
                    if qs.re > 0.0 && theta.abs() < 1e-9 {
                        let strip_pt = f.strip_corner + f.base * qs.re;
                        return Ok(Event::Cross {
                            t: ts,
                            exit: pt(sp, c(qs.re.ln(), 0.0)),
                            entry: pt(f.strip, strip_pt),
                            velocity: f.physical_velocity(vq),
                        });
                    }
                }
            }
            Ok(Event::None)
        }
    }
}

/// Holonomy around a corner of `A_∞` has infinite order; this returns the
/// spiral chart's winding per turn instead (`2π` in `θ`).
pub fn spiral_turn() -> f64 {
    2.0 * PI
}
