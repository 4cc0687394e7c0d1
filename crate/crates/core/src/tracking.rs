//! Pull-back of straight paths through the developing map: follow
//! `w(s)` with `g(w(s)) − ref = p(s)` by predictor-corrector continuation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::connection::{BranchPoint, DevelopedMap};
use crate::error::{Error, Result};

/// Target path `p(s)` in chart coordinates, relative to the reference value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LevelPath {
    /// `p(s) = from + s (to − from)`.
    Segment { from: Complex64, to: Complex64 },
    /// `p(s) = scale · exp(rate · s)`: radial approach (`rate = ±1`) or arcs
    /// (`rate = i`).
    Exponential { scale: Complex64, rate: Complex64 },
}

impl LevelPath {
    pub fn value(&self, s: f64) -> Complex64 {
        match *self {
            Self::Segment { from, to } => from + (to - from) * s,
            Self::Exponential { scale, rate } => scale * (rate * s).exp(),
        }
    }

    pub fn derivative(&self, s: f64) -> Complex64 {
        match *self {
            Self::Segment { from, to } => to - from,
            Self::Exponential { scale, rate } => scale * rate * (rate * s).exp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Initial parameter step magnitude.
    pub h0: f64,
    pub h_min: f64,
    pub h_max: f64,
    /// Cap on `|Δw|` per step.
    pub max_dw: f64,
    /// Cap on `|Δw|` as a fraction of the distance to the nearest singularity.
    pub pole_frac: f64,
    pub max_steps: usize,
}

impl Default for TrackConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-13,
            h0: 1e-3,
            h_min: 1e-12,
            h_max: 0.05,
            max_dw: 5e-3,
            pole_frac: 0.1,
            max_steps: 2_000_000,
        }
    }
}

/// Current position on a tracked curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackState {
    pub branch: BranchPoint,
    /// `g(w) − ref`, carried along incrementally.
    pub value: Complex64,
    pub s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrackEnd {
    Completed,
    /// Came within the stop radius of the indexed point.
    Stopped(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub s: Vec<f64>,
    pub w: Vec<Complex64>,
    pub end: TrackEnd,
    pub arc_length: f64,
    pub last: TrackState,
    /// Largest `|g(w) − ref − p(s)|` over accepted steps.
    pub max_residual: f64,
}

/// Points that end a track when approached within the given radius.
pub type StopSet = [(Complex64, f64)];

/// A prevertex whose value is the reference: within `radius` of it, the
/// tracked value is recomputed as `g(w) − g(pole)` by radial integration
/// instead of being accumulated, so that it keeps relative accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub pole: Complex64,
    pub radius: f64,
}

pub fn track_level_curve(
    map: &DevelopedMap,
    path: &LevelPath,
    start: TrackState,
    s_end: f64,
    stops: &StopSet,
    cfg: &TrackConfig,
) -> Result<Track> {
    track_anchored(map, path, start, s_end, stops, None, cfg)
}

pub fn track_anchored(
    map: &DevelopedMap,
    path: &LevelPath,
    start: TrackState,
    s_end: f64,
    stops: &StopSet,
    anchor: Option<Anchor>,
    cfg: &TrackConfig,
) -> Result<Track> {
    let dir = if s_end >= start.s { 1.0 } else { -1.0 };
    let tol = |p: Complex64| cfg.rel_tol * p.norm() + cfg.abs_tol;
    let r0 = (start.value - path.value(start.s)).norm();
    if r0 > 10.0 * tol(path.value(start.s)) + 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "track start is off the target path by {r0:e}"
        )));
    }
    let mut state = start;
    let mut out_s = vec![state.s];
    let mut out_w = vec![state.branch.w];
    let mut arc = 0.0;
    let mut h = cfg.h0.min(cfg.h_max);
    let mut max_residual = r0;
    let stop_hit = |w: Complex64| stops.iter().position(|&(z, r)| (w - z).norm() < r);
    if let Some(i) = stop_hit(state.branch.w) {
        return Ok(Track {
            s: out_s,
            w: out_w,
            end: TrackEnd::Stopped(i),
            arc_length: 0.0,
            last: state,
            max_residual,
        });
    }
    for _ in 0..cfg.max_steps {
        let remaining = (s_end - state.s) * dir;
        if remaining <= 0.0 {
            return Ok(Track {
                s: out_s,
                w: out_w,
                end: TrackEnd::Completed,
                arc_length: arc,
                last: state,
                max_residual,
            });
        }
        let step = h.min(remaining);
        let s_new = if step == remaining { s_end } else { state.s + dir * step };
        match attempt(map, path, &state, s_new, anchor, cfg, &tol) {
            Some((next, iters, res)) => {
                arc += (next.branch.w - state.branch.w).norm();
                max_residual = max_residual.max(res);
                state = next;
                out_s.push(state.s);
                out_w.push(state.branch.w);
                if let Some(i) = stop_hit(state.branch.w) {
                    return Ok(Track {
                        s: out_s,
                        w: out_w,
                        end: TrackEnd::Stopped(i),
                        arc_length: arc,
                        last: state,
                        max_residual,
                    });
                }
                if iters <= 1 {
                    h = (h * 1.5).min(cfg.h_max);
                }
            }
            None => {
                h *= 0.5;
                if h < cfg.h_min {
                    return Err(Error::StepCollapse {
                        param: state.s,
                        arc_length: arc,
                    });
                }
            }
        }
    }
    Err(Error::StepCollapse {
        param: state.s,
        arc_length: arc,
    })
}

fn attempt(
    map: &DevelopedMap,
    path: &LevelPath,
    state: &TrackState,
    s_new: f64,
    anchor: Option<Anchor>,
    cfg: &TrackConfig,
    tol: &dyn Fn(Complex64) -> f64,
) -> Option<(TrackState, usize, f64)> {
    let w = state.branch.w;
    let h = s_new - state.s;
    let cap = cfg.max_dw.min(cfg.pole_frac * map.singular_distance(w));
    let gp = map.gprime_branch(&state.branch);
    let k1 = path.derivative(state.s) / gp;
    let w_pred = w + k1 * h;
    if !((w_pred - w).norm() <= cap) {
        return None;
    }
    let bp_pred = map.continue_to(&state.branch, w_pred);
    let k2 = path.derivative(s_new) / map.gprime_branch(&bp_pred);
    let mut w_new = w + (k1 + k2) * (0.5 * h);
    let target = path.value(s_new);
    for iter in 0..6 {
        if !((w_new - w).norm() <= cap) {
            return None;
        }
        let (dg, bp) = map.integrate_continued(&state.branch, w_new).ok()?;
        // Outside the anchor's reach the accumulated value is used.
        let anchored = anchor
            .filter(|a| (w_new - a.pole).norm() < a.radius)
            .and_then(|a| map.integrate_from_pole(a.pole, &bp).ok());
        let (value, tol_here) = match anchored {
            Some(v) => (v, cfg.rel_tol * target.norm()),
            None => (state.value + dg, tol(target)),
        };
        let r = value - target;
        if r.norm() <= tol_here {
            return Some((
                TrackState {
                    branch: bp,
                    value,
                    s: s_new,
                },
                iter,
                r.norm(),
            ));
        }
        w_new -= r / map.gprime_branch(&bp);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::RationalConnection;

    fn c(x: f64, y: f64) -> Complex64 {
        Complex64::new(x, y)
    }

    #[test]
    fn identity_map_tracks_the_target() {
        let map = DevelopedMap::new(RationalConnection::finite(1.0, c(1.0, 1.0)).unwrap());
        let w0 = c(-0.5, 1.0);
        let start = TrackState {
            branch: map.branch_at(w0).unwrap(),
            value: c(0.0, 0.0),
            s: 0.0,
        };
        let path = LevelPath::Segment {
            from: c(0.0, 0.0),
            to: c(1.0, 0.0),
        };
        let t = track_level_curve(&map, &path, start, 1.0, &[], &TrackConfig::default()).unwrap();
        assert_eq!(t.end, TrackEnd::Completed);
        for (&s, &w) in t.s.iter().zip(&t.w) {
            assert!((w - (w0 + s)).norm() < 1e-9);
        }
        assert!((t.arc_length - 1.0).abs() < 1e-9);
    }

    #[test]
    fn stops_near_a_point() {
        let map = DevelopedMap::new(RationalConnection::finite(1.0, c(1.0, 1.0)).unwrap());
        let start = TrackState {
            branch: map.branch_at(c(0.0, 1.0)).unwrap(),
            value: c(-1.0, 0.0),
            s: 0.0,
        };
        // p(u) = −e^{−u}: approach the corner value 0 at w = 1 + i.
        let path = LevelPath::Exponential {
            scale: c(-1.0, 0.0),
            rate: c(-1.0, 0.0),
        };
        let t = track_level_curve(
            &map,
            &path,
            start,
            60.0,
            &[(c(1.0, 1.0), 1e-6)],
            &TrackConfig::default(),
        )
        .unwrap();
        assert_eq!(t.end, TrackEnd::Stopped(0));
        assert!((t.w.last().unwrap() - c(1.0, 1.0)).norm() < 1e-6);
    }

    #[test]
    fn rejects_bad_start() {
        let map = DevelopedMap::new(RationalConnection::finite(1.0, c(1.0, 1.0)).unwrap());
        let start = TrackState {
            branch: map.branch_at(c(0.0, 1.0)).unwrap(),
            value: c(0.3, 0.0),
            s: 0.0,
        };
        let path = LevelPath::Segment {
            from: c(0.0, 0.0),
            to: c(1.0, 0.0),
        };
        assert!(track_level_curve(&map, &path, start, 1.0, &[], &TrackConfig::default()).is_err());
    }
}
