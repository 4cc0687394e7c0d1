use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid aspect ratio K = {0} (need 1 <= K, and K finite where a rectangle is required)")]
    InvalidAspect(f64),
    #[error("{0}")]
    InvalidArgument(String),
    #[error("point {coord} is not valid in chart {chart}")]
    InvalidPoint { chart: String, coord: Complex64 },
    #[error("point {coord} of chart {chart} is not in the overlap with {target}")]
    NotInOverlap {
        chart: String,
        target: String,
        coord: Complex64,
    },
    #[error("{0} is not a pole of the connection")]
    NotAPole(Complex64),
    #[error("evaluation point {0} is a pole or lies within the singular clearance")]
    AtPole(Complex64),
    #[error("path segment {from} -> {to} crosses a branch cut")]
    CrossesCut { from: Complex64, to: Complex64 },
    #[error("contour is not closed")]
    OpenLoop,
    #[error("path must start in the tail regime |w| >= {radius}, got {start}")]
    NotAnchored { start: Complex64, radius: f64 },
    #[error("quadrature did not converge on [{a}, {b}] (error estimate {error:e})")]
    Quadrature { a: f64, b: f64, error: f64 },
    #[error("level-curve tracking collapsed at parameter {param} (arc length {arc_length})")]
    StepCollapse { param: f64, arc_length: f64 },
    #[error("solver did not converge in {iterations} iterations (best residual {residual:e} at {best})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        best: Complex64,
    },
    #[error("iterate left the open first quadrant: {0}")]
    LeftQuadrant(Complex64),
    #[error("sweep aborted at K = {k}: {source}")]
    SweepAborted { k: f64, source: Box<Error> },
    #[error("unstable extrapolation: {0}")]
    Unstable(String),
    #[error("empty point cloud")]
    EmptyCloud,
    #[error("parse error: {0}")]
    Parse(String),
}
