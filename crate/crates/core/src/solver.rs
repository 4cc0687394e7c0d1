//! The accessory-parameter problem: find the prevertex `z₁` for which the
//! developing map sends it to the corner `1 + i`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::connection::{DevelopedMap, RationalConnection, Side};
use crate::error::{Error, Result};
use crate::quadrature::QuadConfig;

const CORNER: Complex64 = Complex64 { re: 1.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    /// Relative step for the finite-difference Jacobian.
    pub fd_step: f64,
    pub quad: QuadConfig,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 60,
            fd_step: 1e-6,
            quad: QuadConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub k: f64,
    pub z1: Complex64,
    pub residual: f64,
    pub iterations: usize,
    /// Condition number of the last finite-difference Jacobian.
    pub condition: f64,
}

impl Solution {
    pub fn connection(&self) -> RationalConnection {
        RationalConnection::FiniteK { k: self.k, z1: self.z1 }
    }

    pub fn map(&self, quad: QuadConfig) -> DevelopedMap {
        DevelopedMap::new(self.connection()).with_quad(quad)
    }
}

/// `g(z₁) − (1 + i)` for the connection with the given `K` and `z₁`.
pub fn corner_residual(k: f64, z1: Complex64, quad: &QuadConfig) -> Result<Complex64> {
    let map = DevelopedMap::new(RationalConnection::finite(k, z1)?).with_quad(*quad);
    Ok(map.value(z1, Side::Above)? - CORNER)
}

fn in_quadrant(z: Complex64) -> bool {
    z.re > 0.0 && z.im > 0.0
}

/// Damped Newton iteration on `z₁ ↦ g(z₁) − (1 + i)` with a central
/// finite-difference Jacobian (the residual is not holomorphic in `z₁`).
pub fn solve_prevertex(k: f64, initial: Complex64, cfg: &SolverConfig) -> Result<Solution> {
    if !(k >= 1.0 && k.is_finite()) {
        return Err(Error::InvalidAspect(k));
    }
    if !in_quadrant(initial) {
        return Err(Error::LeftQuadrant(initial));
    }
    let f = |z: Complex64| corner_residual(k, z, &cfg.quad);
    let mut z = initial;
    let mut r = f(z)?;
    let mut best = (r.norm(), z);
    let mut condition = 1.0;
    for it in 0..cfg.max_iter {
        if r.norm() <= cfg.tol {
            return Ok(Solution {
                k,
                z1: z,
                residual: r.norm(),
                iterations: it,
                condition,
            });
        }
        let h = cfg.fd_step * z.norm().max(1e-3);
        let hx = Complex64::new(h.min(0.5 * z.re), 0.0);
        let hy = Complex64::new(0.0, h.min(0.5 * z.im));
        let dx = (f(z + hx)? - f(z - hx)?) / (2.0 * hx.re);
        let dy = (f(z + hy)? - f(z - hy)?) / (2.0 * hy.im);
        // Solve [dx dy] (a, b)^T = -r over the reals.
        let det = dx.re * dy.im - dx.im * dy.re;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        condition = condition_2x2([dx.re, dy.re, dx.im, dy.im]);
        let a = (-r.re * dy.im + r.im * dy.re) / det;
        let b = (-dx.re * r.im + dx.im * r.re) / det;
        let step = Complex64::new(a, b);
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand = z + step * lambda;
            if in_quadrant(cand) {
                if let Ok(rc) = f(cand) {
                    if rc.norm() < r.norm() {
                        z = cand;
                        r = rc;
                        accepted = true;
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        if r.norm() < best.0 {
            best = (r.norm(), z);
        }
        if !accepted {
            return if in_quadrant(z + step) || r.norm() > cfg.tol {
                Err(Error::NoConvergence {
                    iterations: it + 1,
                    residual: best.0,
                    best: best.1,
                })
            } else {
                Err(Error::LeftQuadrant(z + step))
            };
        }
    }
    if r.norm() <= cfg.tol {
        return Ok(Solution {
            k,
            z1: z,
            residual: r.norm(),
            iterations: cfg.max_iter,
            condition,
        });
    }
    Err(Error::NoConvergence {
        iterations: cfg.max_iter,
        residual: best.0,
        best: best.1,
    })
}

fn condition_2x2([a, b, c, d]: [f64; 4]) -> f64 {
    let t = a * a + b * b + c * c + d * d;
    let det = (a * d - b * c).abs();
    let disc = (t * t - 4.0 * det * det).max(0.0).sqrt();
    let s1 = (0.5 * (t + disc)).sqrt();
    let s2 = det / s1;
    if s2 > 0.0 {
        s1 / s2
    } else {
        f64::INFINITY
    }
}

/// Solution at `K = 1`, where the map is the identity.
pub fn trivial_solution() -> Solution {
    Solution {
        k: 1.0,
        z1: CORNER,
        residual: 0.0,
        iterations: 0,
        condition: 1.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepFailure {
    pub k: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub rows: Vec<Solution>,
    pub max_abs_z1: f64,
    /// Grid values where `Im z₁` failed to decrease.
    pub non_monotone: Vec<f64>,
    /// Set when the sweep stopped early; `rows` holds the partial table.
    pub failure: Option<SweepFailure>,
}

impl Sweep {
    pub fn completed(&self) -> bool {
        self.failure.is_none()
    }

    /// Columns `K, Re z1, Im z1, residual, iterations`.
    pub fn to_table(&self) -> String {
        let mut s = String::from("K,re_z1,im_z1,residual,iterations\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{:.17e},{:.17e},{:.17e},{:.6e},{}\n",
                r.k, r.z1.re, r.z1.im, r.residual, r.iterations
            ));
        }
        s
    }
}

/// Initial guess at `k` from the last one or two solutions, linear in `log K`
/// for `Re z₁` and `log Im z₁`.
fn warm_start(rows: &[Solution], k: f64) -> Complex64 {
    match rows {
        [.., a, b] if b.k > a.k => {
            let t = (k.ln() - b.k.ln()) / (b.k.ln() - a.k.ln());
            let re = b.z1.re + t * (b.z1.re - a.z1.re);
            let im = (b.z1.im.ln() + t * (b.z1.im.ln() - a.z1.im.ln())).exp();
            let guess = Complex64::new(re, im);
            if in_quadrant(guess) && guess.norm() < 4.0 * b.z1.norm() {
                guess
            } else {
                b.z1
            }
        }
        [.., b] => b.z1,
        [] => CORNER,
    }
}

/// Solves at `k`, first from the extrapolated guess and then from the last
/// solution itself.
fn solve_warm(rows: &[Solution], k: f64, cfg: &SolverConfig) -> Result<Solution> {
    let guess = warm_start(rows, k);
    match solve_prevertex(k, guess, cfg) {
        Ok(s) => Ok(s),
        Err(e) => match rows.last() {
            Some(last) if last.z1 != guess => solve_prevertex(k, last.z1, cfg),
            _ => Err(e),
        },
    }
}

/// Warm-started solves along an increasing grid. A failing `K` is retried
/// once after solving at the geometric midpoint of the step; a second
/// failure ends the sweep with the partial table.
pub fn continuation_sweep(grid: &[f64], seed: Solution, cfg: &SolverConfig) -> Result<Sweep> {
    if grid.is_empty() || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("K grid must be non-empty and increasing".into()));
    }
    if grid[0] < seed.k {
        return Err(Error::InvalidArgument(format!(
            "grid starts at {} below the seed K = {}",
            grid[0], seed.k
        )));
    }
    let mut rows: Vec<Solution> = Vec::new();
    let mut history = vec![seed];
    let mut failure = None;
    for &k in grid {
        if k == seed.k {
            rows.push(seed);
            continue;
        }
        let attempt = solve_warm(&history, k, cfg).or_else(|_| {
            let prev = history.last().map_or(1.0, |s| s.k);
            let mid = (prev.ln() * 0.5 + k.ln() * 0.5).exp();
            let m = solve_warm(&history, mid, cfg)?;
            let mut h = history.clone();
            h.push(m);
            solve_warm(&h, k, cfg)
        });
        match attempt {
            Ok(s) => {
                rows.push(s);
                history.push(s);
            }
            Err(e) => {
                failure = Some(SweepFailure {
                    k,
                    message: e.to_string(),
                });
                break;
            }
        }
    }
    let max_abs_z1 = rows.iter().map(|r| r.z1.norm()).fold(0.0, f64::max);
    let non_monotone = rows
        .windows(2)
        .filter(|w| w[1].z1.im >= w[0].z1.im)
        .map(|w| w[1].k)
        .collect();
    Ok(Sweep {
        rows,
        max_abs_z1,
        non_monotone,
        failure,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    /// Polynomial degree of the extrapolation in `1/log K`.
    pub order: usize,
    /// Largest accepted change of either limit when every other node is dropped.
    pub halving_tol: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            order: 4,
            halving_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    /// `K` values of the interpolation nodes.
    pub nodes: Vec<f64>,
    /// Last Neville correction for `x_inf` and `tau`.
    pub correction: (f64, f64),
    /// Change of `x_inf` and `tau` on the halved grid.
    pub halving: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticFit {
    pub x_inf: f64,
    pub tau: f64,
    pub z_minus: f64,
    pub z_plus: f64,
    pub diagnostics: FitDiagnostics,
}

impl AsymptoticFit {
    pub fn new(x_inf: f64, tau: f64) -> Result<Self> {
        RationalConnection::limit(x_inf, tau)?;
        Ok(Self {
            x_inf,
            tau,
            z_minus: -x_inf,
            z_plus: x_inf,
            diagnostics: FitDiagnostics {
                nodes: Vec::new(),
                correction: (0.0, 0.0),
                halving: (0.0, 0.0),
            },
        })
    }

    pub fn connection(&self) -> RationalConnection {
        RationalConnection::Limit {
            x0: self.x_inf,
            tau: self.tau,
        }
    }
}

/// Value at `h = 0` of the interpolating polynomial through `(h, y)`, and the
/// size of the last correction.
fn neville_at_zero(h: &[f64], y: &[f64]) -> (f64, f64) {
    let mut p = y.to_vec();
    let mut last = 0.0;
    for m in 1..p.len() {
        for i in 0..p.len() - m {
            let next = (h[i + m] * p[i] - h[i] * p[i + 1]) / (h[i + m] - h[i]);
            if i == 0 {
                last = next - p[0];
            }
            p[i] = next;
        }
    }
    (p[0], last.abs())
}

fn extrapolate(rows: &[&Solution], order: usize) -> ((f64, f64), (f64, f64), Vec<f64>) {
    let nodes = &rows[rows.len().saturating_sub(order + 1)..];
    let h: Vec<f64> = nodes.iter().map(|r| 1.0 / r.k.ln()).collect();
    let xs: Vec<f64> = nodes.iter().map(|r| r.z1.re).collect();
    let ts: Vec<f64> = nodes.iter().map(|r| r.k.ln() / PI * r.z1.im).collect();
    let (x, cx) = neville_at_zero(&h, &xs);
    let (t, ct) = neville_at_zero(&h, &ts);
    ((x, t), (cx, ct), nodes.iter().map(|r| r.k).collect())
}

/// Limits of `Re z₁` and `(log K/π) Im z₁` by Richardson extrapolation in
/// `1/log K` over the largest-`K` rows, checked against every other row.
pub fn extract_limit(rows: &[Solution], cfg: &FitConfig) -> Result<AsymptoticFit> {
    let usable: Vec<&Solution> = rows.iter().filter(|r| r.k > 1.0).collect();
    let (Some(first), Some(last)) = (usable.first(), usable.last()) else {
        return Err(Error::InvalidArgument("no rows with K > 1".into()));
    };
    if (last.k / first.k).log10() < 3.0 - 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "table covers K = {} .. {}, less than three decades",
            first.k, last.k
        )));
    }
    if usable.len() < cfg.order + 1 {
        return Err(Error::InvalidArgument(format!(
            "{} rows for an order-{} extrapolation",
            usable.len(),
            cfg.order
        )));
    }
    let ((x, t), correction, nodes) = extrapolate(&usable, cfg.order);
    let halved: Vec<&Solution> = usable.iter().rev().step_by(2).rev().copied().collect();
    let ((xh, th), _, _) = extrapolate(&halved, cfg.order.min(halved.len() - 1));
    let halving = ((x - xh).abs(), (t - th).abs());
    if halving.0 > cfg.halving_tol || halving.1 > cfg.halving_tol {
        return Err(Error::Unstable(format!(
            "grid halving moves x_inf by {:e} and tau by {:e}",
            halving.0, halving.1
        )));
    }
    let mut fit = AsymptoticFit::new(x, t)?;
    fit.diagnostics = FitDiagnostics {
        nodes,
        correction,
        halving,
    };
    Ok(fit)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaEntry {
    pub k: f64,
    pub sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaReport {
    pub entries: Vec<ZetaEntry>,
    pub decreasing: bool,
    pub pass: bool,
}

/// `sup |ζ_K − ζ_∞|` over the compact for every row of the sweep.
pub fn zeta_limit_check(fit: &AsymptoticFit, rows: &[Solution], compact: &[Complex64], tol: f64) -> Result<ZetaReport> {
    if compact.is_empty() {
        return Err(Error::InvalidArgument("empty compact".into()));
    }
    let clearance = 0.05 * fit.x_inf;
    if let Some(z) = compact
        .iter()
        .find(|z| (*z - fit.x_inf).norm() < clearance || (*z + fit.x_inf).norm() < clearance)
    {
        return Err(Error::InvalidArgument(format!(
            "compact point {z} lies in the pole clearance"
        )));
    }
    let limit = fit.connection();
    let mut entries = Vec::with_capacity(rows.len());
    for r in rows {
        let conn = r.connection();
        let mut sup: f64 = 0.0;
        for &z in compact {
            sup = sup.max((conn.zeta(z)? - limit.zeta(z)?).norm());
        }
        entries.push(ZetaEntry { k: r.k, sup });
    }
    let decreasing = entries.windows(2).all(|w| w[1].sup < w[0].sup);
    let pass = decreasing && entries.last().is_some_and(|e| e.sup < tol);
    Ok(ZetaReport {
        entries,
        decreasing,
        pass,
    })
}

/// `∮ g′_∞` around the right limit point on an `n`-gon of radius `x_inf/2`;
/// equals `2πi` times the residue there.
pub fn hole_translation(fit: &AsymptoticFit, n: usize) -> Result<Complex64> {
    let map = DevelopedMap::new(fit.connection());
    let centre = Complex64::new(fit.x_inf, 0.0);
    let contour: Vec<Complex64> = (0..=n)
        .map(|j| centre + Complex64::from_polar(0.5 * fit.x_inf, 2.0 * PI * (j % n) as f64 / n as f64))
        .collect();
    map.loop_integral(&contour)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(k: f64, z1: Complex64) -> Solution {
        Solution {
            k,
            z1,
            residual: 0.0,
            iterations: 0,
            condition: 1.0,
        }
    }

    #[test]
    fn unit_aspect_is_exact() {
        let s = solve_prevertex(1.0, Complex64::new(1.2, 0.7), &SolverConfig::default()).unwrap();
        assert!((s.z1 - CORNER).norm() < 1e-10);
        assert!(s.residual < 1e-10);
        assert!(solve_prevertex(0.5, CORNER, &SolverConfig::default()).is_err());
        assert!(solve_prevertex(2.0, Complex64::new(-1.0, 1.0), &SolverConfig::default()).is_err());
    }

    #[test]
    fn condition_of_diagonal() {
        assert!((condition_2x2([2.0, 0.0, 0.0, 1.0]) - 2.0).abs() < 1e-14);
        assert!((condition_2x2([0.0, 3.0, -3.0, 0.0]) - 1.0).abs() < 1e-14);
        assert_eq!(condition_2x2([1.0, 1.0, 1.0, 1.0]), f64::INFINITY);
    }

    #[test]
    fn neville_is_exact_on_polynomials() {
        let h = [0.5, 0.25, 0.2, 0.1];
        let y: Vec<f64> = h.iter().map(|x| 3.0 - x + 2.0 * x * x * x).collect();
        assert!((neville_at_zero(&h, &y).0 - 3.0).abs() < 1e-13);
    }

    #[test]
    fn synthetic_table_recovers_limits() {
        let (x, tau) = (1.9, 0.35);
        let rows: Vec<Solution> = (1..=12)
            .map(|n| {
                let k = 10f64.powi(n);
                row(k, Complex64::new(x, PI * tau / k.ln()))
            })
            .collect();
        let fit = extract_limit(&rows, &FitConfig::default()).unwrap();
        assert!((fit.x_inf - x).abs() < 1e-8);
        assert!((fit.tau - tau).abs() < 1e-8);
        assert_eq!(fit.z_minus, -fit.z_plus);
        assert!(extract_limit(&rows[..2], &FitConfig::default()).is_err());
    }

    #[test]
    fn unstable_table_is_reported() {
        let rows: Vec<Solution> = (1..=12)
            .map(|n| {
                let k = 10f64.powi(n);
                let wobble = if n % 2 == 0 { 0.1 } else { -0.1 };
                row(k, Complex64::new(1.9 + wobble, 0.1))
            })
            .collect();
        assert!(matches!(
            extract_limit(&rows, &FitConfig::default()),
            Err(Error::Unstable(_))
        ));
    }

    #[test]
    fn warm_start_extrapolates() {
        let rows = [
            row(10.0, Complex64::new(1.6, 0.4)),
            row(100.0, Complex64::new(1.8, 0.2)),
        ];
        let g = warm_start(&rows, 1000.0);
        assert!((g - Complex64::new(2.0, 0.1)).norm() < 1e-12);
        assert_eq!(warm_start(&rows[..1], 1000.0), rows[0].z1);
    }

    #[test]
    fn synthetic_zeta_rate() {
        let fit = AsymptoticFit::new(1.9, 0.35).unwrap();
        let rows: Vec<Solution> = (2..=8)
            .map(|n| {
                let k = 10f64.powi(n);
                row(k, Complex64::new(fit.x_inf, PI * fit.tau / k.ln()))
            })
            .collect();
        let compact: Vec<Complex64> = (0..=40).map(|j| Complex64::new(0.0, -2.0 + 0.1 * j as f64)).collect();
        let rep = zeta_limit_check(&fit, &rows, &compact, 1.0).unwrap();
        assert!(rep.decreasing && rep.pass);
        for e in &rep.entries {
            assert!(e.sup * e.k.ln() < 1.0, "{e:?}");
        }
        let bad = [Complex64::new(1.9, 0.01)];
        assert!(zeta_limit_check(&fit, &rows, &bad, 1.0).is_err());
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        let seed = trivial_solution();
        let cfg = SolverConfig::default();
        assert!(continuation_sweep(&[], seed, &cfg).is_err());
        assert!(continuation_sweep(&[2.0, 2.0], seed, &cfg).is_err());
        let s = continuation_sweep(&[1.0], seed, &cfg).unwrap();
        assert_eq!(s.rows, vec![seed]);
    }
}
