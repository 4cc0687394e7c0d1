//! The explicit connections on the uniformized plane and their developing map.
//!
//! For finite `K` the connection is
//! `ζ_K(z) = β Σ εᵢ/(z − zᵢ)` with `β = log K / 2πi`, signs `ε = (−1, +1, −1, +1)`
//! and prevertices `z₂ = −z̄₁`, `z₃ = −z₁`, `z₄ = z̄₁`. The limit connection is
//! `ζ_∞(z) = −τ/(z − x₀)² + τ/(z + x₀)²`.
//!
//! The developing map `g` solves `g″/g′ = ζ` with `g(w) = w + O(1/w)`. Its
//! derivative is `g′ = ∏ (w − zᵢ)^{εᵢβ}` (finite `K`) or
//! `g′ = exp(τ/(w − x₀) − τ/(w + x₀))` (limit). For finite `K`, `g′` is
//! single-valued off the two vertical slits `[z₄, z₁]` and `[z₃, z₂]`; `g`
//! itself additionally jumps across the real segment joining the slits, so
//! values of `g` are taken on the plane cut along that H-shaped set.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadConfig};

/// Signs of the simple poles, in counter-clockwise prevertex order.
pub const SIGNS: [f64; 4] = [-1.0, 1.0, -1.0, 1.0];

const TAIL_TERMS: usize = 64;

/// Length of the exponentially mapped tail near a prevertex endpoint.
const ENDPOINT_SPAN: f64 = 46.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form")]
pub enum RationalConnection {
    FiniteK { k: f64, z1: Complex64 },
    Limit { x0: f64, tau: f64 },
}

fn pole_match(z: Complex64, pole: Complex64) -> bool {
    (z - pole).norm() <= 1e-12 * (1.0 + pole.norm())
}

/// The four prevertices `z₁, −z̄₁, −z₁, z̄₁`.
pub fn prevertices(z1: Complex64) -> [Complex64; 4] {
    [z1, -z1.conj(), -z1, z1.conj()]
}

impl RationalConnection {
    pub fn finite(k: f64, z1: Complex64) -> Result<Self> {
        if !(k >= 1.0 && k.is_finite()) {
            return Err(Error::InvalidAspect(k));
        }
        if !(z1.re > 0.0 && z1.im > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "prevertex z1 = {z1} must lie in the open first quadrant"
            )));
        }
        Ok(Self::FiniteK { k, z1 })
    }

    pub fn limit(x0: f64, tau: f64) -> Result<Self> {
        if !(x0 > 0.0 && tau > 0.0 && x0.is_finite() && tau.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "limit connection needs x0 > 0 and tau > 0, got x0 = {x0}, tau = {tau}"
            )));
        }
        Ok(Self::Limit { x0, tau })
    }

    /// `β = log K / 2πi`; zero for the limit form.
    pub fn beta(&self) -> Complex64 {
        match *self {
            Self::FiniteK { k, .. } => Complex64::new(0.0, -k.ln() / (2.0 * PI)),
            Self::Limit { .. } => Complex64::new(0.0, 0.0),
        }
    }

    pub fn poles(&self) -> Vec<Complex64> {
        match *self {
            Self::FiniteK { z1, .. } => prevertices(z1).to_vec(),
            Self::Limit { x0, .. } => vec![Complex64::new(x0, 0.0), Complex64::new(-x0, 0.0)],
        }
    }

    /// Largest pole modulus.
    pub fn radius(&self) -> f64 {
        match *self {
            Self::FiniteK { z1, .. } => z1.norm(),
            Self::Limit { x0, .. } => x0,
        }
    }

    pub fn zeta(&self, z: Complex64) -> Result<Complex64> {
        if self.poles().iter().any(|&p| pole_match(z, p)) {
            return Err(Error::AtPole(z));
        }
        Ok(match *self {
            Self::FiniteK { z1, .. } => {
                let s: Complex64 = prevertices(z1).iter().zip(SIGNS).map(|(&zi, e)| e / (z - zi)).sum();
                self.beta() * s
            }
            Self::Limit { x0, tau } => {
                let a = z - x0;
                let b = z + x0;
                -tau / (a * a) + tau / (b * b)
            }
        })
    }

    pub fn residue_at(&self, pole: Complex64) -> Result<Complex64> {
        match *self {
            Self::FiniteK { z1, .. } => prevertices(z1)
                .iter()
                .zip(SIGNS)
                .find(|(&zi, _)| pole_match(pole, zi))
                .map(|(_, e)| self.beta() * e)
                .ok_or(Error::NotAPole(pole)),
            Self::Limit { .. } => {
                if self.poles().iter().any(|&p| pole_match(pole, p)) {
                    Ok(Complex64::new(0.0, 0.0))
                } else {
                    Err(Error::NotAPole(pole))
                }
            }
        }
    }

    /// `μₙ = Σ εᵢ zᵢⁿ`; odd moments vanish by symmetry.
    pub fn moment(&self, n: i32) -> Complex64 {
        match *self {
            Self::FiniteK { z1, .. } => prevertices(z1).iter().zip(SIGNS).map(|(&zi, e)| e * zi.powi(n)).sum(),
            Self::Limit { .. } => Complex64::new(0.0, 0.0),
        }
    }

    /// Coefficients `aₙ` of `log g′(w) = Σ_{n≥1} aₙ w⁻ⁿ` at infinity.
    fn log_gprime_coefficients(&self, terms: usize) -> Vec<Complex64> {
        let mut a = vec![Complex64::new(0.0, 0.0); terms + 1];
        match *self {
            Self::FiniteK { .. } => {
                let beta = self.beta();
                for (n, an) in a.iter_mut().enumerate().skip(1) {
                    *an = -beta * self.moment(n as i32) / n as f64;
                }
            }
            Self::Limit { x0, tau } => {
                for (n, an) in a.iter_mut().enumerate().skip(1) {
                    if n % 2 == 0 {
                        *an = Complex64::new(2.0 * tau * x0.powi(n as i32 - 1), 0.0);
                    }
                }
            }
        }
        a
    }
}

/// Which side of the real axis a path to an evaluation point comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Above,
    Below,
}

/// Point on a continuation path together with continued logarithms
/// `log(w − zᵢ)` of the four prevertex factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchPoint {
    pub w: Complex64,
    logs: [Complex64; 4],
}

impl BranchPoint {
    pub fn logs(&self) -> &[Complex64; 4] {
        &self.logs
    }
}

/// Argument in `(−π/2, 3π/2]`: the cut runs straight down from the origin.
fn arg_cut_down(v: Complex64) -> f64 {
    let a = v.arg();
    if a <= -FRAC_PI_2 {
        a + 2.0 * PI
    } else {
        a
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DevelopedMap {
    connection: RationalConnection,
    tail_radius: f64,
    tail: Vec<Complex64>,
    quad: QuadConfig,
    clearance: f64,
}

impl DevelopedMap {
    pub fn new(connection: RationalConnection) -> Self {
        let r = connection.radius();
        let clearance = match connection {
            RationalConnection::Limit { x0, .. } => 1e-3 * x0,
            RationalConnection::FiniteK { .. } => 0.0,
        };
        let mut map = Self {
            connection,
            tail_radius: 10.0 * (1.0 + r),
            tail: Vec::new(),
            quad: QuadConfig::default(),
            clearance,
        };
        map.tail = map.tail_coefficients();
        map
    }

    pub fn with_quad(mut self, quad: QuadConfig) -> Self {
        self.quad = quad;
        self
    }

    pub fn with_tail_radius(mut self, radius: f64) -> Result<Self> {
        if !(radius > 2.0 * self.connection.radius()) {
            return Err(Error::InvalidArgument(format!(
                "tail radius {radius} must exceed twice the pole radius"
            )));
        }
        self.tail_radius = radius;
        Ok(self)
    }

    /// Minimum distance to the essential singularities below which the limit
    /// form refuses to evaluate.
    pub fn with_clearance(mut self, clearance: f64) -> Self {
        self.clearance = clearance;
        self
    }

    pub fn connection(&self) -> &RationalConnection {
        &self.connection
    }

    pub fn tail_radius(&self) -> f64 {
        self.tail_radius
    }

    pub fn quad(&self) -> &QuadConfig {
        &self.quad
    }

    pub fn clearance(&self) -> f64 {
        self.clearance
    }

    /// Coefficients `cₙ` (index `n`) of `g′(w) − 1 = Σ_{n≥2} cₙ w⁻ⁿ`.
    fn tail_coefficients(&self) -> Vec<Complex64> {
        let a = self.connection.log_gprime_coefficients(TAIL_TERMS);
        let mut b = vec![Complex64::new(0.0, 0.0); TAIL_TERMS + 1];
        b[0] = Complex64::new(1.0, 0.0);
        for n in 1..=TAIL_TERMS {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 1..=n {
                s += a[k] * b[n - k] * k as f64;
            }
            b[n] = s / n as f64;
        }
        b[0] = Complex64::new(0.0, 0.0);
        b
    }

    /// Second-order tail coefficient of `g′ − 1`, equal to `−β μ₂ / 2` for
    /// finite `K`.
    pub fn tail_coefficient(&self, n: usize) -> Complex64 {
        self.tail.get(n).copied().unwrap_or_default()
    }

    /// `g(w) = w − Σ cₙ w^{1−n}/(n − 1)`, valid for `|w| ≥ R_tail`.
    pub fn tail_value(&self, w: Complex64) -> Complex64 {
        let inv = 1.0 / w;
        let mut p = inv; // w^{1-n} for n = 2
        let mut s = Complex64::new(0.0, 0.0);
        for n in 2..=TAIL_TERMS {
            s += self.tail[n] * p / (n - 1) as f64;
            p *= inv;
        }
        w - s
    }

    pub fn tail_gprime(&self, w: Complex64) -> Complex64 {
        let inv = 1.0 / w;
        let mut p = inv * inv;
        let mut s = Complex64::new(1.0, 0.0);
        for n in 2..=TAIL_TERMS {
            s += self.tail[n] * p;
            p *= inv;
        }
        s
    }

    fn check_point(&self, w: Complex64) -> Result<()> {
        let bad = match self.connection {
            RationalConnection::FiniteK { .. } => self.connection.poles().iter().any(|&p| pole_match(w, p)),
            RationalConnection::Limit { x0, .. } => {
                (w - x0).norm() <= self.clearance.max(1e-300) || (w + x0).norm() <= self.clearance.max(1e-300)
            }
        };
        if bad {
            Err(Error::AtPole(w))
        } else {
            Ok(())
        }
    }

    /// Distance from `w` to the nearest singular point of `g′`.
    pub fn singular_distance(&self, w: Complex64) -> f64 {
        self.connection
            .poles()
            .iter()
            .map(|&p| (w - p).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Branch point with the logarithms of the branch that is single-valued
    /// off the slits.
    pub fn branch_at(&self, w: Complex64) -> Result<BranchPoint> {
        self.check_point(w)?;
        let mut logs = [Complex64::new(0.0, 0.0); 4];
        if let RationalConnection::FiniteK { z1, .. } = self.connection {
            for (l, zi) in logs.iter_mut().zip(prevertices(z1)) {
                let v = w - zi;
                *l = Complex64::new(v.norm().ln(), arg_cut_down(v));
            }
        }
        Ok(BranchPoint { w, logs })
    }

    /// Analytic continuation of a branch point along the straight segment to `to`.
    pub fn continue_to(&self, from: &BranchPoint, to: Complex64) -> BranchPoint {
        let mut logs = from.logs;
        if let RationalConnection::FiniteK { z1, .. } = self.connection {
            for (l, zi) in logs.iter_mut().zip(prevertices(z1)) {
                *l += ((to - zi) / (from.w - zi)).ln();
            }
        }
        BranchPoint { w: to, logs }
    }

    /// `g′` at a branch point (continued branch).
    pub fn gprime_branch(&self, p: &BranchPoint) -> Complex64 {
        match self.connection {
            RationalConnection::FiniteK { .. } => {
                let beta = self.connection.beta();
                let s: Complex64 = p.logs.iter().zip(SIGNS).map(|(&l, e)| l * e).sum();
                (beta * s).exp()
            }
            RationalConnection::Limit { x0, tau } => (tau / (p.w - x0) - tau / (p.w + x0)).exp(),
        }
    }

    /// `g′(w)` on the branch that is single-valued off the slits and equals 1
    /// at infinity.
    pub fn gprime(&self, w: Complex64) -> Result<Complex64> {
        Ok(self.gprime_unchecked(w)).and_then(|v| self.check_point(w).map(|_| v))
    }

    fn gprime_unchecked(&self, w: Complex64) -> Complex64 {
        self.gprime_offset(w, Complex64::new(0.0, 0.0))
    }

    /// `g′(base + delta)`, with each factor formed as `(base − zᵢ) + delta` so
    /// that a tiny `delta` next to a prevertex `base` keeps full precision.
    fn gprime_offset(&self, base: Complex64, delta: Complex64) -> Complex64 {
        match self.connection {
            RationalConnection::FiniteK { z1, .. } => {
                let beta = self.connection.beta();
                let s: Complex64 = prevertices(z1)
                    .iter()
                    .zip(SIGNS)
                    .map(|(&zi, e)| {
                        let v = (base - zi) + delta;
                        Complex64::new(v.norm().ln(), arg_cut_down(v)) * e
                    })
                    .sum();
                (beta * s).exp()
            }
            RationalConnection::Limit { x0, tau } => {
                let w = base + delta;
                (tau / (w - x0) - tau / (w + x0)).exp()
            }
        }
    }

    /// Whether the closed segment `a → b` meets a slit anywhere other than at
    /// a shared endpoint that is itself a prevertex.
    pub fn crosses_slit(&self, a: Complex64, b: Complex64) -> bool {
        // For K = 1 the connection vanishes and nothing is cut.
        let RationalConnection::FiniteK { k, z1 } = self.connection else {
            return false;
        };
        if k == 1.0 {
            return false;
        }
        slit_pairs(z1).iter().any(|&(lo, hi)| segment_meets_slit(a, b, lo, hi))
    }

    /// Whether the segment meets the cut along which `g` itself jumps: the
    /// slits plus the real segment between them (finite `K`), or `[−x₀, x₀]`.
    pub fn crosses_value_cut(&self, a: Complex64, b: Complex64) -> bool {
        let half = match self.connection {
            RationalConnection::FiniteK { z1, .. } => z1.re,
            RationalConnection::Limit { x0, .. } => x0,
        };
        self.crosses_slit(a, b) || crosses_real_segment(a, b, half)
    }

    fn prevertex_index(&self, w: Complex64) -> Option<Complex64> {
        match self.connection {
            RationalConnection::FiniteK { z1, .. } => prevertices(z1).into_iter().find(|&p| pole_match(w, p)),
            RationalConnection::Limit { .. } => None,
        }
    }

    /// `∫ g′` along the straight segment `a → b` on the single-valued
    /// branch off the slits. Either endpoint may be a prevertex.
    pub fn integrate_segment(&self, a: Complex64, b: Complex64) -> Result<Complex64> {
        if a == b {
            return Ok(Complex64::new(0.0, 0.0));
        }
        if self.prevertex_index(a).is_some() {
            return self.integrate_segment(b, a).map(|v| -v);
        }
        self.check_point(a)?;
        let d = b - a;
        if let Some(zj) = self.prevertex_index(b) {
            let others = self
                .connection
                .poles()
                .into_iter()
                .filter(|&p| !pole_match(p, zj))
                .map(|p| (p - zj).norm())
                .fold(f64::INFINITY, f64::min);
            let rho = 0.5 * others;
            let sigma = (rho / d.norm()).min(1.0);
            let m = zj - d * sigma;
            let head = if sigma < 1.0 {
                self.integrate_regular(a, m)?
            } else {
                Complex64::new(0.0, 0.0)
            };
            let off = m - zj;
            let f = |s: f64| {
                let e = (-s).exp();
                self.gprime_offset(zj, off * e) * (-off * e)
            };
            let tail = integrate(f, 0.0, ENDPOINT_SPAN, &self.quad)?.value;
            return Ok(head + tail);
        }
        self.check_point(b)?;
        self.integrate_regular(a, b)
    }

    fn integrate_regular(&self, a: Complex64, b: Complex64) -> Result<Complex64> {
        let d = b - a;
        let f = |s: f64| self.gprime_unchecked(a + d * s) * d;
        Ok(integrate(f, 0.0, 1.0, &self.quad)?.value)
    }

    /// `∫ g′` along `from.w → to` with the branch continued from `from`.
    /// Returns the integral and the continued branch point at `to`.
    pub fn integrate_continued(&self, from: &BranchPoint, to: Complex64) -> Result<(Complex64, BranchPoint)> {
        self.check_point(to)?;
        let d = to - from.w;
        let f = |s: f64| {
            let p = self.continue_to(from, from.w + d * s);
            self.gprime_branch(&p) * d
        };
        let v = integrate(f, 0.0, 1.0, &self.quad)?.value;
        Ok((v, self.continue_to(from, to)))
    }

    /// `g(p.w) − g(pole)` on the branch of `p`, integrating along the ray from
    /// `pole`. Accurate relative to the result even when it is far below the
    /// size of `g`. For the limit form, `g(pole)` is the limit inside the
    /// sector where `g′` decays, and `p.w` must lie in that sector.
    pub fn integrate_from_pole(&self, pole: Complex64, p: &BranchPoint) -> Result<Complex64> {
        let quad = QuadConfig {
            abs_tol: 0.0,
            ..self.quad
        };
        let z1 = match self.connection {
            RationalConnection::FiniteK { z1, .. } => z1,
            RationalConnection::Limit { x0, tau } => {
                let sign = if pole_match(pole, Complex64::new(x0, 0.0)) {
                    1.0
                } else if pole_match(pole, Complex64::new(-x0, 0.0)) {
                    -1.0
                } else {
                    return Err(Error::NotAPole(pole));
                };
                let d = p.w - sign * x0;
                if !(sign * d.re < 0.0) {
                    return Err(Error::CrossesCut { from: pole, to: p.w });
                }
                let f = |s: f64| {
                    let e = (-s).exp();
                    let xi = d * e;
                    let other = xi + 2.0 * sign * x0;
                    let lg = sign * (tau / xi - tau / other);
                    lg.exp() * xi
                };
                return Ok(integrate(f, 0.0, ENDPOINT_SPAN, &quad)?.value);
            }
        };
        let zs = prevertices(z1);
        let j = zs
            .iter()
            .position(|&z| pole_match(pole, z))
            .ok_or(Error::NotAPole(pole))?;
        let d = p.w - zs[j];
        let beta = self.connection.beta();
        let f = |s: f64| {
            let e = (-s).exp();
            let mut sum = Complex64::new(0.0, 0.0);
            for (i, (&zi, sign)) in zs.iter().zip(SIGNS).enumerate() {
                let l = if i == j {
                    p.logs[i] - s
                } else {
                    p.logs[i] + ((zs[j] - zi + d * e) / (p.w - zi)).ln()
                };
                sum += l * sign;
            }
            (beta * sum).exp() * d * e
        };
        Ok(integrate(f, 0.0, ENDPOINT_SPAN, &quad)?.value)
    }

    /// Start of the vertical anchor path for an evaluation at `w`.
    fn anchor_for(&self, w: Complex64, side: Side) -> Complex64 {
        let r = self.tail_radius;
        if w.norm() >= r {
            return w;
        }
        let h = (r * r - w.re * w.re).max(0.0).sqrt();
        match side {
            Side::Above => Complex64::new(w.re, h.max(w.im)),
            Side::Below => Complex64::new(w.re, (-h).min(w.im)),
        }
    }

    /// `g(w)` on the plane cut along the value cut, approached along a
    /// vertical ray from `side`. Prevertices are allowed as endpoints.
    pub fn value(&self, w: Complex64, side: Side) -> Result<Complex64> {
        let start = self.anchor_for(w, side);
        if start == w {
            return Ok(self.tail_value(w));
        }
        let through_cut = match side {
            Side::Above => w.im < 0.0,
            Side::Below => w.im > 0.0,
        };
        let half = match self.connection {
            RationalConnection::FiniteK { z1, .. } => z1.re,
            RationalConnection::Limit { x0, .. } => x0,
        };
        let on_prevertex_top = self
            .prevertex_index(w)
            .map(|p| match side {
                Side::Above => p.im > 0.0,
                Side::Below => p.im < 0.0,
            })
            .unwrap_or(false);
        let hits_slit = !on_prevertex_top && self.crosses_slit(start, w);
        if (through_cut && w.re.abs() <= half) || hits_slit {
            return Err(Error::CrossesCut { from: start, to: w });
        }
        Ok(self.tail_value(start) + self.integrate_segment(start, w)?)
    }

    /// `g′` at `w`, with the branch fixed by continuation along `approach`
    /// from the tail regime. The approach path must not cross a slit.
    pub fn gprime_eval(&self, w: Complex64, approach: &[Complex64]) -> Result<Complex64> {
        let path = self.checked_path(approach, w)?;
        let mut bp = self.branch_at(path[0])?;
        for &v in &path[1..] {
            bp = self.continue_to(&bp, v);
        }
        Ok(self.gprime_branch(&bp))
    }

    fn checked_path(&self, approach: &[Complex64], w: Complex64) -> Result<Vec<Complex64>> {
        let mut path: Vec<Complex64> = approach.to_vec();
        if path.last() != Some(&w) {
            path.push(w);
        }
        let start = path[0];
        if start.norm() < self.tail_radius * (1.0 - 1e-12) {
            return Err(Error::NotAnchored {
                start,
                radius: self.tail_radius,
            });
        }
        for s in path.windows(2) {
            if self.crosses_slit(s[0], s[1]) {
                return Err(Error::CrossesCut { from: s[0], to: s[1] });
            }
        }
        Ok(path)
    }

    /// Values of `g` at the vertices of a polyline that starts in the tail
    /// regime, continued analytically along the polyline.
    pub fn develop(&self, path: &[Complex64]) -> Result<Vec<Complex64>> {
        let Some(&first) = path.first() else {
            return Ok(Vec::new());
        };
        let path = self.checked_path(path, *path.last().unwrap_or(&first))?;
        let mut bp = self.branch_at(path[0])?;
        let mut g = self.tail_value(path[0]);
        let mut out = vec![g];
        for &v in &path[1..] {
            let (dg, next) = self.integrate_continued(&bp, v)?;
            g += dg;
            bp = next;
            out.push(g);
        }
        Ok(out)
    }

    /// `∮ g′ dw` around a closed polyline (the additive monodromy of `g`).
    pub fn loop_integral(&self, contour: &[Complex64]) -> Result<Complex64> {
        let (Some(&first), Some(&last)) = (contour.first(), contour.last()) else {
            return Err(Error::OpenLoop);
        };
        if contour.len() < 3 || (first - last).norm() > 1e-12 * (1.0 + first.norm()) {
            return Err(Error::OpenLoop);
        }
        for s in contour.windows(2) {
            if self.crosses_slit(s[0], s[1]) {
                return Err(Error::CrossesCut { from: s[0], to: s[1] });
            }
        }
        let mut bp = self.branch_at(first)?;
        let mut total = Complex64::new(0.0, 0.0);
        for &v in &contour[1..contour.len() - 1] {
            let (dg, next) = self.integrate_continued(&bp, v)?;
            total += dg;
            bp = next;
        }
        let (dg, _) = self.integrate_continued(&bp, first)?;
        Ok(total + dg)
    }

    /// Ratio `g′(end)/g′(start)` after continuing `g′` around a closed
    /// polyline; slits may be crossed.
    pub fn monodromy_factor(&self, contour: &[Complex64]) -> Result<Complex64> {
        let Some(&first) = contour.first() else {
            return Err(Error::OpenLoop);
        };
        let start = self.branch_at(first)?;
        let mut bp = start;
        for &v in &contour[1..] {
            // Subdivide so each continuation step subtends a small angle.
            let n = 64;
            let a = bp.w;
            for j in 1..=n {
                bp = self.continue_to(&bp, a + (v - a) * (j as f64 / n as f64));
            }
        }
        Ok(self.gprime_branch(&bp) / self.gprime_branch(&start))
    }
}

fn slit_pairs(z1: Complex64) -> [(Complex64, Complex64); 2] {
    let p = prevertices(z1);
    // (lower endpoint, upper endpoint)
    [(p[3], p[0]), (p[2], p[1])]
}

fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

/// Segment `a → b` against the vertical slit `[lo, hi]`. Touching the slit
/// only at a shared endpoint is allowed.
fn segment_meets_slit(a: Complex64, b: Complex64, lo: Complex64, hi: Complex64) -> bool {
    let shared = |p: Complex64| pole_match(p, lo) || pole_match(p, hi);
    if shared(a) || shared(b) {
        // Only the endpoint itself may touch; check the rest by shrinking.
        let (a2, b2) = if shared(a) {
            (a + (b - a) * 1e-9, b)
        } else {
            (a, b + (a - b) * 1e-9)
        };
        if shared(a) && shared(b) {
            return true;
        }
        return segment_meets_slit(a2, b2, lo, hi);
    }
    let d1 = cross(hi - lo, a - lo);
    let d2 = cross(hi - lo, b - lo);
    let d3 = cross(b - a, lo - a);
    let d4 = cross(b - a, hi - a);
    if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
        return true;
    }
    let on = |p: Complex64, q: Complex64, r: Complex64, d: f64| {
        d == 0.0 && r.re >= p.re.min(q.re) && r.re <= p.re.max(q.re) && r.im >= p.im.min(q.im) && r.im <= p.im.max(q.im)
    };
    on(lo, hi, a, d1) || on(lo, hi, b, d2) || on(a, b, lo, d3) || on(a, b, hi, d4)
}

fn crosses_real_segment(a: Complex64, b: Complex64, half: f64) -> bool {
    if (a.im > 0.0 && b.im > 0.0) || (a.im < 0.0 && b.im < 0.0) {
        return false;
    }
    if a.im == b.im {
        return a.im == 0.0 && a.re.max(b.re) >= -half && a.re.min(b.re) <= half;
    }
    let t = a.im / (a.im - b.im);
    let x = a.re + t * (b.re - a.re);
    x.abs() <= half && t > 0.0 && t < 1.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample_map(k: f64) -> DevelopedMap {
        DevelopedMap::new(RationalConnection::finite(k, c(0.9, 0.7)).unwrap())
    }

    #[test]
    fn zeta_vanishes_at_origin_and_for_k_one() {
        let conn = RationalConnection::finite(3.0, c(0.8, 0.6)).unwrap();
        assert!(conn.zeta(c(0.0, 0.0)).unwrap().norm() < 1e-15);
        let flat = RationalConnection::finite(1.0, c(0.8, 0.6)).unwrap();
        for z in [c(0.3, -2.0), c(5.0, 1.0), c(-0.1, 0.2)] {
            assert_eq!(flat.zeta(z).unwrap().norm(), 0.0);
        }
    }

    #[test]
    fn zeta_rejects_pole() {
        let conn = RationalConnection::finite(3.0, c(0.8, 0.6)).unwrap();
        assert!(matches!(conn.zeta(c(-0.8, 0.6)), Err(Error::AtPole(_))));
    }

    #[test]
    fn residues_follow_sign_pattern() {
        let k = 7.0;
        let conn = RationalConnection::finite(k, c(0.8, 0.6)).unwrap();
        let beta = Complex64::new(0.0, -k.ln() / (2.0 * PI));
        assert_abs_diff_eq!((conn.residue_at(c(0.8, 0.6)).unwrap() + beta).norm(), 0.0);
        let sum: Complex64 = conn.poles().iter().map(|&p| conn.residue_at(p).unwrap()).sum();
        assert!(sum.norm() < 1e-15);
        assert!(conn.residue_at(c(0.1, 0.1)).is_err());
        let lim = RationalConnection::limit(0.7, 0.3).unwrap();
        assert_eq!(lim.residue_at(c(0.7, 0.0)).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn second_moment_matches_closed_form() {
        let z1 = c(0.8, 0.6);
        let conn = RationalConnection::finite(5.0, z1).unwrap();
        let mu2 = conn.moment(2);
        assert!((mu2 - c(0.0, -8.0 * 0.8 * 0.6)).norm() < 1e-14);
        assert!(conn.moment(1).norm() < 1e-15);
        assert!(conn.moment(3).norm() < 1e-14);
        let map = DevelopedMap::new(conn);
        let c2 = map.tail_coefficient(2);
        assert!((c2 + conn.beta() * mu2 / 2.0).norm() < 1e-15);
    }

    #[test]
    fn gprime_tends_to_one_at_infinity() {
        let map = sample_map(4.0);
        for w in [c(1e6, 0.0), c(0.0, -1e6), c(-7e5, 7e5)] {
            assert!((map.gprime(w).unwrap() - 1.0).norm() < 1e-10);
        }
    }

    #[test]
    fn tail_series_matches_pointwise_gprime() {
        let map = sample_map(50.0);
        let w = c(map.tail_radius() * 0.6, map.tail_radius() * 0.8);
        assert!((map.tail_gprime(w) - map.gprime(w).unwrap()).norm() < 1e-14);
    }

    #[test]
    fn branch_is_single_valued_around_a_pair() {
        let map = sample_map(2.0);
        // rectangle enclosing z1 and z4 only
        let lp = [
            c(2.0, 0.0),
            c(2.0, 1.5),
            c(0.3, 1.5),
            c(0.3, -1.5),
            c(2.0, -1.5),
            c(2.0, 0.0),
        ];
        let f = map.monodromy_factor(&lp).unwrap();
        assert!((f - 1.0).norm() < 1e-12);
    }

    #[test]
    fn monodromy_around_single_prevertex_is_one_over_k() {
        let k = 2.0;
        let map = sample_map(k);
        let z1 = c(0.9, 0.7);
        let lp: Vec<Complex64> = (0..=8)
            .map(|j| z1 + c(0.3, 0.0) * Complex64::from_polar(1.0, j as f64 * PI / 4.0))
            .collect();
        let f = map.monodromy_factor(&lp).unwrap();
        assert!((f - 1.0 / k).norm() < 1e-12);
    }

    #[test]
    fn slit_crossing_detected() {
        let map = sample_map(2.0);
        assert!(map.crosses_slit(c(0.5, 0.0), c(1.5, 0.0)));
        assert!(!map.crosses_slit(c(0.5, 1.0), c(1.5, 1.0)));
        // Endpoint at the prevertex from above is fine.
        assert!(!map.crosses_slit(c(0.9, 5.0), c(0.9, 0.7)));
        assert!(map.crosses_slit(c(0.9, 5.0), c(0.9, 0.0)));
        assert!(map.value(c(0.0, -0.1), Side::Above).is_err());
    }

    #[test]
    fn identity_map_for_k_one() {
        let map = DevelopedMap::new(RationalConnection::finite(1.0, c(1.0, 1.0)).unwrap());
        for w in [c(0.3, 0.2), c(1.0, 1.0), c(-2.0, 0.5)] {
            let g = map.value(w, Side::Above).unwrap();
            assert!((g - w).norm() < 1e-13, "{g} vs {w}");
        }
    }

    #[test]
    fn real_symmetry_of_values() {
        let map = sample_map(6.0);
        for w in [c(0.4, 0.5), c(1.7, 0.2), c(-0.3, 2.0)] {
            let up = map.value(w, Side::Above).unwrap();
            let down = map.value(w.conj(), Side::Below).unwrap();
            assert!((up - down.conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn limit_gprime_has_unit_modulus_on_imaginary_axis_far_away() {
        let map = DevelopedMap::new(RationalConnection::limit(0.8, 0.4).unwrap());
        let g = map.gprime(c(0.0, 1e5)).unwrap();
        assert!((g - 1.0).norm() < 1e-9);
        assert!(map.gprime(c(0.8 + 1e-4, 0.0)).is_err());
    }
}
