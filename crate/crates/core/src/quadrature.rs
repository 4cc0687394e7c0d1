//! Globally adaptive Gauss–Kronrod (7/15) quadrature for complex-valued
//! integrands of one real variable.

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-13,
            max_intervals: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
    resabs: f64,
}

fn kronrod<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut fv = [Complex64::new(0.0, 0.0); 15];
    fv[14] = f(center);
    for j in 0..7 {
        let dx = half * XGK[j];
        fv[2 * j] = f(center - dx);
        fv[2 * j + 1] = f(center + dx);
    }
    let weight = |j: usize| if j == 14 { WGK[7] } else { WGK[j / 2] };
    let mut k = Complex64::new(0.0, 0.0);
    let mut g = fv[14] * WG[3];
    let mut resabs = 0.0;
    for (j, v) in fv.iter().enumerate() {
        k += v * weight(j);
        resabs += weight(j) * v.norm();
        if j < 14 && (j / 2) % 2 == 1 {
            g += v * WG[j / 4];
        }
    }
    let mean = k * 0.5;
    let resasc: f64 = fv
        .iter()
        .enumerate()
        .map(|(j, v)| weight(j) * (v - mean).norm())
        .sum::<f64>()
        * half.abs();
    let resabs = resabs * half.abs();
    let value = k * half;
    // QUADPACK-style error estimate with a round-off floor.
    let mut error = ((k - g) * half).norm();
    if resasc > 0.0 && error > 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    Panel {
        a,
        b,
        value,
        error,
        resabs,
    }
}

/// Integrates `f` over `[a, b]`, bisecting the panel with the largest error
/// estimate until the total estimate meets `max(abs_tol, rel_tol * |I|)`.
pub fn integrate<F>(mut f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<QuadResult>
where
    F: FnMut(f64) -> Complex64,
{
    if a == b {
        return Ok(QuadResult {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            intervals: 0,
        });
    }
    let mut panels = vec![kronrod(&mut f, a, b)];
    loop {
        let value: Complex64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let resabs: f64 = panels.iter().map(|p| p.resabs).sum();
        // Estimates at the round-off level of the integrand are accepted.
        let target = cfg
            .abs_tol
            .max(cfg.rel_tol * value.norm())
            .max(100.0 * f64::EPSILON * resabs);
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(Error::Quadrature {
                a,
                b,
                error: f64::INFINITY,
            });
        }
        if error <= target {
            return Ok(QuadResult {
                value,
                error,
                intervals: panels.len(),
            });
        }
        let (worst, _) = panels.iter().enumerate().fold(
            (0, -1.0),
            |acc, (i, p)| if p.error > acc.1 { (i, p.error) } else { acc },
        );
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        // Panels that can no longer be split in floating point stop refining.
        if panels.len() + 2 > cfg.max_intervals || mid <= p.a.min(p.b) || mid >= p.a.max(p.b) {
            return Err(Error::Quadrature { a: p.a, b: p.b, error });
        }
        panels.push(kronrod(&mut f, p.a, mid));
        panels.push(kronrod(&mut f, mid, p.b));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| Complex64::new(x.powi(5), -x * x), 0.0, 2.0, &QuadConfig::default()).unwrap();
        assert!((r.value - Complex64::new(64.0 / 6.0, -8.0 / 3.0)).norm() < 1e-13);
        assert_eq!(r.intervals, 1);
    }

    #[test]
    fn oscillatory_exponential() {
        let f = |x: f64| Complex64::new(0.0, 20.0 * x).exp();
        let r = integrate(f, 0.0, 1.0, &QuadConfig::default()).unwrap();
        let exact = (Complex64::new(0.0, 20.0).exp() - 1.0) / Complex64::new(0.0, 20.0);
        assert!((r.value - exact).norm() < 1e-13);
    }

    #[test]
    fn reversed_interval_negates() {
        let cfg = QuadConfig::default();
        let f = |x: f64| Complex64::new(x.cos(), x.sin());
        let a = integrate(f, 0.0, 3.0, &cfg).unwrap().value;
        let b = integrate(f, 3.0, 0.0, &cfg).unwrap().value;
        assert!((a + b).norm() < 1e-14);
    }

    #[test]
    fn non_integrable_reports_failure() {
        let cfg = QuadConfig {
            max_intervals: 50,
            ..QuadConfig::default()
        };
        let r = integrate(|x| Complex64::new(1.0 / x, 0.0), 0.0, 1.0, &cfg);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }
}
