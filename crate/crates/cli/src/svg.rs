//! SVG 1.1 output: one path per tracked curve, plane coordinates under a
//! vertical flip.

use std::fmt::Write as _;

use affine_limit::cloud::PointCloud;

pub struct Layer<'a> {
    pub cloud: &'a PointCloud,
    pub stroke: &'a str,
}

pub fn render(layers: &[Layer<'_>], title: &str) -> String {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for z in layers.iter().flat_map(|l| l.cloud.points()) {
        x0 = x0.min(z.re);
        x1 = x1.max(z.re);
        y0 = y0.min(z.im);
        y1 = y1.max(z.im);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (-1.0, 1.0, -1.0, 1.0);
    }
    let pad = 0.05 * (x1 - x0).max(y1 - y0).max(1e-9);
    let (vx, vy, w, h) = (x0 - pad, -y1 - pad, x1 - x0 + 2.0 * pad, y1 - y0 + 2.0 * pad);
    let dot = 0.004 * w.max(h);
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="{vx:.6} {vy:.6} {w:.6} {h:.6}" width="800" height="{:.0}">"#,
        800.0 * h / w
    );
    let _ = writeln!(s, "<title>{title}</title>");
    let _ = writeln!(s, r#"<g transform="scale(1,-1)" fill="none" stroke-linejoin="round">"#);
    for layer in layers {
        for curve in &layer.cloud.curves {
            let mut d = String::new();
            for (i, z) in curve.iter().enumerate() {
                let _ = write!(d, "{}{:.6},{:.6}", if i == 0 { "M" } else { " L" }, z.re, z.im);
            }
            let _ = writeln!(
                s,
                r#"<path d="{d}" stroke="{}" stroke-width="1" vector-effect="non-scaling-stroke"/>"#,
                layer.stroke
            );
        }
        for z in &layer.cloud.extra {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.6}" cy="{:.6}" r="{dot:.6}" fill="{}" stroke="none"/>"#,
                z.re, z.im, layer.stroke
            );
        }
    }
    s.push_str("</g>\n</svg>\n");
    s
}
