//! SVG overlays of a desired curve and a fitted chain.

use std::fmt::Write;

use snakefit_core::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum View {
    Xy,
    Xz,
    Yz,
    /// Fixed isometric axonometric projection.
    Oblique,
}

impl View {
    pub fn name(self) -> &'static str {
        match self {
            View::Xy => "xy",
            View::Xz => "xz",
            View::Yz => "yz",
            View::Oblique => "oblique",
        }
    }

    /// Drawing-plane coordinates, second axis pointing up.
    pub fn project(self, p: &Vec3) -> (f64, f64) {
        match self {
            View::Xy => (p.x, p.y),
            View::Xz => (p.x, p.z),
            View::Yz => (p.y, p.z),
            View::Oblique => {
                let (c, s) = (30f64.to_radians().cos(), 30f64.to_radians().sin());
                ((p.x - p.y) * c, p.z + (p.x + p.y) * s)
            }
        }
    }
}

const WIDTH: f64 = 640.0;
const MARGIN: f64 = 0.05;

/// One view with the dense curve and the chain as two polylines.
pub fn overlay_svg(curve: &[Vec3], chain: &[Vec3], view: View) -> String {
    let curve: Vec<(f64, f64)> = curve.iter().map(|p| view.project(p)).collect();
    let chain: Vec<(f64, f64)> = chain.iter().map(|p| view.project(p)).collect();
    let all = curve.iter().chain(&chain);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-9);
    let pad = MARGIN * span;
    let (vx, vy, vw, vh) = (x0 - pad, -(y1 + pad), x1 - x0 + 2.0 * pad, y1 - y0 + 2.0 * pad);
    let stroke = span / 300.0;

    let points = |pts: &[(f64, f64)]| {
        let mut s = String::new();
        for (i, (x, y)) in pts.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            write!(s, "{:.6},{:.6}", x, -y).unwrap();
        }
        s
    };
    let height = WIDTH * vh / vw;
    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{height:.0}" viewBox="{vx:.6} {vy:.6} {vw:.6} {vh:.6}">"#
    )
    .unwrap();
    writeln!(svg, r#"<title>{} view</title>"#, view.name()).unwrap();
    writeln!(
        svg,
        r#"<polyline class="curve" fill="none" stroke="steelblue" stroke-width="{:.6}" points="{}"/>"#,
        stroke,
        points(&curve)
    )
    .unwrap();
    writeln!(
        svg,
        r#"<polyline class="robot" fill="none" stroke="firebrick" stroke-width="{:.6}" stroke-linejoin="round" points="{}"/>"#,
        2.0 * stroke,
        points(&chain)
    )
    .unwrap();
    svg.push_str("</svg>\n");
    svg
}
