//! Reduced phase-plane portrait: contour lines of the braces factor of the
//! quadrupolar Hamiltonian over the (pericenter angle, G1/L1) rectangle at
//! fixed (L1, G2, C). The Hamiltonian itself differs only by a negative
//! constant prefactor, so its level sets are the same curves.

use ksquad::error::{Error, Result};
use ksquad::quadrupolar::quad_braces;
use std::fmt::Write as _;

/// Inputs of one portrait. Masses only enter the caption: at fixed
/// (L1, G2, C) they scale the Hamiltonian prefactor, not the contours.
#[derive(Clone, Copy, Debug)]
pub struct PortraitSpec {
    pub l1: f64,
    pub g2: f64,
    pub c: f64,
    pub masses: Option<(f64, f64, f64)>,
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 520.0;
const MARGIN_L: f64 = 60.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;
const NX: usize = 241;
const NY: usize = 161;
const LEVELS: usize = 13;

/// Vertical band of the portrait in u = G1/L1: the angular momentum
/// triangle pins |C - G2| <= G1 <= min(C + G2, L1). A band that includes
/// G1 = 0 (C = G2 up to roundoff) is drawn down to the analytic extension.
pub fn band(l1: f64, g2: f64, c: f64) -> Result<(f64, f64)> {
    if !(l1 > 0.0) || !(g2 > 0.0) || !(c > 0.0) {
        return Err(Error::ChartDomain { condition: "portrait needs L1 > 0, G2 > 0, C > 0" });
    }
    let degenerate = (c * c - g2 * g2).abs() <= 1e-12 * (c * c).max(g2 * g2);
    let lo = if degenerate { 0.0 } else { (c - g2).abs() / l1 };
    let hi = (c + g2).min(l1) / l1;
    if !(hi - lo > 1e-12) {
        return Err(Error::ChartDomain {
            condition: "portrait band is empty: need |C - G2| < min(C + G2, L1)",
        });
    }
    Ok((lo, hi))
}

fn x_of(g1_angle: f64) -> f64 {
    MARGIN_L + g1_angle / std::f64::consts::TAU * (WIDTH - MARGIN_L - MARGIN_R)
}

fn y_of(u: f64, lo: f64, hi: f64) -> f64 {
    MARGIN_T + (1.0 - (u - lo) / (hi - lo)) * (HEIGHT - MARGIN_T - MARGIN_B)
}

/// Level color, a fixed blue-to-red ramp over the level index.
fn level_color(k: usize) -> String {
    let t = k as f64 / (LEVELS - 1) as f64;
    let r = (40.0 + 180.0 * t).round() as u8;
    let g = (70.0 + 40.0 * (1.0 - (2.0 * t - 1.0).abs())).round() as u8;
    let b = (200.0 - 160.0 * t).round() as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// Marching-squares segments of one level inside one grid cell. Corners
/// are (v00, v10, v11, v01) going bottom-left, bottom-right, top-right,
/// top-left; returned points are (x, y) in plot fractions of the cell.
fn cell_segments(level: f64, v: [f64; 4]) -> Vec<((f64, f64), (f64, f64))> {
    let above: Vec<bool> = v.iter().map(|&a| a > level).collect();
    if above.iter().all(|&a| a) || above.iter().all(|&a| !a) {
        return Vec::new();
    }
    // Edge order: bottom, right, top, left; each as (endpoint indices).
    let edges = [(0usize, 1usize), (1, 2), (2, 3), (3, 0)];
    let place = |i: usize, t: f64| -> (f64, f64) {
        match i {
            0 => (t, 0.0),
            1 => (1.0, t),
            2 => (1.0 - t, 1.0),
            _ => (0.0, 1.0 - t),
        }
    };
    let mut pts = Vec::new();
    for (i, (a, b)) in edges.iter().enumerate() {
        if above[*a] != above[*b] {
            let t = (level - v[*a]) / (v[*b] - v[*a]);
            pts.push((i, place(i, t.clamp(0.0, 1.0))));
        }
    }
    match pts.len() {
        2 => vec![(pts[0].1, pts[1].1)],
        4 => {
            // Saddle: pair crossings by the cell-center value.
            let center = v.iter().sum::<f64>() / 4.0;
            if center > level {
                vec![(pts[0].1, pts[1].1), (pts[2].1, pts[3].1)]
            } else {
                vec![(pts[0].1, pts[3].1), (pts[1].1, pts[2].1)]
            }
        }
        _ => Vec::new(),
    }
}

/// Renders the portrait as a standalone SVG document.
pub fn render(spec: &PortraitSpec) -> Result<String> {
    let (lo, hi) = band(spec.l1, spec.g2, spec.c)?;
    let degenerate = lo == 0.0;

    let mut values = vec![vec![0.0f64; NX]; NY];
    let mut vmin = f64::INFINITY;
    let mut vmax = f64::NEG_INFINITY;
    for (iy, row) in values.iter_mut().enumerate() {
        let u = lo + (hi - lo) * iy as f64 / (NY - 1) as f64;
        for (ix, slot) in row.iter_mut().enumerate() {
            let ang = std::f64::consts::TAU * ix as f64 / (NX - 1) as f64;
            let v = quad_braces(spec.l1, u * spec.l1, ang, spec.g2, spec.c)?;
            vmin = vmin.min(v);
            vmax = vmax.max(v);
            *slot = v;
        }
    }

    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH:.0}\" height=\"{HEIGHT:.0}\" viewBox=\"0 0 {WIDTH:.0} {HEIGHT:.0}\">"
    );
    let _ = writeln!(svg, "<rect width=\"{WIDTH:.0}\" height=\"{HEIGHT:.0}\" fill=\"#ffffff\"/>");
    let _ = writeln!(
        svg,
        "<rect x=\"{MARGIN_L:.2}\" y=\"{MARGIN_T:.2}\" width=\"{plot_w:.2}\" height=\"{plot_h:.2}\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>"
    );

    for k in 0..LEVELS {
        let level = vmin + (vmax - vmin) * (k + 1) as f64 / (LEVELS + 1) as f64;
        let mut d = String::new();
        for iy in 0..NY - 1 {
            for ix in 0..NX - 1 {
                let v = [
                    values[iy][ix],
                    values[iy][ix + 1],
                    values[iy + 1][ix + 1],
                    values[iy + 1][ix],
                ];
                for ((fx1, fy1), (fx2, fy2)) in cell_segments(level, v) {
                    let gx = |f: f64, i: usize| {
                        x_of(std::f64::consts::TAU * (i as f64 + f) / (NX - 1) as f64)
                    };
                    let gy = |f: f64, j: usize| {
                        y_of(lo + (hi - lo) * (j as f64 + f) / (NY - 1) as f64, lo, hi)
                    };
                    let _ = write!(
                        d,
                        "M{:.2} {:.2}L{:.2} {:.2}",
                        gx(fx1, ix),
                        gy(fy1, iy),
                        gx(fx2, ix),
                        gy(fy2, iy)
                    );
                }
            }
        }
        if !d.is_empty() {
            let _ = writeln!(
                svg,
                "<path class=\"level\" d=\"{d}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.1\"/>",
                level_color(k)
            );
        }
    }

    // Axes: angle ticks at 0, pi, 2 pi; band ticks at both edges.
    let y_base = HEIGHT - MARGIN_B;
    for (frac, label) in [(0.0, "0"), (0.5, "pi"), (1.0, "2pi")] {
        let x = MARGIN_L + frac * plot_w;
        let _ = writeln!(
            svg,
            "<line x1=\"{x:.2}\" y1=\"{y_base:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#333333\"/>",
            y_base + 5.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{x:.2}\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\">{label}</text>",
            y_base + 18.0
        );
    }
    for (u, anchor_y) in [(lo, y_of(lo, lo, hi)), (hi, y_of(hi, lo, hi))] {
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"end\">{u:.3}</text>",
            MARGIN_L - 8.0,
            anchor_y + 4.0
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\">pericenter angle g1</text>",
        MARGIN_L + plot_w / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"16\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"12\" transform=\"rotate(-90 16 {:.2})\" text-anchor=\"middle\">G1/L1</text>",
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0
    );

    let _ = writeln!(
        svg,
        "<text x=\"{MARGIN_L:.0}\" y=\"18\" font-family=\"monospace\" font-size=\"13\">reduced quadrupolar portrait: L1={}, G2={}, C={} (braces range [{vmin:.3}, {vmax:.3}], {LEVELS} levels)</text>",
        spec.l1, spec.g2, spec.c
    );
    let caption = match spec.masses {
        Some((m0, m1, m2)) => format!(
            "Hamiltonian = negative constant prefactor times braces; masses ({m0}, {m1}, {m2}) only scale that prefactor"
        ),
        None => "Hamiltonian = negative constant prefactor times braces; contours coincide".to_string(),
    };
    let _ = writeln!(
        svg,
        "<text x=\"{MARGIN_L:.0}\" y=\"33\" font-family=\"monospace\" font-size=\"11\" fill=\"#555555\">{caption}</text>"
    );
    if degenerate {
        let _ = writeln!(
            svg,
            "<text x=\"{MARGIN_L:.0}\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"11\" fill=\"#884400\">bottom edge G1 = 0 is degenerate (C = G2), drawn via the analytic extension</text>",
            y_base + 32.0
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_follows_the_angular_momentum_triangle() {
        let (lo, hi) = band(1.0, 0.6, 0.9).unwrap();
        assert!((lo - 0.3).abs() < 1e-15 && (hi - 1.0).abs() < 1e-15, "({lo}, {hi})");
        let (lo, hi) = band(2.0, 0.5, 0.7).unwrap();
        assert!((lo - 0.1).abs() < 1e-15 && (hi - 0.6).abs() < 1e-15, "({lo}, {hi})");
        // C = G2 snaps the lower edge onto the degenerate line.
        let (lo, _) = band(1.0, 0.8, 0.8).unwrap();
        assert_eq!(lo, 0.0);
        // Triangle violated: no band.
        assert!(band(1.0, 0.3, 2.5).is_err());
        assert!(band(-1.0, 0.3, 0.5).is_err());
    }

    #[test]
    fn generic_portrait_draws_every_level() {
        let svg = render(&PortraitSpec { l1: 1.0, g2: 1.0, c: 1.2, masses: None }).unwrap();
        assert!(svg.starts_with("<svg "));
        assert!(svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("class=\"level\"").count(), LEVELS);
        assert!(!svg.contains("degenerate"));
    }

    #[test]
    fn degenerate_portrait_is_marked() {
        let spec = PortraitSpec { l1: 1.0, g2: 0.9, c: 0.9, masses: Some((1.0, 0.65, 0.8)) };
        let svg = render(&spec).unwrap();
        assert!(svg.contains("analytic extension"));
        assert!(svg.contains("(1, 0.65, 0.8)"));
    }

    #[test]
    fn rendering_is_deterministic() {
        let spec = PortraitSpec { l1: 1.3, g2: 0.7, c: 1.1, masses: None };
        assert_eq!(render(&spec).unwrap(), render(&spec).unwrap());
    }

    #[test]
    fn saddle_cells_split_into_two_segments() {
        let segs = cell_segments(0.0, [1.0, -1.0, 1.0, -1.0]);
        assert_eq!(segs.len(), 2);
        let segs = cell_segments(0.0, [1.0, 1.0, -1.0, -1.0]);
        assert_eq!(segs.len(), 1);
    }
}
