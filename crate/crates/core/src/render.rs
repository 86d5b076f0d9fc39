//! SVG heat maps of grid surfaces.
//!
//! Signed surfaces (rank correspondence, PLC) get a diverging palette centred
//! on zero; everything else a sequential palette over the observed range.

use std::fmt::Write as _;

use crate::court::{CellIndex, CourtGrid, CORNER_THREE_X, HOOP_X, HOOP_Y, THREE_POINT_RADIUS};
use crate::error::Result;
use crate::io::GridFile;

const PX: f64 = 10.0;
const LEGEND_HEIGHT: f64 = 70.0;
const LEGEND_STEPS: usize = 50;

type Rgb = (f64, f64, f64);

const SEQUENTIAL: [Rgb; 3] = [(255.0, 245.0, 235.0), (253.0, 141.0, 60.0), (127.0, 39.0, 4.0)];
const DIVERGING: [Rgb; 3] = [(33.0, 102.0, 172.0), (247.0, 247.0, 247.0), (178.0, 24.0, 43.0)];

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Palette {
    Sequential,
    Diverging,
}

impl Palette {
    /// Diverging for surfaces whose sign carries meaning.
    pub fn for_kind(kind: &str) -> Palette {
        if kind.starts_with("rank_corr") || kind.starts_with("plc") {
            Palette::Diverging
        } else {
            Palette::Sequential
        }
    }

    fn stops(self) -> &'static [Rgb; 3] {
        match self {
            Palette::Sequential => &SEQUENTIAL,
            Palette::Diverging => &DIVERGING,
        }
    }

    /// Colour at `t` in [0, 1].
    fn color(self, t: f64) -> String {
        let stops = self.stops();
        let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
        let (a, b, u) = if t <= 0.5 { (stops[0], stops[1], t * 2.0) } else { (stops[1], stops[2], t * 2.0 - 1.0) };
        let mix = |x: f64, y: f64| (x + (y - x) * u).round() as u8;
        format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
    }
}

/// Value range mapped onto the palette. Diverging ranges are symmetric about 0.
pub fn color_domain(values: &[f64], palette: Palette) -> (f64, f64) {
    let finite = values.iter().copied().filter(|v| v.is_finite());
    match palette {
        Palette::Diverging => {
            let m = finite.fold(0.0f64, |m, v| m.max(v.abs()));
            (-m, m)
        }
        Palette::Sequential => {
            let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
            if lo > hi {
                (0.0, 0.0)
            } else {
                (lo, hi)
            }
        }
    }
}

fn position(v: f64, (lo, hi): (f64, f64), palette: Palette) -> f64 {
    if hi > lo {
        (v - lo) / (hi - lo)
    } else if palette == Palette::Diverging {
        0.5
    } else {
        0.0
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn court_outline(svg: &mut String, grid: &CourtGrid) {
    let w = grid.width_cells as f64 * PX;
    let h = grid.depth_cells as f64 * PX;
    let (hx, hy) = (HOOP_X * PX, HOOP_Y * PX);
    let corner_dx = CORNER_THREE_X;
    let corner_y = (HOOP_Y + (THREE_POINT_RADIUS.powi(2) - corner_dx * corner_dx).sqrt()) * PX;
    let r3 = THREE_POINT_RADIUS * PX;
    let _ = writeln!(
        svg,
        r##"<g class="court" fill="none" stroke="#333333" stroke-width="1.5">
<rect x="0" y="0" width="{w}" height="{h}"/>
<rect x="{px0}" y="0" width="{pw}" height="{ph}"/>
<circle cx="{hx}" cy="{ft}" r="{ftr}"/>
<circle cx="{hx}" cy="{hy}" r="{hoop}"/>
<path d="M {ra_l} {hy} A {ra} {ra} 0 0 0 {ra_r} {hy}"/>
<path d="M {l3} 0 L {l3} {corner_y:.3} A {r3} {r3} 0 0 0 {r3x} {corner_y:.3} L {r3x} 0"/>
</g>"##,
        px0 = (HOOP_X - 8.0) * PX,
        pw = 16.0 * PX,
        ph = 19.0 * PX,
        ft = 19.0 * PX,
        ftr = 6.0 * PX,
        hoop = 0.75 * PX,
        ra = 4.0 * PX,
        ra_l = (HOOP_X - 4.0) * PX,
        ra_r = (HOOP_X + 4.0) * PX,
        l3 = (HOOP_X - corner_dx) * PX,
        r3x = (HOOP_X + corner_dx) * PX,
    );
}

/// Renders a single-surface grid file as a standalone SVG document with one
/// `<rect class="cell">` per grid cell, the court lines and a colour legend.
pub fn render_svg(file: &GridFile) -> Result<String> {
    file.validate()?;
    let values = file.surface()?;
    let grid = CourtGrid::new();
    let palette = Palette::for_kind(&file.kind);
    let domain = color_domain(values, palette);
    let w = grid.width_cells as f64 * PX;
    let h = grid.depth_cells as f64 * PX;

    let mut svg = String::with_capacity(values.len() * 80);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{total}" viewBox="0 0 {w} {total}">"#,
        total = h + LEGEND_HEIGHT
    );
    let mut title = file.kind.clone();
    for part in [&file.lineup, &file.player_id].into_iter().flatten() {
        title.push(' ');
        title.push_str(part);
    }
    let _ = writeln!(svg, "<title>{}</title>", escape(&title));
    svg.push_str("<g class=\"cells\" stroke=\"none\">\n");
    for (i, v) in values.iter().enumerate() {
        let c = CellIndex(i);
        let _ = writeln!(
            svg,
            r#"<rect class="cell" x="{}" y="{}" width="{PX}" height="{PX}" fill="{}"/>"#,
            c.col() as f64 * PX,
            c.row() as f64 * PX,
            palette.color(position(*v, domain, palette)),
        );
    }
    svg.push_str("</g>\n");
    court_outline(&mut svg, &grid);

    let bar_w = w * 0.8 / LEGEND_STEPS as f64;
    let (x0, y0) = (w * 0.1, h + 15.0);
    svg.push_str("<g class=\"legend\">\n");
    for k in 0..LEGEND_STEPS {
        let t = (k as f64 + 0.5) / LEGEND_STEPS as f64;
        let _ = writeln!(
            svg,
            r#"<rect class="legend-step" x="{:.2}" y="{y0}" width="{bar_w:.2}" height="15" fill="{}"/>"#,
            x0 + k as f64 * bar_w,
            palette.color(t),
        );
    }
    let (lo, hi) = domain;
    let mid = 0.5 * (lo + hi);
    for (x, v, anchor) in [(x0, lo, "start"), (w * 0.5, mid, "middle"), (w * 0.9, hi, "end")] {
        let _ = writeln!(
            svg,
            r#"<text x="{x}" y="{}" font-size="12" font-family="sans-serif" text-anchor="{anchor}">{v:.3}</text>"#,
            y0 + 32.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text class="legend-range" x="{}" y="{}" font-size="11" font-family="sans-serif" text-anchor="middle">[{lo}, {hi}]</text>"#,
        w * 0.5,
        y0 + 48.0
    );
    svg.push_str("</g>\n</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::GridValues;

    fn cell_fills(svg: &str) -> Vec<&str> {
        svg.lines()
            .filter(|l| l.contains("class=\"cell\""))
            .map(|l| l.split("fill=\"").nth(1).unwrap().trim_end_matches("\"/>"))
            .collect()
    }

    #[test]
    fn one_rect_per_cell() {
        let values: Vec<f64> = (0..2350).map(|i| f64::from(i % 13)).collect();
        let svg = render_svg(&GridFile::single("lpl36", None, Some("T:a".into()), values)).unwrap();
        assert_eq!(cell_fills(&svg).len(), 2350);
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("class=\"court\""));
    }

    #[test]
    fn all_zero_grid_is_uniform_with_degenerate_legend() {
        let svg = render_svg(&GridFile::single("lpl36", None, None, vec![0.0; 2350])).unwrap();
        let fills = cell_fills(&svg);
        assert!(fills.iter().all(|f| *f == fills[0]));
        assert!(svg.contains("[0, 0]"));
    }

    #[test]
    fn signed_surfaces_centre_on_zero() {
        let mut values = vec![0.0; 2350];
        values[0] = -2.0;
        values[1] = 1.0;
        let svg = render_svg(&GridFile::single("rank_corr_player1", None, None, values)).unwrap();
        let fills = cell_fills(&svg);
        assert_eq!(fills[2], Palette::Diverging.color(0.5));
        assert_eq!(fills[0], Palette::Diverging.color(0.0));
        assert!(svg.contains("[-2, 2]"));
        assert_eq!(color_domain(&[-1.0, 3.0], Palette::Diverging), (-3.0, 3.0));
    }

    #[test]
    fn malformed_grids_are_rejected() {
        let short = GridFile::single("lpl36", None, None, vec![0.0; 10]);
        assert!(render_svg(&short).is_err());
        let mut draws = GridFile::single("fgp_draws", None, None, vec![0.5; 2350]);
        draws.values = GridValues::Draws(vec![vec![0.5; 2350]]);
        assert!(render_svg(&draws).is_err());
    }
}
