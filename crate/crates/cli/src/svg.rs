//! Minimal deterministic SVG line plots.

use std::fmt::Write;

const PANEL_W: f64 = 480.0;
const PANEL_H: f64 = 360.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    /// `(x, y, error half-width)`.
    pub points: Vec<(f64, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Marker {
    pub x: f64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    pub markers: Vec<Marker>,
    /// Fixed vertical range; derived from the data when absent.
    pub y_range: Option<(f64, f64)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if !(lo.is_finite() && hi.is_finite()) {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

fn render_panel(out: &mut String, panel: &Panel, offset_x: f64) {
    let (x0, x1) = padded_extent(
        panel
            .series
            .iter()
            .flat_map(|s| s.points.iter().map(|p| p.0))
            .chain(panel.markers.iter().map(|m| m.x)),
    );
    let (y0, y1) = panel.y_range.unwrap_or_else(|| {
        padded_extent(
            panel
                .series
                .iter()
                .flat_map(|s| s.points.iter().flat_map(|&(_, y, e)| [y - e, y + e])),
        )
    });
    let plot_w = PANEL_W - LEFT - RIGHT;
    let plot_h = PANEL_H - TOP - BOTTOM;
    let sx = |x: f64| offset_x + LEFT + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| TOP + (1.0 - (y - y0) / (y1 - y0)) * plot_h;

    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        offset_x + LEFT + plot_w / 2.0,
        escape(&panel.title)
    );
    let _ = writeln!(
        out,
        r#"<rect x="{:.2}" y="{TOP:.2}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="black"/>"#,
        offset_x + LEFT
    );
    for k in 0..=4 {
        let fx = x0 + (x1 - x0) * k as f64 / 4.0;
        let fy = y0 + (y1 - y0) * k as f64 / 4.0;
        let (px, py) = (sx(fx), sy(fy));
        let _ = writeln!(
            out,
            r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle" font-size="11">{}</text>"#,
            TOP + plot_h,
            TOP + plot_h + 5.0,
            TOP + plot_h + 18.0,
            tick_label(fx)
        );
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end" font-size="11">{}</text>"#,
            offset_x + LEFT - 5.0,
            offset_x + LEFT,
            offset_x + LEFT - 8.0,
            py + 4.0,
            tick_label(fy)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12">{}</text>"#,
        offset_x + LEFT + plot_w / 2.0,
        PANEL_H - 8.0,
        escape(&panel.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12" transform="rotate(-90 {:.2} {:.2})">{}</text>"#,
        offset_x + 16.0,
        TOP + plot_h / 2.0,
        offset_x + 16.0,
        TOP + plot_h / 2.0,
        escape(&panel.y_label)
    );

    for (i, marker) in panel.markers.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let px = sx(marker.x);
        let _ = writeln!(
            out,
            r#"<line x1="{px:.2}" y1="{TOP:.2}" x2="{px:.2}" y2="{:.2}" stroke="{color}" stroke-dasharray="4 3"/>"#,
            TOP + plot_h
        );
    }

    for (i, series) in panel.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = series
            .points
            .iter()
            .map(|&(x, y, _)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            pts.join(" ")
        );
        for &(x, y, e) in &series.points {
            if e > 0.0 {
                let px = sx(x);
                let (top, bot) = (sy(y + e), sy(y - e));
                let _ = writeln!(
                    out,
                    r#"<path d="M{:.2},{top:.2}H{:.2}M{px:.2},{top:.2}V{bot:.2}M{:.2},{bot:.2}H{:.2}" stroke="{color}" fill="none"/>"#,
                    px - 3.0,
                    px + 3.0,
                    px - 3.0,
                    px + 3.0
                );
            }
        }
        let ly = TOP + 16.0 + 16.0 * i as f64;
        let lx = offset_x + LEFT + 10.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}" font-size="11">{}</text>"#,
            lx + 20.0,
            lx + 25.0,
            ly + 4.0,
            escape(&series.name)
        );
    }
}

fn padded_extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = extent(values);
    padded(lo, hi)
}

/// Renders panels side by side into one self-contained document.
pub fn render(panels: &[Panel]) -> String {
    let width = PANEL_W * panels.len().max(1) as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{PANEL_H:.0}" viewBox="0 0 {width:.0} {PANEL_H:.0}" font-family="sans-serif">"#
    );
    let _ = writeln!(
        out,
        r#"<rect width="{width:.0}" height="{PANEL_H:.0}" fill="white"/>"#
    );
    for (i, panel) in panels.iter().enumerate() {
        render_panel(&mut out, panel, PANEL_W * i as f64);
    }
    out.push_str("</svg>\n");
    out
}
