//! A minimal SVG 1.1 emitter for line plots and heatmaps.

use std::fmt::Write as _;

const W: f64 = 640.0;
const H: f64 = 520.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;

pub const PALETTE: [&str; 6] = ["#c0392b", "#2471a3", "#1e8449", "#7d3c98", "#b9770e", "#17202a"];

pub struct Plot {
    title: String,
    x: (f64, f64),
    y: (f64, f64),
    labels: (String, String),
    body: String,
}

impl Plot {
    pub fn new(title: &str, x: (f64, f64), y: (f64, f64), xlabel: &str, ylabel: &str) -> Plot {
        Plot {
            title: title.into(),
            x,
            y,
            labels: (xlabel.into(), ylabel.into()),
            body: String::new(),
        }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (H - TOP - BOTTOM)
    }

    fn points(&self, pts: &[[f64; 2]]) -> String {
        pts.iter()
            .map(|p| format!("{:.2},{:.2}", self.px(p[0]), self.py(p[1])))
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn polyline(&mut self, pts: &[[f64; 2]], color: &str, width: f64) {
        if pts.len() < 2 {
            return;
        }
        let p = self.points(pts);
        let _ = writeln!(
            self.body,
            r#"<polyline points="{p}" fill="none" stroke="{color}" stroke-width="{width}"/>"#
        );
    }

    pub fn polygon(&mut self, pts: &[[f64; 2]], color: &str) {
        let p = self.points(pts);
        let _ = writeln!(
            self.body,
            r#"<polygon points="{p}" fill="{color}" fill-opacity="0.15" stroke="{color}" stroke-width="1.2"/>"#
        );
    }

    pub fn segment(&mut self, a: [f64; 2], b: [f64; 2], color: &str, width: f64) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="{width}"/>"#,
            self.px(a[0]),
            self.py(a[1]),
            self.px(b[0]),
            self.py(b[1])
        );
    }

    pub fn dot(&mut self, p: [f64; 2], color: &str, label: Option<&str>) {
        let (x, y) = (self.px(p[0]), self.py(p[1]));
        let _ = writeln!(self.body, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2.5" fill="{color}"/>"#);
        if let Some(t) = label {
            let _ = writeln!(
                self.body,
                r#"<text x="{:.2}" y="{:.2}" font-size="11">{}</text>"#,
                x + 4.0,
                y - 4.0,
                escape(t)
            );
        }
    }

    /// Axis-aligned cell shaded by `t` in `[0, 1]`, from pale yellow to
    /// dark red.
    pub fn cell(&mut self, lo: [f64; 2], hi: [f64; 2], t: f64) {
        let (x0, x1) = (self.px(lo[0]), self.px(hi[0]));
        let (y0, y1) = (self.py(hi[1]), self.py(lo[1]));
        let _ = writeln!(
            self.body,
            r#"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
            x1 - x0 + 0.3,
            y1 - y0 + 0.3,
            heat(t)
        );
    }

    pub fn legend(&mut self, entries: &[(&str, &str)]) {
        let longest = entries.iter().map(|(t, _)| t.chars().count()).max().unwrap_or(0);
        // roughly 6.5 px per character at font-size 11
        let width = 26.0 + 6.5 * longest as f64;
        let x = W - RIGHT - width - 4.0;
        let _ = writeln!(
            self.body,
            r#"<rect x="{x:.1}" y="{}" width="{width:.1}" height="{}" fill="white" fill-opacity="0.8"/>"#,
            TOP + 4.0,
            16.0 * entries.len() as f64 + 6.0
        );
        for (k, (text, color)) in entries.iter().enumerate() {
            let y = TOP + 18.0 + 16.0 * k as f64;
            let _ = writeln!(
                self.body,
                r#"<rect x="{:.1}" y="{:.1}" width="12" height="4" fill="{color}"/>"#,
                x + 4.0,
                y - 4.0
            );
            let _ = writeln!(
                self.body,
                r#"<text x="{:.1}" y="{y:.1}" font-size="11">{}</text>"#,
                x + 22.0,
                escape(text)
            );
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(s, "<!-- confocal {} -->", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif">"#
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="24" font-size="15" text-anchor="middle">{}</text>"#,
            W / 2.0,
            escape(&self.title)
        );
        let (x0, x1, y0, y1) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
        let _ = writeln!(
            s,
            r#"<clipPath id="frame"><rect x="{x0}" y="{y0}" width="{}" height="{}"/></clipPath>"#,
            x1 - x0,
            y1 - y0
        );
        let _ = writeln!(s, r#"<g clip-path="url(#frame)">"#);
        s.push_str(&self.body);
        let _ = writeln!(s, "</g>");
        let _ = writeln!(
            s,
            r#"<rect x="{x0}" y="{y0}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            x1 - x0,
            y1 - y0
        );
        for k in 0..=4 {
            let t = k as f64 / 4.0;
            let xv = self.x.0 + t * (self.x.1 - self.x.0);
            let yv = self.y.0 + t * (self.y.1 - self.y.0);
            let (xp, yp) = (self.px(xv), self.py(yv));
            let _ = writeln!(
                s,
                r#"<line x1="{xp:.2}" y1="{y1}" x2="{xp:.2}" y2="{:.1}" stroke="black"/>"#,
                y1 + 5.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{xp:.2}" y="{:.1}" font-size="11" text-anchor="middle">{}</text>"#,
                y1 + 18.0,
                tick(xv)
            );
            let _ = writeln!(
                s,
                r#"<line x1="{:.1}" y1="{yp:.2}" x2="{x0}" y2="{yp:.2}" stroke="black"/>"#,
                x0 - 5.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.2}" font-size="11" text-anchor="end">{}</text>"#,
                x0 - 8.0,
                yp + 4.0,
                tick(yv)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="13" text-anchor="middle">{}</text>"#,
            (x0 + x1) / 2.0,
            H - 12.0,
            escape(&self.labels.0)
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{:.1}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0,
            escape(&self.labels.1)
        );
        let _ = writeln!(s, "</svg>");
        s
    }
}

fn tick(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn heat(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        lerp(255.0, 150.0),
        lerp(247.0, 10.0),
        lerp(188.0, 20.0)
    )
}

/// Line segments of the level set `f = level` on a regular grid, by
/// marching squares. `values[i][j]` sits at `(xs[i], ys[j])`; `NaN` cells
/// are skipped.
pub fn contour(xs: &[f64], ys: &[f64], values: &[Vec<f64>], level: f64) -> Vec<[[f64; 2]; 2]> {
    let mut out = Vec::new();
    for i in 0..xs.len().saturating_sub(1) {
        for j in 0..ys.len().saturating_sub(1) {
            let corners = [
                ([xs[i], ys[j]], values[i][j]),
                ([xs[i + 1], ys[j]], values[i + 1][j]),
                ([xs[i + 1], ys[j + 1]], values[i + 1][j + 1]),
                ([xs[i], ys[j + 1]], values[i][j + 1]),
            ];
            if corners.iter().any(|c| c.1.is_nan()) {
                continue;
            }
            let mut hits = Vec::with_capacity(4);
            for k in 0..4 {
                let (p, u) = corners[k];
                let (q, v) = corners[(k + 1) % 4];
                if (u < level) != (v < level) {
                    let t = (level - u) / (v - u);
                    hits.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
                }
            }
            // a saddle cell has four crossings; pairing them in order is
            // ambiguous only at grid resolution
            for pair in hits.chunks_exact(2) {
                out.push([pair[0], pair[1]]);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contour_of_a_plane_is_a_straight_line() {
        let xs: Vec<f64> = (0..5).map(|k| k as f64).collect();
        let values: Vec<Vec<f64>> = xs.iter().map(|x| xs.iter().map(|_| *x).collect()).collect();
        let segs = contour(&xs, &xs, &values, 1.5);
        assert_eq!(segs.len(), 4);
        assert!(segs.iter().all(|s| s[0][0] == 1.5 && s[1][0] == 1.5));
    }

    #[test]
    fn render_is_self_contained() {
        let mut p = Plot::new("t", (0.0, 1.0), (0.0, 1.0), "x", "y");
        p.polyline(&[[0.0, 0.0], [1.0, 1.0]], PALETTE[0], 1.0);
        let s = p.render();
        assert!(s.starts_with("<?xml") && s.trim_end().ends_with("</svg>"));
        assert!(!s.contains("href"));
    }
}
