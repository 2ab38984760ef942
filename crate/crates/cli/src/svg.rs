//! Minimal hand-written SVG plots: polylines, step curves and rasters.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const MARGIN: f64 = 60.0;
const TICKS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Style {
    Line,
    Step,
    Points,
}

pub struct Raster {
    /// Row coordinates (x axis), one column of cells per entry.
    pub xs: Vec<f64>,
    pub y_range: (f64, f64),
    /// `cells[i][j]` is bin `j` of the y range at `xs[i]`.
    pub cells: Vec<Vec<bool>>,
}

pub struct Figure {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<(Style, Vec<(f64, f64)>)>,
    pub raster: Option<Raster>,
}

impl Figure {
    pub fn new(title: impl Into<String>, x_label: impl Into<String>, y_label: impl Into<String>) -> Self {
        Figure {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            series: Vec::new(),
            raster: None,
        }
    }

    pub fn with(mut self, style: Style, points: Vec<(f64, f64)>) -> Self {
        self.series.push((style, points));
        self
    }

    fn bounds(&self) -> ((f64, f64), (f64, f64)) {
        let mut xs: Vec<f64> = Vec::new();
        let mut ys: Vec<f64> = Vec::new();
        for (_, pts) in &self.series {
            for &(x, y) in pts.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
                xs.push(x);
                ys.push(y);
            }
        }
        if let Some(r) = &self.raster {
            xs.extend(&r.xs);
            ys.extend([r.y_range.0, r.y_range.1]);
        }
        let span = |v: &[f64]| {
            let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if !lo.is_finite() {
                (0.0, 1.0)
            } else if hi - lo < 1e-12 {
                (lo - 0.5, hi + 0.5)
            } else {
                (lo, hi)
            }
        };
        (span(&xs), span(&ys))
    }

    /// The document, with `desc` (typically the resolved config) embedded.
    pub fn render(&self, desc: &str) -> String {
        let ((x0, x1), (y0, y1)) = self.bounds();
        let pw = WIDTH - 2.0 * MARGIN;
        let ph = HEIGHT - 2.0 * MARGIN;
        let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * ph;
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(s, "<desc>{}</desc>", escape(desc));
        let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        if let Some(r) = &self.raster {
            let bins = r.cells.first().map_or(0, |c| c.len()).max(1);
            let bh = (r.y_range.1 - r.y_range.0) / bins as f64;
            let cw = if r.xs.len() > 1 { pw / (r.xs.len() - 1) as f64 } else { pw };
            for (x, row) in r.xs.iter().zip(&r.cells) {
                for (j, _) in row.iter().enumerate().filter(|c| *c.1) {
                    let ylo = r.y_range.0 + j as f64 * bh;
                    let top = sy(ylo + bh);
                    let _ = writeln!(
                        s,
                        r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="black"/>"#,
                        sx(*x) - cw / 2.0,
                        top,
                        cw.max(0.5),
                        (sy(ylo) - top).max(0.5)
                    );
                }
            }
        }
        for (style, pts) in &self.series {
            let pts: Vec<(f64, f64)> = pts.iter().cloned().filter(|p| p.0.is_finite() && p.1.is_finite()).collect();
            match style {
                Style::Points => {
                    for &(x, y) in &pts {
                        let _ = writeln!(s, r#"<rect x="{:.2}" y="{:.2}" width="3" height="3" fill="steelblue"/>"#, sx(x) - 1.5, sy(y) - 1.5);
                    }
                }
                Style::Line | Style::Step => {
                    let mut path = String::new();
                    for (i, &(x, y)) in pts.iter().enumerate() {
                        if i > 0 && *style == Style::Step {
                            let _ = write!(path, "{:.2},{:.2} ", sx(x), sy(pts[i - 1].1));
                        }
                        let _ = write!(path, "{:.2},{:.2} ", sx(x), sy(y));
                    }
                    let _ = writeln!(
                        s,
                        r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{}"/>"#,
                        path.trim_end()
                    );
                }
            }
        }
        // Axes, ticks and labels.
        let _ = writeln!(
            s,
            r#"<line x1="{MARGIN}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{b}" stroke="black"/>"#,
            b = HEIGHT - MARGIN,
            r = WIDTH - MARGIN
        );
        for i in 0..=TICKS {
            let t = i as f64 / TICKS as f64;
            let (x, y) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
            let _ = writeln!(
                s,
                r#"<line x1="{px:.2}" y1="{b}" x2="{px:.2}" y2="{b5}" stroke="black"/><text x="{px:.2}" y="{b18}" text-anchor="middle">{}</text>"#,
                tick(x),
                px = sx(x),
                b = HEIGHT - MARGIN,
                b5 = HEIGHT - MARGIN + 5.0,
                b18 = HEIGHT - MARGIN + 18.0
            );
            let _ = writeln!(
                s,
                r#"<line x1="{m5}" y1="{py:.2}" x2="{MARGIN}" y2="{py:.2}" stroke="black"/><text x="{m8}" y="{py4:.2}" text-anchor="end">{}</text>"#,
                tick(y),
                m5 = MARGIN - 5.0,
                m8 = MARGIN - 8.0,
                py = sy(y),
                py4 = sy(y) + 4.0
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            HEIGHT - 16.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{y}" text-anchor="middle" transform="rotate(-90 16 {y})">{}</text>"#,
            escape(&self.y_label),
            y = HEIGHT / 2.0
        );
        s.push_str("</svg>\n");
        s
    }
}

fn tick(v: f64) -> String {
    let t = format!("{v:.3}");
    let t = t.trim_end_matches('0').trim_end_matches('.');
    if t == "-0" {
        "0".into()
    } else {
        t.into()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_and_escapes() {
        let f = Figure::new("a < b", "x", "y").with(Style::Step, vec![(0.0, 0.0), (1.0, 1.0)]);
        let doc = f.render("{\"k\": \"<&>\"}");
        assert!(doc.starts_with("<svg"));
        assert!(doc.contains("&lt;&amp;&gt;"));
        assert!(doc.contains("a &lt; b"));
        assert!(doc.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn ticks_are_trimmed() {
        assert_eq!(tick(0.5), "0.5");
        assert_eq!(tick(2.0), "2");
        assert_eq!(tick(-0.0001), "0");
    }
}
