//! Minimal standalone SVG line plots.

use std::fmt::Write;

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// Draw markers instead of a polyline.
    pub markers: bool,
}

#[derive(Debug, Clone, Default)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#000000"];

impl LinePlot {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Self { title: title.into(), x_label: x_label.into(), y_label: y_label.into(), ..Default::default() }
    }

    pub fn line(mut self, label: &str, points: Vec<(f64, f64)>) -> Self {
        self.series.push(Series { label: label.into(), points, markers: false });
        self
    }

    pub fn scatter(mut self, label: &str, points: Vec<(f64, f64)>) -> Self {
        self.series.push(Series { label: label.into(), points, markers: true });
        self
    }

    pub fn log_axes(mut self, x: bool, y: bool) -> Self {
        self.log_x = x;
        self.log_y = y;
        self
    }

    pub fn render(&self) -> String {
        let (w, h) = (640.0, 440.0);
        let (l, r, t, b) = (80.0, 20.0, 40.0, 60.0);
        let tx = |v: f64| if self.log_x { v.abs().log10() } else { v };
        let ty = |v: f64| if self.log_y { v.abs().log10() } else { v };
        let pts = self
            .series
            .iter()
            .flat_map(|s| s.points.iter())
            .filter(|(x, y)| x.is_finite() && y.is_finite() && (!self.log_x || *x != 0.0) && (!self.log_y || *y != 0.0));
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in pts {
            x0 = x0.min(tx(x));
            x1 = x1.max(tx(x));
            y0 = y0.min(ty(y));
            y1 = y1.max(ty(y));
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 - x0 < 1e-300 {
            x1 = x0 + 1.0;
        }
        if y1 - y0 < 1e-300 {
            y1 = y0 + 1.0;
        }
        let px = |x: f64| l + (tx(x) - x0) / (x1 - x0) * (w - l - r);
        let py = |y: f64| h - b - (ty(y) - y0) / (y1 - y0) * (h - t - b);
        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#);
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, w / 2.0, esc(&self.title));
        let _ = writeln!(s, r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#, w - l - r, h - t - b);
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let xv = x0 + f * (x1 - x0);
            let yv = y0 + f * (y1 - y0);
            let xs = l + f * (w - l - r);
            let ys = h - b - f * (h - t - b);
            let lab = |v: f64, lg: bool| if lg { format!("{:.3e}", 10f64.powf(v)) } else { format!("{v:.4}") };
            let _ = writeln!(s, r#"<text x="{xs}" y="{}" text-anchor="middle">{}</text>"#, h - b + 16.0, lab(xv, self.log_x));
            let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, l - 4.0, ys + 4.0, lab(yv, self.log_y));
        }
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, w / 2.0, h - 18.0, esc(&self.x_label));
        let _ = writeln!(
            s,
            r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
            h / 2.0,
            h / 2.0,
            esc(&self.y_label)
        );
        for (k, ser) in self.series.iter().enumerate() {
            let c = COLORS[k % COLORS.len()];
            let valid: Vec<(f64, f64)> = ser
                .points
                .iter()
                .copied()
                .filter(|(x, y)| x.is_finite() && y.is_finite() && (!self.log_x || *x != 0.0) && (!self.log_y || *y != 0.0))
                .collect();
            if ser.markers {
                for (x, y) in &valid {
                    let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="{c}"/>"#, px(*x), py(*y));
                }
            } else if !valid.is_empty() {
                let path: Vec<String> = valid.iter().map(|(x, y)| format!("{:.2},{:.2}", px(*x), py(*y))).collect();
                let _ = writeln!(s, r#"<polyline fill="none" stroke="{c}" stroke-width="1.5" points="{}"/>"#, path.join(" "));
            }
            let _ = writeln!(s, r#"<text x="{}" y="{}" fill="{c}">{}</text>"#, l + 10.0, t + 16.0 + 14.0 * k as f64, esc(&ser.label));
        }
        s.push_str("</svg>\n");
        s
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
