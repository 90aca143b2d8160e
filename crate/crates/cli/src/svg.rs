//! Minimal hand-written SVG charts. Every plotted number also lands in a CSV.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

pub enum Style {
    Line,
    /// Horizontal-then-vertical steps, for empirical CDFs.
    Step,
    Points,
}

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub style: Style,
}

pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Draws the y = x reference line.
    pub diagonal: bool,
}

struct Scale {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl Scale {
    fn new(lo: f64, hi: f64, px_lo: f64, px_hi: f64) -> Self {
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
        Scale { lo, hi, px_lo, px_hi }
    }

    fn map(&self, v: f64) -> f64 {
        self.px_lo + (v - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn tick(v: f64) -> String {
    if v.abs() >= 100.0 || v == v.trunc() {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

impl Chart {
    pub fn render(&self) -> String {
        let finite = |v: &f64| v.is_finite();
        let xs: Vec<f64> = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().map(|p| p.0))
            .filter(finite)
            .collect();
        let ys: Vec<f64> = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().map(|p| p.1))
            .filter(finite)
            .collect();
        let bounds = |v: &[f64]| {
            v.iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)))
        };
        let (mut x0, mut x1) = bounds(&xs);
        let (mut y0, mut y1) = bounds(&ys);
        if xs.is_empty() {
            (x0, x1) = (0.0, 1.0);
        }
        if ys.is_empty() {
            (y0, y1) = (0.0, 1.0);
        }
        if self.diagonal {
            (x0, y0) = (x0.min(0.0), y0.min(0.0));
            (x1, y1) = (x1.max(1.0), y1.max(1.0));
        }
        let sx = Scale::new(x0, x1, LEFT, W - RIGHT);
        let sy = Scale::new(y0, y1, H - BOTTOM, TOP);

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
            W / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<line x1="{LEFT}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{b}" stroke="black"/>"#,
            b = H - BOTTOM,
            r = W - RIGHT
        );
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let (xv, yv) = (sx.lo + f * (sx.hi - sx.lo), sy.lo + f * (sy.hi - sy.lo));
            let (px, py) = (sx.map(xv), sy.map(yv));
            let _ = writeln!(
                s,
                r#"<line x1="{px:.1}" y1="{b}" x2="{px:.1}" y2="{b5}" stroke="black"/><text x="{px:.1}" y="{bt}" text-anchor="middle">{}</text>"#,
                tick(xv),
                b = H - BOTTOM,
                b5 = H - BOTTOM + 5.0,
                bt = H - BOTTOM + 18.0
            );
            let _ = writeln!(
                s,
                r#"<line x1="{l5}" y1="{py:.1}" x2="{LEFT}" y2="{py:.1}" stroke="black"/><text x="{lt}" y="{pyt:.1}" text-anchor="end">{}</text>"#,
                tick(yv),
                l5 = LEFT - 5.0,
                lt = LEFT - 8.0,
                pyt = py + 4.0
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            (LEFT + W - RIGHT) / 2.0,
            H - 15.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="18" y="{cy}" text-anchor="middle" transform="rotate(-90 18 {cy})">{}</text>"#,
            escape(&self.y_label),
            cy = (TOP + H - BOTTOM) / 2.0
        );
        if self.diagonal {
            let _ = writeln!(
                s,
                r##"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#999" stroke-dasharray="4 3"/>"##,
                sx.map(0.0),
                sy.map(0.0),
                sx.map(1.0),
                sy.map(1.0)
            );
        }
        for (i, series) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let pts: Vec<(f64, f64)> = series
                .points
                .iter()
                .filter(|p| p.0.is_finite() && p.1.is_finite())
                .map(|&(x, y)| (sx.map(x), sy.map(y)))
                .collect();
            match series.style {
                Style::Points => {
                    for (x, y) in &pts {
                        let _ = writeln!(s, r#"<circle cx="{x:.1}" cy="{y:.1}" r="3.5" fill="{color}"/>"#);
                    }
                }
                Style::Line | Style::Step => {
                    let mut d = String::new();
                    for (k, (x, y)) in pts.iter().enumerate() {
                        if k == 0 {
                            let _ = write!(d, "M{x:.1},{y:.1}");
                        } else if matches!(series.style, Style::Step) {
                            let _ = write!(d, " H{x:.1} V{y:.1}");
                        } else {
                            let _ = write!(d, " L{x:.1},{y:.1}");
                        }
                    }
                    let _ = writeln!(s, r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.8"/>"#);
                }
            }
            let ly = TOP + 8.0 + 16.0 * i as f64;
            let _ = writeln!(
                s,
                r#"<rect x="{lx}" y="{ry}" width="10" height="10" fill="{color}"/><text x="{tx}" y="{ty}">{}</text>"#,
                escape(&series.name),
                lx = LEFT + 12.0,
                ry = ly - 9.0,
                tx = LEFT + 27.0,
                ty = ly
            );
        }
        s.push_str("</svg>\n");
        s
    }
}
