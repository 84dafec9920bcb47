//! Static SVG plots: `j_hat(t)` with its group band, and a reject/accept
//! raster.

use std::fmt::Write;

use crate::wss_test::StationarityReport;

const W: f64 = 800.0;
const H: f64 = 320.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 16.0;
const TOP: f64 = 32.0;
const BOTTOM: f64 = 40.0;

/// Round tick spacing giving about `target` ticks over `span`.
fn tick_step(span: f64, target: f64) -> f64 {
    let raw = span / target;
    let mag = 10f64.powf(raw.log10().floor());
    let f = raw / mag;
    let nice = if f < 1.5 {
        1.0
    } else if f < 3.5 {
        2.0
    } else if f < 7.5 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(x0: f64, x1: f64, mut y0: f64, mut y1: f64) -> Frame {
        if !(y1 > y0) {
            y0 -= 1.0;
            y1 += 1.0;
        }
        let pad = 0.05 * (y1 - y0);
        let x1 = if x1 > x0 { x1 } else { x0 + 1.0 };
        Frame {
            x0,
            x1,
            y0: y0 - pad,
            y1: y1 + pad,
        }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (H - TOP - BOTTOM)
    }
}

fn header(s: &mut String, title: &str) {
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="13">{}</text>"#,
        W / 2.0,
        escape(title)
    );
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn axes(s: &mut String, f: &Frame, y_ticks: bool, xlabel: &str) {
    let (l, r, t, b) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
    let _ = writeln!(
        s,
        r##"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="#333"/>"##,
        r - l,
        b - t
    );
    let step = tick_step(f.x1 - f.x0, 8.0);
    let mut x = (f.x0 / step).ceil() * step;
    while x <= f.x1 + 1e-9 * step {
        let p = f.px(x);
        let _ = writeln!(
            s,
            r##"<line x1="{p:.2}" y1="{b}" x2="{p:.2}" y2="{}" stroke="#333"/><text x="{p:.2}" y="{}" text-anchor="middle">{}</text>"##,
            b + 4.0,
            b + 16.0,
            fmt_tick(x, step)
        );
        x += step;
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (l + r) / 2.0,
        H - 6.0,
        escape(xlabel)
    );
    if y_ticks {
        let step = tick_step(f.y1 - f.y0, 5.0);
        let mut y = (f.y0 / step).ceil() * step;
        while y <= f.y1 + 1e-9 * step {
            let p = f.py(y);
            let _ = writeln!(
                s,
                r##"<line x1="{}" y1="{p:.2}" x2="{l}" y2="{p:.2}" stroke="#333"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"##,
                l - 4.0,
                l - 6.0,
                p + 4.0,
                fmt_tick(y, step)
            );
            y += step;
        }
    }
}

fn fmt_tick(v: f64, step: f64) -> String {
    let digits = (-step.log10().floor()).max(0.0) as usize;
    let v = if v.abs() < 1e-12 * step { 0.0 } else { v };
    format!("{v:.digits$}")
}

fn polyline(s: &mut String, f: &Frame, x: &[f64], y: &[f64], style: &str) {
    let mut pts = String::new();
    for (&a, &b) in x.iter().zip(y) {
        if b.is_finite() {
            let _ = write!(pts, "{:.2},{:.2} ", f.px(a), f.py(b));
        }
    }
    let _ = writeln!(
        s,
        r#"<polyline points="{}" fill="none" {style}/>"#,
        pts.trim_end()
    );
}

/// Line plot of `y(t)`, with an optional shaded `(lower, upper)` band.
pub fn line_plot(title: &str, t: &[f64], y: &[f64], band: Option<(&[f64], &[f64])>) -> String {
    let finite = |v: &&f64| v.is_finite();
    let mut lo = y.iter().filter(finite).copied().fold(0.0_f64, f64::min);
    let mut hi = y.iter().filter(finite).copied().fold(0.0_f64, f64::max);
    if let Some((a, b)) = band {
        lo = a.iter().filter(finite).copied().fold(lo, f64::min);
        hi = b.iter().filter(finite).copied().fold(hi, f64::max);
    }
    let (t0, t1) = (
        t.first().copied().unwrap_or(0.0),
        t.last().copied().unwrap_or(1.0),
    );
    let f = Frame::new(t0, t1, lo, hi);

    let mut s = String::new();
    header(&mut s, title);
    if let Some((a, b)) = band {
        let mut pts = String::new();
        for (&ti, &v) in t.iter().zip(b) {
            if v.is_finite() {
                let _ = write!(pts, "{:.2},{:.2} ", f.px(ti), f.py(v));
            }
        }
        for (&ti, &v) in t.iter().zip(a).rev() {
            if v.is_finite() {
                let _ = write!(pts, "{:.2},{:.2} ", f.px(ti), f.py(v));
            }
        }
        let _ = writeln!(
            s,
            r##"<polygon points="{}" fill="#9ecae1" fill-opacity="0.6" stroke="none"/>"##,
            pts.trim_end()
        );
    }
    let z = f.py(0.0);
    let _ = writeln!(
        s,
        r##"<line x1="{LEFT}" y1="{z:.2}" x2="{}" y2="{z:.2}" stroke="#888" stroke-dasharray="4 3"/>"##,
        W - RIGHT
    );
    polyline(&mut s, &f, t, y, r##"stroke="#08519c" stroke-width="1.2""##);
    axes(&mut s, &f, true, "t [s]");
    s.push_str("</svg>\n");
    s
}

/// One cell per evaluation time, red for reject and green for accept.
pub fn reject_raster(title: &str, t: &[f64], reject: &[bool]) -> String {
    let (t0, t1) = (
        t.first().copied().unwrap_or(0.0),
        t.last().copied().unwrap_or(1.0),
    );
    let f = Frame::new(t0, t1, 0.0, 1.0);
    let mut s = String::new();
    header(&mut s, title);
    let (top, bottom) = (TOP, H - BOTTOM);
    for (i, (&ti, &r)) in t.iter().zip(reject).enumerate() {
        let left = if i == 0 {
            f.px(ti)
        } else {
            0.5 * (f.px(t[i - 1]) + f.px(ti))
        };
        let right = if i + 1 == t.len() {
            f.px(ti) + 1.0
        } else {
            0.5 * (f.px(ti) + f.px(t[i + 1]))
        };
        let colour = if r { "#cb181d" } else { "#41ab5d" };
        let _ = writeln!(
            s,
            r#"<rect x="{left:.2}" y="{top}" width="{:.2}" height="{}" fill="{colour}"/>"#,
            (right - left).max(0.5),
            bottom - top
        );
    }
    axes(&mut s, &f, false, "t [s] (red: reject, green: accept)");
    s.push_str("</svg>\n");
    s
}

/// `j_hat` with the band `j_bar +- 2 S / sqrt(G)`.
pub fn report_plot(title: &str, r: &StationarityReport) -> String {
    let g = (r.groups as f64).sqrt();
    let lower: Vec<f64> = r
        .j_bar
        .iter()
        .zip(&r.s_std)
        .map(|(m, s)| m - 2.0 * s / g)
        .collect();
    let upper: Vec<f64> = r
        .j_bar
        .iter()
        .zip(&r.s_std)
        .map(|(m, s)| m + 2.0 * s / g)
        .collect();
    line_plot(title, &r.times, &r.j_hat, Some((&lower, &upper)))
}
