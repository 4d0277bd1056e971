//! Minimal static SVG plots: a cluster-colored scatter and a line plot with
//! a shaded ±1 std band per series.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 10] =
    ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"];
const NOISE_COLOR: &str = "#b0b0b0";

pub struct Series {
    pub name: String,
    pub x: Vec<f64>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Frame {
        Frame { x: padded(range(xs)), y: padded(range(ys)) }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn range(v: impl Iterator<Item = f64>) -> (f64, f64) {
    v.filter(|x| x.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
}

fn padded((lo, hi): (f64, f64)) -> (f64, f64) {
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));
}

fn axes(out: &mut String, f: &Frame, xlabel: &str, ylabel: &str) {
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN, HEIGHT - MARGIN, MARGIN);
    let _ = writeln!(out, r#"<path d="M{x0} {y1} V{y0} H{x1}" fill="none" stroke="black"/>"#);
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let xv = f.x.0 + t * (f.x.1 - f.x.0);
        let yv = f.y.0 + t * (f.y.1 - f.y.0);
        let (px, py) = (f.px(xv), f.py(yv));
        let _ = writeln!(out, r#"<text x="{px:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, y0 + 16.0, tick(xv));
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, x0 - 6.0, py + 4.0, tick(yv));
    }
    let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 12.0, escape(xlabel));
    let _ = writeln!(
        out,
        r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(ylabel)
    );
}

fn tick(v: f64) -> String {
    if v.abs() >= 1000.0 || (v != 0.0 && v.abs() < 0.01) {
        format!("{v:.1e}")
    } else {
        format!("{v:.2}")
    }
}

/// 2D points colored by label; negative labels are drawn as grey noise.
pub fn scatter(title: &str, coords: &[f64], labels: &[i64]) -> String {
    let xs = coords.iter().step_by(2).copied();
    let ys = coords.iter().skip(1).step_by(2).copied();
    let f = Frame::new(xs, ys);
    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, &f, "x", "y");
    for (i, &l) in labels.iter().enumerate() {
        let color = if l < 0 { NOISE_COLOR } else { PALETTE[l as usize % PALETTE.len()] };
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#,
            f.px(coords[2 * i]),
            f.py(coords[2 * i + 1])
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Mean lines with a shaded mean ± std band, one color per series.
pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> String {
    let xs = series.iter().flat_map(|s| s.x.iter().copied());
    let ys = series.iter().flat_map(|s| {
        s.mean.iter().zip(&s.std).flat_map(|(m, sd)| [m - sd, m + sd])
    });
    let f = Frame::new(xs.clone(), ys.collect::<Vec<_>>().into_iter());
    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, &f, xlabel, ylabel);
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<usize> = (0..s.x.len()).filter(|&i| s.mean[i].is_finite()).collect();
        if pts.is_empty() {
            continue;
        }
        let mut band = String::new();
        for &i in &pts {
            let sd = if s.std[i].is_finite() { s.std[i] } else { 0.0 };
            let _ = write!(band, "{:.2},{:.2} ", f.px(s.x[i]), f.py(s.mean[i] + sd));
        }
        for &i in pts.iter().rev() {
            let sd = if s.std[i].is_finite() { s.std[i] } else { 0.0 };
            let _ = write!(band, "{:.2},{:.2} ", f.px(s.x[i]), f.py(s.mean[i] - sd));
        }
        let _ = writeln!(out, r#"<polygon points="{}" fill="{color}" fill-opacity="0.18" stroke="none"/>"#, band.trim_end());
        let line: Vec<String> = pts.iter().map(|&i| format!("{:.2},{:.2}", f.px(s.x[i]), f.py(s.mean[i]))).collect();
        let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, line.join(" "));
        for &i in &pts {
            let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, f.px(s.x[i]), f.py(s.mean[i]));
        }
        let ly = MARGIN + 16.0 * k as f64;
        let lx = WIDTH - MARGIN - 90.0;
        let _ = writeln!(out, r#"<rect x="{lx}" y="{:.1}" width="12" height="3" fill="{color}"/>"#, ly - 4.0);
        let _ = writeln!(out, r#"<text x="{}" y="{ly:.1}">{}</text>"#, lx + 18.0, escape(&s.name));
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plots_are_well_formed() {
        let s = scatter("emb", &[0.0, 0.0, 1.0, 2.0, -1.0, 0.5], &[0, 1, -1]);
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert_eq!(s.matches("<circle").count(), 3);
        assert!(s.contains(NOISE_COLOR));
        let series = [Series { name: "a<b".into(), x: vec![1.0, 2.0], mean: vec![0.5, f64::NAN], std: vec![0.1, 0.0] }];
        let l = line_plot("t", "x", "ami", &series);
        assert!(l.contains("a&lt;b"));
        assert_eq!(l.matches("<polyline").count(), 1);
    }
}
