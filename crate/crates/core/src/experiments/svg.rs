//! Minimal standalone SVG plots: line charts and heatmaps.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn header(out: &mut String, title: &str, xlabel: &str, ylabel: &str) {
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{:.1}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">{}</text>\n\
         <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n\
         <text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 {:.1})\">{}</text>\n",
        (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
        escape(title),
        (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
        HEIGHT - 12.0,
        escape(xlabel),
        (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
        (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
        escape(ylabel),
    );
}

fn axes(out: &mut String, x: (f64, f64), y: (f64, f64), log_x: bool) {
    let (x0, x1) = (MARGIN_L, WIDTH - MARGIN_R);
    let (y0, y1) = (HEIGHT - MARGIN_B, MARGIN_T);
    let _ = writeln!(
        out,
        "<rect x=\"{x0}\" y=\"{y1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"black\"/>",
        x1 - x0,
        y0 - y1
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let xv = x.0 + f * (x.1 - x.0);
        let label = if log_x { format!("1e{xv:.1}") } else { format!("{xv:.3}") };
        let px = x0 + f * (x1 - x0);
        let _ = writeln!(
            out,
            "<text x=\"{px:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">{label}</text>",
            y0 + 14.0
        );
        let yv = y.0 + f * (y.1 - y.0);
        let py = y0 + f * (y1 - y0);
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">{yv:.1}</text>",
            x0 - 4.0,
            py + 3.0
        );
    }
}

/// Line chart of several series; `log_x` plots `log10(x)`.
pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, series: &[Series], log_x: bool) -> String {
    let tx = |x: f64| if log_x { x.log10() } else { x };
    let xs = extent(series.iter().flat_map(|s| s.points.iter().map(|p| tx(p.0))));
    let ys = extent(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let map = |x: f64, y: f64| {
        (
            MARGIN_L + (tx(x) - xs.0) / (xs.1 - xs.0) * (WIDTH - MARGIN_L - MARGIN_R),
            HEIGHT - MARGIN_B - (y - ys.0) / (ys.1 - ys.0) * (HEIGHT - MARGIN_T - MARGIN_B),
        )
    };
    let mut out = String::new();
    header(&mut out, title, xlabel, ylabel);
    axes(&mut out, xs, ys, log_x);
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|p| tx(p.0).is_finite() && p.1.is_finite())
            .map(|&(x, y)| {
                let (px, py) = map(x, y);
                format!("{px:.2},{py:.2}")
            })
            .collect();
        let _ = writeln!(
            out,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
            pts.join(" ")
        );
        let ly = MARGIN_T + 14.0 * (i as f64 + 1.0);
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{ly:.1}\" fill=\"{color}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>",
            WIDTH - MARGIN_R + 8.0,
            escape(&s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn colormap(f: f64) -> String {
    // dark blue -> yellow
    let f = f.clamp(0.0, 1.0);
    let r = (30.0 + 225.0 * f) as u8;
    let g = (30.0 + 200.0 * f) as u8;
    let b = (120.0 * (1.0 - f)) as u8 + 20;
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// Heatmap of `values[row][col]`, rows along y, clamped to `[floor, max]`.
pub fn heatmap(
    title: &str,
    xlabel: &str,
    ylabel: &str,
    x: &[f64],
    y: &[f64],
    values: &[Vec<f64>],
    floor: f64,
) -> String {
    let xs = extent(x.iter().copied());
    let ys = extent(y.iter().copied());
    let hi = values
        .iter()
        .flatten()
        .copied()
        .filter(|v| v.is_finite())
        .fold(floor, f64::max);
    let span = if hi > floor { hi - floor } else { 1.0 };
    let mut out = String::new();
    header(&mut out, title, xlabel, ylabel);
    let cw = (WIDTH - MARGIN_L - MARGIN_R) / x.len().max(1) as f64;
    let ch = (HEIGHT - MARGIN_T - MARGIN_B) / y.len().max(1) as f64;
    for (r, row) in values.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            let f = if v.is_finite() { (v.max(floor) - floor) / span } else { 0.0 };
            let _ = writeln!(
                out,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>",
                MARGIN_L + c as f64 * cw,
                HEIGHT - MARGIN_B - (r as f64 + 1.0) * ch,
                cw + 0.05,
                ch + 0.05,
                colormap(f)
            );
        }
    }
    axes(&mut out, xs, ys, false);
    out.push_str("</svg>\n");
    out
}
