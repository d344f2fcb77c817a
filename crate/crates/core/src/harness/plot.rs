//! Error-vs-n curves as a standalone SVG: one mean polyline and one ±std
//! band per method, log-scaled x axis.

use super::records::{summarize, BenchRecord};
use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 140.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 4] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728"];

pub fn plot_svg(records: &[BenchRecord]) -> String {
    let summaries: Vec<_> = summarize(records)
        .into_iter()
        .filter(|s| s.count > 0)
        .collect();

    let (mut n_lo, mut n_hi) = summaries
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
            (lo.min(s.n as f64), hi.max(s.n as f64))
        });
    if !n_lo.is_finite() {
        (n_lo, n_hi) = (1.0, 10.0);
    }
    if n_hi <= n_lo {
        n_hi = n_lo * 10.0;
    }
    let y_hi = summaries
        .iter()
        .map(|s| s.mean_error + s.std_error)
        .fold(0.0, f64::max)
        .max(1e-12);
    let y_hi = if y_hi <= 1.0 { 1.0_f64.min((y_hi * 1.1 * 10.0).ceil() / 10.0) } else { y_hi * 1.1 };

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |n: f64| LEFT + (n.ln() - n_lo.ln()) / (n_hi.ln() - n_lo.ln()) * plot_w;
    let sy = |e: f64| TOP + (1.0 - e / y_hi) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let x0 = LEFT;
    let y0 = TOP + plot_h;
    let _ = writeln!(
        svg,
        r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{:.2}" y2="{y0:.2}" stroke="black"/>"#,
        LEFT + plot_w
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{x0:.2}" y1="{TOP:.2}" x2="{x0:.2}" y2="{y0:.2}" stroke="black"/>"#
    );

    // Decade ticks on x, five ticks on y.
    let mut decade = 10f64.powf(n_lo.log10().floor());
    while decade <= n_hi * 1.000_001 {
        if decade >= n_lo * 0.999_999 {
            let x = sx(decade);
            let _ = writeln!(
                svg,
                r#"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"#,
                y0 + 5.0,
                y0 + 18.0,
                decade
            );
        }
        decade *= 10.0;
    }
    for i in 0..=5 {
        let e = y_hi * i as f64 / 5.0;
        let y = sy(e);
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{e:.2}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">n</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="15" y="{:.2}" font-size="12" text-anchor="middle" transform="rotate(-90 15 {:.2})">error</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    let mut methods: Vec<_> = summaries.iter().map(|s| s.method).collect();
    methods.dedup();
    for (idx, method) in methods.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let pts: Vec<_> = summaries.iter().filter(|s| s.method == *method).collect();
        let upper: Vec<String> = pts
            .iter()
            .map(|s| format!("{:.2},{:.2}", sx(s.n as f64), sy((s.mean_error + s.std_error).min(y_hi))))
            .collect();
        let lower: Vec<String> = pts
            .iter()
            .rev()
            .map(|s| format!("{:.2},{:.2}", sx(s.n as f64), sy((s.mean_error - s.std_error).max(0.0))))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polygon points="{} {}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
            upper.join(" "),
            lower.join(" ")
        );
        let line: Vec<String> = pts
            .iter()
            .map(|s| format!("{:.2},{:.2}", sx(s.n as f64), sy(s.mean_error)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            line.join(" ")
        );
        let ly = TOP + 15.0 + 18.0 * idx as f64;
        let lx = LEFT + plot_w + 10.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}" font-size="11">{method}</text>"#,
            lx + 20.0,
            lx + 25.0,
            ly + 4.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}
