//! Minimal static SVG line plots. No timestamps, no randomness: identical
//! inputs produce identical bytes.

use std::fmt::Write as _;

pub struct PlotSeries {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];
const W: f64 = 640.0;
const H: f64 = 420.0;
const ML: f64 = 62.0;
const MR: f64 = 18.0;
const MT: f64 = 34.0;
const MB: f64 = 46.0;

/// Log-log norm-vs-time plot with an optional dashed guide line of slope
/// `guide_slope` anchored at the last point of the first series.
pub fn loglog_plot(title: &str, series: &[PlotSeries], guide_slope: Option<f64>) -> String {
    let transformed: Vec<PlotSeries> = series
        .iter()
        .map(|s| PlotSeries {
            label: s.label.clone(),
            points: s
                .points
                .iter()
                .filter(|(t, v)| *v > 0.0 && *t >= 0.0)
                .map(|(t, v)| ((1.0 + t).ln(), v.ln()))
                .collect(),
        })
        .collect();
    render(title, "ln(1+t)", "ln(norm)", &transformed, guide_slope)
}

/// Plain linear plot (profile overlays).
pub fn line_plot(title: &str, x_label: &str, y_label: &str, series: &[PlotSeries]) -> String {
    render(title, x_label, y_label, series, None)
}

fn render(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[PlotSeries],
    guide_slope: Option<f64>,
) -> String {
    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for s in series {
        for &(x, y) in &s.points {
            x_min = x_min.min(x);
            x_max = x_max.max(x);
            y_min = y_min.min(y);
            y_max = y_max.max(y);
        }
    }
    if !x_min.is_finite() {
        x_min = 0.0;
        x_max = 1.0;
        y_min = 0.0;
        y_max = 1.0;
    }
    if x_max - x_min < 1e-12 {
        x_max = x_min + 1.0;
    }
    if y_max - y_min < 1e-12 {
        y_max = y_min + 1.0;
    }
    let pad = 0.05 * (y_max - y_min);
    y_min -= pad;
    y_max += pad;

    let sx = |x: f64| ML + (x - x_min) / (x_max - x_min) * (W - ML - MR);
    let sy = |y: f64| H - MB - (y - y_min) / (y_max - y_min) * (H - MT - MB);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">"
    );
    let _ = writeln!(svg, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    let _ = writeln!(
        svg,
        "<text x=\"{:.1}\" y=\"20\" font-family=\"monospace\" font-size=\"13\" text-anchor=\"middle\">{}</text>",
        0.5 * W,
        escape(title)
    );

    // frame and ticks
    let _ = writeln!(
        svg,
        "<rect x=\"{ML}\" y=\"{MT}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"#444\"/>",
        W - ML - MR,
        H - MT - MB
    );
    for i in 0..=4 {
        let fx = x_min + (x_max - x_min) * i as f64 / 4.0;
        let fy = y_min + (y_max - y_min) * i as f64 / 4.0;
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"10\" text-anchor=\"middle\">{:.2}</text>",
            sx(fx),
            H - MB + 14.0,
            fx
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"10\" text-anchor=\"end\">{:.2}</text>",
            ML - 4.0,
            sy(fy) + 3.0,
            fy
        );
        let _ = writeln!(
            svg,
            "<line x1=\"{:.1}\" y1=\"{MT}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#ddd\"/>",
            sx(fx),
            sx(fx),
            H - MB
        );
        let _ = writeln!(
            svg,
            "<line x1=\"{ML}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#ddd\"/>",
            sy(fy),
            W - MR,
            sy(fy)
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"middle\">{}</text>",
        0.5 * W,
        H - 8.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        "<text x=\"14\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"middle\" transform=\"rotate(-90 14 {:.1})\">{}</text>",
        0.5 * H,
        0.5 * H,
        escape(y_label)
    );

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut path = String::new();
        for (k, &(x, y)) in s.points.iter().enumerate() {
            let _ = write!(path, "{}{:.2},{:.2} ", if k == 0 { "M" } else { "L" }, sx(x), sy(y));
        }
        let _ = writeln!(
            svg,
            "<path d=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            path.trim_end()
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"11\" fill=\"{color}\">{}</text>",
            ML + 8.0,
            MT + 14.0 + 13.0 * i as f64,
            escape(&s.label)
        );
    }

    if let (Some(slope), Some(first)) = (guide_slope, series.first()) {
        if let (Some(&(x1, y1)), Some(&(x0, _))) = (first.points.last(), first.points.first()) {
            let y0 = y1 - slope * (x1 - x0);
            let _ = writeln!(
                svg,
                "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#666\" stroke-dasharray=\"5,4\"/>",
                sx(x0),
                sy(y0),
                sx(x1),
                sy(y1)
            );
            let _ = writeln!(
                svg,
                "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"10\" fill=\"#666\">slope {slope:.3}</text>",
                sx(x1) - 80.0,
                sy(y1) - 6.0
            );
        }
    }

    svg.push_str("</svg>\n");
    svg
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
