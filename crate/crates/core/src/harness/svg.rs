//! Tiny deterministic SVG plotting: line series and bar charts with fixed
//! layout, enough for the report figures. Identical inputs give identical
//! files.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 62.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 36.0;
const MARGIN_B: f64 = 48.0;

const PALETTE: [&str; 8] = [
    "#d33682", "#268bd2", "#cb4b16", "#2aa198", "#6c71c4", "#859900", "#b58900", "#586e75",
];

pub struct LineSeries {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

pub struct Bar {
    pub label: String,
    pub value: f64,
    /// Optional error-bar half height.
    pub err: Option<f64>,
    pub group: usize,
}

fn axis_bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        if v.is_finite() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if lo == hi {
        lo -= 0.5;
        hi += 0.5;
    }
    let pad = (hi - lo) * 0.07;
    (lo - pad, hi + pad)
}

fn header(title: &str) -> String {
    let mut s = String::new();
    write!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        MARGIN_L + (WIDTH - MARGIN_L - MARGIN_R) / 2.0,
        escape(title)
    )
    .unwrap();
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn x_pos(v: f64, lo: f64, hi: f64) -> f64 {
    MARGIN_L + (v - lo) / (hi - lo) * (WIDTH - MARGIN_L - MARGIN_R)
}

fn y_pos(v: f64, lo: f64, hi: f64) -> f64 {
    HEIGHT - MARGIN_B - (v - lo) / (hi - lo) * (HEIGHT - MARGIN_T - MARGIN_B)
}

fn axes(svg: &mut String, x_label: &str, y_label: &str, xb: (f64, f64), yb: (f64, f64)) {
    let x0 = MARGIN_L;
    let x1 = WIDTH - MARGIN_R;
    let y0 = HEIGHT - MARGIN_B;
    let y1 = MARGIN_T;
    write!(
        svg,
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n\
         <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>\n"
    )
    .unwrap();
    for i in 0..=4 {
        let fx = xb.0 + (xb.1 - xb.0) * i as f64 / 4.0;
        let px = x_pos(fx, xb.0, xb.1);
        write!(
            svg,
            "<line x1=\"{px}\" y1=\"{y0}\" x2=\"{px}\" y2=\"{}\" stroke=\"black\"/>\n\
             <text x=\"{px}\" y=\"{}\" text-anchor=\"middle\">{fx:.2}</text>\n",
            y0 + 4.0,
            y0 + 18.0
        )
        .unwrap();
        let fy = yb.0 + (yb.1 - yb.0) * i as f64 / 4.0;
        let py = y_pos(fy, yb.0, yb.1);
        write!(
            svg,
            "<line x1=\"{}\" y1=\"{py}\" x2=\"{x0}\" y2=\"{py}\" stroke=\"black\"/>\n\
             <text x=\"{}\" y=\"{}\" text-anchor=\"end\">{fy:.2}</text>\n",
            x0 - 4.0,
            x0 - 7.0,
            py + 4.0
        )
        .unwrap();
    }
    write!(
        svg,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n\
         <text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n",
        MARGIN_L + (WIDTH - MARGIN_L - MARGIN_R) / 2.0,
        HEIGHT - 10.0,
        escape(x_label),
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    )
    .unwrap();
}

/// Multi-series line plot with an optional horizontal reference line.
pub fn line_plot(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[LineSeries],
    reference: Option<(f64, &str)>,
) -> String {
    let mut svg = header(title);
    let xb = axis_bounds(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let mut yvals: Vec<f64> = series.iter().flat_map(|s| s.points.iter().map(|p| p.1)).collect();
    if let Some((r, _)) = reference {
        yvals.push(r);
    }
    let yb = axis_bounds(yvals.into_iter());
    axes(&mut svg, x_label, y_label, xb, yb);
    if let Some((r, label)) = reference {
        let py = y_pos(r, yb.0, yb.1);
        write!(
            svg,
            "<line x1=\"{}\" y1=\"{py}\" x2=\"{}\" y2=\"{py}\" stroke=\"#999\" stroke-dasharray=\"6,4\"/>\n\
             <text x=\"{}\" y=\"{}\" fill=\"#666\">{}</text>\n",
            MARGIN_L,
            WIDTH - MARGIN_R,
            WIDTH - MARGIN_R + 6.0,
            py + 4.0,
            escape(label)
        )
        .unwrap();
    }
    for (si, s) in series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", x_pos(x, xb.0, xb.1), y_pos(y, yb.0, yb.1)))
            .collect();
        write!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.6\"/>\n",
            pts.join(" ")
        )
        .unwrap();
        let ly = MARGIN_T + 16.0 * si as f64;
        write!(
            svg,
            "<line x1=\"{}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"3\"/>\n\
             <text x=\"{}\" y=\"{}\">{}</text>\n",
            WIDTH - MARGIN_R + 8.0,
            WIDTH - MARGIN_R + 28.0,
            WIDTH - MARGIN_R + 34.0,
            ly + 4.0,
            escape(&s.label)
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    svg
}

/// Grouped bar chart with optional error bars and a reference line.
pub fn bar_plot(
    title: &str,
    y_label: &str,
    bars: &[Bar],
    reference: Option<(f64, &str)>,
) -> String {
    let mut svg = header(title);
    let mut yvals: Vec<f64> = bars
        .iter()
        .flat_map(|b| {
            let e = b.err.unwrap_or(0.0);
            [b.value - e, b.value + e, 0.0]
        })
        .collect();
    if let Some((r, _)) = reference {
        yvals.push(r);
    }
    let yb = axis_bounds(yvals.into_iter());
    let xb = (0.0, bars.len() as f64);
    axes(&mut svg, "", y_label, xb, yb);
    if let Some((r, label)) = reference {
        let py = y_pos(r, yb.0, yb.1);
        write!(
            svg,
            "<line x1=\"{}\" y1=\"{py}\" x2=\"{}\" y2=\"{py}\" stroke=\"#999\" stroke-dasharray=\"6,4\"/>\n\
             <text x=\"{}\" y=\"{}\" fill=\"#666\">{}</text>\n",
            MARGIN_L,
            WIDTH - MARGIN_R,
            WIDTH - MARGIN_R + 6.0,
            py + 4.0,
            escape(label)
        )
        .unwrap();
    }
    let slot = (WIDTH - MARGIN_L - MARGIN_R) / bars.len() as f64;
    let y_zero = y_pos(0.0f64.max(yb.0).min(yb.1), yb.0, yb.1);
    for (bi, b) in bars.iter().enumerate() {
        let color = PALETTE[b.group % PALETTE.len()];
        let x = MARGIN_L + slot * bi as f64 + slot * 0.15;
        let w = slot * 0.7;
        let y = y_pos(b.value, yb.0, yb.1);
        let (top, h) = if y < y_zero { (y, y_zero - y) } else { (y_zero, y - y_zero) };
        write!(
            svg,
            "<rect x=\"{x:.2}\" y=\"{top:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" fill=\"{color}\"/>\n"
        )
        .unwrap();
        if let Some(e) = b.err {
            let cx = x + w / 2.0;
            let y_hi = y_pos(b.value + e, yb.0, yb.1);
            let y_lo = y_pos(b.value - e, yb.0, yb.1);
            write!(
                svg,
                "<line x1=\"{cx:.2}\" y1=\"{y_hi:.2}\" x2=\"{cx:.2}\" y2=\"{y_lo:.2}\" stroke=\"black\"/>\n"
            )
            .unwrap();
        }
        write!(
            svg,
            "<text x=\"{:.2}\" y=\"{}\" text-anchor=\"end\" transform=\"rotate(-35 {:.2} {})\">{}</text>\n",
            x + w / 2.0,
            HEIGHT - MARGIN_B + 14.0,
            x + w / 2.0,
            HEIGHT - MARGIN_B + 14.0,
            escape(&b.label)
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plots_are_deterministic_and_well_formed() {
        let series = vec![
            LineSeries { label: "a".into(), points: vec![(1.0, 2.0), (2.0, 3.0), (3.0, 1.0)] },
            LineSeries { label: "b".into(), points: vec![(1.0, 0.5), (2.0, 0.6)] },
        ];
        let s1 = line_plot("t", "x", "y", &series, Some((1.0, "chance")));
        let s2 = line_plot("t", "x", "y", &series, Some((1.0, "chance")));
        assert_eq!(s1, s2);
        assert!(s1.starts_with("<svg"));
        assert!(s1.trim_end().ends_with("</svg>"));
        assert!(s1.contains("polyline"));

        let bars = vec![
            Bar { label: "one".into(), value: 0.4, err: Some(0.1), group: 0 },
            Bar { label: "two".into(), value: -0.2, err: None, group: 1 },
        ];
        let b = bar_plot("bars", "v", &bars, Some((1.0 / 6.0, "chance")));
        assert!(b.contains("rect"));
        assert!(b.contains("chance"));
    }
}
