//! Training-curve rendering: CSV in, self-contained SVG out.
//!
//! The first CSV column is the x axis, every further column becomes one
//! polyline. Axis labels come from the header, a legend appears once
//! there are two or more metrics, and the output bytes are a pure
//! function of the input bytes.

use std::fmt::Write as _;

use crate::sha256_hex;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 50.0;
const TICKS: usize = 5;

const PALETTE: [&str; 6] =
    ["#1b6ca8", "#c0392b", "#27ae60", "#8e44ad", "#e67e22", "#16a085"];

/// Renders a curve CSV (optionally with `#` comment lines) to SVG.
pub fn render_curve_svg(csv: &str) -> Result<String, String> {
    let mut lines = csv.lines().filter(|l| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('#')
    });
    let header: Vec<String> = lines
        .next()
        .ok_or("curve file is empty")?
        .split(',')
        .map(|c| c.trim().to_string())
        .collect();
    if header.len() < 2 {
        return Err("curve file needs an x column and at least one metric".into());
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, line) in lines.enumerate() {
        let row: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| format!("curve data row {}: {e}", i + 1))?;
        if row.len() != header.len() {
            return Err(format!(
                "curve data row {}: {} fields, header has {}",
                i + 1,
                row.len(),
                header.len()
            ));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(format!("curve data row {}: non-finite value", i + 1));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err("curve file has no data rows".into());
    }

    let metrics = header.len() - 1;
    let margin_right = if metrics > 1 { 170.0 } else { 40.0 };
    let (x0, x1) = (MARGIN_LEFT, WIDTH - margin_right);
    let (y0, y1) = (MARGIN_TOP, HEIGHT - MARGIN_BOTTOM);

    let span = |lo: f64, hi: f64| if hi > lo { (lo, hi) } else { (lo - 1.0, hi + 1.0) };
    let (x_min, x_max) = span(
        rows.iter().map(|r| r[0]).fold(f64::INFINITY, f64::min),
        rows.iter().map(|r| r[0]).fold(f64::NEG_INFINITY, f64::max),
    );
    let (y_min, y_max) = span(
        rows.iter().flat_map(|r| r[1..].iter().copied()).fold(f64::INFINITY, f64::min),
        rows.iter().flat_map(|r| r[1..].iter().copied()).fold(f64::NEG_INFINITY, f64::max),
    );
    let sx = |v: f64| x0 + (v - x_min) / (x_max - x_min) * (x1 - x0);
    let sy = |v: f64| y1 - (v - y_min) / (y_max - y_min) * (y1 - y0);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(
        svg,
        "<!-- tool_version={} input_sha256={} -->",
        crate::TOOL_VERSION,
        sha256_hex(csv.as_bytes())
    );
    let _ = writeln!(svg, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");

    // Grid and tick labels.
    for k in 0..=TICKS {
        let f = k as f64 / TICKS as f64;
        let gx = x0 + f * (x1 - x0);
        let gy = y1 - f * (y1 - y0);
        let _ = writeln!(
            svg,
            "<line x1=\"{gx:.2}\" y1=\"{y0}\" x2=\"{gx:.2}\" y2=\"{y1}\" \
             stroke=\"#ddd\" stroke-width=\"1\"/>"
        );
        let _ = writeln!(
            svg,
            "<line x1=\"{x0}\" y1=\"{gy:.2}\" x2=\"{x1}\" y2=\"{gy:.2}\" \
             stroke=\"#ddd\" stroke-width=\"1\"/>"
        );
        let _ = writeln!(
            svg,
            "<text x=\"{gx:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>",
            y1 + 16.0,
            tick_label(x_min + f * (x_max - x_min)),
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>",
            x0 - 6.0,
            gy + 4.0,
            tick_label(y_min + f * (y_max - y_min)),
        );
    }
    let _ = writeln!(
        svg,
        "<rect x=\"{x0}\" y=\"{y0}\" width=\"{:.2}\" height=\"{:.2}\" \
         fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>",
        x1 - x0,
        y1 - y0
    );

    // Axis labels from the header.
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"14\">{}</text>",
        (x0 + x1) / 2.0,
        HEIGHT - 12.0,
        escape(&header[0]),
    );
    let y_label = if metrics == 1 { header[1].clone() } else { "value".to_string() };
    let _ = writeln!(
        svg,
        "<text x=\"16\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"14\" \
         transform=\"rotate(-90 16 {:.2})\">{}</text>",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(&y_label),
    );

    for (m, name) in header[1..].iter().enumerate() {
        let color = PALETTE[m % PALETTE.len()];
        let points: Vec<String> = rows
            .iter()
            .map(|r| format!("{:.2},{:.2}", sx(r[0]), sy(r[m + 1])))
            .collect();
        let _ = writeln!(
            svg,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" \
             points=\"{}\"/>",
            points.join(" ")
        );
        if metrics > 1 {
            let ly = y0 + 14.0 + 18.0 * m as f64;
            let _ = writeln!(
                svg,
                "<line x1=\"{:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" \
                 stroke=\"{color}\" stroke-width=\"2\"/>",
                x1 + 10.0,
                x1 + 30.0
            );
            let _ = writeln!(
                svg,
                "<text x=\"{:.2}\" y=\"{:.2}\">{}</text>",
                x1 + 36.0,
                ly + 4.0,
                escape(name),
            );
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn tick_label(v: f64) -> String {
    if v != 0.0 && v.abs() < 1e-3 {
        return format!("{v:.1e}");
    }
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    const CURVE: &str = "step,train_loss,test_acc\n1,0.9,0.5\n10,0.4,0.8\n20,0.2,0.95\n";

    #[test]
    fn renders_one_polyline_per_metric_with_a_legend() {
        let svg = render_curve_svg(CURVE).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains(">step<"), "x axis label from the header");
        assert!(svg.contains(">train_loss<"), "legend entry");
        assert!(svg.contains(">test_acc<"), "legend entry");
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn single_metric_labels_the_y_axis_and_skips_the_legend() {
        let svg = render_curve_svg("step,loss\n1,2\n2,1\n").unwrap();
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert_eq!(svg.matches(">loss<").count(), 1, "axis label only, no legend");
    }

    #[test]
    fn output_is_a_pure_function_of_the_input() {
        assert_eq!(render_curve_svg(CURVE).unwrap(), render_curve_svg(CURVE).unwrap());
        assert!(render_curve_svg(CURVE).unwrap().contains(&sha256_hex(CURVE.as_bytes())));
    }

    #[test]
    fn empty_and_malformed_inputs_are_rejected() {
        assert!(render_curve_svg("").is_err());
        assert!(render_curve_svg("step,loss\n").unwrap_err().contains("no data rows"));
        assert!(render_curve_svg("step\n1\n").is_err());
        let err = render_curve_svg("step,loss\n1,2\n3,oops\n").unwrap_err();
        assert!(err.contains("row 2"), "{err}");
        assert!(render_curve_svg("step,loss\n1,2\n3\n").unwrap_err().contains("fields"));
    }

    #[test]
    fn comment_lines_are_ignored() {
        let with = format!("# tool_version=x\n{CURVE}");
        let svg = render_curve_svg(&with).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
    }

    #[test]
    fn constant_series_still_render() {
        let svg = render_curve_svg("step,loss\n1,5\n2,5\n").unwrap();
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(!svg.contains("NaN"));
    }
}
