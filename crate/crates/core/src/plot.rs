//! Minimal SVG line plots. Presentation only: plots are drawn from CSV files
//! that have already been written, and nothing reads them back.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::read_columns;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN: f64 = 60.0;

fn bounds(v: &[f64]) -> (f64, f64) {
    let (lo, hi) = v
        .iter()
        .filter(|x| x.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

/// Renders one polyline with axis labels and min/max tick values.
pub fn line_plot(x: &[f64], y: &[f64], x_label: &str, y_label: &str, log_y: bool) -> String {
    let yt: Vec<f64> = if log_y {
        y.iter().map(|v| if *v > 0.0 { v.log10() } else { f64::NAN }).collect()
    } else {
        y.to_vec()
    };
    let (x0, x1) = bounds(x);
    let (y0, y1) = bounds(&yt);
    let px = |v: f64| MARGIN + (v - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |v: f64| HEIGHT - MARGIN - (v - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let mut points = String::new();
    for (&a, &b) in x.iter().zip(&yt) {
        if a.is_finite() && b.is_finite() {
            let _ = write!(points, "{:.2},{:.2} ", px(a), py(b));
        }
    }
    let _ = writeln!(
        s,
        r#"<polyline fill="none" stroke="steelblue" stroke-width="1.2" points="{}"/>"#,
        points.trim_end()
    );
    let ytick = |v: f64| if log_y { format!("1e{v:.1}") } else { format!("{v:.4e}") };
    let bottom = HEIGHT - MARGIN;
    let _ = writeln!(s, r#"<text x="{MARGIN}" y="{}" >{x0:.4e}</text>"#, bottom + 16.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{x1:.4e}</text>"#, WIDTH - MARGIN, bottom + 16.0);
    let _ = writeln!(s, r#"<text x="{}" y="{bottom}" text-anchor="end">{}</text>"#, MARGIN - 4.0, ytick(y0));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, MARGIN - 4.0, MARGIN + 10.0, ytick(y1));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#, WIDTH / 2.0, HEIGHT - 16.0);
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{y_label}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    s.push_str("</svg>\n");
    s
}

/// Plots column `y_col` against `x_col` of a CSV file into `svg_path`.
pub fn plot_csv(csv_path: &Path, x_col: &str, y_col: &str, svg_path: &Path, log_y: bool) -> Result<()> {
    let cols = read_columns(csv_path, &[x_col, y_col])?;
    if cols[0].is_empty() {
        return Err(Error::Schema(format!("{}: no rows to plot", csv_path.display())));
    }
    std::fs::write(svg_path, line_plot(&cols[0], &cols[1], x_col, y_col, log_y))?;
    Ok(())
}
