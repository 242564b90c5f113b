use std::fmt::Write as _;
use std::io::Write;

use crate::error::{Error, Result};
use crate::federation::RunTrace;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Mean best fitness against fitness evaluations, as SVG.
///
/// The fitness axis is the natural log of the mean whenever every mean is
/// positive; otherwise it falls back to a linear axis and says so.
pub fn render_plot<W: Write>(traces: &[RunTrace], description: &str, mut dest: W) -> Result<()> {
    let Some(first) = traces.first() else {
        return Err(Error::invalid("nothing to plot"));
    };
    let len = traces.iter().map(|t| t.records.len()).min().unwrap_or(0);
    if len == 0 {
        return Err(Error::invalid("cannot plot empty traces"));
    }
    let fe: Vec<f64> = first.records[..len].iter().map(|r| r.fe as f64).collect();
    let mean: Vec<f64> =
        (0..len).map(|i| traces.iter().map(|t| t.records[i].best_fitness).sum::<f64>() / traces.len() as f64).collect();
    let log_axis = mean.iter().all(|&v| v > 0.0);
    let ys: Vec<f64> = if log_axis { mean.iter().map(|v| v.ln()).collect() } else { mean.clone() };

    let (x0, x1) = (fe[0], fe[len - 1].max(fe[0] + 1.0));
    let (mut y0, mut y1) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if y1 - y0 < 1e-12 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, "<desc>{}</desc>", escape(description));
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(svg, r#"<path d="M{left} {top} L{left} {bottom} L{right} {bottom}" fill="none" stroke="black"/>"#);
    for (x, anchor) in [(x0, "start"), (x1, "end")] {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{}" font-size="12" text-anchor="{anchor}">{x}</text>"#,
            sx(x),
            bottom + 18.0
        );
    }
    for y in [y0, y1] {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{:.2}" font-size="12" text-anchor="end">{y:.3}</text>"#,
            left - 6.0,
            sy(y)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">FEs</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0
    );
    let label =
        if log_axis { "ln(mean best fitness)" } else { "mean best fitness (linear: non-positive values present)" };
    let _ = writeln!(
        svg,
        r#"<text x="15" y="{}" font-size="13" text-anchor="middle" transform="rotate(-90 15 {})">{label}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    let points: Vec<String> = fe.iter().zip(&ys).map(|(&x, &y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
    let _ =
        writeln!(svg, r#"<polyline fill="none" stroke="steelblue" stroke-width="2" points="{}"/>"#, points.join(" "));
    let _ = writeln!(svg, "</svg>");
    dest.write_all(svg.as_bytes())?;
    Ok(())
}
