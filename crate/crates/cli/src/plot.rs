//! SVG rendering of node positions in the logarithmic strip.

use std::f64::consts::PI;
use std::fmt::Write;

use necks::Configuration;
use num_complex::Complex64;

const WIDTH: f64 = 600.0;
const STRIP_HEIGHT: f64 = 200.0;
const PAD: f64 = 12.0;
const MARKER: f64 = 6.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

/// Plot points `ln q + 2 pi i m` for `m = 0..periods`, principal branch.
pub fn points(config: &Configuration, periods: usize) -> Vec<(usize, Complex64)> {
    let mut out = Vec::new();
    for m in 0..periods {
        for (l, layer) in config.nodes.iter().enumerate() {
            for q in layer {
                out.push((l, q.ln() + Complex64::new(0.0, 2.0 * PI * m as f64)));
            }
        }
    }
    out
}

fn marker(out: &mut String, layer: usize, x: f64, y: f64) {
    let color = COLORS[layer % COLORS.len()];
    let h = MARKER / 2.0;
    let _ = match layer % 3 {
        0 => writeln!(
            out,
            r#"<circle cx="{x:.3}" cy="{y:.3}" r="{h}" fill="{color}"/>"#
        ),
        1 => writeln!(
            out,
            r#"<rect x="{:.3}" y="{:.3}" width="{MARKER}" height="{MARKER}" fill="{color}"/>"#,
            x - h,
            y - h
        ),
        _ => writeln!(
            out,
            r#"<polygon points="{:.3},{:.3} {:.3},{:.3} {:.3},{:.3} {:.3},{:.3}" fill="{color}"/>"#,
            x,
            y - h,
            x + h,
            y,
            x,
            y + h,
            x - h,
            y
        ),
    };
}

/// The whole document; the imaginary axis runs upward, one `2 pi` strip per
/// 200 px.
pub fn render(config: &Configuration, periods: usize) -> String {
    let height = STRIP_HEIGHT * periods as f64;
    let pts = points(config, periods);
    let (lo, hi) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, w)| {
            (lo.min(w.re), hi.max(w.re))
        });
    let span = (hi - lo).max(1.0);
    let (lo, hi) = (lo - 0.1 * span, hi + 0.1 * span);
    let x_of = |re: f64| PAD + (re - lo) / (hi - lo) * (WIDTH - 2.0 * PAD);
    let top = -PI + 2.0 * PI * periods as f64;
    let y_of = |im: f64| PAD + (top - im) / (2.0 * PI * periods as f64) * (height - 2.0 * PAD);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for m in 0..=periods {
        let y = y_of(-PI + 2.0 * PI * m as f64);
        let _ = writeln!(
            out,
            r#"<line class="strip" x1="0" y1="{y:.3}" x2="{WIDTH}" y2="{y:.3}" stroke="gray" stroke-dasharray="4 3"/>"#
        );
    }
    for (l, w) in &pts {
        marker(&mut out, *l, x_of(w.re), y_of(w.im));
    }
    out.push_str("</svg>\n");
    out
}
