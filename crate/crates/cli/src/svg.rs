//! Minimal SVG heatmaps with ten fixed colour bands.

use std::fmt::Write;

use ndarray::Array2;

const BANDS: [&str; 10] = [
    "#313695", "#4575b4", "#74add1", "#abd9e9", "#e0f3f8", "#fee090", "#fdae61", "#f46d43",
    "#d73027", "#a50026",
];

/// Largest number of cells drawn per axis; larger inputs are strided.
const MAX_CELLS: usize = 200;

pub struct Axes<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
}

/// `values[[iy, ix]]`, `iy` increasing upwards.
pub fn heatmap(values: &Array2<f64>, axes: &Axes) -> String {
    let (ny, nx) = values.dim();
    let (lo, hi) = values
        .iter()
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let (lo, hi) = if lo < hi { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
    let band = |v: f64| (((v - lo) / (hi - lo) * 10.0).floor().max(0.0) as usize).min(9);
    let sx = nx.div_ceil(MAX_CELLS).max(1);
    let sy = ny.div_ceil(MAX_CELLS).max(1);
    let (cols, rows) = (nx.div_ceil(sx), ny.div_ceil(sy));
    let (left, top, size) = (70.0, 40.0, 400.0);
    let (cw, ch) = (size / cols as f64, size / rows as f64);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="620" height="500" viewBox="0 0 620 500">"#
    );
    let _ = writeln!(s, r#"<rect width="620" height="500" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="15" text-anchor="middle">{}</text>"#,
        left + size / 2.0,
        escape(axes.title)
    );
    for r in 0..rows {
        for c in 0..cols {
            let v = values[[r * sy, c * sx]];
            let y = top + size - (r + 1) as f64 * ch;
            let _ = writeln!(
                s,
                r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{}"/>"#,
                left + c as f64 * cw,
                y,
                cw + 0.05,
                ch + 0.05,
                BANDS[band(v)]
            );
        }
    }
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{size}" height="{size}" fill="none" stroke="black"/>"#
    );
    let label = |s: &mut String, x: f64, y: f64, anchor: &str, text: &str| {
        let _ = writeln!(
            s,
            r#"<text x="{x:.1}" y="{y:.1}" font-family="sans-serif" font-size="12" text-anchor="{anchor}">{}</text>"#,
            escape(text)
        );
    };
    label(&mut s, left, top + size + 16.0, "start", &format!("{}", axes.x_range.0));
    label(&mut s, left + size, top + size + 16.0, "end", &format!("{}", axes.x_range.1));
    label(&mut s, left + size / 2.0, top + size + 34.0, "middle", axes.x_label);
    label(&mut s, left - 6.0, top + size, "end", &format!("{}", axes.y_range.0));
    label(&mut s, left - 6.0, top + 10.0, "end", &format!("{}", axes.y_range.1));
    label(&mut s, left - 40.0, top + size / 2.0, "middle", axes.y_label);
    for (k, colour) in BANDS.iter().enumerate() {
        let y = top + size - (k + 1) as f64 * 40.0;
        let _ = writeln!(
            s,
            r#"<rect x="490" y="{y}" width="20" height="40" fill="{colour}"/>"#
        );
        label(&mut s, 516.0, y + 44.0, "start", &format!("{:.3e}", lo + k as f64 * (hi - lo) / 10.0));
    }
    label(&mut s, 516.0, top + 4.0, "start", &format!("{:.3e}", hi));
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
