//! Minimal SVG line charts: first CSV column on x, every other column a series.

use std::fmt::Write as _;

use super::csv::CsvTable;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 48.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-300 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Renders `table` as a line chart. NaN cells break a series into pieces.
pub fn render(table: &CsvTable, title: &str) -> String {
    let (x0, x1) = bounds(table.rows.iter().map(|r| r[0]));
    let (y0, y1) = bounds(table.rows.iter().flat_map(|r| r[1..].iter().copied()));
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    let w = &mut out;
    writeln!(w, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#).unwrap();
    writeln!(w, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(w, r#"<text x="{}" y="20" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#, WIDTH / 2.0, escape(title)).unwrap();
    writeln!(
        w,
        r#"<path d="M{m} {b} H{r} M{m} {b} V{m}" stroke="black" fill="none"/>"#,
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    )
    .unwrap();
    for (v, x, y, anchor) in [
        (x0, MARGIN, HEIGHT - MARGIN + 16.0, "start"),
        (x1, WIDTH - MARGIN, HEIGHT - MARGIN + 16.0, "end"),
    ] {
        writeln!(w, r#"<text x="{x}" y="{y}" font-family="sans-serif" font-size="11" text-anchor="{anchor}">{v:.4}</text>"#).unwrap();
    }
    for (v, y) in [(y0, HEIGHT - MARGIN), (y1, MARGIN)] {
        writeln!(w, r#"<text x="{}" y="{y}" font-family="sans-serif" font-size="11" text-anchor="end">{v:.4}</text>"#, MARGIN - 4.0).unwrap();
    }

    for (series, name) in table.header.iter().enumerate().skip(1) {
        let color = COLORS[(series - 1) % COLORS.len()];
        let mut d = String::new();
        let mut pen_down = false;
        for row in &table.rows {
            let (x, y) = (row[0], row[series]);
            if !(x.is_finite() && y.is_finite()) {
                pen_down = false;
                continue;
            }
            let cmd = if pen_down { 'L' } else { 'M' };
            write!(d, "{cmd}{:.2} {:.2} ", sx(x), sy(y)).unwrap();
            pen_down = true;
        }
        writeln!(w, r#"<path d="{}" stroke="{color}" fill="none" stroke-width="1.2"/>"#, d.trim_end()).unwrap();
        let ly = MARGIN + 14.0 * series as f64;
        writeln!(w, r#"<text x="{}" y="{ly}" font-family="sans-serif" font-size="11" fill="{color}">{}</text>"#, WIDTH - MARGIN + 4.0 - 90.0, escape(name)).unwrap();
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_path_per_series() {
        let mut t = CsvTable::new(["t", "a", "b"]);
        for k in 0..10 {
            let x = k as f64;
            t.push(vec![x, x * x, if k == 4 { f64::NAN } else { -x }]);
        }
        let svg = render(&t, "demo <1>");
        assert_eq!(svg.matches("stroke-width=\"1.2\"").count(), 2);
        assert!(svg.contains("demo &lt;1&gt;"));
        assert_eq!(svg, render(&CsvTable::parse(&t.render()).unwrap(), "demo <1>"));
    }
}
