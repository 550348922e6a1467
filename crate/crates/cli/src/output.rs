//! CSV and SVG writers.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::{CliError, Result};

/// 17 significant digits, enough to round-trip any `f64`.
pub fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

/// Column label for a ray-indexed quantity, e.g. `f_y(-6.9314718055994529e-1)`.
pub fn labelled(name: &str, y: f64) -> String {
    format!("{name}({})", sci(y))
}

pub fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

pub fn write_file(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// CSV text with a header row.
pub fn csv_string<I, R>(header: &[&str], rows: I) -> Result<String>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io {
        path: PathBuf::from("<csv buffer>"),
        source: e.into_error(),
    })?;
    Ok(String::from_utf8(bytes).expect("csv of utf-8 fields"))
}

pub fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    write_file(path, &csv_string(header, rows)?)
}

/// One polyline of a plot.
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// A minimal line plot: frame, min/max tick labels, one polyline per series.
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN: f64 = 70.0;
const MAX_POINTS: usize = 4000;
const COLOURS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

impl LinePlot {
    pub fn to_svg(&self) -> String {
        let pts = || self.series.iter().flat_map(|s| s.points.iter());
        let (x0, x1) = bounds(pts().map(|p| p.0));
        let (y0, y1) = bounds(pts().map(|p| p.1));
        let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
        let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
        let _ = writeln!(
            s,
            r#"<polyline points="{l},{t} {l},{b} {r},{b}" fill="none" stroke="black"/>"#
        );
        let _ = writeln!(s, r#"<text x="{l}" y="{}" text-anchor="middle">{x0:.4}</text>"#, b + 16.0);
        let _ = writeln!(s, r#"<text x="{r}" y="{}" text-anchor="middle">{x1:.4}</text>"#, b + 16.0);
        let _ = writeln!(s, r#"<text x="{}" y="{b}" text-anchor="end">{y0:.4e}</text>"#, l - 4.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{y1:.4e}</text>"#, l - 4.0, t + 4.0);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            HEIGHT - 20.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(&self.y_label)
        );
        for (k, series) in self.series.iter().enumerate() {
            let colour = COLOURS[k % COLOURS.len()];
            let stride = series.points.len().div_ceil(MAX_POINTS).max(1);
            let mut path = String::new();
            for &(x, y) in series.points.iter().step_by(stride).filter(|p| p.0.is_finite() && p.1.is_finite()) {
                let _ = write!(path, "{:.2},{:.2} ", px(x), py(y));
            }
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1"/>"#,
                path.trim_end()
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" fill="{colour}">{}</text>"#,
                r - 150.0,
                t + 14.0 * k as f64,
                escape(&series.label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_carry_seventeen_digits() {
        assert_eq!(sci(0.1), "1.0000000000000001e-1");
        assert_eq!(sci(0.1).parse::<f64>().unwrap(), 0.1);
        assert_eq!(sci(-2.0), "-2.0000000000000000e0");
    }

    #[test]
    fn csv_has_header_and_rows() {
        let body = csv_string(&["t", "x"], [[sci(1.0), sci(2.0)]]).unwrap();
        assert_eq!(body, "t,x\n1.0000000000000000e0,2.0000000000000000e0\n");
    }

    #[test]
    fn plot_escapes_text() {
        let plot = LinePlot {
            title: "a < b & c".into(),
            x_label: "t".into(),
            y_label: "f".into(),
            series: vec![Series {
                label: "s".into(),
                points: vec![(0.0, 1.0), (1.0, f64::NAN), (2.0, 3.0)],
            }],
        };
        let svg = plot.to_svg();
        assert!(svg.contains("a &lt; b &amp; c"));
        assert!(svg.ends_with("</svg>\n"));
    }
}
