//! CSV reports and derived SVG line plots.

use std::fmt::Write as _;
use std::path::Path;

use super::manifest::csv_error;
use crate::error::{Error, Result};

/// Provenance columns appended to every CSV row.
#[derive(Clone, Debug, PartialEq)]
pub struct Provenance {
    pub spec_hash: String,
    pub seed: u64,
    pub version: String,
}

impl Provenance {
    pub const COLUMNS: [&'static str; 3] = ["spec_hash", "seed", "version"];

    pub fn new(spec_hash: String, seed: u64) -> Self {
        Provenance {
            spec_hash,
            seed,
            version: version_string(),
        }
    }
}

/// `v<crate version>`, in the style of `git describe`.
pub fn version_string() -> String {
    format!("v{}", env!("CARGO_PKG_VERSION"))
}

/// Fixed six-decimal rendering used for every float cell.
pub fn fmt_f(v: f64) -> String {
    format!("{v:.6}")
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f).unwrap_or_default()
}

/// One CSV table. Cells are preformatted strings so output is byte-stable.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    /// File stem, e.g. `removal`.
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Report {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Report {
            name: name.to_owned(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Cell `(row, column name)`.
    pub fn cell(&self, row: usize, name: &str) -> Option<&str> {
        self.column(name).map(|c| self.rows[row][c].as_str())
    }

    /// Rows whose `column` equals `value`.
    pub fn rows_where<'a>(&'a self, column: &str, value: &'a str) -> impl Iterator<Item = &'a Vec<String>> + 'a {
        let c = self.column(column);
        self.rows
            .iter()
            .filter(move |r| c.is_some_and(|c| r[c] == value))
    }

    /// Serializes with the provenance columns appended.
    pub fn to_csv(&self, prov: &Provenance) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        let to_err = |e: csv::Error| Error::invalid(format!("csv encoding: {e}"));
        let header: Vec<&str> = self
            .header
            .iter()
            .map(String::as_str)
            .chain(Provenance::COLUMNS)
            .collect();
        w.write_record(&header).map_err(to_err)?;
        let seed = prov.seed.to_string();
        for row in &self.rows {
            let mut cells: Vec<&str> = row.iter().map(String::as_str).collect();
            cells.extend([prov.spec_hash.as_str(), seed.as_str(), prov.version.as_str()]);
            w.write_record(&cells).map_err(to_err)?;
        }
        w.into_inner()
            .map_err(|e| Error::invalid(format!("csv encoding: {e}")))
    }

    pub fn write_csv(&self, prov: &Provenance, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv(prov)?).map_err(|e| Error::io(path, e))
    }
}

pub const SVG_WIDTH: f64 = 800.0;
pub const SVG_HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_TOP: f64 = 20.0;
const MARGIN_BOTTOM: f64 = 50.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

/// Data range padded by 5% of its span on each side (by 1.0 when flat).
pub fn padded_bounds(values: impl IntoIterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo > hi {
        return None;
    }
    let span = if hi > lo { hi - lo } else { 1.0 };
    Some((lo - 0.05 * span, hi + 0.05 * span))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Plots `y_cols` against `x_col` from a CSV file. Rows whose cells do not
/// parse as numbers (e.g. the no-removal row) are skipped; `filter`
/// restricts to rows where a column equals a value.
pub fn write_svg_lines(
    csv_path: &Path,
    x_col: &str,
    y_cols: &[&str],
    filter: Option<(&str, &str)>,
    path: &Path,
) -> Result<()> {
    let svg = render_svg_lines(csv_path, x_col, y_cols, filter)?;
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}

pub fn render_svg_lines(
    csv_path: &Path,
    x_col: &str,
    y_cols: &[&str],
    filter: Option<(&str, &str)>,
) -> Result<String> {
    let mut rdr = csv::Reader::from_path(csv_path).map_err(|e| csv_error(csv_path, e))?;
    let header = rdr.headers().map_err(|e| csv_error(csv_path, e))?.clone();
    let col = |name: &str| {
        header.iter().position(|h| h == name).ok_or_else(|| {
            Error::invalid(format!(
                "column `{name}` not found in {} (have {})",
                csv_path.display(),
                header.iter().collect::<Vec<_>>().join(", ")
            ))
        })
    };
    if y_cols.is_empty() {
        return Err(Error::invalid("no y columns to plot"));
    }
    let xi = col(x_col)?;
    let yis = y_cols.iter().map(|c| col(c)).collect::<Result<Vec<_>>>()?;
    let fi = filter.map(|(c, v)| col(c).map(|i| (i, v))).transpose()?;

    let mut series: Vec<Vec<(f64, f64)>> = vec![Vec::new(); yis.len()];
    for row in rdr.records() {
        let row = row.map_err(|e| csv_error(csv_path, e))?;
        if let Some((i, v)) = fi {
            if &row[i] != v {
                continue;
            }
        }
        let Ok(x) = row[xi].parse::<f64>() else { continue };
        for (s, &yi) in series.iter_mut().zip(&yis) {
            if let Ok(y) = row[yi].parse::<f64>() {
                if x.is_finite() && y.is_finite() {
                    s.push((x, y));
                }
            }
        }
    }
    let all = || series.iter().flatten();
    let (x0, x1) = padded_bounds(all().map(|p| p.0)).unwrap_or((0.0, 1.0));
    let (y0, y1) = padded_bounds(all().map(|p| p.1)).unwrap_or((0.0, 1.0));
    let pw = SVG_WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let ph = SVG_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| MARGIN_TOP + (1.0 - (y - y0) / (y1 - y0)) * ph;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" viewBox="0 0 {SVG_WIDTH} {SVG_HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    let label = |out: &mut String, x: f64, y: f64, anchor: &str, text: &str| {
        let _ = writeln!(
            out,
            r#"<text x="{x:.2}" y="{y:.2}" font-family="sans-serif" font-size="12" text-anchor="{anchor}">{}</text>"#,
            escape(text)
        );
    };
    label(&mut out, MARGIN_LEFT, SVG_HEIGHT - 30.0, "start", &format!("{x0:.4}"));
    label(&mut out, MARGIN_LEFT + pw, SVG_HEIGHT - 30.0, "end", &format!("{x1:.4}"));
    label(&mut out, MARGIN_LEFT + pw / 2.0, SVG_HEIGHT - 10.0, "middle", x_col);
    label(&mut out, MARGIN_LEFT - 5.0, MARGIN_TOP + ph, "end", &format!("{y0:.4}"));
    label(&mut out, MARGIN_LEFT - 5.0, MARGIN_TOP + 12.0, "end", &format!("{y1:.4}"));
    for (i, (s, name)) in series.iter().zip(y_cols).enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = s
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            pts.join(" ")
        );
        let ly = MARGIN_TOP + 20.0 + 18.0 * i as f64;
        let lx = MARGIN_LEFT + pw + 10.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="2"/>"#,
            ly - 4.0,
            lx + 20.0,
            ly - 4.0
        );
        label(&mut out, lx + 25.0, ly, "start", name);
    }
    out.push_str("</svg>\n");
    Ok(out)
}
