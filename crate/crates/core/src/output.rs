//! File formats of the batch runner: deterministic CSV emission with
//! round-trip-exact floats, the flat key/value config format, and a
//! minimal SVG line plot.

use crate::{Error, Result};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

/// One CSV cell: either a float (printed with 17 significant digits, which
/// round-trips f64 exactly) or verbatim text (headers, integer verdicts).
#[derive(Debug, Clone)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// Formats a float with 17 significant digits, '.' decimal separator.
pub fn format_f64(v: f64) -> String {
    if v == 0.0 {
        // normalize -0
        return "0.0000000000000000e0".into();
    }
    format!("{v:.16e}")
}

/// In-memory CSV table with a mandatory header row.
#[derive(Debug, Clone)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row length mismatch");
        self.rows.push(row);
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn to_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            let mut first = true;
            for cell in row {
                if !first {
                    out.push(',');
                }
                first = false;
                match cell {
                    Cell::Float(v) => out.push_str(&format_f64(*v)),
                    Cell::Int(v) => {
                        let _ = write!(out, "{v}");
                    }
                    Cell::Text(s) => out.push_str(s),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_string())?;
        Ok(())
    }

    /// Numeric value of a cell (integers widen; text fails).
    pub fn value(&self, row: usize, col: usize) -> Option<f64> {
        match self.rows.get(row)?.get(col)? {
            Cell::Float(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            Cell::Text(_) => None,
        }
    }

    /// Renders a minimal SVG line plot: first column is the abscissa, every
    /// further numeric column becomes a polyline.
    pub fn to_svg(&self) -> String {
        let (w, h) = (640.0, 420.0);
        let (ml, mr, mt, mb) = (70.0, 20.0, 20.0, 50.0);
        let mut cols: Vec<Vec<(f64, f64)>> = vec![Vec::new(); self.header.len().saturating_sub(1)];
        for r in 0..self.rows.len() {
            if let Some(x) = self.value(r, 0) {
                for (ci, col) in cols.iter_mut().enumerate() {
                    if let Some(y) = self.value(r, ci + 1) {
                        if x.is_finite() && y.is_finite() {
                            col.push((x, y));
                        }
                    }
                }
            }
        }
        let all: Vec<(f64, f64)> = cols.iter().flatten().copied().collect();
        let (x0, x1) = bounds(all.iter().map(|p| p.0));
        let (y0, y1) = bounds(all.iter().map(|p| p.1));
        let sx = |x: f64| ml + (x - x0) / (x1 - x0).max(1e-300) * (w - ml - mr);
        let sy = |y: f64| h - mb - (y - y0) / (y1 - y0).max(1e-300) * (h - mt - mb);
        let palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];
        let mut svg = String::new();
        let _ = write!(
            svg,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
        );
        let _ = write!(
            svg,
            "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n<g stroke=\"black\" fill=\"none\">\n<path d=\"M {ml} {mt} L {ml} {yb} L {xr} {yb}\"/>\n</g>\n",
            yb = h - mb,
            xr = w - mr
        );
        // axis labels from the column names
        let _ = write!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\">{}</text>\n",
            (ml + w - mr) / 2.0,
            h - 12.0,
            xml_escape(&self.header[0])
        );
        let ylab = self.header[1..].join(", ");
        let _ = write!(
            svg,
            "<text x=\"14\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 14 {})\">{}</text>\n",
            (mt + h - mb) / 2.0,
            (mt + h - mb) / 2.0,
            xml_escape(&ylab)
        );
        // tick labels at the corners of the data range
        for (v, x, y, anchor) in [
            (x0, ml, h - mb + 16.0, "middle"),
            (x1, w - mr, h - mb + 16.0, "middle"),
            (y0, ml - 6.0, h - mb, "end"),
            (y1, ml - 6.0, mt + 8.0, "end"),
        ] {
            let _ = write!(
                svg,
                "<text x=\"{x}\" y=\"{y}\" font-size=\"11\" text-anchor=\"{anchor}\">{v:.3e}</text>\n"
            );
        }
        for (ci, col) in cols.iter().enumerate() {
            if col.is_empty() {
                continue;
            }
            let mut d = String::new();
            for (i, &(x, y)) in col.iter().enumerate() {
                let _ = write!(d, "{}{:.2} {:.2} ", if i == 0 { "M " } else { "L " }, sx(x), sy(y));
            }
            let _ = write!(
                svg,
                "<path d=\"{}\" stroke=\"{}\" fill=\"none\" stroke-width=\"1.5\"/>\n",
                d.trim_end(),
                palette[ci % palette.len()]
            );
        }
        svg.push_str("</svg>\n");
        svg
    }
}

fn bounds(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in vals {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo > hi {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Flat key/value configuration document: one dotted key per line,
/// `pml.sigma_c = 20`, with `#` comments and blank lines ignored.
#[derive(Debug, Clone, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, val)) = line.split_once('=') else {
                return Err(Error::InvalidArgument(format!(
                    "config line {}: expected 'key = value', got '{raw}'",
                    lineno + 1
                )));
            };
            values.insert(key.trim().to_string(), val.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Overrides or inserts a value (used for command-line overrides).
    pub fn set(&mut self, key: &str, value: &str) {
        self.values.insert(key.to_string(), value.to_string());
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(|s| s.as_str())
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(s) => s
                .parse::<f64>()
                .map(Some)
                .map_err(|_| Error::InvalidArgument(format!("config key {key}: bad float '{s}'"))),
        }
    }

    pub fn get_usize(&self, key: &str) -> Result<Option<usize>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(s) => s.parse::<usize>().map(Some).map_err(|_| {
                Error::InvalidArgument(format!("config key {key}: bad integer '{s}'"))
            }),
        }
    }

    pub fn require_f64(&self, key: &str) -> Result<f64> {
        self.get_f64(key)?
            .ok_or_else(|| Error::InvalidArgument(format!("missing config key {key}")))
    }

    /// Rejects keys outside the allowed set (schema validation).
    pub fn validate_keys(&self, allowed: &[&str]) -> Result<()> {
        for key in self.values.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(Error::InvalidArgument(format!(
                    "unknown config key '{key}' (allowed: {})",
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }
}
