//! Text serialisation of cubature rules (`ccs-grid/1`).
//!
//! CSV layout:
//!
//! ```text
//! # ccs-grid/1 dim=2 q=3 k=1 points=5
//! x1,x2,weight
//! 0.0000000000000000e0,5.0000000000000000e-1,1.6666666666666666e-1
//! ...
//! ```
//!
//! The JSON layout carries the same header fields and a `points` array of
//! `{"x": [...], "w": ...}` objects. Reals are written with 17 significant
//! digits in scientific notation, which round-trips every `f64` exactly.
//! Rows follow the rule's key order.

use std::fmt::Write as _;
use std::str::FromStr;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::smolyak::CubatureRule;

pub const FORMAT_VERSION: &str = "ccs-grid/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridFormat {
    Csv,
    Json,
}

impl FromStr for GridFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(GridFormat::Csv),
            "json" => Ok(GridFormat::Json),
            other => Err(Error::Parse(format!("unknown grid format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub x: Vec<f64>,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFile {
    pub dim: usize,
    pub q: u32,
    pub k: u32,
    pub rows: Vec<GridRow>,
}

/// Formats a real with 17 significant digits.
pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

impl GridFile {
    pub fn from_rule(rule: &CubatureRule) -> Self {
        Self {
            dim: rule.dim(),
            q: rule.q(),
            k: rule.k(),
            rows: rule
                .points()
                .iter()
                .map(|p| GridRow {
                    x: p.coordinates().to_vec(),
                    w: p.weight(),
                })
                .collect(),
        }
    }

    pub fn weight_sum(&self) -> f64 {
        crate::sum::compensated_sum(self.rows.iter().map(|r| r.w))
    }

    pub fn write(&self, format: GridFormat) -> String {
        match format {
            GridFormat::Csv => self.to_csv(),
            GridFormat::Json => self.to_json(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# {FORMAT_VERSION} dim={} q={} k={} points={}",
            self.dim,
            self.q,
            self.k,
            self.rows.len()
        );
        let mut header: Vec<String> = (1..=self.dim).map(|j| format!("x{j}")).collect();
        header.push("weight".into());
        let _ = writeln!(out, "{}", header.join(","));
        for row in &self.rows {
            for x in &row.x {
                out.push_str(&format_real(*x));
                out.push(',');
            }
            out.push_str(&format_real(row.w));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut out = String::new();
        let _ = write!(
            out,
            "{{\"format\":\"{FORMAT_VERSION}\",\"dim\":{},\"q\":{},\"k\":{},\"n_points\":{},\"points\":[",
            self.dim,
            self.q,
            self.k,
            self.rows.len()
        );
        for (i, row) in self.rows.iter().enumerate() {
            out.push_str(if i == 0 { "\n" } else { ",\n" });
            let xs: Vec<String> = row.x.iter().map(|x| format_real(*x)).collect();
            let _ = write!(out, "{{\"x\":[{}],\"w\":{}}}", xs.join(","), format_real(row.w));
        }
        out.push_str("\n]}\n");
        out
    }

    /// Parses either layout, detected from the first non-blank character.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            Self::parse_json(text)
        } else {
            Self::parse_csv(text)
        }
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty grid file".into()))?;
        let fields = header
            .strip_prefix('#')
            .ok_or_else(|| Error::Parse("missing `#` header line".into()))?
            .split_whitespace()
            .collect::<Vec<_>>();
        if fields.first() != Some(&FORMAT_VERSION) {
            return Err(Error::Parse(format!("expected format {FORMAT_VERSION}")));
        }
        let value = |name: &str| -> Result<u64> {
            fields
                .iter()
                .find_map(|f| f.strip_prefix(name).and_then(|r| r.strip_prefix('=')))
                .ok_or_else(|| Error::Parse(format!("header lacks `{name}`")))?
                .parse()
                .map_err(|_| Error::Parse(format!("bad `{name}` in header")))
        };
        let dim = value("dim")? as usize;
        let q = value("q")? as u32;
        let k = value("k")? as u32;
        let count = value("points")? as usize;
        let columns = lines
            .next()
            .ok_or_else(|| Error::Parse("missing column line".into()))?;
        if columns.split(',').count() != dim + 1 {
            return Err(Error::Parse("column line does not match dim".into()));
        }
        let mut rows = Vec::with_capacity(count);
        for (n, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let vals = line
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Parse(format!("row {}: bad number `{t}`", n + 1)))
                })
                .collect::<Result<Vec<_>>>()?;
            if vals.len() != dim + 1 {
                return Err(Error::Parse(format!("row {} has {} columns", n + 1, vals.len())));
            }
            rows.push(GridRow {
                w: vals[dim],
                x: vals[..dim].to_vec(),
            });
        }
        Self::finish(dim, q, k, count, rows)
    }

    pub fn parse_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if v["format"].as_str() != Some(FORMAT_VERSION) {
            return Err(Error::Parse(format!("expected format {FORMAT_VERSION}")));
        }
        let int = |name: &str| {
            v[name]
                .as_u64()
                .ok_or_else(|| Error::Parse(format!("missing integer `{name}`")))
        };
        let dim = int("dim")? as usize;
        let q = int("q")? as u32;
        let k = int("k")? as u32;
        let count = int("n_points")? as usize;
        let points = v["points"]
            .as_array()
            .ok_or_else(|| Error::Parse("missing `points` array".into()))?;
        let rows = points
            .iter()
            .map(|p| {
                let x = p["x"]
                    .as_array()
                    .ok_or_else(|| Error::Parse("point without `x`".into()))?
                    .iter()
                    .map(|c| c.as_f64().ok_or_else(|| Error::Parse("non-numeric coordinate".into())))
                    .collect::<Result<Vec<_>>>()?;
                let w = p["w"]
                    .as_f64()
                    .ok_or_else(|| Error::Parse("point without `w`".into()))?;
                if x.len() != dim {
                    return Err(Error::Parse("point dimension does not match dim".into()));
                }
                Ok(GridRow { x, w })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::finish(dim, q, k, count, rows)
    }

    fn finish(dim: usize, q: u32, k: u32, count: usize, rows: Vec<GridRow>) -> Result<Self> {
        if rows.len() != count {
            return Err(Error::Parse(format!(
                "header announces {count} points, found {}",
                rows.len()
            )));
        }
        if q != dim as u32 + k {
            return Err(Error::Parse(format!("inconsistent header: q={q}, dim={dim}, k={k}")));
        }
        Ok(Self { dim, q, k, rows })
    }
}
