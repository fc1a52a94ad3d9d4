//! CSV ingestion: price panels, reference indices and option books.
//!
//! Timestamps are ISO dates (`YYYY-MM-DD`) or integer ticks. Dates are
//! carried on the core axis as days since 0001-01-01.

use std::collections::HashMap;
use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};
use trendcx_core::options::{OptionKind, StrangleBook};
use trendcx_core::timeseries::{align, AlignPolicy, Asset, AssetPanel, AxisKind, TimeSeries};

use crate::error::{Result, RunError};

/// What to do with a row whose value cell is blank or unparseable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorPolicy {
    #[default]
    Reject,
    /// Drop the cell; the asset simply has no observation at that stamp.
    Skip,
}

/// Mapping of CSV columns to roles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnSpec {
    pub timestamp: String,
    /// Price columns, one asset each. Empty means every other column.
    pub columns: Vec<String>,
    pub delimiter: char,
    pub on_error: ErrorPolicy,
    pub align: AlignPolicy,
    /// Take `ln` of prices before anything else.
    pub log_prices: bool,
}

impl Default for ColumnSpec {
    fn default() -> Self {
        Self {
            timestamp: "date".into(),
            columns: Vec::new(),
            delimiter: ',',
            on_error: ErrorPolicy::Reject,
            align: AlignPolicy::Inner,
            log_prices: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvInput {
    pub path: PathBuf,
    #[serde(flatten)]
    pub spec: ColumnSpec,
}

pub fn load_csv(path: &Path, spec: &ColumnSpec) -> Result<AssetPanel> {
    let file = File::open(path).map_err(|e| RunError::data(path, format!("cannot open: {e}")))?;
    read_panel(file, spec).map_err(|m| RunError::data(path, m))
}

fn parse_stamp(s: &str) -> Option<(AxisKind, i64)> {
    if let Ok(t) = s.parse::<i64>() {
        return Some((AxisKind::Tick, t));
    }
    let d = NaiveDate::parse_from_str(s, "%Y-%m-%d").ok()?;
    Some((AxisKind::Date, d.num_days_from_ce() as i64 - 1))
}

/// Renders a stamp back the way it was read.
pub fn format_stamp(kind: AxisKind, stamp: i64) -> String {
    match kind {
        AxisKind::Tick => stamp.to_string(),
        AxisKind::Date => NaiveDate::from_num_days_from_ce_opt(stamp as i32 + 1)
            .map(|d| d.format("%Y-%m-%d").to_string())
            .unwrap_or_else(|| stamp.to_string()),
    }
}

pub fn read_panel<R: Read>(reader: R, spec: &ColumnSpec) -> Result<AssetPanel, String> {
    if !spec.delimiter.is_ascii() {
        return Err(format!("delimiter `{}` is not a single-byte character", spec.delimiter));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(spec.delimiter as u8)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| format!("cannot read header: {e}"))?.clone();
    let ts_col = headers
        .iter()
        .position(|h| h == spec.timestamp)
        .ok_or_else(|| format!("missing timestamp column `{}`", spec.timestamp))?;
    let value_cols: Vec<(usize, String)> = if spec.columns.is_empty() {
        headers
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != ts_col)
            .map(|(i, h)| (i, h.to_string()))
            .collect()
    } else {
        spec.columns
            .iter()
            .map(|c| match headers.iter().position(|h| h == c) {
                Some(i) => Ok((i, c.clone())),
                None => Err(format!("missing value column `{c}`")),
            })
            .collect::<Result<_, _>>()?
    };
    if value_cols.is_empty() {
        return Err("no value column".into());
    }

    let mut kind = None;
    let mut cols: Vec<(Vec<i64>, Vec<f64>)> = vec![(Vec::new(), Vec::new()); value_cols.len()];
    for rec in rdr.records() {
        let rec = rec.map_err(|e| format!("malformed record: {e}"))?;
        let line = rec.position().map_or(0, |p| p.line());
        let raw = rec.get(ts_col).unwrap_or("");
        let (k, stamp) = parse_stamp(raw).ok_or_else(|| format!("line {line}: malformed timestamp `{raw}`"))?;
        if *kind.get_or_insert(k) != k {
            return Err(format!("line {line}: mixed date and tick timestamps"));
        }
        for (j, (i, name)) in value_cols.iter().enumerate() {
            let cell = rec.get(*i).unwrap_or("");
            let parsed = match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ if cell.is_empty() => Err(format!("line {line}, column `{name}`: missing value")),
                _ => Err(format!("line {line}, column `{name}`: non-numeric value `{cell}`")),
            };
            match (parsed, spec.on_error) {
                (Ok(v), _) => {
                    cols[j].0.push(stamp);
                    cols[j].1.push(v);
                }
                (Err(m), ErrorPolicy::Reject) => return Err(m),
                (Err(_), ErrorPolicy::Skip) => {}
            }
        }
    }
    let kind = kind.ok_or("no data rows")?;

    let mut assets = Vec::with_capacity(cols.len());
    for ((_, name), (stamps, values)) in value_cols.into_iter().zip(cols) {
        let mut ts = TimeSeries::new(kind, stamps, values).map_err(|e| format!("column `{name}`: {e}"))?;
        if spec.log_prices {
            ts = ts.ln().map_err(|e| format!("column `{name}`: {e}"))?;
        }
        assets.push(Asset::new(name, ts));
    }
    let panel = AssetPanel::new(assets).map_err(|e| e.to_string())?;
    align(&panel, spec.align).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceKind {
    /// Index levels; per-tick returns are `I_t / I_{t-1} - 1`.
    #[default]
    Level,
    /// Per-tick returns, stamped at the end of the tick.
    Return,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceInput {
    pub path: PathBuf,
    #[serde(default)]
    pub kind: ReferenceKind,
    #[serde(default = "default_timestamp")]
    pub timestamp: String,
    /// Defaults to the only non-timestamp column.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub column: Option<String>,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
}

fn default_timestamp() -> String {
    "date".into()
}

fn default_delimiter() -> char {
    ','
}

/// Reference returns over each price change of `panel`: entry `k` covers
/// `axis[k] -> axis[k + 1]`.
pub fn load_reference(input: &ReferenceInput, panel: &AssetPanel) -> Result<Vec<f64>> {
    let spec = ColumnSpec {
        timestamp: input.timestamp.clone(),
        columns: input.column.iter().cloned().collect(),
        delimiter: input.delimiter,
        ..ColumnSpec::default()
    };
    let path = &input.path;
    let reference = load_csv(path, &spec)?;
    if reference.len() != 1 {
        return Err(RunError::data(path, "reference needs exactly one value column; set `column`"));
    }
    let series = &reference.assets()[0].series;
    let axis_kind = panel.assets()[0].series.kind();
    if series.kind() != axis_kind {
        return Err(RunError::data(path, "reference and panel use different timestamp kinds"));
    }
    let by_stamp: HashMap<i64, f64> = series.stamps().iter().copied().zip(series.values().iter().copied()).collect();
    let axis = panel.axis()?;
    let at = |s: i64| {
        by_stamp.get(&s).copied().ok_or_else(|| {
            RunError::data(path, format!("no reference value at {}", format_stamp(axis_kind, s)))
        })
    };
    axis.windows(2)
        .map(|w| match input.kind {
            ReferenceKind::Level => {
                let (a, b) = (at(w[0])?, at(w[1])?);
                if a == 0.0 {
                    return Err(RunError::data(path, format!("zero level at {}", format_stamp(axis_kind, w[0]))));
                }
                Ok(b / a - 1.0)
            }
            ReferenceKind::Return => at(w[1]),
        })
        .collect()
}

#[derive(Debug, Deserialize)]
struct BookRow {
    strike: f64,
    #[serde(rename = "type")]
    kind: OptionKind,
    premium: f64,
    weight: Option<f64>,
}

/// Book CSV with columns `strike,type,premium[,weight]`, `type` being `C` or
/// `P`. Missing weights default to the local strike spacing.
pub fn load_book(path: &Path, s0: f64, maturity: usize) -> Result<StrangleBook> {
    let file = File::open(path).map_err(|e| RunError::data(path, format!("cannot open: {e}")))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let mut rows: Vec<BookRow> = Vec::new();
    for (i, r) in rdr.deserialize().enumerate() {
        rows.push(r.map_err(|e| RunError::data(path, format!("row {}: {e}", i + 1)))?);
    }
    if rows.is_empty() {
        return Err(RunError::data(path, "empty book"));
    }
    rows.sort_by(|a, b| a.strike.total_cmp(&b.strike));
    let k: Vec<f64> = rows.iter().map(|r| r.strike).collect();
    let spacing = |i: usize| match (i.checked_sub(1).map(|j| k[j]), k.get(i + 1)) {
        (Some(lo), Some(hi)) => (hi - lo) / 2.0,
        (Some(lo), None) => k[i] - lo,
        (None, Some(hi)) => hi - k[i],
        (None, None) => 1.0,
    };
    let weights = rows
        .iter()
        .enumerate()
        .map(|(i, r)| r.weight.unwrap_or_else(|| spacing(i)))
        .collect();
    let book = StrangleBook::new(
        s0,
        k,
        rows.iter().map(|r| r.kind).collect(),
        weights,
        rows.iter().map(|r| r.premium).collect(),
        maturity,
    )
    .map_err(|e| RunError::data(path, e.to_string()))?;
    Ok(book)
}
