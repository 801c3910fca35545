//! Result tables and their CSV / JSON encodings.

use serde_json::{Map, Value};

use crate::config::ExperimentConfig;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Formats with 12 significant digits, trailing zeros removed.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        // rounding may carry into a new digit, e.g. 9.99999999999995
        let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
        s
    } else {
        let s = format!("{x:.11e}");
        let (mantissa, exponent) = s.split_once('e').expect("exponent form");
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{exponent}")
    }
}

/// `x` rounded to 12 significant digits, for JSON numbers.
pub fn round_sig(x: f64) -> f64 {
    fmt_sig(x).parse().unwrap_or(x)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => fmt_sig(*x),
            Cell::Int(k) => k.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => Value::from(round_sig(*x)),
            Cell::Num(x) => Value::String(fmt_sig(*x)),
            Cell::Int(k) => Value::from(*k),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<u64> for Cell {
    fn from(k: u64) -> Self {
        Cell::Int(k)
    }
}

impl From<usize> for Cell {
    fn from(k: usize) -> Self {
        Cell::Int(k as u64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

/// Fixed-column result table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }
}

/// CSV with `#` metadata lines ahead of the header.
pub fn to_csv(table: &Table, config: &ExperimentConfig) -> Result<String, csv::Error> {
    let mut out = format!(
        "# tool_version={TOOL_VERSION}\n# command={}\n# config_hash={}\n# seed={}\n",
        config.command.as_str(),
        config.config_hash(),
        config.seed
    );
    let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
    writer.write_record(&table.columns)?;
    for row in &table.rows {
        writer.write_record(row.iter().map(Cell::csv))?;
    }
    let bytes = writer.into_inner().map_err(|e| e.into_error())?;
    out.push_str(&String::from_utf8(bytes).expect("csv output is UTF-8"));
    Ok(out)
}

/// JSON document with metadata, the config and a `results` array. A single
/// result row is also merged into the top level.
pub fn to_json(table: &Table, config: &ExperimentConfig) -> String {
    let rows: Vec<Map<String, Value>> = table
        .rows
        .iter()
        .map(|row| table.columns.iter().zip(row).map(|(k, c)| (k.to_string(), c.json())).collect())
        .collect();
    let mut doc = Map::new();
    doc.insert("tool_version".into(), Value::from(TOOL_VERSION));
    doc.insert("command".into(), Value::from(config.command.as_str()));
    doc.insert("config_hash".into(), Value::from(config.config_hash()));
    doc.insert("seed".into(), Value::from(config.seed));
    let cfg: Map<String, Value> = config.to_pairs().into_iter().map(|(k, v)| (k.to_string(), Value::from(v))).collect();
    doc.insert("config".into(), Value::Object(cfg));
    if let [only] = rows.as_slice() {
        for (k, v) in only {
            doc.entry(k.clone()).or_insert_with(|| v.clone());
        }
    }
    doc.insert("results".into(), Value::Array(rows.into_iter().map(Value::Object).collect()));
    let mut text = serde_json::to_string_pretty(&Value::Object(doc)).expect("json values serialise");
    text.push('\n');
    text
}
