//! Deterministic artifact serialization.
//!
//! Every artifact is a single table rendered to CSV, JSON, or
//! whitespace-separated `dat`, prefixed by a header block carrying the
//! tool version and the full run configuration, so any output file alone
//! identifies the run that produced it. Nothing time- or
//! machine-dependent is ever written: rerunning a configuration
//! reproduces every artifact byte for byte.

use std::fs;
use std::path::PathBuf;

use serde_json::{json, Value};
use shearwaves::Error;

use crate::config::{Format, RunConfig};
use crate::CliError;

/// Formats a float with 17 significant digits — enough to round-trip f64.
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Maps a library error to the short code used in failure rows.
pub fn error_code(e: &Error) -> &'static str {
    match e {
        Error::InvalidInput(_) => "invalid-input",
        Error::Domain { .. } => "domain",
        Error::NoDispersionRoot { .. } => "no-dispersion-root",
        Error::SingularCoefficient { .. } => "singular-coefficient",
        Error::Stagnation { .. } => "stagnation",
        Error::ResonantMode { .. } => "resonant-mode",
        Error::DegenerateFit { .. } => "degenerate-fit",
        Error::UnreachableEpsilon { .. } => "unreachable-epsilon",
    }
}

/// One table cell.
#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    /// Absent value: empty in CSV, `nan` in dat, `null` in JSON.
    Missing,
}

impl Cell {
    pub fn text(s: impl Into<String>) -> Self {
        Cell::Text(s.into())
    }

    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => sig17(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => csv_escape(s),
            Cell::Missing => String::new(),
        }
    }

    fn dat(&self) -> String {
        match self {
            Cell::Num(x) => sig17(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => format!("\"{}\"", s.replace('"', "''")),
            Cell::Missing => "nan".into(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Cell::Int(n) => Value::from(*n),
            Cell::Text(s) => Value::from(s.clone()),
            Cell::Missing => Value::Null,
        }
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One table row: data, or a per-item failure carrying its error code.
#[derive(Debug, Clone)]
enum Row {
    Data(Vec<Cell>),
    Failure { gamma: f64, code: &'static str },
}

/// A table plus the artifact metadata written into its header.
#[derive(Debug, Clone)]
pub struct Table {
    command: &'static str,
    columns: Vec<String>,
    rows: Vec<Row>,
    /// Extra per-artifact header entries (e.g. derived scalars).
    notes: Vec<(String, String)>,
}

impl Table {
    pub fn new(command: &'static str, columns: &[&str]) -> Self {
        Table {
            command,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    /// Like [`Table::new`] for column names built at runtime.
    pub fn with_columns(command: &'static str, columns: Vec<String>) -> Self {
        Table { command, columns, rows: Vec::new(), notes: Vec::new() }
    }

    /// Adds a `# key = value` header entry.
    pub fn note(&mut self, key: &str, value: impl Into<String>) {
        self.notes.push((key.to_string(), value.into()));
    }

    pub fn push(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(Row::Data(cells));
    }

    /// Records a failed work item in-band: the vorticity keeps its column,
    /// the remaining cells stay empty, and the last column carries
    /// `error:<code>`.
    pub fn push_failure(&mut self, gamma: f64, error: &Error) {
        self.rows.push(Row::Failure { gamma, code: error_code(error) });
    }

    fn failure_cells(&self, gamma: f64, code: &'static str) -> Vec<Cell> {
        let mut cells = vec![Cell::Missing; self.columns.len()];
        cells[0] = Cell::Num(gamma);
        *cells.last_mut().expect("tables have at least one column") =
            Cell::text(format!("error:{code}"));
        cells
    }

    fn render(&self, cfg: &RunConfig) -> String {
        match cfg.format {
            Format::Csv => self.render_delimited(cfg, ",", Cell::csv, true),
            Format::Dat => self.render_delimited(cfg, " ", Cell::dat, false),
            Format::Json => self.render_json(cfg),
        }
    }

    fn render_delimited(
        &self,
        cfg: &RunConfig,
        sep: &str,
        cell: fn(&Cell) -> String,
        plain_header_row: bool,
    ) -> String {
        let mut out = String::new();
        for line in header_lines(cfg, self.command, &self.notes) {
            out.push_str(&line);
            out.push('\n');
        }
        if plain_header_row {
            out.push_str(&self.columns.join(sep));
        } else {
            out.push_str(&format!("# columns = {}", self.columns.join(" ")));
        }
        out.push('\n');
        for row in &self.rows {
            let cells = match row {
                Row::Data(cells) => {
                    cells.iter().map(cell).collect::<Vec<_>>()
                }
                Row::Failure { gamma, code } => {
                    self.failure_cells(*gamma, code).iter().map(cell).collect()
                }
            };
            out.push_str(&cells.join(sep));
            out.push('\n');
        }
        out
    }

    fn render_json(&self, cfg: &RunConfig) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .filter_map(|row| match row {
                Row::Data(cells) => Some(Value::from(
                    cells.iter().map(Cell::json).collect::<Vec<_>>(),
                )),
                Row::Failure { .. } => None,
            })
            .collect();
        let failures: Vec<Value> = self
            .rows
            .iter()
            .filter_map(|row| match row {
                Row::Failure { gamma, code } => {
                    Some(json!({ "gamma": gamma, "error": code }))
                }
                Row::Data(_) => None,
            })
            .collect();
        let notes: serde_json::Map<String, Value> = self
            .notes
            .iter()
            .map(|(k, v)| (k.clone(), Value::from(v.clone())))
            .collect();
        let doc = json!({
            "tool": "shearwaves",
            "version": shearwaves::VERSION,
            "command": self.command,
            "config": serde_json::to_value(cfg).expect("config serializes"),
            "notes": notes,
            "columns": self.columns,
            "rows": rows,
            "failures": failures,
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("document serializes");
        text.push('\n');
        text
    }

    /// Renders and writes `<stem>.<ext>` into the output directory,
    /// returning the file name.
    pub fn write(&self, cfg: &RunConfig, stem: &str) -> Result<String, CliError> {
        let name = format!("{stem}.{}", cfg.format.extension());
        let path: PathBuf = cfg.output_dir.join(&name);
        fs::write(&path, self.render(cfg))
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
        Ok(name)
    }
}

/// The `#` header block shared by CSV and dat artifacts: tool version and
/// the full run configuration, one `key = value` per line.
fn header_lines(cfg: &RunConfig, command: &str, notes: &[(String, String)]) -> Vec<String> {
    let gammas: Vec<String> = cfg.gamma_list.iter().map(|&g| sig17(g)).collect();
    let opt = |v: Option<f64>| v.map_or_else(|| "auto".to_string(), sig17);
    let mut lines = vec![
        format!("# shearwaves {}", shearwaves::VERSION),
        format!("# command = {command}"),
        format!("# gamma = {}", gammas.join(",")),
        format!("# p0 = {}", sig17(cfg.p0)),
        format!("# g = {}", sig17(cfg.g)),
        format!("# order = {}", cfg.order),
        format!("# epsilon = {}", sig17(cfg.epsilon)),
        format!("# b = {}", opt(cfg.b_override)),
        format!("# btilde = {}", opt(cfg.btilde_override)),
        format!("# grid = {}x{}", cfg.nq, cfg.np),
        format!("# format = {}", cfg.format),
        format!("# out = {}", cfg.output_dir.display()),
    ];
    for (key, value) in notes {
        lines.push(format!("# {key} = {value}"));
    }
    lines
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config(format: Format) -> RunConfig {
        RunConfig {
            gamma_list: vec![1.5],
            format,
            ..RunConfig::default()
        }
    }

    #[test]
    fn csv_rows_round_trip_to_17_significant_digits() {
        let mut t = Table::new("demo", &["gamma", "value"]);
        t.push(vec![Cell::Num(1.5), Cell::Num(0.1 + 0.2)]);
        let text = t.render(&tiny_config(Format::Csv));
        let data_line = text.lines().last().unwrap();
        let cells: Vec<&str> = data_line.split(',').collect();
        assert_eq!(cells[1].parse::<f64>().unwrap(), 0.1 + 0.2);
    }

    #[test]
    fn header_block_carries_the_run_configuration() {
        let t = Table::new("demo", &["gamma"]);
        let text = t.render(&tiny_config(Format::Dat));
        assert!(text.contains("# command = demo"));
        assert!(text.contains("# grid = 256x128"));
        assert!(text.contains("# b = auto"));
        assert!(text.contains("# columns = gamma"));
    }

    #[test]
    fn failure_rows_keep_the_schema_and_carry_a_code() {
        let mut t = Table::new("demo", &["gamma", "a", "b"]);
        t.push_failure(2.0, &Error::NoDispersionRoot { gamma: 2.0 });
        let text = t.render(&tiny_config(Format::Csv));
        let last = text.lines().last().unwrap();
        assert_eq!(last.split(',').count(), 3);
        assert!(last.ends_with("error:no-dispersion-root"));
    }

    #[test]
    fn json_documents_separate_failures_from_rows() {
        let mut t = Table::new("demo", &["gamma", "value"]);
        t.push(vec![Cell::Num(1.0), Cell::Num(2.0)]);
        t.push_failure(2.0, &Error::NoDispersionRoot { gamma: 2.0 });
        let text = t.render(&tiny_config(Format::Json));
        let doc: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(doc["rows"].as_array().unwrap().len(), 1);
        assert_eq!(doc["failures"][0]["error"], "no-dispersion-root");
        assert_eq!(doc["config"]["nq"], 256);
    }

    #[test]
    fn missing_cells_render_per_format() {
        let mut t = Table::new("demo", &["gamma", "root"]);
        t.push(vec![Cell::Num(0.0), Cell::Missing]);
        assert!(t.render(&tiny_config(Format::Csv)).ends_with("0.0000000000000000e0,\n"));
        assert!(t.render(&tiny_config(Format::Dat)).ends_with("0.0000000000000000e0 nan\n"));
    }
}
