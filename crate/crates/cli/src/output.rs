//! Table model and the reproducible-header CSV / JSON-lines writers.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::AppConfig;
use crate::CliError;

pub const TOOL_NAME: &str = "hetnet";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutFormat {
    Csv,
    JsonLines,
}

/// One table cell. Floats render as `{:e}` (shortest round-trip mantissa).
#[derive(Debug, Clone)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::F(x) => format!("{x:e}"),
            Cell::I(n) => n.to_string(),
            Cell::S(s) => s.clone(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::F(x) => serde_json::json!(x),
            Cell::I(n) => serde_json::json!(n),
            Cell::S(s) => serde_json::json!(s),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Extra `# key: value` header lines (diagnostics, notes).
    pub notes: Vec<String>,
}

/// A fully resolved run: everything needed to regenerate the output.
///
/// Serialized verbatim into the output header so any result file can be
/// replayed from its own header (`hetnet replay <file>`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Invocation {
    pub version: String,
    pub command: String,
    pub format: OutFormat,
    /// Subcommand-specific parameters (threshold grids, moment orders, ...).
    #[serde(default)]
    pub params: BTreeMap<String, serde_json::Value>,
    pub config: AppConfig,
}

impl Invocation {
    pub fn header_json(&self) -> String {
        serde_json::to_string(self).expect("invocation serializes")
    }

    pub fn param_f64(&self, key: &str) -> Option<f64> {
        self.params.get(key).and_then(|v| v.as_f64())
    }

    pub fn param_u64(&self, key: &str) -> Option<u64> {
        self.params.get(key).and_then(|v| v.as_u64())
    }

    pub fn param_str(&self, key: &str) -> Option<&str> {
        self.params.get(key).and_then(|v| v.as_str())
    }

    pub fn param_vec_f64(&self, key: &str) -> Option<Vec<f64>> {
        self.params
            .get(key)
            .and_then(|v| v.as_array())
            .map(|a| a.iter().filter_map(|x| x.as_f64()).collect())
    }
}

/// Render the table in the requested format, header included.
pub fn render(inv: &Invocation, table: &Table) -> String {
    match inv.format {
        OutFormat::Csv => render_csv(inv, table),
        OutFormat::JsonLines => render_json_lines(inv, table),
    }
}

fn render_csv(inv: &Invocation, table: &Table) -> String {
    let mut out = String::new();
    out.push_str(&format!("# {TOOL_NAME} {}\n", inv.version));
    out.push_str(&format!("# command: {}\n", inv.command));
    out.push_str(&format!("# seed: {}\n", inv.config.sim.seed));
    out.push_str(&format!("# invocation: {}\n", inv.header_json()));
    for n in &table.notes {
        out.push_str(&format!("# {n}\n"));
    }
    out.push_str(&format!("# columns: {}\n", table.columns.join(",")));
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(Cell::csv).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn render_json_lines(inv: &Invocation, table: &Table) -> String {
    let mut out = String::new();
    let header = serde_json::json!({
        "tool": TOOL_NAME,
        "version": inv.version,
        "command": inv.command,
        "invocation": serde_json::to_value(inv).expect("invocation serializes"),
        "columns": table.columns,
        "notes": table.notes,
    });
    out.push_str(&header.to_string());
    out.push('\n');
    for row in &table.rows {
        let mut obj = serde_json::Map::new();
        for (name, cell) in table.columns.iter().zip(row) {
            obj.insert((*name).to_string(), cell.json());
        }
        out.push_str(&serde_json::Value::Object(obj).to_string());
        out.push('\n');
    }
    out
}

/// Recover the invocation embedded in an output file (either format).
pub fn parse_embedded_invocation(text: &str) -> Result<Invocation, CliError> {
    for line in text.lines() {
        if let Some(json) = line.strip_prefix("# invocation: ") {
            return serde_json::from_str(json)
                .map_err(|e| CliError::config(format!("embedded invocation: {e}")));
        }
        if line.trim_start().starts_with('{') {
            let v: serde_json::Value = serde_json::from_str(line)
                .map_err(|e| CliError::config(format!("embedded header: {e}")))?;
            if let Some(inv) = v.get("invocation") {
                return serde_json::from_value(inv.clone())
                    .map_err(|e| CliError::config(format!("embedded invocation: {e}")));
            }
        }
    }
    Err(CliError::config(
        "no embedded invocation header found in file",
    ))
}
