//! Output documents: a text listing for the terminal, a JSON summary and an
//! optional CSV table, each carrying the resolved configuration.

use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};

use crate::config::{Format, RunConfig};
use crate::error::{CliError, CliResult, EXIT_NUMERICAL, EXIT_USAGE};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

/// Shortest round-trip representation, so repeated runs are byte-identical.
pub fn num(x: f64) -> String {
    format!("{x}")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    Success,
    /// Declined to run or rejected its input; exits as a usage error.
    Rejected(String),
    /// Ran, but the numerical goal was not met.
    Failed(String),
}

impl Status {
    pub fn exit_code(&self) -> i32 {
        match self {
            Status::Success => 0,
            Status::Rejected(_) => EXIT_USAGE,
            Status::Failed(_) => EXIT_NUMERICAL,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: &'static str,
    pub text: String,
    pub result: Value,
    pub table: Option<Table>,
    pub status: Status,
}

impl Report {
    pub fn json_document(&self, cfg: &RunConfig) -> String {
        let doc = json!({
            "schema": SCHEMA_VERSION,
            "command": self.command,
            "config": cfg,
            "result": self.result,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("JSON values serialize");
        s.push('\n');
        s
    }

    /// CSV with the schema, command and configuration as leading `#` lines.
    pub fn csv_document(&self, cfg: &RunConfig) -> CliResult<String> {
        let table = self
            .table
            .as_ref()
            .ok_or_else(|| CliError::Usage(format!("`{}` has no tabular output; use --format json", self.command)))?;
        csv_with_header(table, self.command, cfg)
    }

    pub fn document(&self, cfg: &RunConfig, format: Format) -> CliResult<String> {
        match format {
            Format::Json => Ok(self.json_document(cfg)),
            Format::Csv => self.csv_document(cfg),
        }
    }
}

pub fn csv_with_header(table: &Table, command: &str, cfg: &RunConfig) -> CliResult<String> {
    let mut out = format!("# schema = {SCHEMA_VERSION}\n# command = {command}\n");
    if let Value::Object(map) = serde_json::to_value(cfg).expect("config serializes") {
        for (k, v) in map {
            out.push_str(&format!("# {k} = {v}\n"));
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.header).map_err(|e| CliError::Usage(e.to_string()))?;
    for row in &table.rows {
        w.write_record(row).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
    out.push_str(&String::from_utf8(bytes).expect("CSV of UTF-8 fields"));
    Ok(out)
}

/// Writes through a temporary file in the target directory and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(path, e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ConfigLayer, Defaults};

    fn report() -> Report {
        let mut table = Table::new(["j", "value"]);
        table.push(vec!["1".into(), num(0.1)]);
        Report {
            command: "spectrum",
            text: String::new(),
            result: json!({"x": 1.5}),
            table: Some(table),
            status: Status::Success,
        }
    }

    #[test]
    fn documents_echo_config_and_schema() {
        let cfg = RunConfig::resolve(ConfigLayer::default(), Defaults::Listing).unwrap();
        let r = report();
        let doc: Value = serde_json::from_str(&r.json_document(&cfg)).unwrap();
        assert_eq!(doc["schema"], 1);
        assert_eq!(doc["config"]["degree"], 4);
        assert_eq!(doc["config"]["model"], "sphere");
        let csv = r.csv_document(&cfg).unwrap();
        assert!(csv.starts_with("# schema = 1\n# command = spectrum\n"));
        assert!(csv.ends_with("j,value\n1,0.1\n"));
    }

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.json");
        write_atomic(&path, "first").unwrap();
        write_atomic(&path, "second").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "second");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
