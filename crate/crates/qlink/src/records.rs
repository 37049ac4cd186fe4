//! Flat result records and their JSON/CSV renderings.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::config::Format;
use crate::error::CliError;

/// One result row: config echo plus metrics, keyed by flat dotted names.
pub type Record = BTreeMap<String, Value>;

/// Run information that is allowed to differ between identical runs.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub elapsed_seconds: f64,
    pub workers: usize,
}

#[derive(Debug, Default)]
pub(crate) struct RecordBuilder(Record);

impl RecordBuilder {
    pub fn put(&mut self, key: impl Into<String>, value: impl Into<Value>) -> &mut Self {
        self.0.insert(key.into(), value.into());
        self
    }

    /// Non-finite numbers become `null` (an empty CSV cell).
    pub fn num(&mut self, key: impl Into<String>, value: f64) -> &mut Self {
        let v = serde_json::Number::from_f64(value).map_or(Value::Null, Value::Number);
        self.0.insert(key.into(), v);
        self
    }

    pub fn opt(&mut self, key: impl Into<String>, value: Option<f64>) -> &mut Self {
        self.num(key, value.unwrap_or(f64::NAN))
    }

    pub fn finish(self) -> Record {
        self.0
    }
}

#[derive(Serialize)]
struct Document<'a> {
    records: &'a [Record],
    metadata: &'a Metadata,
}

pub fn render_json(records: &[Record], metadata: &Metadata) -> String {
    let mut text = serde_json::to_string_pretty(&Document { records, metadata }).expect("records serialize");
    text.push('\n');
    text
}

/// CSV text of a JSON value, matching its JSON spelling for numbers.
fn cell(value: &Value) -> String {
    match value {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Columns are the sorted union of all record keys.
pub fn render_csv(records: &[Record]) -> Result<String, CliError> {
    let columns: BTreeSet<&String> = records.iter().flat_map(|r| r.keys()).collect();
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(&columns).map_err(|e| CliError::Output(e.to_string()))?;
    for r in records {
        let row: Vec<String> = columns.iter().map(|c| r.get(*c).map(cell).unwrap_or_default()).collect();
        writer.write_record(&row).map_err(|e| CliError::Output(e.to_string()))?;
    }
    let bytes = writer.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
}

pub fn render(records: &[Record], metadata: &Metadata, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => Ok(render_json(records, metadata)),
        Format::Csv => render_csv(records),
    }
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| CliError::Io(e.error))?;
    Ok(())
}
