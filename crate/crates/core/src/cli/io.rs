use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::boundlab::{ExperimentRecord, CSV_HEADER};
use crate::error::{Error, Result};
use crate::exactmat::RationalMatrix;
use crate::gl2::HpRecord;

/// Serialization format for record lists.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Rows that have a CSV layout with a fixed header.
pub trait CsvRecord: Serialize {
    const HEADER: &'static [&'static str];
}

impl CsvRecord for ExperimentRecord {
    const HEADER: &'static [&'static str] = &CSV_HEADER;
}

impl CsvRecord for HpRecord {
    const HEADER: &'static [&'static str] = &["N", "idx", "a", "b", "d", "H", "ratio"];
}

/// Writes `records` as CSV (header always present) or a JSON array, to
/// `path` or stdout. Embedded matrices only appear in JSON.
pub fn emit_records<T: CsvRecord>(records: &[T], format: Format, path: Option<&Path>) -> Result<()> {
    let mut out = open_output(path)?;
    write_records(records, format, &mut out).map_err(|e| with_path(e, path))?;
    out.flush().map_err(|e| io_error(path, e))
}

pub fn write_records<T: CsvRecord, W: Write>(records: &[T], format: Format, out: W) -> Result<()> {
    match format {
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, records)?;
            out.write_all(b"\n").map_err(|e| io_error(None, e))
        }
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
            w.write_record(T::HEADER)?;
            for r in records {
                let value = serde_json::to_value(r)?;
                let row: Vec<String> = T::HEADER
                    .iter()
                    .map(|k| match &value[*k] {
                        serde_json::Value::String(s) => s.clone(),
                        serde_json::Value::Null => String::new(),
                        other => other.to_string(),
                    })
                    .collect();
                w.write_record(&row)?;
            }
            w.flush().map_err(|e| io_error(None, e))
        }
    }
}

pub fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| io_error(Some(p), e))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Reads a file, or stdin for `-`.
pub fn read_input(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| io_error(Some(path), e))?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| io_error(Some(path), e))
}

pub fn read_matrix(path: &Path) -> Result<RationalMatrix> {
    RationalMatrix::parse_any(&read_input(path)?).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn io_error(path: Option<&Path>, source: io::Error) -> Error {
    Error::Io {
        path: path.map_or_else(|| PathBuf::from("<stdout>"), Path::to_path_buf),
        source,
    }
}

fn with_path(e: Error, path: Option<&Path>) -> Error {
    match e {
        Error::Io { source, .. } => io_error(path, source),
        other => other,
    }
}
