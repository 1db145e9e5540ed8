//! CSV input and JSON output.

use std::fs::File;
use std::io::{self, Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::app::AppError;
use crate::numerics::DataMatrix;

/// Version tag written into every output document.
pub const FORMAT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Parses comma-separated decimal reals, one observation per row.
pub fn parse_csv(reader: impl Read, header: bool) -> Result<DataMatrix, AppError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(header)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| AppError::Data(format!("malformed CSV: {e}")))?;
        let row = record
            .iter()
            .enumerate()
            .map(|(col, field)| {
                field.parse::<f64>().map_err(|_| {
                    AppError::Data(format!(
                        "row {}, column {}: `{field}` is not a number",
                        line + 1,
                        col + 1
                    ))
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(row);
    }
    DataMatrix::new(&rows).map_err(|e| AppError::Data(e.to_string()))
}

pub fn read_csv(path: &Path, header: bool) -> Result<DataMatrix, AppError> {
    let file = File::open(path)
        .map_err(|e| AppError::Data(format!("cannot open {}: {e}", path.display())))?;
    parse_csv(file, header)
}

pub fn write_csv(path: &Path, data: &DataMatrix) -> Result<(), AppError> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| AppError::Data(format!("cannot write {}: {e}", path.display())))?;
    for row in data.rows() {
        w.write_record(row.iter().map(|v| v.to_string()))
            .map_err(|e| AppError::Data(e.to_string()))?;
    }
    w.flush().map_err(|e| AppError::Data(e.to_string()))
}

#[derive(Serialize)]
struct Envelope<'a, C: Serialize, R: Serialize> {
    version: &'a str,
    config: &'a C,
    result: &'a R,
}

/// Renders `{version, config, result}` as pretty JSON with a trailing newline.
pub fn render_document<C: Serialize, R: Serialize>(
    config: &C,
    result: &R,
) -> Result<String, AppError> {
    let doc = Envelope {
        version: FORMAT_VERSION,
        config,
        result,
    };
    let mut s = serde_json::to_string_pretty(&doc)
        .map_err(|e| AppError::Data(format!("cannot serialize output: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Writes to `out`, or to stdout when `out` is `None`.
pub fn emit(text: &str, out: Option<&Path>) -> Result<(), AppError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| AppError::Data(format!("cannot write {}: {e}", path.display()))),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| AppError::Data(e.to_string())),
    }
}
