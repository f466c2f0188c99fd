//! CSV series, label files and JSON documents.

use std::{
    fs,
    path::{Path, PathBuf},
};

use protad_core::{
    data::{FeatureSchema, RawSeries},
    Matrix,
};
use serde::{de::DeserializeOwned, Serialize};

use crate::error::{CliError, Result};

/// Bumped whenever a persisted document changes shape.
pub const FORMAT_VERSION: u32 = 1;

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    text.push('\n');
    write_text(path, &text)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn load_schema(path: &Path) -> Result<FeatureSchema> {
    read_json(path)
}

fn reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

/// Reads a series whose header names every schema column. Columns may come
/// in any order and unknown columns are ignored.
pub fn load_csv(path: &Path, schema: &FeatureSchema) -> Result<RawSeries> {
    let mut rdr = reader(path)?;
    let header = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    let names = schema.column_names();
    let index: Vec<usize> = names
        .iter()
        .map(|name| {
            header.iter().position(|h| h == name).ok_or_else(|| {
                CliError::Data(format!("{}: missing column {name:?}", path.display()))
            })
        })
        .collect::<Result<_>>()?;

    let mut data = Vec::new();
    let mut rows = 0;
    for (r, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        for (name, &i) in names.iter().zip(&index) {
            let cell = record.get(i).unwrap_or("");
            let v: f64 = cell.parse().map_err(|_| {
                CliError::Data(format!(
                    "{}: row {r}, column {name:?}: cannot parse {cell:?} as a number",
                    path.display()
                ))
            })?;
            data.push(v);
        }
        rows += 1;
    }
    let values = Matrix::from_vec(rows, names.len(), data)?;
    RawSeries::new(schema.clone(), values, None).map_err(|e| CliError::from(e).in_file(path))
}

pub fn write_csv(path: &Path, series: &RawSeries) -> Result<()> {
    let mut out = series.schema().column_names().join(",");
    out.push('\n');
    for row in series.values().iter_rows() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    write_text(path, &out)
}

fn parse_flag(cell: &str) -> Option<bool> {
    match cell {
        "1" | "true" | "True" | "TRUE" => Some(true),
        "0" | "false" | "False" | "FALSE" => Some(false),
        _ => None,
    }
}

/// Reads one boolean column. `column` picks it by name; otherwise a file
/// with a single column is read as is.
pub fn load_flags(path: &Path, column: &str) -> Result<(Option<Vec<usize>>, Vec<bool>)> {
    let mut rdr = reader(path)?;
    let header = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    let col = match header.iter().position(|h| h == column) {
        Some(i) => i,
        None if header.len() == 1 => 0,
        None => {
            return Err(CliError::Data(format!(
                "{}: missing column {column:?}",
                path.display()
            )))
        }
    };
    let time_col = header.iter().position(|h| h == "timestep");
    let mut times = Vec::new();
    let mut flags = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let cell = record.get(col).unwrap_or("");
        flags.push(parse_flag(cell).ok_or_else(|| {
            CliError::Data(format!(
                "{}: row {r}: expected 0/1 in column {column:?}, found {cell:?}",
                path.display()
            ))
        })?);
        if let Some(tc) = time_col {
            let cell = record.get(tc).unwrap_or("");
            times.push(cell.parse().map_err(|_| {
                CliError::Data(format!(
                    "{}: row {r}: bad timestep {cell:?}",
                    path.display()
                ))
            })?);
        }
    }
    Ok((time_col.map(|_| times), flags))
}

pub fn load_labels(path: &Path) -> Result<Vec<bool>> {
    Ok(load_flags(path, "label")?.1)
}

pub fn write_labels(path: &Path, labels: &[bool]) -> Result<()> {
    let mut out = String::from("label\n");
    for &l in labels {
        out.push_str(if l { "1\n" } else { "0\n" });
    }
    write_text(path, &out)
}

/// `timestep,<name>` rows starting at `offset`.
pub fn write_indexed<T: std::fmt::Display>(
    path: &Path,
    name: &str,
    offset: usize,
    values: impl IntoIterator<Item = T>,
) -> Result<()> {
    let mut out = format!("timestep,{name}\n");
    for (i, v) in values.into_iter().enumerate() {
        out.push_str(&format!("{},{v}\n", offset + i));
    }
    write_text(path, &out)
}

pub fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}
