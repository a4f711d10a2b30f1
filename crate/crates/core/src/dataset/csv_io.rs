//! CSV layout: one column per basic event, then `TE` and `count`.
//! Cells are `0`/`1`, LF line endings, no quoting.

use std::path::Path;
use std::sync::Arc;

use csv::{QuoteStyle, ReaderBuilder, Terminator, WriterBuilder};

use super::{DatasetError, FailureDataset, Row};
use crate::beset::BeSet;
use crate::tree::Universe;

pub fn read_csv(path: impl AsRef<Path>) -> Result<FailureDataset, DatasetError> {
    read_csv_str(&std::fs::read_to_string(path)?)
}

pub fn read_csv_str(text: &str) -> Result<FailureDataset, DatasetError> {
    let mut reader = ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    let n = header.len();
    if n < 3 || &header[n - 2] != "TE" || &header[n - 1] != "count" {
        return Err(DatasetError::Malformed { row: 1, msg: "header must end with `TE,count`".into() });
    }
    let universe = Arc::new(Universe::new(header.iter().take(n - 2).map(str::to_string))?);

    // Line numbers (1-based, header is line 1) for every data row.
    let mut lines = Vec::new();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != n {
            return Err(DatasetError::Malformed {
                row: line,
                msg: format!("expected {n} cells, got {}", record.len()),
            });
        }
        let bit = |j: usize| match &record[j] {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(DatasetError::Malformed {
                row: line,
                msg: format!("cell `{other}` in column `{}` is not 0/1", &header[j]),
            }),
        };
        let mut bits = BeSet::EMPTY;
        for j in 0..n - 2 {
            if bit(j)? {
                bits.insert(j);
            }
        }
        let te = bit(n - 2)?;
        let count: u64 = record[n - 1].parse().ok().filter(|&c| c > 0).ok_or_else(|| DatasetError::Malformed {
            row: line,
            msg: format!("count `{}` is not a positive integer", &record[n - 1]),
        })?;
        lines.push(line);
        rows.push(Row { bits, te, count });
    }
    FailureDataset::from_observations(universe, rows).map_err(|e| match e {
        DatasetError::Noise { first, second } => DatasetError::Noise { first: lines[first], second: lines[second] },
        DatasetError::Malformed { row, msg } if row < lines.len() => DatasetError::Malformed { row: lines[row], msg },
        other => other,
    })
}

pub fn write_csv_string(ds: &FailureDataset) -> Result<String, DatasetError> {
    for name in ds.be_names() {
        if name.is_empty() || !name.is_ascii() || name.contains([',', '"', '\n', '\r']) {
            return Err(DatasetError::BadName(name.clone()));
        }
    }
    let mut writer =
        WriterBuilder::new().terminator(Terminator::Any(b'\n')).quote_style(QuoteStyle::Never).from_writer(Vec::new());
    let mut header: Vec<&str> = ds.be_names().iter().map(String::as_str).collect();
    header.extend(["TE", "count"]);
    writer.write_record(&header)?;
    let w = ds.width();
    for r in ds.rows() {
        let mut rec: Vec<String> = (0..w).map(|c| (r.bits.contains(c) as u8).to_string()).collect();
        rec.push((r.te as u8).to_string());
        rec.push(r.count.to_string());
        writer.write_record(&rec)?;
    }
    let bytes = writer.into_inner().map_err(|e| DatasetError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("ASCII output"))
}

pub fn write_csv(ds: &FailureDataset, path: impl AsRef<Path>) -> Result<(), DatasetError> {
    std::fs::write(path, write_csv_string(ds)?)?;
    Ok(())
}
