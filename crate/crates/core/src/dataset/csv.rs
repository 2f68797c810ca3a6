use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::Dataset;

/// Loads a headerless CSV whose last column is the label token.
///
/// Label tokens are mapped to class indices in order of first appearance.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file)
}

pub fn read_csv<R: Read>(reader: R) -> Result<Dataset> {
    let records = read_records(reader)?;
    let width = records[0].1.len();
    if width < 2 {
        return Err(Error::Format {
            row: records[0].0,
            message: "need at least one feature column and a label column".into(),
        });
    }
    let dim = width - 1;
    let mut features = Vec::with_capacity(records.len() * dim);
    let mut labels = Vec::with_capacity(records.len());
    let mut names: Vec<String> = Vec::new();
    for (row, fields) in &records {
        check_width(*row, fields.len(), width)?;
        for (column, token) in fields[..dim].iter().enumerate() {
            features.push(parse_cell(*row, column + 1, token)?);
        }
        let token = fields[dim].trim();
        let label = match names.iter().position(|n| n == token) {
            Some(i) => i,
            None => {
                names.push(token.to_string());
                names.len() - 1
            }
        };
        labels.push(label);
    }
    Dataset::from_flat(features, dim, labels, names)
}

/// Loads a headerless CSV where every column is a feature. Returns the
/// feature rows and their width.
pub fn load_csv_unlabeled(path: impl AsRef<Path>) -> Result<(Vec<f64>, usize)> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let records = read_records(file)?;
    let width = records[0].1.len();
    let mut features = Vec::with_capacity(records.len() * width);
    for (row, fields) in &records {
        check_width(*row, fields.len(), width)?;
        for (column, token) in fields.iter().enumerate() {
            features.push(parse_cell(*row, column + 1, token)?);
        }
    }
    Ok((features, width))
}

/// Writes rows as `features..., label_name`, readable by [`read_csv`].
pub fn write_csv<W: Write>(ds: &Dataset, writer: W) -> Result<()> {
    let mut w = ::csv::Writer::from_writer(writer);
    let fail = |e: ::csv::Error| Error::Format {
        row: 0,
        message: e.to_string(),
    };
    for (x, &l) in ds.rows().zip(ds.labels()) {
        let mut record: Vec<String> = x.iter().map(f64::to_string).collect();
        record.push(ds.label_names()[l].clone());
        w.write_record(&record).map_err(fail)?;
    }
    w.flush().map_err(|e| Error::Format {
        row: 0,
        message: e.to_string(),
    })
}

fn read_records<R: Read>(reader: R) -> Result<Vec<(usize, Vec<String>)>> {
    let mut rdr = ::csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(::csv::Trim::All)
        .from_reader(reader);
    let mut records = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| Error::Format {
            row,
            message: e.to_string(),
        })?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        records.push((row, rec.iter().map(str::to_string).collect()));
    }
    if records.is_empty() {
        return Err(Error::EmptyInput("csv file has no rows".into()));
    }
    Ok(records)
}

fn check_width(row: usize, got: usize, expected: usize) -> Result<()> {
    if got != expected {
        return Err(Error::Format {
            row,
            message: format!("expected {expected} columns, found {got}"),
        });
    }
    Ok(())
}

fn parse_cell(row: usize, column: usize, token: &str) -> Result<f64> {
    token
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Parse {
            row,
            column,
            token: token.to_string(),
        })
}
