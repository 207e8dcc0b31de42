//! Tab-separated tables and labelled matrices.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! write followed by a read reproduces every value bit-exactly.

use std::fs::File;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A header row plus string cells, every row the width of the header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

pub(crate) fn parse_err(path: &Path, message: impl Into<String>) -> Error {
    Error::parse(path, message)
}

pub fn read_table(path: &Path) -> Result<Table> {
    let file = File::open(path).map_err(|e| parse_err(path, e.to_string()))?;
    let mut reader = csv::ReaderBuilder::new().delimiter(b'\t').has_headers(true).from_reader(file);
    let header: Vec<String> = reader.headers().map_err(|e| parse_err(path, e.to_string()))?.iter().map(str::to_owned).collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| parse_err(path, e.to_string()))?;
        rows.push(record.iter().map(str::to_owned).collect());
    }
    Ok(Table { header, rows })
}

pub fn write_table(path: &Path, table: &Table) -> Result<()> {
    let mut writer = csv::WriterBuilder::new().delimiter(b'\t').from_path(path).map_err(|e| parse_err(path, e.to_string()))?;
    writer.write_record(&table.header).map_err(|e| parse_err(path, e.to_string()))?;
    for row in &table.rows {
        writer.write_record(row).map_err(|e| parse_err(path, e.to_string()))?;
    }
    writer.flush()?;
    Ok(())
}

pub(crate) fn parse_f64(path: &Path, cell: &str, what: &str) -> Result<f64> {
    cell.trim().parse::<f64>().map_err(|_| parse_err(path, format!("{what}: `{cell}` is not a number")))
}

/// A matrix with row and column labels, stored as TSV with the row labels in
/// the first column under `corner`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledMatrix {
    pub corner: String,
    pub row_ids: Vec<String>,
    pub col_ids: Vec<String>,
    pub values: DMatrix<f64>,
}

impl LabeledMatrix {
    pub fn new(corner: &str, row_ids: Vec<String>, col_ids: Vec<String>, values: DMatrix<f64>) -> Result<Self> {
        if values.shape() != (row_ids.len(), col_ids.len()) {
            return Err(Error::Dimension(format!(
                "{}×{} values for {} row and {} column labels",
                values.nrows(),
                values.ncols(),
                row_ids.len(),
                col_ids.len()
            )));
        }
        Ok(LabeledMatrix { corner: corner.to_owned(), row_ids, col_ids, values })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut header = vec![self.corner.clone()];
        header.extend(self.col_ids.iter().cloned());
        let rows = self
            .row_ids
            .iter()
            .enumerate()
            .map(|(i, id)| {
                let mut row = vec![id.clone()];
                row.extend(self.values.row(i).iter().map(|v| v.to_string()));
                row
            })
            .collect();
        write_table(path, &Table { header, rows })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let table = read_table(path)?;
        let (corner, col_ids) = table.header.split_first().ok_or_else(|| parse_err(path, "missing header row"))?;
        let mut row_ids = Vec::with_capacity(table.rows.len());
        let mut values = DMatrix::zeros(table.rows.len(), col_ids.len());
        for (i, row) in table.rows.iter().enumerate() {
            row_ids.push(row[0].clone());
            for (j, cell) in row[1..].iter().enumerate() {
                values[(i, j)] = parse_f64(path, cell, &format!("row {}, column `{}`", i + 1, col_ids[j]))?;
            }
        }
        Ok(LabeledMatrix { corner: corner.clone(), row_ids, col_ids: col_ids.to_vec(), values })
    }
}

/// File-name-safe form of a label: anything outside `[A-Za-z0-9_-]` becomes `_`.
pub fn file_stem(label: &str) -> String {
    label.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}
