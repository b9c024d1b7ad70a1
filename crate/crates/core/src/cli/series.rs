//! Plot-ready CSV series.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::fsutil::atomic_write;

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("series {name}: column {column} has {found} rows, expected {expected}")]
    Ragged { name: String, column: String, expected: usize, found: usize },
    #[error("writing {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// Named columns of equal length; `None` cells are written empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub columns: Vec<(String, Vec<Option<f64>>)>,
}

impl Series {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), columns: Vec::new() }
    }

    pub fn column(mut self, header: &str, values: impl IntoIterator<Item = f64>) -> Self {
        self.columns.push((header.to_string(), values.into_iter().map(Some).collect()));
        self
    }

    pub fn optional_column(mut self, header: &str, values: impl IntoIterator<Item = Option<f64>>) -> Self {
        self.columns.push((header.to_string(), values.into_iter().collect()));
        self
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    /// RFC 4180 text with a header row and `%.16e` floats.
    pub fn to_csv(&self) -> Result<Vec<u8>, SeriesError> {
        let rows = self.columns.first().map_or(0, |c| c.1.len());
        for (h, c) in &self.columns {
            if c.len() != rows {
                return Err(SeriesError::Ragged { name: self.name.clone(), column: h.clone(), expected: rows, found: c.len() });
            }
        }
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        let io = |e: csv::Error| SeriesError::Io { path: PathBuf::from(self.file_name()), source: e.into() };
        w.write_record(self.columns.iter().map(|c| c.0.as_str())).map_err(io)?;
        for i in 0..rows {
            w.write_record(self.columns.iter().map(|c| c.1[i].map(|v| format!("{v:.16e}")).unwrap_or_default()))
                .map_err(io)?;
        }
        w.into_inner().map_err(|e| SeriesError::Io { path: PathBuf::from(self.file_name()), source: e.into_error() })
    }
}

/// Write `series` into `dir` atomically and return the file name.
pub fn emit_series(dir: &Path, series: &Series) -> Result<String, SeriesError> {
    let bytes = series.to_csv()?;
    let path = dir.join(series.file_name());
    atomic_write(&path, &bytes).map_err(|source| SeriesError::Io { path, source })?;
    Ok(series.file_name())
}
