//! CSV emission: header row, '.' decimal separator, scientific notation for
//! probabilities and errors, newline-terminated records.

use std::io::Write;

use crate::error::{CzError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(&self.header).map_err(io_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(io_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

fn io_err(e: csv::Error) -> CzError {
    CzError::Io(e.to_string())
}

/// Plain decimal (parameters on their input grid).
pub fn plain(x: f64) -> String {
    format!("{x}")
}

/// Scientific notation (probabilities, errors, energies).
pub fn sci(x: f64) -> String {
    format!("{x:.6e}")
}

/// Times in ns.
pub fn time(x: f64) -> String {
    format!("{x:.4}")
}
