//! CSV energy logs: `step,time,E,E_mod,mass,h2_norm,psd_iters,residual`.
//!
//! Reals are written with 17 significant digits.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use spfc_core::stepper::EnergyRecord;

pub const HEADER: [&str; 8] = [
    "step",
    "time",
    "E",
    "E_mod",
    "mass",
    "h2_norm",
    "psd_iters",
    "residual",
];

#[derive(Debug, thiserror::Error)]
pub enum LogError {
    #[error("energy log I/O: {0}")]
    Io(#[from] io::Error),
    #[error("energy log: {0}")]
    Csv(#[from] csv::Error),
    #[error("energy log row {row}: {message}")]
    Row { row: usize, message: String },
}

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

/// Streams records as they arrive.
pub struct EnergyLogWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> EnergyLogWriter<W> {
    pub fn new(out: W) -> Result<Self, LogError> {
        let mut inner = csv::Writer::from_writer(out);
        inner.write_record(HEADER)?;
        Ok(Self { inner })
    }

    pub fn write(&mut self, r: &EnergyRecord) -> Result<(), LogError> {
        self.inner.write_record([
            r.step.to_string(),
            real(r.time),
            real(r.energy),
            real(r.modified_energy),
            real(r.mass),
            real(r.h2_norm),
            r.psd_iters.to_string(),
            real(r.residual),
        ])?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<(), LogError> {
        self.inner.flush()?;
        Ok(())
    }
}

pub fn write_energy_log(records: &[EnergyRecord], path: &Path) -> Result<(), LogError> {
    let mut w = EnergyLogWriter::new(File::create(path)?)?;
    for r in records {
        w.write(r)?;
    }
    w.flush()
}

pub fn read_energy_log(path: &Path) -> Result<Vec<EnergyRecord>, LogError> {
    let mut reader = csv::Reader::from_path(path)?;
    if reader.headers()?.iter().ne(HEADER) {
        return Err(LogError::Row {
            row: 0,
            message: "unexpected header".into(),
        });
    }
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let bad = |col: usize| LogError::Row {
            row: i + 1,
            message: format!("cannot parse {}", HEADER[col]),
        };
        let f = |col: usize| {
            row.get(col)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| bad(col))
        };
        let u = |col: usize| {
            row.get(col)
                .and_then(|s| s.parse::<usize>().ok())
                .ok_or_else(|| bad(col))
        };
        out.push(EnergyRecord {
            step: u(0)?,
            time: f(1)?,
            energy: f(2)?,
            modified_energy: f(3)?,
            mass: f(4)?,
            h2_norm: f(5)?,
            psd_iters: u(6)?,
            residual: f(7)?,
        });
    }
    Ok(out)
}
