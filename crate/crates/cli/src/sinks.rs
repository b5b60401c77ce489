//! File-backed run output.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use spfc_core::psd::SolveStats;
use spfc_core::stepper::{EnergyRecord, SimState, Sink};
use spfc_core::{Error, ModelParams};

use crate::energy_log::EnergyLogWriter;
use crate::snapshot::{write_snapshot, SnapshotMeta};

/// Writes `energy.csv` and `snapshots/phi_t<time>.bin` under a directory.
pub struct FileSink {
    log: EnergyLogWriter<BufWriter<File>>,
    snapshot_dir: PathBuf,
    seed: u64,
    pub snapshots: Vec<PathBuf>,
}

fn sink_err(e: impl std::fmt::Display) -> Error {
    Error::Sink(e.to_string())
}

impl FileSink {
    pub fn create(dir: &Path, seed: u64) -> Result<Self, Error> {
        let snapshot_dir = dir.join("snapshots");
        fs::create_dir_all(&snapshot_dir).map_err(sink_err)?;
        let file = File::create(dir.join("energy.csv")).map_err(sink_err)?;
        Ok(Self {
            log: EnergyLogWriter::new(BufWriter::new(file)).map_err(sink_err)?,
            snapshot_dir,
            seed,
            snapshots: Vec::new(),
        })
    }

    pub fn finish(mut self) -> Result<Vec<PathBuf>, Error> {
        self.log.flush().map_err(sink_err)?;
        Ok(self.snapshots)
    }
}

impl Sink for FileSink {
    fn record(&mut self, record: &EnergyRecord, _stats: Option<&SolveStats>) -> Result<(), Error> {
        self.log.write(record).map_err(sink_err)
    }

    fn snapshot(&mut self, state: &SimState, params: &ModelParams) -> Result<(), Error> {
        let g = state.phi_curr.grid();
        let meta = SnapshotMeta {
            dim: g.dim(),
            n: g.n_per_axis(),
            length: g.length(),
            time: state.time,
            step: state.step_index,
            scheme: params.scheme(),
            epsilon: params.epsilon(),
            reg_a: params.reg_a(),
            seed: self.seed,
        };
        let path = self.snapshot_dir.join(format!("phi_t{}.bin", state.time));
        write_snapshot(&state.phi_curr, &meta, &path).map_err(sink_err)?;
        self.snapshots.push(path);
        // keep the log on disk consistent with the snapshots
        self.log.flush().map_err(sink_err)
    }
}
