//! Command-line driver for `spfc-core`: run configuration, CSV energy logs,
//! binary field snapshots and the `spfc` subcommands.

pub mod app;
pub mod config;
pub mod energy_log;
pub mod sinks;
pub mod snapshot;

pub use config::{parse_config, parse_config_with, ConfigError, Mode, Profile, RunConfig};
pub use energy_log::{read_energy_log, write_energy_log, EnergyLogWriter};
pub use sinks::FileSink;
pub use snapshot::{read_snapshot, write_snapshot, SnapshotError, SnapshotMeta};
