#![no_std]

//! Fourier pseudo-spectral solver for the square phase field crystal (SPFC)
//! equation on periodic boxes.
//!
//! The crate is `no_std` with `alloc`. It contains the collocation operators
//! ([`spectral`]), the energy and per-step operators of the two BDF2 schemes
//! ([`model`]), the preconditioned steepest descent solver ([`psd`]), the time
//! stepper ([`stepper`]) and the verification harness ([`harness`]). File
//! formats and the command-line front end live in the `spfc-cli` crate.

extern crate alloc;

pub mod error;
pub mod fft;
pub mod grid;
pub mod harness;
pub mod manufactured;
pub mod model;
pub mod psd;
pub mod spectral;
pub mod stepper;

pub use error::{Error, Result};
pub use grid::{Field, Grid, SpectralField, VectorField, Wavevector};
pub use model::{ModelParams, Scheme, StepContext};
pub use psd::{PsdConfig, ResidualNorm, SolveStats};
pub use stepper::{EnergyRecord, Segment, SimState, Sink};
