//! Experiment drivers: manufactured-solution convergence studies, order
//! fitting, pattern formation from seeded noise, and the verification suite.

mod convergence;
mod pattern;
pub mod verify;

pub use convergence::{
    order_fit, spatial_convergence_study, temporal_convergence_study, ConvergenceRow, StudySpec,
};
pub use pattern::{
    pattern_experiment, random_init, PatternConfig, PatternSummary, Site, SiteShape, SNAPSHOT_TIMES,
};
pub use verify::{verify_suite, CheckResult, Mutation, VerifyOptions, VerifyReport};
