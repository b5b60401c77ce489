//! `spfc` subcommands.
//!
//! Exit codes: 0 success, 1 failed verification or output I/O error,
//! 2 usage or configuration error, 3 solver failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use spfc_core::harness::{
    pattern_experiment, spatial_convergence_study, temporal_convergence_study, ConvergenceRow,
    StudySpec, VerifyOptions,
};
use spfc_core::manufactured::TimeProfile;
use spfc_core::Error;

use crate::config::{parse_config_with, Mode, RunConfig};
use crate::sinks::FileSink;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

/// File name of the resolved configuration written to every output directory.
pub const RESOLVED_CONFIG: &str = "config.resolved";
pub const REPORT: &str = "report.txt";

#[derive(Parser, Debug)]
#[command(name = "spfc", version, about = "Square phase field crystal solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Seeded pattern-formation run with energy log and snapshots.
    Simulate(Common),
    /// Spatial manufactured-solution study.
    ConvSpace(Common),
    /// Temporal manufactured-solution study with fitted orders.
    ConvTime(Common),
    /// Property checks of the discrete operators and solver.
    Verify(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// Configuration file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

enum Failure {
    Config(String),
    Solver(Error),
    Output(String),
    Checks(usize),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Config(_) => EXIT_CONFIG,
            Failure::Solver(_) => EXIT_SOLVER,
            Failure::Output(_) | Failure::Checks(_) => EXIT_FAILED,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Sink(m) => Failure::Output(m),
            e => Failure::Solver(e),
        }
    }
}

fn output(e: impl std::fmt::Display) -> Failure {
    Failure::Output(e.to_string())
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            match &f {
                Failure::Config(m) => eprintln!("spfc: configuration error: {m}"),
                Failure::Solver(e) => eprintln!("spfc: solver failure: {e}"),
                Failure::Output(m) => eprintln!("spfc: output error: {m}"),
                Failure::Checks(n) => eprintln!("spfc: {n} verification check(s) failed"),
            }
            f.code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    let (mode, common) = match cli.command {
        Command::Simulate(c) => (Mode::Simulate, c),
        Command::ConvSpace(c) => (Mode::ConvSpace, c),
        Command::ConvTime(c) => (Mode::ConvTime, c),
        Command::Verify(c) => (Mode::Verify, c),
    };
    let text = match &common.config {
        Some(p) => {
            fs::read_to_string(p).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?
        }
        None => String::new(),
    };
    let mut overrides = common.set;
    overrides.push(format!("mode={}", mode.name()));
    let cfg = parse_config_with(&text, &overrides).map_err(|e| Failure::Config(e.to_string()))?;

    let dir = &cfg.output_dir;
    fs::create_dir_all(dir)
        .map_err(|e| Failure::Config(format!("output.dir: {}: {e}", dir.display())))?;
    fs::write(dir.join(RESOLVED_CONFIG), cfg.render()).map_err(output)?;

    let report = match mode {
        Mode::Simulate => simulate(&cfg)?,
        Mode::ConvSpace => conv_space(&cfg)?,
        Mode::ConvTime => conv_time(&cfg)?,
        Mode::Verify => return verify(&cfg),
    };
    write_report(dir, &report)
}

fn write_report(dir: &Path, report: &str) -> Result<(), Failure> {
    fs::write(dir.join(REPORT), report).map_err(output)?;
    print!("{report}");
    Ok(())
}

fn simulate(cfg: &RunConfig) -> Result<String, Failure> {
    let mut sink = FileSink::create(&cfg.output_dir, cfg.seed)?;
    let s = pattern_experiment(&cfg.pattern(), &cfg.psd, &mut sink)?;
    let snaps = sink.finish()?;
    let mut r = String::new();
    let _ = writeln!(r, "steps = {}", s.steps);
    let _ = writeln!(r, "initial_energy = {:.16e}", s.initial_energy);
    let _ = writeln!(r, "final_energy = {:.16e}", s.final_energy);
    let _ = writeln!(r, "min = {:.16e}", s.min);
    let _ = writeln!(r, "max = {:.16e}", s.max);
    let _ = writeln!(r, "mass_drift = {:.3e}", s.mass_drift);
    let _ = writeln!(r, "max_h2 = {:.16e}", s.max_h2);
    let _ = writeln!(r, "psd_iterations = {}", s.total_psd_iters);
    let _ = writeln!(r, "snapshots = {}", snaps.len());
    Ok(r)
}

fn study_spec(cfg: &RunConfig, scheme: spfc_core::Scheme) -> StudySpec {
    StudySpec {
        params: cfg.params.with_scheme(scheme),
        t_final: cfg.study.t_final,
        length: cfg.study.length,
        profile: TimeProfile::Cosine,
        psd: cfg.psd,
    }
}

fn table_row(t: &mut String, scheme: &str, r: &ConvergenceRow) {
    let _ = writeln!(
        t,
        "{scheme},{},{:.16e},{:.16e},{:.16e}",
        r.resolution, r.dt, r.error_l2, r.error_h3
    );
}

fn conv_space(cfg: &RunConfig) -> Result<String, Failure> {
    let mut table = String::from("scheme,N,dt,error_l2,error_h3\n");
    let mut report = String::new();
    for &scheme in &cfg.study.schemes {
        let rows =
            spatial_convergence_study(&cfg.study.n_list, cfg.study.dt, &study_spec(cfg, scheme))?;
        for r in &rows {
            table_row(&mut table, scheme.name(), r);
        }
        if let (Some(first), Some(last)) = (rows.first(), rows.last()) {
            let _ = writeln!(
                report,
                "{scheme}: error(N={}) / error(N={}) = {:.3e}, max error = {:.3e}",
                last.resolution,
                first.resolution,
                last.error_l2 / first.error_l2,
                rows.iter().map(|r| r.error_l2).fold(0.0, f64::max)
            );
        }
    }
    fs::write(cfg.output_dir.join("conv_space.csv"), table).map_err(output)?;
    Ok(report)
}

fn conv_time(cfg: &RunConfig) -> Result<String, Failure> {
    let mut table = String::from("scheme,steps,dt,error_l2,error_h3\n");
    let mut report = String::new();
    for &scheme in &cfg.study.schemes {
        let (rows, order) =
            temporal_convergence_study(&cfg.study.nk_list, cfg.study.n, &study_spec(cfg, scheme))?;
        for r in &rows {
            table_row(&mut table, scheme.name(), r);
        }
        let _ = writeln!(report, "order {scheme} = {order:.4}");
    }
    fs::write(cfg.output_dir.join("conv_time.csv"), table).map_err(output)?;
    Ok(report)
}

fn verify(cfg: &RunConfig) -> Result<(), Failure> {
    let rep = spfc_core::harness::verify_suite(&VerifyOptions {
        samples: cfg.verify_samples,
        seed: cfg.seed,
        ..VerifyOptions::default()
    });
    let mut r = String::new();
    for c in &rep.checks {
        let tag = match (c.passed, c.advisory) {
            (true, _) => "PASS",
            (false, true) => "NOTE",
            (false, false) => "FAIL",
        };
        let _ = writeln!(
            r,
            "{tag} {}: measured {:.3e}, threshold {:.3e}",
            c.name, c.measured, c.threshold
        );
    }
    write_report(&cfg.output_dir, &r)?;
    match rep.failures().count() {
        0 => Ok(()),
        n => Err(Failure::Checks(n)),
    }
}
