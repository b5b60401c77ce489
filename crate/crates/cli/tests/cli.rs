use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use spfc_cli::read_energy_log;
use spfc_cli::snapshot::read_snapshot;

fn spfc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spfc"))
        .args(args)
        .output()
        .unwrap()
}

fn dir_arg(p: &Path) -> String {
    format!("output.dir={}", p.display())
}

#[test]
fn verify_writes_report_and_succeeds() {
    let tmp = tempfile::tempdir().unwrap();
    let out = spfc(&[
        "verify",
        "--set",
        &dir_arg(tmp.path()),
        "--set",
        "verify.samples=3",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = fs::read_to_string(tmp.path().join("report.txt")).unwrap();
    assert!(report.lines().count() >= 10);
    assert!(!report.contains("FAIL"));
    let resolved = fs::read_to_string(tmp.path().join("config.resolved")).unwrap();
    assert!(resolved.contains("mode = verify"));
}

#[test]
fn conv_time_ci_reports_fitted_orders() {
    let tmp = tempfile::tempdir().unwrap();
    let out = spfc(&[
        "conv-time",
        "--set",
        "profile=ci",
        "--set",
        "study.n=16",
        "--set",
        "study.nk_list=25,50,100",
        "--set",
        &dir_arg(tmp.path()),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = fs::read_to_string(tmp.path().join("report.txt")).unwrap();
    for line in report.lines() {
        let order: f64 = line.rsplit(' ').next().unwrap().parse().unwrap();
        assert!(
            line.starts_with("order ") && (order - 2.0).abs() < 0.1,
            "{line}"
        );
    }
    let table = fs::read_to_string(tmp.path().join("conv_time.csv")).unwrap();
    assert_eq!(table.lines().count(), 1 + 2 * 3);
}

#[test]
fn conv_space_writes_table() {
    let tmp = tempfile::tempdir().unwrap();
    let out = spfc(&[
        "conv-space",
        "--set",
        "study.n_list=6,8",
        "--set",
        "study.dt=0.04",
        "--set",
        "study.schemes=1",
        "--set",
        &dir_arg(tmp.path()),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let table = fs::read_to_string(tmp.path().join("conv_space.csv")).unwrap();
    assert!(table.starts_with("scheme,N,dt,error_l2,error_h3\nbdf2-es-1,6,"));
}

#[test]
fn usage_and_config_errors_exit_2() {
    let out = spfc(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));

    let out = spfc(&["simulate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("output.dir"));

    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    fs::write(
        &cfg,
        format!("output.dir = {}\ngrid.n = 2\n", tmp.path().display()),
    )
    .unwrap();
    let out = spfc(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2: grid.n"));

    let out = spfc(&["simulate", "--config", "/nonexistent/run.cfg"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(spfc(&["--help"]).status.code(), Some(0));
}

#[test]
fn solver_failure_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let out = spfc(&[
        "simulate",
        "--set",
        "grid.n=16",
        "--set",
        "grid.length=10",
        "--set",
        "init.sites=5,5,10",
        "--set",
        "psd.max_iter=1",
        "--set",
        &dir_arg(tmp.path()),
    ]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

const SMALL_RUN: &str = "
grid.n = 32
grid.length = 20
init.sites = 10,10,2
time.schedule = 0.05:0.5, 0.1:1
output.snapshot_times = 0.5, 1
";

#[test]
fn simulate_outputs_are_reproducible_from_resolved_config() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let cfg = tmp.path().join("run.cfg");
    fs::write(&cfg, format!("{SMALL_RUN}output.dir = {}\n", a.display())).unwrap();
    let out = spfc(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let log = read_energy_log(&a.join("energy.csv")).unwrap();
    assert_eq!(log.len(), 16);
    assert_eq!(log.last().unwrap().time, 1.0);
    let (phi, meta) = read_snapshot(&a.join("snapshots/phi_t1.bin")).unwrap();
    assert_eq!((meta.step, meta.n, meta.seed), (15, 32, 1));
    assert_eq!(phi.values().len(), 32 * 32);
    assert!(a.join("snapshots/phi_t0.5.bin").exists());
    let report = fs::read_to_string(a.join("report.txt")).unwrap();
    assert!(report.contains("steps = 15"));

    let resolved = a.join("config.resolved");
    let out = spfc(&[
        "simulate",
        "--config",
        resolved.to_str().unwrap(),
        "--set",
        &dir_arg(&b),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        fs::read(a.join("energy.csv")).unwrap(),
        fs::read(b.join("energy.csv")).unwrap()
    );
    assert_eq!(
        fs::read(a.join("snapshots/phi_t1.bin")).unwrap(),
        fs::read(b.join("snapshots/phi_t1.bin")).unwrap()
    );
}
