use std::process::Command;

use cavity_esd::operators::build_space;
use cavity_esd::states::{make_initial, InitialStateSpec, StateFamily};
use cavity_esd::sweep::io::{save_raw_state, write_grid, write_sweep_csv, SWEEP_COLUMNS, SWEEP_SCHEMA};
use cavity_esd::sweep::{linspace, run_sweep, RateUnit, SweepConfig};

fn csv(cfg: &SweepConfig) -> Vec<u8> {
    let mut buf = Vec::new();
    write_sweep_csv(&run_sweep(cfg).unwrap(), &mut buf).unwrap();
    buf
}

#[test]
fn full_grid_cardinality() {
    let cfg = SweepConfig::reference(StateFamily::Psi, linspace(0.0, 1.0, 101), vec![0.1], RateUnit::Omega, 0.2, 2000);
    let res = run_sweep(&cfg).unwrap();
    assert_eq!(res.rows.len(), 101 * 2001);
    assert_eq!(res.rows.len(), 202_101);
    assert_eq!(res.cells.len(), 101);
    assert!(res.cells.iter().all(|c| c.n_samples == 2001));
}

#[test]
fn output_is_identical_across_worker_counts() {
    let mut cfg = SweepConfig::reference(StateFamily::Psi, linspace(0.05, 0.95, 7), vec![0.0, 0.1, 10.0], RateUnit::Omega, 5.0, 100);
    cfg.workers = Some(1);
    let one = csv(&cfg);
    cfg.workers = Some(4);
    let four = csv(&cfg);
    cfg.workers = None;
    let default = csv(&cfg);
    assert_eq!(one, four);
    assert_eq!(one, default);
    assert_eq!(one, csv(&cfg));
}

#[test]
fn csv_layout() {
    let cfg = SweepConfig::reference(StateFamily::WernerPsi, vec![0.3], vec![1.0], RateUnit::Gamma0, 1.0, 4);
    let text = String::from_utf8(csv(&cfg)).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], format!("# schema={SWEEP_SCHEMA}"));
    assert_eq!(lines[1], SWEEP_COLUMNS.join(","));
    assert_eq!(lines.len(), 2 + 5);
    let first: Vec<&str> = lines[2].split(',').collect();
    assert_eq!(first.len(), 9);
    assert_eq!(first[0].parse::<f64>().unwrap(), 1.0);
    assert_eq!(first[1].parse::<f64>().unwrap(), 0.3);
    assert_eq!(first[8], "x_state");
    // 17 significant digits
    assert_eq!(first[2], "0.0000000000000000e0");

    let mut grid = Vec::new();
    write_grid(&run_sweep(&cfg).unwrap(), &mut grid).unwrap();
    let grid = String::from_utf8(grid).unwrap();
    assert_eq!(grid.lines().count(), 2 + 5);
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cavity-esd"))
}

#[test]
fn cli_writes_csv_and_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rows.csv");
    let grid = dir.path().join("grid.csv");
    let status = bin()
        .args(["--state", "psi", "--alpha2-grid", "0.1:0.9:3", "--gamma-s", "0,1", "--rate-unit", "omega"])
        .args(["--t-max", "2", "--steps", "10", "--out"])
        .arg(&out)
        .arg("--emit-grid")
        .arg(&grid)
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let rows = std::fs::read_to_string(&out).unwrap();
    assert_eq!(rows.lines().count(), 2 + 2 * 3 * 11);
    let grid = std::fs::read_to_string(&grid).unwrap();
    assert_eq!(grid.lines().count(), 2 + 2 * 11);
    let summary = String::from_utf8(status.stderr).unwrap();
    assert_eq!(summary.lines().count(), 1 + 6);
}

#[test]
fn cli_flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "state = phi\nalpha2 = 0.2, 0.4\ngamma_s = 0.5\nrate_unit = gamma0\nt_max = 1\nsteps = 4\n").unwrap();
    let a = bin().arg("--config").arg(&cfg).output().unwrap();
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(String::from_utf8(a.stdout).unwrap().lines().count(), 2 + 2 * 5);
    let b = bin().arg("--config").arg(&cfg).args(["--alpha2", "0.7", "--steps", "2"]).output().unwrap();
    assert!(b.status.success());
    let text = String::from_utf8(b.stdout).unwrap();
    assert_eq!(text.lines().count(), 2 + 3);
    assert!(text.lines().skip(2).all(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap() == 0.7));
}

#[test]
fn cli_requires_rate_unit() {
    let out = bin().args(["--alpha2", "0.3", "--gamma-s", "1", "--t-max", "1", "--steps", "2"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("rate-unit"));
}

#[test]
fn cli_rejects_bad_input() {
    for args in [
        &["--alpha2", "1.5", "--gamma-s", "1", "--rate-unit", "omega"][..],
        &["--alpha2", "0.5", "--gamma-s", "1", "--rate-unit", "hz"][..],
        &["--alpha2-grid", "0:1", "--gamma-s", "1", "--rate-unit", "omega"][..],
        &["--alpha2", "0.5", "--gamma-s", "1", "--rate-unit", "omega", "--t-max", "0"][..],
    ] {
        let out = bin().args(args).output().unwrap();
        assert!(!out.status.success(), "{args:?}");
    }
}

#[test]
fn cli_accepts_raw_initial_state() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("state.txt");
    let space = build_space(3).unwrap();
    let st = make_initial(&InitialStateSpec::psi(0.3, 0.0), &space).unwrap();
    save_raw_state(&st, std::fs::File::create(&path).unwrap()).unwrap();
    let raw = bin()
        .arg("--initial-state")
        .arg(&path)
        .args(["--gamma-s", "1", "--rate-unit", "omega", "--t-max", "3", "--steps", "6"])
        .output()
        .unwrap();
    assert!(raw.status.success(), "{}", String::from_utf8_lossy(&raw.stderr));
    let family = bin()
        .args(["--alpha2", "0.3", "--gamma-s", "1", "--rate-unit", "omega", "--t-max", "3", "--steps", "6"])
        .output()
        .unwrap();
    let conc = |bytes: &[u8]| -> Vec<String> {
        String::from_utf8_lossy(bytes).lines().skip(2).map(|l| l.split(',').nth(3).unwrap().to_string()).collect()
    };
    assert_eq!(conc(&raw.stdout), conc(&family.stdout));
    assert!(String::from_utf8_lossy(&raw.stdout).lines().nth(2).unwrap().split(',').nth(1) == Some("NaN"));
}
