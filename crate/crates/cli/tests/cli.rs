//! Integration tests driving the command implementations in process:
//! exit-code mapping, output determinism, and the files each command leaves
//! behind.

use std::fs;
use std::path::{Path, PathBuf};

use cosim_cli::{cmd_compare, cmd_convergence, cmd_mpc, cmd_run, cmd_validate, CliError, RunOptions};

fn write_scenario(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

/// Two-day plant-A scenario with a rule-based controller and an MPC variant.
const SMALL_A: &str = r#"
name = "small-a"
seed = 7

[engine]
origin = 0
base_period = 3600
duration = 172800

[data.load]
generator = "load"
annual_mwh = 21217.0

[plant]
kind = "a"

[plant.initial]
e_mwh = 0.5
on = true

[control]
kind = "rbc"
period = 3600

[variants.mpc]
"control.kind" = "mpc"
"control.period" = 86400
"control.horizon" = { length = 172800, step = 3600 }
"#;

fn options(out: &Path) -> RunOptions {
    RunOptions { out: Some(out.to_path_buf()), seed: None, gap: None }
}

#[test]
fn validate_accepts_good_and_rejects_broken_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_scenario(dir.path(), "good.toml", SMALL_A);
    assert!(cmd_validate(&good).is_ok());

    // a load series pointing at a missing file must fail validation (exit 2)
    let broken = SMALL_A.replace(
        "generator = \"load\"\nannual_mwh = 21217.0",
        "csv = \"no_such_file.csv\"",
    );
    let bad = write_scenario(dir.path(), "bad.toml", &broken);
    let err = cmd_validate(&bad).unwrap_err();
    assert!(matches!(err, CliError::Validation(_)), "{}", err.message());
    assert_eq!(err.exit_code(), 2);

    // unreadable path is a validation failure too
    let err = cmd_validate(&dir.path().join("missing.toml")).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn run_produces_outputs_and_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(dir.path(), "s.toml", SMALL_A);

    let out1 = dir.path().join("run1");
    let out2 = dir.path().join("run2");
    cmd_run(&scenario, &options(&out1)).unwrap();
    cmd_run(&scenario, &options(&out2)).unwrap();

    for file in ["kpis.csv", "report.txt", "plant.E.csv", "plant.Pb.csv", "ctl.u.csv"] {
        let a = fs::read(out1.join(file)).unwrap();
        let b = fs::read(out2.join(file)).unwrap();
        assert!(!a.is_empty(), "{file} is empty");
        assert_eq!(a, b, "{file} differs between reruns");
    }
    // 48 hourly samples plus the header line
    let series = fs::read_to_string(out1.join("plant.E.csv")).unwrap();
    assert_eq!(series.lines().count(), 49);
}

#[test]
fn mpc_command_forces_the_optimizing_controller() {
    let dir = tempfile::tempdir().unwrap();
    // the scenario declares rule-based control with no horizon; `mpc` needs
    // one, so it must fail validation...
    let scenario = write_scenario(dir.path(), "s.toml", SMALL_A);
    let out = dir.path().join("mpc");
    let err = cmd_mpc(&scenario, &options(&out)).unwrap_err();
    assert_eq!(err.exit_code(), 2);

    // ...and succeed once the scenario carries a horizon
    let with_horizon = SMALL_A.replace(
        "kind = \"rbc\"\nperiod = 3600",
        "kind = \"rbc\"\nperiod = 86400\nhorizon = { length = 172800, step = 3600 }",
    );
    let scenario = write_scenario(dir.path(), "h.toml", &with_horizon);
    cmd_mpc(&scenario, &options(&out)).unwrap();
    let diag = fs::read_to_string(out.join("mpc_diagnostics.csv")).unwrap();
    assert_eq!(diag.lines().count(), 3, "two daily iterations plus header");
}

#[test]
fn infeasible_window_maps_to_exit_code_4() {
    let dir = tempfile::tempdir().unwrap();
    // the load peaks far above everything the plant can deliver, so the
    // very first window has no feasible dispatch
    let impossible = SMALL_A
        .replace("annual_mwh = 21217.0", "annual_mwh = 400000.0\npeak_limit_mw = 100.0")
        .replace(
            "kind = \"rbc\"\nperiod = 3600",
            "kind = \"mpc\"\nperiod = 86400\nhorizon = { length = 172800, step = 3600 }",
        );
    let scenario = write_scenario(dir.path(), "s.toml", &impossible);
    let err = cmd_run(&scenario, &options(&dir.path().join("out"))).unwrap_err();
    assert!(matches!(err, CliError::Infeasible(_)), "{}", err.message());
    assert_eq!(err.exit_code(), 4);
}

#[test]
fn compare_reports_every_variant() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(dir.path(), "s.toml", SMALL_A);
    let out = dir.path().join("cmp");
    cmd_compare(&scenario, &options(&out)).unwrap();
    let table = fs::read_to_string(out.join("comparison.csv")).unwrap();
    let runs: Vec<&str> = table.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(runs, ["base", "mpc"]);
    assert!(out.join("base/kpis.csv").exists());
    assert!(out.join("mpc/kpis.csv").exists());
}

#[test]
fn convergence_refines_the_coupling_period() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(dir.path(), "s.toml", SMALL_A);
    let out = dir.path().join("conv");
    cmd_convergence(&scenario, &[1, 2, 4], &options(&out)).unwrap();
    let table = fs::read_to_string(out.join("convergence.csv")).unwrap();
    assert_eq!(table.lines().count(), 4, "header plus one row per multiplier");
}
