use std::path::{Path, PathBuf};
use std::process::Command;

use levarray::config::{ConfigError, ScenarioConfig};
use levarray::run::run_scenario;
use levarray::scenario::ScenarioId;
use levarray_core::entanglement::{figures_from_values, Arity};
use levarray_core::optimizer::SymmetryMode;

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn with(id: ScenarioId, flags: &[&str]) -> ScenarioConfig {
    let mut c = id.preset();
    for f in flags {
        c.apply_flag(f).unwrap();
    }
    c.validate().unwrap();
    c
}

/// A 3 x 2 landscape with cheap equal-coupling optimizations.
const SMALL: &[&str] = &[
    "objective.symmetry=equal",
    "objective.arity=3",
    "grid.lambda1.start=0.3",
    "grid.lambda1.stop=0.7",
    "grid.lambda1.step=0.2",
    "grid.lambda2.start=0.6",
    "grid.lambda2.stop=0.8",
    "grid.lambda2.step=0.2",
];

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn empty_config_gives_reference_parameters() {
    let mut c = ScenarioId::Fig2a.preset();
    c.apply_text("\n# nothing\n", Path::new("empty.conf")).unwrap();
    c.validate().unwrap();
    assert_eq!((c.quality_factor, c.nbar, c.kappa, c.g_max), (5e9, 2e7, 0.4, 0.4));
    assert_eq!(c.gamma(), 2e-10);
    assert_eq!((c.arity, c.count, c.symmetry), (Arity::Dyadic, 3, SymmetryMode::EqualCouplings));
}

#[test]
fn zero_occupation_override_is_accepted() {
    let c = with(ScenarioId::Fig4a, &["params.nbar=0"]);
    assert_eq!(c.nbar, 0.0);
}

#[test]
fn unknown_key_is_named_with_its_line() {
    let mut c = ScenarioId::Custom.preset();
    let err = c.apply_text("params.nbar = 1\n\nfoo = 3\n", Path::new("x.conf")).unwrap_err();
    assert!(matches!(&err, ConfigError::UnknownKey { key, .. } if key == "foo"));
    let msg = err.to_string();
    assert!(msg.contains("`foo`") && msg.contains("x.conf:3"), "{msg}");
    assert!(c.apply_flag("grid.lambda3.step=0.1").unwrap_err().to_string().contains("grid.lambda3.step"));
}

#[test]
fn malformed_values_are_rejected() {
    let mut c = ScenarioId::Custom.preset();
    for bad in ["params.nbar=lots", "objective.count=4", "objective.symmetry=odd", "run.workers=0", "novalue"] {
        assert!(c.apply_flag(bad).is_err(), "{bad}");
    }
    c.apply_flag("params.kappa=-1").unwrap();
    assert!(c.validate().is_err());
}

#[test]
fn flags_override_file_values() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.conf");
    std::fs::write(&path, "params.nbar = 5\nrun.workers = 3\n").unwrap();
    let args = levarray::RunArgs {
        scenario: ScenarioId::Custom,
        config: Some(path),
        out: None,
        workers: None,
        oracle: false,
        overrides: vec!["params.nbar=7".into()],
    };
    let c = levarray::resolve(&args).unwrap();
    assert_eq!((c.nbar, c.workers), (7.0, Some(3)));
}

#[test]
fn shipped_configs_reproduce_their_presets() {
    for id in ScenarioId::ALL {
        let path = configs_dir().join(format!("{id}.conf"));
        let mut c = id.preset();
        c.apply_file(&path).unwrap_or_else(|e| panic!("{e}"));
        c.validate().unwrap();
        if id != ScenarioId::Custom {
            assert_eq!(c, id.preset(), "{id}");
        }
    }
}

#[test]
fn landscape_round_trips_through_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = with(ScenarioId::Custom, SMALL);
    let outcome = run_scenario(&config, dir.path()).unwrap();
    let path = dir.path().join("landscape.csv");
    assert!(outcome.files.contains(&path));

    let text = std::fs::read_to_string(&path).unwrap();
    assert!(!text.contains('\r'));
    assert!(text.ends_with('\n'));
    let (header, rows) = read_csv(&path);
    assert_eq!(header, levarray::output::LANDSCAPE_HEADER);
    assert_eq!(rows.len(), 6);
    let num = |row: &Vec<String>, name: &str| row[column(&header, name)].parse::<f64>().unwrap();
    let mut seen_nonzero = false;
    for row in &rows {
        let splits = ["E_split_1_23", "E_split_2_31", "E_split_3_12"].map(|n| num(row, n));
        let fom = figures_from_values(splits, Arity::Triadic);
        for (name, value) in [("fom_E1", fom.one), ("fom_E2", fom.two), ("fom_E3", fom.all)] {
            assert!((num(row, name) - value).abs() < 1e-9, "{name}: {} vs {value}", num(row, name));
        }
        seen_nonzero |= fom.all > 0.0;
    }
    assert!(seen_nonzero);
    let keys: Vec<(f64, f64)> = rows.iter().map(|r| (num(r, "lambda1"), num(r, "lambda2"))).collect();
    assert!(keys.windows(2).all(|w| w[0] < w[1]), "{keys:?}");
}

#[test]
fn landscape_is_independent_of_worker_count() {
    let mut files = Vec::new();
    for workers in ["run.workers=1", "run.workers=3"] {
        let dir = tempfile::tempdir().unwrap();
        let mut flags = SMALL.to_vec();
        flags.extend(["objective.symmetry=free", "objective.count=1", "grid.lambda1.step=0.4", workers]);
        run_scenario(&with(ScenarioId::Custom, &flags), dir.path()).unwrap();
        files.push(std::fs::read(dir.path().join("landscape.csv")).unwrap());
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn zero_coupling_bound_gives_zero_negativities() {
    let dir = tempfile::tempdir().unwrap();
    let mut flags = SMALL.to_vec();
    flags.extend(["params.g_max=0", "objective.symmetry=free"]);
    run_scenario(&with(ScenarioId::Custom, &flags), dir.path()).unwrap();
    let (header, rows) = read_csv(&dir.path().join("landscape.csv"));
    for row in &rows {
        for name in &header[3..15] {
            assert_eq!(row[column(&header, name)].parse::<f64>().unwrap(), 0.0, "{name}");
        }
    }
}

#[test]
fn fig2a_summary_locates_the_cut_maximum() {
    let dir = tempfile::tempdir().unwrap();
    let config = with(
        ScenarioId::Fig2a,
        &["grid.landscape=false", "cuts.lambda1.start=0.44", "cuts.lambda1.stop=0.64", "cuts.lambda1.step=0.02"],
    );
    run_scenario(&config, dir.path()).unwrap();
    let (header, rows) = read_csv(&dir.path().join("summary.csv"));
    assert_eq!(rows.len(), 1);
    let row = &rows[0];
    assert_eq!(row[column(&header, "series")], "lambda2=0.8");
    let value: f64 = row[column(&header, "value")].parse().unwrap();
    assert!((value - 0.36).abs() <= 0.15 * 0.36, "{value}");
    assert_eq!(row[column(&header, "lambda2")], "0.8");
}

#[test]
fn table1_lists_momentum_difference_squeezing_at_the_dyadic_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let config =
        with(ScenarioId::Table1, &["cuts.lambda1.start=0.5", "cuts.lambda1.stop=0.6", "cuts.lambda1.step=0.05"]);
    run_scenario(&config, dir.path()).unwrap();
    let (header, rows) = read_csv(&dir.path().join("squeezing.csv"));
    let hit = rows
        .iter()
        .find(|r| r[column(&header, "series")] == "E3^(2) lambda2=0.8" && r[column(&header, "quadrature")] == "p1-p2")
        .expect("p1-p2 row");
    assert!(hit[column(&header, "variance")].parse::<f64>().unwrap() < 1.0);
    assert_eq!(hit[column(&header, "squeezed")], "true");
    let series: std::collections::BTreeSet<_> = rows.iter().map(|r| r[0].clone()).collect();
    assert_eq!(series.len(), 6);
}

#[test]
fn every_preset_runs_end_to_end() {
    let tiny = [
        "grid.lambda1.start=0.5",
        "grid.lambda1.stop=0.6",
        "grid.lambda1.step=0.1",
        "grid.lambda2.start=0.8",
        "grid.lambda2.stop=0.8",
        "cuts.lambda1.start=0.5",
        "cuts.lambda1.stop=0.6",
        "cuts.lambda1.step=0.1",
    ];
    for id in ScenarioId::ALL {
        let dir = tempfile::tempdir().unwrap();
        let outcome = run_scenario(&with(id, &tiny), dir.path()).unwrap_or_else(|e| panic!("{id}: {e:#}"));
        assert!(!outcome.summary.is_empty(), "{id}");
        for file in &outcome.files {
            let (header, rows) = read_csv(file);
            assert!(!header.is_empty() && !rows.is_empty(), "{}", file.display());
        }
    }
}

#[test]
fn oracle_column_is_filled_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let mut flags = SMALL.to_vec();
    flags.push("run.oracle=true");
    run_scenario(&with(ScenarioId::Custom, &flags), dir.path()).unwrap();
    let (header, rows) = read_csv(&dir.path().join("summary.csv"));
    assert_eq!(rows[0][column(&header, "oracle_ok")], "true");
    assert!(rows[0][column(&header, "oracle_value")].parse::<f64>().is_ok());
}

fn levarray() -> Command {
    Command::new(env!("CARGO_BIN_EXE_levarray"))
}

#[test]
fn binary_honours_the_output_environment_variable() {
    let dir = tempfile::tempdir().unwrap();
    let status = levarray()
        .args(["run", "custom", "--set", "params.g_max=0", "--set", "grid.lambda1.step=0.75"])
        .args(["--set", "grid.lambda2.step=0.75", "--workers", "2"])
        .env("LEVARRAY_OUT", dir.path())
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    assert!(dir.path().join("custom").join("landscape.csv").is_file());
    assert!(dir.path().join("custom").join("summary.csv").is_file());

    let explicit = dir.path().join("elsewhere");
    let status = levarray()
        .args([
            "run",
            "custom",
            "--set",
            "params.g_max=0",
            "--set",
            "grid.landscape=false",
            "--set",
            "cuts.lambda2=0.5",
        ])
        .args(["--set", "cuts.lambda1.step=0.75", "--out"])
        .arg(&explicit)
        .env("LEVARRAY_OUT", dir.path())
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    assert!(explicit.join("cuts.csv").is_file());
}

#[test]
fn binary_reports_bad_input_with_nonzero_status() {
    let out = levarray().args(["run", "custom", "--set", "foo=1"]).output().unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("foo") && stderr.lines().count() == 1, "{stderr}");

    let out = levarray().args(["run", "fig9"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn binary_lists_every_scenario() {
    let out = levarray().arg("list-scenarios").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for id in ScenarioId::ALL {
        assert!(text.lines().any(|l| l.starts_with(id.name())), "{id}");
    }
}

#[test]
fn binary_check_passes() {
    let out = levarray().args(["check", "--cases", "20"]).output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{text}");
    assert!(!text.contains("FAIL"), "{text}");
}

#[test]
fn every_listed_key_is_accepted() {
    let values = |key: &str| match key {
        "objective.symmetry" => "equal",
        "cuts.lambda2" => "0.5, 0.6",
        "run.out" => "somewhere",
        "grid.landscape" | "grid.two_particle" | "run.oracle" | "run.squeezing" => "true",
        k if k.starts_with("grid.lambda") || k.starts_with("cuts.") => "0.5",
        _ => "2",
    };
    let mut c = ScenarioId::Custom.preset();
    for key in levarray::config::KEYS {
        c.apply_flag(&format!("{key}={}", values(key))).unwrap_or_else(|e| panic!("{e}"));
    }
}
