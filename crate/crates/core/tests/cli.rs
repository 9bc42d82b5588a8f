use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_femto-auction"))
        .args(args)
        .env_remove("FEMTO_AUCTION_OUT")
        .output()
        .expect("binary runs")
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

#[test]
fn validate_config_prints_a_config_that_parses_back() {
    let out = cli(&["validate-config", "--seed", "9"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let printed = text(&out.stdout);
    assert!(printed.contains("experiment.seed = 9"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.toml");
    std::fs::write(&path, &printed).unwrap();
    let again = cli(&["validate-config", "--config", path.to_str().unwrap()]);
    assert_eq!(again.status.code(), Some(0), "{}", text(&again.stderr));
    assert_eq!(text(&again.stdout), printed);
}

#[test]
fn missing_config_is_a_usage_error_naming_the_file() {
    let out = cli(&["validate-config", "--config", "/nonexistent/femto.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("/nonexistent/femto.toml"), "{}", text(&out.stderr));
}

#[test]
fn unknown_keys_and_bad_values_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    for body in ["experiment.sed = 3\n", "topology.density = 1.5\n"] {
        let path = dir.path().join("bad.toml");
        std::fs::write(&path, body).unwrap();
        let out = cli(&["validate-config", "--config", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{body}");
    }
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap_or_else(|e| panic!("{}: {e}", dir.join(name).display()))
}

#[test]
fn truthfulness_runs_are_reproducible_and_emit_plot_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    std::fs::write(&cfg, "truthfulness.rounds = 8\n").unwrap();
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out_dir = dir.path().join(run);
        let out = cli(&[
            "truthfulness",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            "42",
            "--out",
            out_dir.to_str().unwrap(),
            "--emit-plot-data",
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
        outputs.push(out_dir.join("truthfulness"));
    }
    for name in ["records.csv", "summary.csv", "manifest.toml"] {
        assert_eq!(read(&outputs[0], name), read(&outputs[1], name), "{name}");
    }
    let plots = outputs[0].join("plots");
    for name in ["fig4a_single-femto.csv", "fig4b_multi-femto.csv", "fig4c_multi-mue.csv", "README.md"] {
        assert!(plots.join(name).is_file(), "{name} missing");
    }
    let fig = text(&read(&plots, "fig4a_single-femto.csv"));
    assert_eq!(fig.lines().next().unwrap(), "round,delta_u_f0.5,delta_u_f0.8,delta_u_f1.5,delta_u_f2");
    assert_eq!(fig.lines().count(), 9);
    let records = text(&read(&outputs[0], "records.csv"));
    assert!(records.lines().nth(1).unwrap().starts_with("records/1,truthfulness,"));
}

#[test]
fn zero_rounds_cannot_produce_an_empty_record_set() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.toml");
    std::fs::write(&cfg, "experiment.rounds = 0\n").unwrap();
    let out = cli(&["single-mue", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_ne!(out.status.code(), Some(0));
    assert!(!dir.path().join("single-mue").join("records.csv").exists());
}

#[test]
fn output_directory_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    std::fs::write(&cfg, "experiment.rounds = 5\nmue.count = 3\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_femto-auction"))
        .args(["multi-mue", "--config", cfg.to_str().unwrap()])
        .env("FEMTO_AUCTION_OUT", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let summary = text(&read(&dir.path().join("multi-mue"), "summary.csv"));
    assert_eq!(summary.lines().count(), 2);
    assert!(read(&dir.path().join("multi-mue"), "manifest.toml").starts_with(b"run.command = \"multi-mue\""));
}

#[test]
fn unknown_subcommand_exits_2() {
    assert_eq!(cli(&["frobnicate"]).status.code(), Some(2));
}
