use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn courtalloc(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_courtalloc")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Synthetic season plus its ingest output under `dir/syn` and `dir/data`.
fn prepared(dir: &Path) {
    let out = courtalloc(&["synth", "--seed", "4", "--out", "syn"], dir);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out = courtalloc(
        &["ingest", "--shots", "syn/shots.csv", "--pbp", "syn/pbp.csv", "--games", "syn/games.csv", "--out", "data"],
        dir,
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(String::from_utf8_lossy(&out.stdout).contains("flagged games: 0"));
}

#[test]
fn help_succeeds_and_bad_usage_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&courtalloc(&["--help"], dir.path())), 0);
    assert_eq!(code(&courtalloc(&["frobnicate"], dir.path())), 1);
    assert_eq!(code(&courtalloc(&["permtest", "-S", "many"], dir.path())), 1);
}

#[test]
fn missing_file_exits_1_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = courtalloc(&["ingest", "--shots", "absent.csv", "--pbp", "also-absent.csv"], dir.path());
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("absent.csv"), "{}", stderr(&out));
}

#[test]
fn empty_input_exits_0() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("shots.csv"), "").unwrap();
    fs::write(dir.path().join("pbp.csv"), "").unwrap();
    let out = courtalloc(&["ingest", "--shots", "shots.csv", "--pbp", "pbp.csv", "--out", "o"], dir.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(dir.path().join("o/stints.csv").exists());
}

#[test]
fn stochastic_commands_require_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = courtalloc(&["synth", "--out", "syn"], dir.path());
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("seed"));
}

#[test]
fn permtest_emits_exactly_s_variates() {
    let dir = tempfile::tempdir().unwrap();
    prepared(dir.path());
    let out = courtalloc(&["permtest", "--seed", "4", "--data", "data", "--draws", "50", "-S", "100", "--out", "res"], dir.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = fs::read_to_string(dir.path().join("res/permtest/AAA_A1-A2-A3-A4-A5.json")).unwrap();
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(json["S"], 100);
    assert_eq!(json["variates"].as_array().unwrap().len(), 100);
    let p = json["p_hat"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&p));
}

#[test]
fn unknown_lineup_exits_2_and_lists_lineups() {
    let dir = tempfile::tempdir().unwrap();
    prepared(dir.path());
    let out = courtalloc(&["metrics", "--seed", "1", "--data", "data", "--lineup", "AAA:A1-A2-A3-A4-X9"], dir.path());
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("AAA:A1-A2-A3-A4-A5") && err.contains("BBB:B1-B2-B3-B4-B5"), "{err}");
}

#[test]
fn config_file_is_read_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.toml"), "seed = 1\nout = \"from-config\"\n").unwrap();
    let out = courtalloc(&["--config", "run.toml", "synth", "--seed", "2"], dir.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let saved = fs::read_to_string(dir.path().join("from-config/synth_config.toml")).unwrap();
    assert!(saved.contains("seed = 2"), "{saved}");
    let bad = courtalloc(&["--config", "missing.toml", "synth"], dir.path());
    assert_eq!(code(&bad), 1);
}

#[test]
fn malformed_grid_fails_render() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.json"), r#"{"kind":"lpl36","width":50,"depth":47,"values":[0.0]}"#).unwrap();
    let out = courtalloc(&["render", "bad.json", "--out", "r"], dir.path());
    assert_eq!(code(&out), 2);
    fs::write(dir.path().join("junk.json"), "not json").unwrap();
    assert_ne!(code(&courtalloc(&["render", "junk.json"], dir.path())), 0);
}

#[test]
fn render_writes_one_svg_per_grid() {
    let dir = tempfile::tempdir().unwrap();
    let values = vec!["0"; 2350].join(",");
    let grid = format!(r#"{{"kind":"lpl36","width":50,"depth":47,"values":[{values}]}}"#);
    fs::write(dir.path().join("zero.json"), grid).unwrap();
    let out = courtalloc(&["render", "zero.json", "--out", "r"], dir.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let svg = fs::read_to_string(dir.path().join("r/svg/zero.svg")).unwrap();
    assert_eq!(svg.matches("class=\"cell\"").count(), 2350);
    assert!(svg.contains("[0, 0]"));
}

#[test]
fn regress_signals_unconverged_chains_with_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    prepared(dir.path());
    let args = ["regress", "--seed", "1", "--data", "data", "--out", "res", "--chains", "4"];
    let ok = courtalloc(&args, dir.path());
    assert_eq!(code(&ok), 0, "{}", stderr(&ok));
    assert!(dir.path().join("res/regress/points_lost.csv").exists());
    let short = courtalloc(&[&args[..], &["--iterations", "8", "--warmup", "2"]].concat(), dir.path());
    assert_eq!(code(&short), 3, "{}", stderr(&short));
    assert!(stderr(&short).contains("did not converge"));
}
