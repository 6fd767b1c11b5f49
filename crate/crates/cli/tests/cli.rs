//! Flag handling, exit codes and wiring of the `rinkfx` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/small.toml");

fn rinkfx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rinkfx")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path(dir: &Path, rel: &str) -> String {
    dir.join(rel).to_str().unwrap().to_owned()
}

fn synth_small(dir: &Path) {
    let out = rinkfx(&["synth", "--config", SMALL, "--pbp", "--out-dir", &path(dir, "synth")]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn help_lists_defaults_and_exit_codes() {
    let out = rinkfx(&["effects", "--help"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for needle in ["[default: 0.5]", "[default: 10]", "[default: 0]", "BLOCK,GIVE,HIT,MISS,SHOT,TAKE", "Exit codes", "5  the solver"] {
        assert!(text.contains(needle), "missing `{needle}` in\n{text}");
    }
    let out = rinkfx(&["ingest", "--help"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("[default: for-team]") && text.contains("[default: raw]"));
}

#[test]
fn bad_flags_exit_2_before_touching_files() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = path(dir.path(), "out");
    let missing = path(dir.path(), "missing.csv");
    for args in [
        vec!["effects", "--input", &missing, "--out-dir", &out_dir, "--alpha", "1.5"],
        vec!["fit", "--input", &missing, "--out-dir", &out_dir, "--folds", "1"],
        vec!["effects", "--input", &missing, "--out-dir", &out_dir, "--events", "PENL"],
        vec!["effects", "--input", &missing, "--out-dir", &out_dir, "--unpenalized", "rink"],
        vec!["adjust", "--effects", &missing, "--event", "CORSI", "--pbp", &missing, "--out-dir", &out_dir],
        vec!["adjust", "--effects", &missing, "--event", "HIT", "--out-dir", &out_dir],
        vec!["synth", "--noise-sd", "-1", "--out-dir", &out_dir],
        vec!["ingest", "--input", &missing, "--output", &missing],
        vec!["report"],
    ] {
        let out = rinkfx(&args);
        assert_eq!(code(&out), 2, "{args:?}: {}", stderr(&out));
        assert!(!Path::new(&out_dir).exists(), "{args:?} created the output directory");
    }
}

#[test]
fn missing_input_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = rinkfx(&["effects", "--input", &path(dir.path(), "nope.csv"), "--out-dir", &path(dir.path(), "o")]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("nope.csv"));
    assert_eq!(stderr(&out).lines().count(), 1);
}

#[test]
fn schema_errors_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let bad = path(dir.path(), "bad.csv");
    fs::write(&bad, "season,game,team\n1,2,3\n").unwrap();
    let out = rinkfx(&["fit", "--input", &bad, "--out-dir", &path(dir.path(), "o")]);
    assert_eq!(code(&out), 4, "{}", stderr(&out));
    let out = rinkfx(&["ingest", "--input", &bad, "--output", &path(dir.path(), "tg.csv")]);
    assert_eq!(code(&out), 4, "{}", stderr(&out));

    let json = path(dir.path(), "effects.json");
    fs::write(&json, r#"{"schema_version": 99, "events": []}"#).unwrap();
    let out = rinkfx(&["report", "--effects", &json, "--out-dir", &path(dir.path(), "o")]);
    assert_eq!(code(&out), 4, "{}", stderr(&out));
    assert!(stderr(&out).contains("schema_version 99"));
}

#[test]
fn solver_failure_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    synth_small(dir.path());
    let out = rinkfx(&[
        "effects",
        "--input",
        &path(dir.path(), "synth/team_games.csv"),
        "--events",
        "HIT",
        "--max-iter",
        "1",
        "--tol",
        "1e-15",
        "--out-dir",
        &path(dir.path(), "o"),
    ]);
    assert_eq!(code(&out), 5, "{}", stderr(&out));
    assert!(stderr(&out).contains("event HIT"));
}

#[test]
fn too_little_data_exits_6() {
    let dir = tempfile::tempdir().unwrap();
    synth_small(dir.path());
    let out = rinkfx(&[
        "effects",
        "--input",
        &path(dir.path(), "synth/team_games.csv"),
        "--seasons",
        "19992000",
        "--out-dir",
        &path(dir.path(), "o"),
    ]);
    assert_eq!(code(&out), 6, "{}", stderr(&out));
}

#[test]
fn synth_effects_report_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = rinkfx(&["synth", "--seed", "7", "--config", SMALL, "--out-dir", &path(d, "s")]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(!d.join("s/pbp.csv").exists());
    let input = path(d, "s/team_games.csv");
    let before = fs::read(&input).unwrap();
    let out = rinkfx(&["effects", "--input", &input, "--events", "HIT,BLOCK", "--out-dir", &path(d, "e")]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(fs::read(&input).unwrap(), before);
    let out = rinkfx(&["report", "--effects", &path(d, "e/effects.json"), "--out-dir", &path(d, "r")]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let summary = fs::read_to_string(d.join("r/summary.csv")).unwrap();
    let events: Vec<&str> = summary.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(events, ["HIT", "BLOCK"]);
    let json = fs::read_to_string(d.join("e/effects.json")).unwrap();
    assert!(json.contains("\"schema_version\": 1"));
    let truth = fs::read_to_string(d.join("s/truth.json")).unwrap();
    assert!(truth.contains("\"schema_version\""));
}

#[test]
fn ingest_matches_generated_rows() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth_small(d);
    let out = rinkfx(&["ingest", "--input", &path(d, "synth/pbp.csv"), "--output", &path(d, "tg.csv")]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(fs::read(d.join("tg.csv")).unwrap(), fs::read(d.join("synth/team_games.csv")).unwrap());

    let out = rinkfx(&[
        "ingest",
        "--input",
        &path(d, "synth/pbp.csv"),
        "--output",
        &path(d, "one.csv"),
        "--seasons",
        "20112012",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let one = fs::read_to_string(d.join("one.csv")).unwrap();
    assert_eq!(one.lines().count(), 1 + 2 * 90);
    assert!(one.lines().skip(1).all(|l| l.starts_with("20112012,")));
}

const PBP_HEADER: &str = "season,game_id,period,elapsed_seconds,event_type,event_team,home_team,away_team,home_score,away_score,home_skaters,away_skaters,home_goalie_on,away_goalie_on,player";

fn effects_fixture() -> String {
    let entry = |rink: &str, persistent: bool, pooled: f64, homer: Option<f64>| {
        format!(
            r#""{rink}": {{"rink": "{rink}", "persistent": {persistent}, "direction": null, "pooled_effect": {pooled},
              "yearly_effects": {{}}, "homer_persistent": {}, "homer_direction": null,
              "pooled_homer_effect": {}, "yearly_homer_effects": {{}}}}"#,
            homer.is_some(),
            homer.unwrap_or(1.0)
        )
    };
    let table = |scope: &str| {
        format!(
            r#"{{"metric": "HIT", "scope": {scope}, "lambda_chosen": 0.1, "mean_effect": {{}}, "asd_effect": {{}},
              "home_effect": {{}}, "rink_effect": {{}}, "homer_effect": {{}}, "coefficients": {{}}}}"#
        )
    };
    format!(
        r#"{{"schema_version": 1, "events": [{{"metric": "HIT", "yearly": [], "pooled": {},
          "persistence": {{"metric": "HIT", "seasons": [], "min_seasons": 1, "entries": {{{}, {}}}}}}}]}}"#,
        table("\"pooled\""),
        entry("N.J", true, 0.581, Some(1.186)),
        entry("BOS", false, 1.0, None)
    )
}

#[test]
fn adjust_matches_hand_weights() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("effects.json"), effects_fixture()).unwrap();
    // two home hits and one away hit at N.J, two away hits at BOS
    let rows = [
        "20122013,1,1,0,FAC,,N.J,BOS,0,0,5,5,1,1,",
        "20122013,1,1,10,HIT,N.J,N.J,BOS,0,0,5,5,1,1,Clarkson",
        "20122013,1,1,20,HIT,N.J,N.J,BOS,0,0,5,5,1,1,Clarkson",
        "20122013,1,1,30,HIT,BOS,N.J,BOS,0,0,5,5,1,1,Lucic",
        "20122013,2,1,0,FAC,,BOS,N.J,0,0,5,5,1,1,",
        "20122013,2,1,10,HIT,N.J,BOS,N.J,0,0,5,5,1,1,Clarkson",
        "20122013,2,1,20,HIT,N.J,BOS,N.J,0,0,5,5,1,1,Clarkson",
    ];
    fs::write(d.join("pbp.csv"), format!("{PBP_HEADER}\n{}\n", rows.join("\n"))).unwrap();
    let out = rinkfx(&[
        "adjust",
        "--effects",
        &path(d, "effects.json"),
        "--event",
        "HIT",
        "--pbp",
        &path(d, "pbp.csv"),
        "--out-dir",
        &path(d, "a"),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    // Clarkson: 2 / (0.581 * 1.186) + 2 = 4.902; Lucic: 1 / 0.581 = 1.721
    let text = fs::read_to_string(d.join("a/counts_HIT.csv")).unwrap();
    assert_eq!(text, "name,team,adjusted,raw,differential\nClarkson,N.J,4.9,4,0.9\nLucic,BOS,1.7,1,0.7\n");
}
