use std::path::Path;
use std::process::{Command, Output};

fn dlphy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dlphy")).args(args).env_remove("DLPHY_THREADS").output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, body).unwrap();
    path.display().to_string()
}

const SMALL_GAME: &[&str] = &[
    "--set",
    "game.collect_slots=300",
    "--set",
    "game.test_slots=200",
    "--set",
    "game.epochs=20",
];

#[test]
fn validate_config_lists_every_problem() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(
        dir.path(),
        "schema_version = 1\nexperiment = \"custom\"\nseed = -3\n[overrides]\np_d = 150.0\nextra = 1\n",
    );
    let o = dlphy(&["validate-config", &path]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    for needle in ["seed", "p_d", "extra"] {
        assert!(err.contains(needle), "{needle} missing from {err}");
    }
}

#[test]
fn validate_config_prints_filled_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "schema_version = 1\nexperiment = \"table3\"\n");
    let o = dlphy(&["validate-config", &path]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("replicates = 40") && out.contains("eta = 0.25"), "{out}");
}

#[test]
fn unknown_experiment_fails() {
    let o = dlphy(&["reproduce", "fig99"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("fig99"));
}

#[test]
fn run_game_writes_reproducible_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let mut args = vec!["run-game", "--attack", "sensing-jammer", "--tau", "3.4", "--seed", "5", "--out"];
        args.push(out.to_str().unwrap());
        args.extend_from_slice(SMALL_GAME);
        let o = dlphy(&args);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for name in ["metrics_custom.csv", "slots_custom.csv", "classifier_errors_custom.csv"] {
        let x = std::fs::read(a.join(name)).unwrap();
        assert_eq!(x, std::fs::read(b.join(name)).unwrap(), "{name}");
        assert!(x.starts_with(b"# seed=5\n"));
    }
    let o = dlphy(&["verify", a.to_str().unwrap()]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("reproduce their checksums"));
}

#[test]
fn check_without_applicable_criteria_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["run-game", "--check", "--out", dir.path().to_str().unwrap()];
    args.extend_from_slice(SMALL_GAME);
    let o = dlphy(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("no acceptance criteria"));
}

#[test]
fn unwritable_output_dir_fails() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let out = blocker.join("sub");
    let mut args = vec!["run-game", "--out", out.to_str().unwrap()];
    args.extend_from_slice(SMALL_GAME);
    let o = dlphy(&args);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("sub"), "{}", stderr(&o));
}

#[test]
fn eval_bler_writes_a_curve() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = dlphy(&[
        "eval-bler", "--system", "hamming-hard", "--stop", "2", "--max-trials", "20000", "--seed", "3", "--out", out,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("bler_hamming_hard.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "# seed=3");
    assert_eq!(lines[1], "curve,snr_db,trials,errors,bler,ci_low,ci_high");
    assert_eq!(lines.len(), 5);
}

#[test]
fn trained_autoencoder_can_be_evaluated_and_exported() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = dlphy(&["train-ae", "--n", "2", "--k", "2", "--steps", "300", "--out", out]);
    assert!(o.status.success(), "{}", stderr(&o));
    let model = dir.path().join("ae_2_2.json");
    assert!(model.exists());

    let o = dlphy(&[
        "eval-bler", "--system", "ae", "--model", model.to_str().unwrap(), "--stop", "1", "--max-trials", "8192",
        "--out", out,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("bler_ae22.csv").exists());

    let export = dir.path().join("export");
    let o = dlphy(&["export-constellation", model.to_str().unwrap(), "--out", export.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(export.join("constellation_ae_2_2.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2 + 4);
}

#[test]
fn eval_ae_requires_a_model() {
    let o = dlphy(&["eval-bler", "--system", "ae"]);
    assert!(!o.status.success());
}

#[test]
fn zero_threads_is_rejected() {
    let o = dlphy(&["--threads", "0", "reproduce", "custom"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("thread"));
}
