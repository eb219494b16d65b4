use dlphy::harness::criteria::{evaluate, ordered_by_variance};
use dlphy::harness::settings::Settings;
use dlphy::harness::{run_experiment, verify_manifest, write_run, Experiment, ExperimentConfig, Report, RunOutput};
use dlphy::baselines::{BlerPoint, ErrorRateResult};
use dlphy::game::Metrics;
use dlphy::Error;

fn config_errors(text: &str) -> Vec<String> {
    match ExperimentConfig::from_toml(text) {
        Err(Error::Config(v)) => v,
        Ok(_) => panic!("config was accepted"),
        Err(e) => panic!("unexpected error {e}"),
    }
}

fn small_game_overrides() -> &'static str {
    "game.collect_slots = 300\ngame.test_slots = 200\ngame.epochs = 20\n"
}

#[test]
fn empty_overrides_give_documented_defaults() {
    for e in Experiment::ALL {
        let text = format!("schema_version = 1\nexperiment = \"{e}\"\nseed = 4\noutput_dir = \"x\"\n");
        let cfg = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(cfg.to_toml(), ExperimentConfig::new(e, 4, "x").to_toml());
    }
}

#[test]
fn out_of_range_budget_names_the_field() {
    let errs = config_errors("schema_version = 1\nexperiment = \"custom\"\n[overrides]\np_d = 150.0\n");
    assert_eq!(errs.len(), 1);
    assert!(errs[0].contains("p_d") && errs[0].contains("150"), "{errs:?}");
}

#[test]
fn negative_seed_is_rejected() {
    let errs = config_errors("schema_version = 1\nexperiment = \"table3\"\nseed = -1\n");
    assert!(errs.iter().any(|e| e.contains("seed")), "{errs:?}");
}

#[test]
fn unknown_experiment_is_rejected() {
    let errs = config_errors("schema_version = 1\nexperiment = \"fig99\"\n");
    assert!(errs[0].contains("fig99") && errs[0].contains("table3"), "{errs:?}");
}

#[test]
fn every_problem_is_listed() {
    let text = "schema_version = 2\nexperiment = \"fig23a\"\ncolour = \"red\"\n\
                [overrides]\np_d = [0.0, 150.0, -1.0]\ngame.nonsense = 3\nbogus = 1\n";
    let errs = config_errors(text);
    for needle in ["schema_version", "colour", "game.nonsense", "bogus", "p_d[1]", "p_d[2]"] {
        assert!(errs.iter().any(|e| e.contains(needle)), "{needle} missing from {errs:?}");
    }
    let text = "schema_version = 1\nexperiment = \"fig23a\"\n[overrides]\np_d = [0.0, 150.0, -1.0]\nreplicates = 0\n";
    let errs = config_errors(text);
    for needle in ["p_d[1]", "p_d[2]", "replicates"] {
        assert!(errs.iter().any(|e| e.contains(needle)), "{needle} missing from {errs:?}");
    }
}

#[test]
fn wrong_types_are_reported() {
    let errs = config_errors("schema_version = 1\nexperiment = \"custom\"\n[overrides]\ntau = \"high\"\n");
    assert!(errs.iter().any(|e| e.starts_with("tau:") && e.contains("f64")), "{errs:?}");
}

#[test]
fn overrides_reach_nested_settings() {
    let text = format!("schema_version = 1\nexperiment = \"custom\"\n[overrides]\n{}", small_game_overrides());
    let cfg = ExperimentConfig::from_toml(&text).unwrap();
    let Settings::Custom(s) = &cfg.settings else { panic!("wrong settings") };
    assert_eq!((s.game.collect_slots, s.game.test_slots, s.game.epochs), (300, 200, 20));
    assert_eq!(s.game.window, 10);
}

#[test]
fn command_line_assignments_override_settings() {
    let mut cfg = ExperimentConfig::new(Experiment::Custom, 0, "x");
    cfg.set(&["attack=sensing-jammer".into(), "tau=3.4".into(), "game.t_hidden=[20, 10]".into()]).unwrap();
    let Settings::Custom(s) = &cfg.settings else { panic!("wrong settings") };
    assert_eq!(s.tau, 3.4);
    assert_eq!(s.game.t_hidden, vec![20, 10]);
    assert!(matches!(cfg.set(&["game.nope=1".into()]), Err(Error::Config(_))));
    assert!(matches!(cfg.set(&["p_d=101".into()]), Err(Error::Config(_))));
}

fn small_custom(seed: u64, dir: &std::path::Path) -> ExperimentConfig {
    let text = format!(
        "schema_version = 1\nexperiment = \"custom\"\nseed = {seed}\noutput_dir = \"{}\"\n[overrides]\n{}",
        dir.display(),
        small_game_overrides()
    );
    ExperimentConfig::from_toml(&text).unwrap()
}

#[test]
fn runs_are_byte_reproducible_and_verifiable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_custom(9, dir.path());
    let a = run_experiment(&cfg).unwrap();
    let b = run_experiment(&cfg).unwrap();
    assert_eq!(a.files.len(), b.files.len());
    for (x, y) in a.files.iter().zip(&b.files) {
        assert_eq!(x.name, y.name);
        assert_eq!(x.contents, y.contents, "{} differs between runs", x.name);
        assert!(x.contents.starts_with("# seed=9\n"), "{} lacks the seed header", x.name);
    }
    let manifest = write_run(&cfg, &a, std::time::SystemTime::now(), std::time::Duration::from_secs(1)).unwrap();
    assert_eq!(manifest.files.len(), a.files.len());
    assert!(dir.path().join("manifest.json").exists());
    assert!(dlphy::harness::check_files(dir.path(), &manifest).is_empty());
    assert!(verify_manifest(&manifest).unwrap().is_empty());

    std::fs::write(dir.path().join(&manifest.files[0].name), "tampered").unwrap();
    assert_eq!(dlphy::harness::check_files(dir.path(), &manifest).len(), 1);
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "schema_version = 1\nexperiment = \"fig23a\"\noutput_dir = \"{}\"\n[overrides]\nreplicates = 3\np_d = [0.0, 10.0]\n{}",
        dir.path().display(),
        small_game_overrides()
    );
    let cfg = ExperimentConfig::from_toml(&text).unwrap();
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| run_experiment(&cfg).unwrap())
    };
    let (one, three) = (run(1), run(3));
    for (x, y) in one.files.iter().zip(&three.files) {
        assert_eq!(x.contents, y.contents, "{} depends on the thread count", x.name);
    }
}

#[test]
fn unwritable_output_dir_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let cfg = small_custom(1, &blocker.join("sub"));
    let out = RunOutput { report: Report::Defense(Vec::new()), files: Vec::new() };
    let err = write_run(&cfg, &out, std::time::SystemTime::now(), Default::default()).unwrap_err();
    assert!(matches!(err, Error::Io(_)), "{err}");
}

fn metrics(throughput: f64) -> Metrics {
    Metrics { slots: 1000, attempts: 800, successes: (throughput * 1000.0) as usize, throughput, success_ratio: 0.5 }
}

#[test]
fn defense_check_wants_an_interior_peak_in_range() {
    let report = |t: [f64; 5]| RunOutput {
        report: Report::Defense([0.0, 5.0, 10.0, 20.0, 40.0].into_iter().zip(t.map(metrics)).collect()),
        files: Vec::new(),
    };
    assert!(evaluate(&report([0.1, 0.2, 0.15, 0.12, 0.05]))[0].passed);
    assert!(!evaluate(&report([0.3, 0.2, 0.15, 0.12, 0.05]))[0].passed);
    assert!(!evaluate(&report([0.1, 0.12, 0.15, 0.2, 0.3]))[0].passed);
    assert!(!evaluate(&report([0.1, 0.2, 0.15, 0.18, 0.05]))[0].passed);
}

fn flat_curve(bler: f64, trials: u64) -> ErrorRateResult {
    let errors = (bler * trials as f64).round() as u64;
    ErrorRateResult { points: (0..3).map(|i| BlerPoint::new(i as f64, trials, errors)).collect() }
}

#[test]
fn variance_ordering_tolerates_overlapping_intervals() {
    let close = vec![(0.01, flat_curve(0.101, 10_000)), (0.02, flat_curve(0.1, 10_000))];
    assert!(ordered_by_variance(&close).0);
    let reversed = vec![(0.01, flat_curve(0.2, 10_000)), (0.02, flat_curve(0.1, 10_000))];
    assert!(!ordered_by_variance(&reversed).0);
}
