use gordon_cmv::pipeline::{run, ExperimentConfig, Scenario, EXIT_ERROR, EXIT_EVIDENCE_FAIL, EXIT_PASS};
use gordon_cmv::transfer::Verdict;
use gordon_cmv::{Error, VerblunskySequence};
use num_complex::Complex64;
use serde_json::Value;

fn read_json(path: &std::path::Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn quick(scenario: Scenario) -> ExperimentConfig {
    let mut c = ExperimentConfig::preset(scenario);
    c.evidence.z_grid = 64;
    c.validation.lipschitz_samples = 500;
    c.cmv.size = 60;
    c
}

#[test]
fn free_scenario_passes_with_unit_c() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = ExperimentConfig::preset(Scenario::Free);
    c.validation.lipschitz_samples = 1000;
    let out = run(&c, dir.path()).unwrap();
    assert_eq!(out.report.exit_code(), EXIT_PASS, "{:#?}", out.report.checks);
    let ev = read_json(&dir.path().join("evidence.json"));
    assert_eq!(ev["data"]["min_c"], 1.0);
    assert_eq!(ev["data"]["grid"], 512);
    assert_eq!(ev["seed"], 0);
    let cmv = read_json(&dir.path().join("cmv.json"));
    assert_eq!(cmv["data"]["size"], 200);
    assert_eq!(cmv["data"]["unitarity_defect"], 0.0);
    // every check names an artifact that was written
    for check in &out.report.checks {
        assert!(dir.path().join(&check.artifact).exists(), "{}", check.artifact);
    }
    for stage in &out.report.stages {
        for a in &stage.artifacts {
            assert!(dir.path().join(a).exists(), "{a}");
        }
    }
    assert!(out.timings.contains_key("transfer"));
    assert!(dir.path().join("timings.json").exists());
}

#[test]
fn liouville_rotation_certifies_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&quick(Scenario::LiouvilleRotation), dir.path()).unwrap();
    assert_eq!(out.report.verdict, Verdict::Pass, "{:#?}", out.report.checks);
    let rep = read_json(&dir.path().join("repetition.json"));
    let qs: Vec<u64> = rep["data"]["levels"]
        .as_array()
        .unwrap()
        .iter()
        .map(|l| l["certificate"]["q"].as_u64().unwrap())
        .collect();
    assert_eq!(qs, vec![4, 30, 64]);
    let cert = read_json(&dir.path().join("gordon_certificate.json"));
    assert!(cert["data"]["levels"]
        .as_array()
        .unwrap()
        .iter()
        .all(|l| l["pass"] == true));
    let ev = read_json(&dir.path().join("evidence.json"));
    assert_eq!(ev["data"]["q"], 64);
    assert_eq!(ev["data"]["k"], 3);
    assert!(ev["data"]["min_c"].as_f64().unwrap() >= 0.25);
}

#[test]
fn impurity_control_fails_with_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = quick(Scenario::ImpurityControl);
    c.evidence.z_grid = 512;
    let out = run(&c, dir.path()).unwrap();
    assert_eq!(out.report.verdict, Verdict::Fail);
    assert_eq!(out.report.exit_code(), EXIT_EVIDENCE_FAIL);
    assert!(out.report.failure.is_none());
    let ev = read_json(&dir.path().join("evidence.json"));
    assert_eq!(ev["data"]["verdict"], "FAIL");
    assert!(ev["data"]["min_c"].as_f64().unwrap() < 0.25);
    // the negative control localizes: an eigenvector sits on the impurity
    let cmv = read_json(&dir.path().join("cmv.json"));
    assert!(cmv["data"]["min_participation_ratio"].as_f64().unwrap() < 6.0);
    assert!(cmv["data"]["most_localized"]["peak"].as_i64().unwrap().abs() <= 1);
}

#[test]
fn reports_are_byte_identical_and_the_echo_reproduces() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut c = quick(Scenario::GoldenRotation);
    c.seed = 42;
    run(&c, a.path()).unwrap();
    let out_b = run(&c, b.path()).unwrap();
    for file in [
        "report.json",
        "evidence.csv",
        "evidence.json",
        "lipschitz.json",
        "cmv_spectrum.csv",
        "cmv_matrix.txt",
    ] {
        assert_eq!(
            std::fs::read(a.path().join(file)).unwrap(),
            std::fs::read(b.path().join(file)).unwrap(),
            "{file}"
        );
    }
    let report = read_json(&a.path().join("report.json"));
    assert_eq!(report["seed"], 42);
    let echoed: ExperimentConfig = serde_json::from_value(report["config"].clone()).unwrap();
    assert_eq!(echoed, c);
    let again = ExperimentConfig::from_toml_str(&echoed.to_toml_string().unwrap()).unwrap();
    let c_dir = tempfile::tempdir().unwrap();
    let out_c = run(&again, c_dir.path()).unwrap();
    assert_eq!(out_c.report.verdict, out_b.report.verdict);
    assert_eq!(
        std::fs::read(a.path().join("report.json")).unwrap(),
        std::fs::read(c_dir.path().join("report.json")).unwrap()
    );
}

#[test]
fn config_errors() {
    let err = |t: &str| match ExperimentConfig::from_toml_str(t) {
        Err(Error::Config(m)) => m,
        other => panic!("{other:?}"),
    };
    assert!(err("scenario = \"free\"\nbogus = 1").contains("bogus"));
    assert!(err("version = 2\nscenario = \"free\"").contains("version"));
    assert!(err("scenario = \"sequence-file\"\n[sequence]\nperiods = [4]").contains("sequence.file"));
    assert!(
        err("scenario = \"sequence-file\"\n[sequence]\nfile = \"/nonexistent/x.csv\"\nperiods = [4]")
            .contains("does not exist")
    );
    assert!(err("scenario = \"free\"\n[sequence]\nperiods = [4, 3]").contains("periods"));
    assert!(err("scenario = \"golden-rotation\"\n[dynamics]\nstart = [0.1, 0.2]").contains("coordinates"));
    let ok = ExperimentConfig::from_toml_str("scenario = \"liouville-rotation\"\n[evidence]\nz_grid = 16").unwrap();
    assert_eq!(ok.version, 1);
    assert_eq!(ok.precision_bits, 256);
    assert_eq!(ok.dynamics.levels, 3);
}

#[test]
fn execution_errors_exit_one_with_partial_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = quick(Scenario::GoldenRotation);
    c.dynamics.q_max = 20; // q_2 = 34 is out of reach
    let out = run(&c, dir.path()).unwrap();
    assert_eq!(out.report.exit_code(), EXIT_ERROR);
    let failure = out.report.failure.as_ref().unwrap();
    assert_eq!(failure.stage, "dynamics");
    assert!(failure.message.contains("no even repetition"), "{}", failure.message);
    assert!(dir.path().join("frequency.json").exists());
    assert!(dir.path().join("report.json").exists());
    let report = read_json(&dir.path().join("report.json"));
    assert_eq!(report["failure"]["stage"], "dynamics");
}

#[test]
fn sequence_file_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("periodic.csv");
    VerblunskySequence::from_fn(-40, 40, |n| {
        Complex64::from_polar(0.4, std::f64::consts::FRAC_PI_2 * n as f64)
    })
    .unwrap()
    .save(&csv)
    .unwrap();
    let text = format!(
        "scenario = \"sequence-file\"\n[sequence]\nfile = {:?}\nperiods = [4, 8]\n[evidence]\nz_grid = 64\n[cmv]\nsize = 40\n[validation]\nlipschitz_samples = 200\n",
        csv.to_str().unwrap()
    );
    let c = ExperimentConfig::from_toml_str(&text).unwrap();
    let out = run(&c, &dir.path().join("out")).unwrap();
    assert_eq!(out.report.exit_code(), EXIT_PASS, "{:#?}", out.report);
    let ev = read_json(&dir.path().join("out/evidence.json"));
    assert_eq!(ev["data"]["q"], 8);
    assert!(ev["data"]["min_c"].as_f64().unwrap() >= 0.5 - 1e-12);
}
