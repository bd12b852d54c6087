//! End-to-end checks of the `gordon-cmv` binary: JSON on stdout, artifacts under `--out`,
//! exit status 0 / 2 / 1.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gordon-cmv"))
        .args(args)
        .output()
        .unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn ok(o: &Output) {
    assert_eq!(
        o.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&o.stderr)
    );
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn frequency_golden_convergents() {
    let o = cli(&["frequency", "golden", "--terms", "10"]);
    ok(&o);
    let v = json(&o);
    let q: Vec<String> = v["convergents"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["q"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(q[..8], ["1", "2", "3", "5", "8", "13", "21", "34"]);
}

#[test]
fn frequency_parse_error_exits_1() {
    let o = cli(&["frequency", "nonsense"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}

#[test]
fn orbit_golden_144() {
    let o = cli(&["orbit", "--frequency", "golden", "--epsilon", "0.01"]);
    ok(&o);
    let v = json(&o);
    assert_eq!(v["certificate"]["q"], 144);
    assert_eq!(v["certificate"]["horizon"], 576);
}

#[test]
fn orbit_without_repetition_exits_2() {
    let o = cli(&["orbit", "--frequency", "golden", "--epsilon", "0.01", "--q-max", "100"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sample_gordon_cmv_chain() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = cli(&["--out", path(d), "sample", "--frequency", "golden", "--levels", "2"]);
    ok(&o);
    let v = json(&o);
    assert_eq!(v["levels"][1]["q"], 34);
    assert_eq!(v["levels"][1]["gordon_pass"], true);
    let seq = d.join("sequence_k1.csv");
    assert!(seq.exists() && d.join("sampling_k2.json").exists());

    let g = d.join("gordon");
    let o = cli(&[
        "--out",
        path(&g),
        "gordon",
        "--seq-file",
        path(&seq),
        "--periods",
        "8",
        "--z-grid",
        "64",
        "--lipschitz-samples",
        "300",
    ]);
    ok(&o);
    let v = json(&o);
    assert_eq!(v["evidence"]["verdict"], "PASS");
    assert!(g.join("evidence.csv").exists() && g.join("gordon_certificate.json").exists());

    let c = d.join("cmv");
    let o = cli(&[
        "--out",
        path(&c),
        "cmv",
        "--seq-file",
        path(&seq),
        "--window=-8:7",
        "--boundary",
        "0.3,-1",
        "--eig",
        "--profile",
        "all",
    ]);
    ok(&o);
    let v = json(&o);
    assert_eq!(v["size"], 16);
    assert!(v["unitarity_defect"].as_f64().unwrap() <= 1e-12);
    assert!(v["max_residual"].as_f64().unwrap() <= 1e-10);
    let triplets = std::fs::read_to_string(c.join("cmv_matrix.txt")).unwrap();
    assert!(triplets.starts_with("# gordon-cmv sparse triplet v1\n# size 16\n# window -8 7\n# boundary unimodular\n"));
    assert!(c.join("eigenvalues.csv").exists() && c.join("profiles.csv").exists());
}

#[test]
fn cmv_projection_mode_has_no_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(&[
        "--out",
        path(dir.path()),
        "sample",
        "--frequency",
        "golden",
        "--levels",
        "1",
    ]);
    ok(&o);
    let seq = dir.path().join("sequence_k1.csv");
    let o = cli(&["cmv", "--seq-file", path(&seq), "--boundary", "projection"]);
    ok(&o);
    assert_eq!(json(&o)["boundary"]["kind"], "projection");
    let o = cli(&["cmv", "--seq-file", path(&seq), "--boundary", "projection", "--eig"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn run_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let write = |name: &str, text: &str| {
        let p = d.join(name);
        std::fs::write(&p, text).unwrap();
        p
    };
    let small = "[evidence]\nz_grid = 64\n[cmv]\nsize = 60\n[validation]\nlipschitz_samples = 200\n";

    let free = write(
        "free.toml",
        &format!("scenario = \"free\"\n[sequence]\nperiods = [2, 4]\n{small}"),
    );
    let o = cli(&["run", "--config", path(&free), "--out", path(&d.join("free"))]);
    ok(&o);
    assert_eq!(json(&o)["verdict"], "PASS");
    assert!(d.join("free/report.json").exists() && d.join("free/timings.json").exists());

    let control = write("control.toml", &format!("scenario = \"impurity-control\"\n{small}"));
    let o = cli(&["run", "--config", path(&control), "--out", path(&d.join("control"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("[FAIL]"));

    let broken = write(
        "broken.toml",
        &format!("scenario = \"golden-rotation\"\n[dynamics]\nq_max = 20\n{small}"),
    );
    let o = cli(&["run", "--config", path(&broken), "--out", path(&d.join("broken"))]);
    assert_eq!(o.status.code(), Some(1));
    let report: Value = serde_json::from_slice(&std::fs::read(d.join("broken/report.json")).unwrap()).unwrap();
    assert_eq!(report["failure"]["stage"], "dynamics");

    let o = cli(&["run"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn run_seed_override_lands_in_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = d.join("c.toml");
    std::fs::write(&cfg, "scenario = \"free\"\nseed = 1\n[sequence]\nperiods = [2]\n[evidence]\nz_grid = 16\n[cmv]\nsize = 20\n[validation]\nlipschitz_samples = 50\n").unwrap();
    let o = cli(&[
        "--seed",
        "9",
        "--precision-bits",
        "320",
        "run",
        "--config",
        path(&cfg),
        "--out",
        path(&d.join("o")),
    ]);
    ok(&o);
    let report: Value = serde_json::from_slice(&std::fs::read(d.join("o/report.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 9);
    assert_eq!(report["config"]["precision_bits"], 320);
}

#[test]
fn shipped_configs_validate() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&root).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "toml") {
            gordon_cmv::pipeline::ExperimentConfig::load(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            seen += 1;
        }
    }
    assert_eq!(seen, 6);
}

#[test]
fn frequency_liouville_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(&[
        "--out",
        path(dir.path()),
        "frequency",
        "--liouville",
        "2,3",
        "--terms",
        "5",
    ]);
    ok(&o);
    assert_eq!(json(&o)["exact"], "49/64");
    let table = std::fs::read_to_string(dir.path().join("frequency.csv")).unwrap();
    assert_eq!(table.lines().next(), Some("q,p,q_dist"));
    assert_eq!(table.lines().last(), Some("64,49,0"));
}

#[test]
fn orbit_spec_flag_names_and_deviation_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(&[
        "--out",
        path(dir.path()),
        "orbit",
        "--system",
        "skew",
        "--freq",
        "liouville:2,4",
        "--omega",
        "0.3,0.7",
        "--epsilon",
        "0.1",
        "--qmax",
        "2000",
    ]);
    ok(&o);
    let v = json(&o);
    let q = v["certificate"]["q"].as_u64().unwrap();
    assert_eq!(q % 2, 0);
    let table = std::fs::read_to_string(dir.path().join("deviations.csv")).unwrap();
    let rows: Vec<f64> = table
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(rows.len() as u64, v["certificate"]["horizon"].as_u64().unwrap() + 1);
    assert!(rows.iter().all(|&d| d < 0.1));
}

#[test]
fn sample_family_quarter_turn() {
    let o = cli(&[
        "sample",
        "--system",
        "rotation",
        "--freq",
        "1/4",
        "--omega",
        "0",
        "--family",
        "exponential",
        "--params",
        "0.5,1",
        "--window",
        "0:3",
    ]);
    ok(&o);
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<(f64, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect();
    for ((re, im), (want_re, want_im)) in rows.iter().zip([(0.5, 0.0), (0.0, 0.5), (-0.5, 0.0), (0.0, -0.5)]) {
        assert!(
            (re - want_re).abs() < 1e-15 && (im - want_im).abs() < 1e-15,
            "{re} {im}"
        );
    }
}

#[test]
fn sample_construct_ck_is_periodic_on_the_tubes() {
    let dir = tempfile::tempdir().unwrap();
    let values = dir.path().join("values.csv");
    let mut text = String::from("re,im\n");
    for j in 0..8 {
        let (s, c) = (std::f64::consts::TAU * j as f64 / 8.0).sin_cos();
        text.push_str(&format!("{},{}\n", 0.5 * c, 0.5 * s));
    }
    std::fs::write(&values, text).unwrap();
    let o = cli(&[
        "sample",
        "--freq",
        "golden",
        "--omega",
        "0.3",
        "--construct-ck",
        path(&values),
        "--epsilon",
        "0.2",
        "--window",
        "1:40",
    ]);
    ok(&o);
    let out = String::from_utf8(o.stdout).unwrap();
    let alpha: Vec<String> = out
        .lines()
        .skip(1)
        .map(|l| l.split(',').skip(1).take(2).collect::<Vec<_>>().join(","))
        .collect();
    assert_eq!(alpha.len(), 40);
    for n in 0..32 {
        assert_eq!(alpha[n], alpha[n + 8], "n = {}", n + 1);
    }
}

#[test]
fn gordon_k_list_and_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let seq = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/period-4.csv");
    let report = dir.path().join("report.json");
    let o = cli(&[
        "gordon",
        "--seq-file",
        path(&seq),
        "--k-list",
        "1:4,2:8",
        "--z-grid",
        "32",
        "--report",
        path(&report),
    ]);
    ok(&o);
    let v: Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert_eq!(v, json(&o));
    assert_eq!(v["evidence"]["q"], 8);
    assert!(v["evidence"]["min_c"].as_f64().unwrap() >= 0.5 - 1e-12);
}
