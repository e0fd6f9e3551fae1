use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_splitlab");

fn splitlab(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(dir)
        .env_remove("SPLITLAB_THREADS")
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn synth_data(dir: &Path) {
    let o = splitlab(
        dir,
        &[
            "synth",
            "--seed",
            "7",
            "--out",
            "data.csv",
            "--write-config",
            "synth.json",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
}

const SMALL: [&str; 6] = ["--n-train", "600", "--n-test", "300", "--repeats", "2"];

#[test]
fn synth_then_run() {
    let dir = tempfile::tempdir().unwrap();
    synth_data(dir.path());
    let o = splitlab(
        dir.path(),
        &[
            "synth",
            "--config",
            "synth.json",
            "--seed",
            "7",
            "--out",
            "again.csv",
        ],
    );
    assert!(o.status.success());
    assert_eq!(
        fs::read(dir.path().join("data.csv")).unwrap(),
        fs::read(dir.path().join("again.csv")).unwrap()
    );

    let mut args = vec![
        "run", "--input", "data.csv", "--seed", "7", "--out", "results", "--pca",
    ];
    args.extend(SMALL);
    let o = splitlab(dir.path(), &args);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = dir.path().join("results");
    for f in ["report.csv", "report.json", "summary.json"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    for s in ["monte_carlo", "dissimilarity", "informed", "clustering"] {
        let pca = fs::read_to_string(out.join(format!("pca_{s}.csv"))).unwrap();
        assert_eq!(
            pca.lines().next().unwrap(),
            "pc1,pc2,label,capture,split_side"
        );
        assert_eq!(pca.lines().filter(|l| l.ends_with(",test")).count(), 300);
    }
    let csv = fs::read_to_string(out.join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 4 * 2);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",ok")));
}

#[test]
fn single_cell_run_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    synth_data(dir.path());
    fs::write(
        dir.path().join("exp.json"),
        r#"{"repeats": 1, "n_train": 500, "n_test": 200, "seed": 3,
            "strategies": ["dissimilarity"], "learners": ["gradient_boosting"]}"#,
    )
    .unwrap();
    let o = splitlab(
        dir.path(),
        &[
            "run", "--input", "data.csv", "--config", "exp.json", "--out", "r",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("r/report.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].starts_with("dissimilarity,gradient_boosting,0,3,"));
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 4] = [
        &["run", "--input", "nope.csv", "--out", "r"],
        &["run", "--synthetic", "--out", "r", "--no-such-flag"],
        &["split", "--input", "nope.csv", "--strategy", "informed"],
        &["frobnicate"],
    ];
    for args in cases {
        let o = splitlab(dir.path(), args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
    let o = splitlab(dir.path(), &["run", "--input", "nope.csv", "--out", "r"]);
    assert!(stderr(&o).contains("nope.csv"));
}

#[test]
fn informed_without_capture_ids_names_the_precondition() {
    let dir = tempfile::tempdir().unwrap();
    synth_data(dir.path());
    let text = fs::read_to_string(dir.path().join("data.csv")).unwrap();
    let stripped: Vec<String> = text
        .lines()
        .enumerate()
        .map(|(i, l)| {
            if i == 0 {
                l.to_string()
            } else {
                format!("{},", &l[..l.rfind(',').unwrap()])
            }
        })
        .collect();
    fs::write(dir.path().join("bare.csv"), stripped.join("\n")).unwrap();

    let o = splitlab(
        dir.path(),
        &[
            "run",
            "--input",
            "bare.csv",
            "--strategy",
            "informed",
            "--out",
            "r",
        ],
    );
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(
        err.contains("informed split requires a capture id"),
        "{err}"
    );
    assert!(!dir.path().join("r/report.csv").exists());

    let mut args = vec![
        "run",
        "--input",
        "bare.csv",
        "--strategy",
        "mc",
        "--out",
        "r",
    ];
    args.extend(SMALL);
    assert!(splitlab(dir.path(), &args).status.success());
}

#[test]
fn malformed_input_names_the_stage_and_line() {
    let dir = tempfile::tempdir().unwrap();
    synth_data(dir.path());
    let text = fs::read_to_string(dir.path().join("data.csv")).unwrap();
    fs::write(
        dir.path().join("bad.csv"),
        text.replacen(",Botnet,", ",botnetX,", 1),
    )
    .unwrap();
    let o = splitlab(dir.path(), &["run", "--input", "bad.csv", "--out", "r"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("ingest") && err.contains("line"), "{err}");
}

#[test]
fn split_diagnose_pca_chain() {
    let dir = tempfile::tempdir().unwrap();
    synth_data(dir.path());
    let o = splitlab(
        dir.path(),
        &[
            "split",
            "--input",
            "data.csv",
            "--strategy",
            "clustering",
            "--seed",
            "5",
            "--out",
            "pair.json",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let pair: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("pair.json")).unwrap()).unwrap();
    assert_eq!(pair["strategy"], "clustering");
    assert_eq!(pair["test_indices"].as_array().unwrap().len(), 1000);

    let o = splitlab(
        dir.path(),
        &["diagnose", "--input", "data.csv", "--split", "pair.json"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let f = report["fractions"][0].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&f));

    let o = splitlab(
        dir.path(),
        &[
            "pca",
            "--input",
            "data.csv",
            "--split",
            "pair.json",
            "--out",
            "pca.csv",
            "--model-out",
            "pca.json",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let pca = fs::read_to_string(dir.path().join("pca.csv")).unwrap();
    assert_eq!(pca.lines().count(), 1 + 20866);
    assert_eq!(pca.lines().filter(|l| l.ends_with(",train")).count(), 2000);
    let model: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("pca.json")).unwrap()).unwrap();
    let ratio = model["explained_variance_ratio"].as_array().unwrap();
    assert!(ratio[0].as_f64().unwrap() >= ratio[1].as_f64().unwrap());
}

#[test]
fn diagnose_over_generated_repeats() {
    let dir = tempfile::tempdir().unwrap();
    let o = splitlab(
        dir.path(),
        &[
            "diagnose",
            "--synthetic",
            "--strategy",
            "monte_carlo",
            "--repeats",
            "2",
            "--out",
            "sim.json",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("sim.json")).unwrap()).unwrap();
    assert_eq!(report["fractions"].as_array().unwrap().len(), 2);
    assert!(report["mean"].as_f64().unwrap() <= 0.1);
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    synth_data(dir.path());
    let mut args = vec![
        "run",
        "--input",
        "data.csv",
        "--strategy",
        "informed,clustering",
        "--out",
        "one",
        "--threads",
        "1",
    ];
    args.extend(SMALL);
    assert!(splitlab(dir.path(), &args).status.success());
    let mut args = vec![
        "run",
        "--input",
        "data.csv",
        "--strategy",
        "informed,clustering",
        "--out",
        "env",
    ];
    args.extend(SMALL);
    let o = Command::new(BIN)
        .args(&args)
        .current_dir(dir.path())
        .env("SPLITLAB_THREADS", "3")
        .output()
        .unwrap();
    assert!(o.status.success());
    for f in ["report.csv", "report.json", "summary.json"] {
        assert_eq!(
            fs::read(dir.path().join("one").join(f)).unwrap(),
            fs::read(dir.path().join("env").join(f)).unwrap(),
            "{f}"
        );
    }
    let o = splitlab(
        dir.path(),
        &["run", "--synthetic", "--out", "x", "--threads", "0"],
    );
    assert_eq!(o.status.code(), Some(2));
}
