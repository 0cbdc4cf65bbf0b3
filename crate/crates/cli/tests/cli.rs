mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::{write_config, write_fixture_corpus};

fn pulsom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pulsom"))
        .args(args)
        .output()
        .unwrap()
}

fn run(sub: &str, cfg: &Path) -> Output {
    pulsom(&[sub, "--config", cfg.to_str().unwrap()])
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn help_lists_config_keys() {
    let out = pulsom(&["train", "--help"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    for key in ["schedule.epochs", "stdp.flip_branches", "report.inputs"] {
        assert!(text.contains(key), "{key}");
    }
}

#[test]
fn synth_writes_dataset_config_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.cfg", &["run.output_dir = out"]);
    let out = run("synth", &cfg);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let data = fs::read_to_string(dir.path().join("out/dataset.csv")).unwrap();
    assert_eq!(data.lines().count(), 1 + 150);
    let effective = fs::read_to_string(dir.path().join("out/effective-config")).unwrap();
    assert!(effective.contains("synth.separation = 5\n"));
    let manifest = fs::read_to_string(dir.path().join("out/run-manifest")).unwrap();
    assert!(manifest.starts_with("command synth\n"));
    assert!(manifest
        .lines()
        .any(|l| l.starts_with("output dataset.csv ") && l.len() == 19 + 64));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for (i, bad) in [
        "schedule.epoch = 80",
        "schedule.epochs = 0",
        "synth.separation = 0",
        "synth.separation = -1",
        "rssom.alpha = 1.5",
    ]
    .iter()
    .enumerate()
    {
        let cfg = write_config(
            dir.path(),
            &format!("bad{i}.cfg"),
            &["run.output_dir = out", bad],
        );
        let out = run("synth", &cfg);
        assert_eq!(code(&out), 2, "{bad}: {}", stderr(&out));
    }
    let cfg = write_config(
        dir.path(),
        "unknown.cfg",
        &["run.output_dir = out", "foo.bar = 1"],
    );
    assert!(stderr(&run("synth", &cfg)).contains("foo.bar"));
}

#[test]
fn missing_files_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "run.cfg",
        &[
            "run.output_dir = out",
            "corpus.root = nowhere",
            "data.train = absent.csv",
        ],
    );
    assert_eq!(code(&run("features", &cfg)), 3);
    assert_eq!(code(&run("train", &cfg)), 3);
    assert_eq!(code(&run("eval", &cfg)), 3);
    assert_eq!(code(&pulsom(&["synth", "--config", "no-such.cfg"])), 3);
}

#[test]
fn corrupt_corpus_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture_corpus(&dir.path().join("corpus"));
    fs::write(
        dir.path().join("corpus/train/dr1/fcjf0/sa1.wav"),
        b"RIFF not sphere",
    )
    .unwrap();
    let cfg = write_config(
        dir.path(),
        "run.cfg",
        &["run.output_dir = out", "corpus.root = corpus"],
    );
    let out = run("features", &cfg);
    assert_eq!(code(&out), 4, "{}", stderr(&out));

    let dir = tempfile::tempdir().unwrap();
    write_fixture_corpus(&dir.path().join("corpus"));
    fs::write(
        dir.path().join("corpus/train/dr1/fcjf0/sa1.phn"),
        "0 9000 aa\n100 200 zz\n",
    )
    .unwrap();
    let cfg = write_config(
        dir.path(),
        "run.cfg",
        &["run.output_dir = out", "corpus.root = corpus"],
    );
    assert_eq!(code(&run("features", &cfg)), 4);
}

#[test]
fn model_kind_mismatch_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let base = [
        "run.output_dir = out",
        "data.train = out/dataset.csv",
        "schedule.epochs = 3",
        "lattice.rows = 3",
        "lattice.cols = 3",
    ];
    let som = write_config(dir.path(), "som.cfg", &base);
    assert_eq!(code(&run("synth", &som)), 0);
    assert_eq!(code(&run("train", &som)), 0);
    let mut lin = base.to_vec();
    lin.push("run.model = lin");
    let lin = write_config(dir.path(), "lin.cfg", &lin);
    let out = run("eval", &lin);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
}

#[test]
fn corpus_to_report_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let segments = write_fixture_corpus(&dir.path().join("corpus"));
    let feats = write_config(
        dir.path(),
        "feats.cfg",
        &[
            "run.output_dir = feats",
            "corpus.root = corpus",
            "corpus.filter = TRAIN/dr1",
        ],
    );
    let out = run("features", &feats);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(
        String::from_utf8_lossy(&out.stdout).trim(),
        format!("{segments} sequences")
    );

    let mut inputs = Vec::new();
    for model in ["som", "lin"] {
        let out_dir = format!("run.output_dir = {model}");
        let model_line = format!("run.model = {model}");
        let cfg = write_config(
            dir.path(),
            &format!("{model}.cfg"),
            &[
                &out_dir,
                &model_line,
                "data.train = feats/dataset.csv",
                "data.test = feats/dataset.csv",
                "eval.class_map = macro",
                "schedule.epochs = 5",
                "lattice.rows = 4",
                "lattice.cols = 4",
            ],
        );
        assert_eq!(code(&run("train", &cfg)), 0);
        let out = run("eval", &cfg);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        let report = fs::read_to_string(dir.path().join(model).join("report-test.csv")).unwrap();
        assert!(report.starts_with("class,correct,total,rate"), "{report}");
        inputs.push(format!("{}={model}/report-test.csv", model.to_uppercase()));
    }
    let inputs = format!("report.inputs = {}", inputs.join(","));
    let cfg = write_config(
        dir.path(),
        "report.cfg",
        &["run.output_dir = combined", &inputs],
    );
    let out = run("report", &cfg);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let table = fs::read_to_string(dir.path().join("combined/combined-report.txt")).unwrap();
    assert!(
        table.contains("SOM") && table.contains("LIN") && table.contains("Average"),
        "{table}"
    );
}
