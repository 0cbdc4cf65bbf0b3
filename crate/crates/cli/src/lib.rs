//! Command implementations behind the `pulsom` binary. Every command reads a
//! run config, writes its outputs under `run.output_dir`, and leaves an
//! `effective-config` plus a `run-manifest` of SHA-256 hashes beside them.

pub mod config;

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use pulsom_core::corpus::{
    discover_utterances, read_dataset, synth_generate, utterance_features, write_dataset,
    write_frame_rows, write_frames_header, SequenceSample,
};
use pulsom_core::eval::{calibrate, classify, combined_table};
use pulsom_core::{train_model, EvalOptions, EvalReport, Model};

pub use config::{keys_help, RunConfig, KEYS};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("corpus error: {0}")]
    Corpus(String),
    #[error("training diverged: {0}")]
    Diverged(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Corpus(_) => 4,
            CliError::Diverged(_) => 5,
        }
    }
}

impl From<pulsom_core::Error> for CliError {
    fn from(e: pulsom_core::Error) -> Self {
        use pulsom_core::Error as E;
        let msg = e.to_string();
        match e {
            E::Diverged { .. } => CliError::Diverged(msg),
            _ if e.is_corpus_error() => CliError::Corpus(msg),
            E::Io(_) | E::Csv(_) | E::Format(_) => CliError::Io(msg),
            _ => CliError::Config(msg),
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| io_err(path, e))
}

fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Tracks the files a command reads and writes, for the run manifest.
struct Run<'a> {
    cfg: &'a RunConfig,
    command: &'static str,
    inputs: Vec<(&'static str, PathBuf)>,
    outputs: Vec<String>,
}

impl<'a> Run<'a> {
    fn start(cfg: &'a RunConfig, command: &'static str) -> Result<Self, CliError> {
        fs::create_dir_all(&cfg.output_dir).map_err(|e| io_err(&cfg.output_dir, e))?;
        Ok(Self {
            cfg,
            command,
            inputs: Vec::new(),
            outputs: Vec::new(),
        })
    }

    fn input(&mut self, role: &'static str, path: &Path) {
        self.inputs.push((role, path.to_path_buf()));
    }

    fn output_path(&self, name: &str) -> PathBuf {
        self.cfg.output_dir.join(name)
    }

    fn write_with(
        &mut self,
        name: &str,
        f: impl FnOnce(&mut BufWriter<File>) -> Result<(), CliError>,
    ) -> Result<PathBuf, CliError> {
        let path = self.output_path(name);
        let file = File::create(&path).map_err(|e| io_err(&path, e))?;
        let mut w = BufWriter::new(file);
        f(&mut w)?;
        w.flush().map_err(|e| io_err(&path, e))?;
        self.outputs.push(name.to_string());
        Ok(path)
    }

    fn write_text(&mut self, name: &str, text: &str) -> Result<PathBuf, CliError> {
        self.write_with(name, |w| {
            w.write_all(text.as_bytes())
                .map_err(|e| CliError::Io(e.to_string()))
        })
    }

    /// Writes `effective-config` and `run-manifest`.
    fn finish(mut self) -> Result<(), CliError> {
        let effective = self.cfg.effective.clone();
        self.write_text("effective-config", &effective)?;
        let mut manifest = format!("command {}\n", self.command);
        for (role, path) in &self.inputs {
            let _ = writeln!(
                manifest,
                "input {role} {} {}",
                sha256_file(path)?,
                path.display()
            );
        }
        for name in &self.outputs {
            let _ = writeln!(
                manifest,
                "output {name} {}",
                sha256_file(&self.output_path(name))?
            );
        }
        let path = self.output_path("run-manifest");
        fs::write(&path, manifest).map_err(|e| io_err(&path, e))
    }
}

fn required<'p>(path: &'p Option<PathBuf>, key: &str) -> Result<&'p Path, CliError> {
    path.as_deref()
        .ok_or_else(|| CliError::Config(format!("`{key}` is required for this command")))
}

fn load_dataset(path: &Path) -> Result<Vec<SequenceSample>, CliError> {
    if !path.is_file() {
        return Err(io_err(path, "no such file"));
    }
    let data = read_dataset(open(path)?).map_err(|e| match e {
        pulsom_core::Error::Csv(_) | pulsom_core::Error::Io(_) => io_err(path, e),
        other => CliError::from(other),
    })?;
    if data.is_empty() {
        return Err(io_err(path, "dataset has no rows"));
    }
    Ok(data)
}

/// Extracts features from the corpus and writes `dataset.csv` (one row per
/// aligned segment) and `frames.csv` (one row per analysis frame).
pub fn cmd_features(cfg: &RunConfig) -> Result<usize, CliError> {
    let root = required(&cfg.corpus_root, "corpus.root")?;
    if !root.is_dir() {
        return Err(io_err(root, "corpus root is not a directory"));
    }
    let utterances = discover_utterances(root, cfg.corpus_kind, &cfg.corpus_filter)?;
    if utterances.is_empty() {
        return Err(CliError::Corpus(format!(
            "{}: no utterances with .{} alignments match the filter",
            root.display(),
            cfg.corpus_kind.extension()
        )));
    }
    let features = utterances
        .par_iter()
        .map(|u| utterance_features(u, cfg.corpus_kind, &cfg.mfcc, cfg.middle_frames))
        .collect::<Result<Vec<_>, _>>()?;
    let mut run = Run::start(cfg, "features")?;
    let samples: Vec<SequenceSample> = features
        .iter()
        .flat_map(|f| f.samples.iter().cloned())
        .collect();
    run.write_with("dataset.csv", |w| Ok(write_dataset(w, &samples)?))?;
    run.write_with("frames.csv", |w| {
        let mut csv = csv::Writer::from_writer(w);
        write_frames_header(&mut csv, cfg.mfcc.n_coeffs)?;
        for (u, f) in utterances.iter().zip(&features) {
            write_frame_rows(&mut csv, &u.id, &f.frames)?;
        }
        csv.flush().map_err(|e| CliError::Io(e.to_string()))
    })?;
    run.finish()?;
    Ok(samples.len())
}

/// Writes a synthetic dataset to `dataset.csv`.
pub fn cmd_synth(cfg: &RunConfig) -> Result<usize, CliError> {
    let samples = synth_generate(&cfg.synth)?;
    let mut run = Run::start(cfg, "synth")?;
    run.write_with("dataset.csv", |w| Ok(write_dataset(w, &samples)?))?;
    run.finish()?;
    Ok(samples.len())
}

/// Trains the configured model on `data.train`; writes `model.txt` and
/// `training-log.csv`. Returns the model path.
pub fn cmd_train(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let train_path = required(&cfg.data_train, "data.train")?;
    let data = load_dataset(train_path)?;
    let (model, log) = train_model(&cfg.train, &data)?;
    let mut run = Run::start(cfg, "train")?;
    run.input("data.train", train_path);
    let model_path = run.write_with("model.txt", |w| Ok(model.write_to(w)?))?;
    run.write_with("training-log.csv", |w| Ok(log.write_csv(w)?))?;
    run.finish()?;
    Ok(model_path)
}

fn eval_report(
    model: &Model,
    labels: &pulsom_core::UnitLabelMap,
    data: &[SequenceSample],
    cfg: &RunConfig,
) -> Result<EvalReport, CliError> {
    let opts = EvalOptions {
        frame_vote: cfg.frame_vote,
    };
    let pairs = data
        .par_iter()
        .map(|s| {
            let predicted = classify(model, labels, s, opts)?;
            Ok((
                cfg.class_map.true_class(s)?,
                cfg.class_map.predicted_class(&predicted),
            ))
        })
        .collect::<Result<Vec<_>, pulsom_core::Error>>()?;
    Ok(EvalReport::from_pairs(
        &pairs,
        &cfg.class_map.expected_classes(),
    )?)
}

/// Calibrates unit labels on `data.train` and scores the training set and,
/// when configured, `data.test`. Writes `report.txt`, `report-<split>.csv`
/// and `confusion-<split>.csv`.
pub fn cmd_eval(
    cfg: &RunConfig,
    model_path: Option<&Path>,
) -> Result<Vec<(String, EvalReport)>, CliError> {
    let default_model = cfg.output_dir.join("model.txt");
    let model_path = model_path.unwrap_or(&default_model);
    if !model_path.is_file() {
        return Err(io_err(model_path, "no such model file"));
    }
    let model = Model::read_from(open(model_path)?).map_err(|e| io_err(model_path, e))?;
    if model.kind != cfg.model {
        return Err(CliError::Config(format!(
            "{} holds a {} model but run.model is {}",
            model_path.display(),
            model.kind,
            cfg.model
        )));
    }
    let train_path = required(&cfg.data_train, "data.train")?;
    let train = load_dataset(train_path)?;
    let opts = EvalOptions {
        frame_vote: cfg.frame_vote,
    };
    let labels = calibrate(&model, &train, opts)?;
    let mut splits = vec![(
        "train".to_string(),
        eval_report(&model, &labels, &train, cfg)?,
    )];
    let mut run = Run::start(cfg, "eval")?;
    run.input("model", model_path);
    run.input("data.train", train_path);
    if let Some(test_path) = &cfg.data_test {
        let test = load_dataset(test_path)?;
        splits.push((
            "test".to_string(),
            eval_report(&model, &labels, &test, cfg)?,
        ));
        run.input("data.test", test_path);
    }
    let mut text = String::new();
    for (split, report) in &splits {
        let title = format!("{} {split}", cfg.model.name().to_uppercase());
        text.push_str(&report.to_table(&title));
        text.push('\n');
        run.write_with(&format!("report-{split}.csv"), |w| Ok(report.write_csv(w)?))?;
        run.write_with(&format!("confusion-{split}.csv"), |w| {
            Ok(report.write_confusion_csv(w)?)
        })?;
    }
    run.write_text("report.txt", &text)?;
    run.finish()?;
    Ok(splits)
}

/// Combines per-model report CSVs listed in `report.inputs` into
/// `combined-report.txt`.
pub fn cmd_report(cfg: &RunConfig) -> Result<String, CliError> {
    if cfg.report_inputs.is_empty() {
        return Err(CliError::Config("`report.inputs` is empty".into()));
    }
    let mut run = Run::start(cfg, "report")?;
    let mut reports = Vec::new();
    for (name, path) in &cfg.report_inputs {
        if !path.is_file() {
            return Err(io_err(path, "no such report file"));
        }
        let report = EvalReport::read_csv(open(path)?).map_err(|e| io_err(path, e))?;
        run.input("report", path);
        reports.push((name.clone(), report));
    }
    let table = combined_table(&reports);
    run.write_text("combined-report.txt", &table)?;
    run.finish()?;
    Ok(table)
}
