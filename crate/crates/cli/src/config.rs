//! Run configuration: flat `section.key = value` lines, `#` comment lines.
//! Every key is listed in [`KEYS`] with its default; unknown keys are
//! rejected. Relative paths resolve against the config file's directory.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use pulsom_core::corpus::{AlignmentKind, SynthSpec};
use pulsom_core::som::half_diameter_of;
use pulsom_core::{
    ClassMap, LateralGains, LinParams, MfccConfig, ModelKind, Schedule, SpikingParams, SsomConfig,
    StdpRule, StdpVariant, StdpWindow, TrainSettings,
};

use crate::CliError;

pub struct KeySpec {
    pub key: &'static str,
    /// Empty when the key has no default; `auto` when derived from other keys.
    pub default: &'static str,
    pub doc: &'static str,
}

const fn key(key: &'static str, default: &'static str, doc: &'static str) -> KeySpec {
    KeySpec { key, default, doc }
}

pub const KEYS: &[KeySpec] = &[
    key("run.model", "som", "som | ssom | rssom | lin"),
    key(
        "run.seed",
        "0",
        "seed for initialization, sample order and synthetic data",
    ),
    key(
        "run.output_dir",
        "",
        "directory receiving every output file (required)",
    ),
    key("lattice.rows", "8", "lattice rows"),
    key("lattice.cols", "8", "lattice columns"),
    key("schedule.epochs", "80", "training epochs (>= 1)"),
    key(
        "schedule.lr_start",
        "0.9",
        "initial learning rate, at most 1",
    ),
    key("schedule.lr_end", "0.05", "final learning rate"),
    key(
        "schedule.radius_start",
        "auto",
        "initial neighborhood radius; auto = half the larger lattice side",
    ),
    key("schedule.radius_end", "1", "final neighborhood radius"),
    key(
        "stdp.variant",
        "multiplicative",
        "additive | panchev | soula | multiplicative",
    ),
    key("stdp.a_plus", "1", "potentiation amplitude"),
    key("stdp.a_minus", "1", "depression amplitude"),
    key("stdp.tau_plus_ms", "10", "potentiation time constant"),
    key("stdp.tau_minus_ms", "10", "depression time constant"),
    key("stdp.eta", "0.1", "plasticity rate in (0, 1]"),
    key("stdp.w_max", "1", "upper weight bound"),
    key(
        "stdp.flip_branches",
        "true",
        "pair the toward-target form with potentiation",
    ),
    key("ssom.t_max_ms", "20", "latency coding horizon"),
    key(
        "ssom.t_ref_ms",
        "15",
        "reference time; later units are silent",
    ),
    key(
        "ssom.s_radius",
        "auto",
        "initial learning area radius; auto = half the larger lattice side",
    ),
    key("ssom.sim_step_ms", "1", "simulation step"),
    key("ssom.tau_psp_ms", "5", "postsynaptic trace time constant"),
    key(
        "lateral.enabled",
        "true",
        "lateral excitation and inhibition between units",
    ),
    key(
        "lateral.excite_gain",
        "0.5",
        "pull of nearby firing times toward the winner",
    ),
    key(
        "lateral.inhibit_gain",
        "0.1",
        "delay per lattice unit beyond the excitatory radius",
    ),
    key(
        "rssom.alpha",
        "0.5",
        "leak of the recurrent difference vector, in (0, 1]",
    ),
    key("lin.lambda", "0.5", "potential decay, in [0, 1]"),
    key(
        "lin.scale_input_by_lambda",
        "false",
        "scale the matching term by lambda",
    ),
    key(
        "mfcc.preemph_a",
        "0.95",
        "pre-emphasis coefficient in [0.9, 1]",
    ),
    key("mfcc.frame_len", "256", "samples per frame"),
    key("mfcc.hop", "128", "frame shift (half the frame length)"),
    key("mfcc.n_filters", "26", "mel filters"),
    key(
        "mfcc.n_coeffs",
        "12",
        "cepstral coefficients kept after dropping c0",
    ),
    key("mfcc.fft_size", "256", "FFT length (>= frame_len)"),
    key(
        "mfcc.use_power",
        "true",
        "filter squared magnitudes (false: magnitudes)",
    ),
    key("corpus.root", "", "TIMIT-layout corpus root (features)"),
    key(
        "corpus.filter",
        "",
        "comma-separated utterance path prefixes, e.g. train/dr1",
    ),
    key("corpus.kind", "phn", "phn | wrd alignments"),
    key(
        "corpus.frames",
        "9",
        "frames taken from the middle of each segment",
    ),
    key(
        "data.train",
        "",
        "dataset CSV used for training and calibration",
    ),
    key(
        "data.test",
        "",
        "dataset CSV evaluated in addition to the training set",
    ),
    key(
        "data.concat",
        "false",
        "som only: join a sequence's frames into one vector",
    ),
    key("synth.classes", "3", "synthetic classes"),
    key("synth.per_class", "50", "sequences per class"),
    key("synth.dim", "12", "coefficients per frame"),
    key("synth.frames", "9", "frames per sequence"),
    key(
        "synth.separation",
        "5",
        "minimum distance between cluster means, in noise std devs",
    ),
    key(
        "synth.order_task",
        "false",
        "two classes with the same frames in opposite order",
    ),
    key(
        "eval.frame_vote",
        "false",
        "majority over per-frame winners instead of the last winner",
    ),
    key(
        "eval.class_map",
        "label",
        "label | macro (TIMIT macro-classes)",
    ),
    key(
        "report.inputs",
        "",
        "name=report.csv pairs, comma-separated (report)",
    ),
];

pub fn keys_help() -> String {
    let mut out = String::from("Config keys (`section.key = value`, `#` starts a comment line):\n");
    for k in KEYS {
        let default = if k.default.is_empty() { "-" } else { k.default };
        let _ = writeln!(out, "  {:<28} [{default}] {}", k.key, k.doc);
    }
    out
}

/// Raw key/value pairs with defaults applied.
#[derive(Debug, Clone)]
pub struct RawConfig {
    values: BTreeMap<&'static str, String>,
    base: PathBuf,
}

fn config_error(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RawConfig {
    pub fn parse(text: &str, base: &Path) -> Result<Self, CliError> {
        let mut values: BTreeMap<&'static str, String> = KEYS
            .iter()
            .map(|k| (k.key, k.default.to_string()))
            .collect();
        let mut seen = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(config_error(format!(
                    "line {}: expected `key = value`",
                    i + 1
                )));
            };
            let k = k.trim();
            let spec = KEYS
                .iter()
                .find(|s| s.key == k)
                .ok_or_else(|| config_error(format!("line {}: unknown key `{k}`", i + 1)))?;
            if let Some(prev) = seen.insert(spec.key, i + 1) {
                return Err(config_error(format!(
                    "line {}: `{k}` already set on line {prev}",
                    i + 1
                )));
            }
            values.insert(spec.key, v.trim().to_string());
        }
        Ok(Self {
            values,
            base: base.to_path_buf(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Self::parse(&text, &base)
    }

    fn raw(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or("")
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<T, CliError> {
        let v = self.raw(key);
        v.parse()
            .map_err(|_| config_error(format!("`{key}`: cannot parse `{v}`")))
    }

    fn auto_or(&self, key: &str, auto: f64) -> Result<f64, CliError> {
        if self.raw(key) == "auto" {
            Ok(auto)
        } else {
            self.get(key)
        }
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        let v = self.raw(key);
        (!v.is_empty()).then(|| self.base.join(v))
    }

    fn list(&self, key: &str) -> Vec<String> {
        self.raw(key)
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect()
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: ModelKind,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub train: TrainSettings,
    pub mfcc: MfccConfig,
    pub corpus_root: Option<PathBuf>,
    pub corpus_filter: Vec<String>,
    pub corpus_kind: AlignmentKind,
    pub middle_frames: usize,
    pub data_train: Option<PathBuf>,
    pub data_test: Option<PathBuf>,
    pub synth: SynthSpec,
    pub frame_vote: bool,
    pub class_map: ClassMap,
    pub report_inputs: Vec<(String, PathBuf)>,
    /// Resolved `key = value` lines, written next to the outputs.
    pub effective: String,
}

fn invalid(e: pulsom_core::Error) -> CliError {
    config_error(e.to_string())
}

impl RunConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self, CliError> {
        let model: ModelKind = raw.raw("run.model").parse().map_err(invalid)?;
        let seed: u64 = raw.get("run.seed")?;
        let output_dir = raw
            .path("run.output_dir")
            .ok_or_else(|| config_error("`run.output_dir` is required"))?;
        let rows: usize = raw.get("lattice.rows")?;
        let cols: usize = raw.get("lattice.cols")?;
        if rows == 0 || cols == 0 {
            return Err(config_error(
                "`lattice.rows` and `lattice.cols` must be >= 1",
            ));
        }
        let half = half_diameter_of(rows, cols);
        let schedule = Schedule {
            epochs: raw.get("schedule.epochs")?,
            lr_start: raw.get("schedule.lr_start")?,
            lr_end: raw.get("schedule.lr_end")?,
            radius_start: raw.auto_or("schedule.radius_start", half)?,
            radius_end: raw.get("schedule.radius_end")?,
        };
        schedule.validate().map_err(invalid)?;
        let variant: StdpVariant = raw.raw("stdp.variant").parse().map_err(invalid)?;
        let rule = StdpRule {
            variant,
            eta: raw.get("stdp.eta")?,
            w_max: raw.get("stdp.w_max")?,
            window: StdpWindow {
                a_plus: raw.get("stdp.a_plus")?,
                a_minus: raw.get("stdp.a_minus")?,
                tau_plus: raw.get("stdp.tau_plus_ms")?,
                tau_minus: raw.get("stdp.tau_minus_ms")?,
            },
            flip_branches: raw.get("stdp.flip_branches")?,
        };
        let lateral_on: bool = raw.get("lateral.enabled")?;
        let spiking = SpikingParams {
            cfg: SsomConfig {
                t_max: raw.get("ssom.t_max_ms")?,
                t_ref: raw.get("ssom.t_ref_ms")?,
                s_radius: raw.auto_or("ssom.s_radius", half)?,
                sim_step: raw.get("ssom.sim_step_ms")?,
                tau_psp: raw.get("ssom.tau_psp_ms")?,
            },
            lateral: lateral_on
                .then(|| -> Result<_, CliError> {
                    Ok(LateralGains {
                        excite_gain: raw.get("lateral.excite_gain")?,
                        inhibit_gain: raw.get("lateral.inhibit_gain")?,
                    })
                })
                .transpose()?,
            rule,
        };
        spiking.validate().map_err(invalid)?;
        let alpha: f64 = raw.get("rssom.alpha")?;
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(config_error(format!(
                "`rssom.alpha` must lie in (0, 1], got {alpha}"
            )));
        }
        let lin = LinParams {
            lambda: raw.get("lin.lambda")?,
            scale_input_by_lambda: raw.get("lin.scale_input_by_lambda")?,
        };
        if !(0.0..=1.0).contains(&lin.lambda) {
            return Err(config_error(format!(
                "`lin.lambda` must lie in [0, 1], got {}",
                lin.lambda
            )));
        }
        let concat: bool = raw.get("data.concat")?;
        if concat && model != ModelKind::Som {
            return Err(config_error(
                "`data.concat` applies to run.model = som only",
            ));
        }
        let mfcc = MfccConfig {
            preemph_a: raw.get("mfcc.preemph_a")?,
            frame_len: raw.get("mfcc.frame_len")?,
            hop: raw.get("mfcc.hop")?,
            n_filters: raw.get("mfcc.n_filters")?,
            n_coeffs: raw.get("mfcc.n_coeffs")?,
            fft_size: raw.get("mfcc.fft_size")?,
            use_power: raw.get("mfcc.use_power")?,
        };
        mfcc.validate().map_err(invalid)?;
        let middle_frames: usize = raw.get("corpus.frames")?;
        if middle_frames == 0 {
            return Err(config_error("`corpus.frames` must be >= 1"));
        }
        let synth = SynthSpec {
            n_classes: raw.get("synth.classes")?,
            samples_per_class: raw.get("synth.per_class")?,
            dim: raw.get("synth.dim")?,
            frames: raw.get("synth.frames")?,
            separation: raw.get("synth.separation")?,
            order_task: raw.get("synth.order_task")?,
            seed,
        };
        synth.validate().map_err(invalid)?;
        let report_inputs = raw
            .list("report.inputs")
            .into_iter()
            .map(|item| {
                let (name, path) = item.split_once('=').ok_or_else(|| {
                    config_error(format!("`report.inputs`: expected name=path, got `{item}`"))
                })?;
                Ok((name.trim().to_string(), raw.base.join(path.trim())))
            })
            .collect::<Result<Vec<_>, CliError>>()?;

        let train = TrainSettings {
            kind: model,
            rows,
            cols,
            schedule,
            spiking,
            alpha,
            lin,
            concat,
            seed,
        };
        let mut effective = String::new();
        for k in KEYS {
            let value = match k.key {
                "schedule.radius_start" => train.schedule.radius_start.to_string(),
                "ssom.s_radius" => train.spiking.cfg.s_radius.to_string(),
                _ => raw.raw(k.key).to_string(),
            };
            let _ = writeln!(effective, "{} = {value}", k.key);
        }
        Ok(Self {
            model,
            seed,
            output_dir,
            train,
            mfcc,
            corpus_root: raw.path("corpus.root"),
            corpus_filter: raw.list("corpus.filter"),
            corpus_kind: raw.raw("corpus.kind").parse().map_err(invalid)?,
            middle_frames,
            data_train: raw.path("data.train"),
            data_test: raw.path("data.test"),
            synth,
            frame_vote: raw.get("eval.frame_vote")?,
            class_map: raw.raw("eval.class_map").parse().map_err(invalid)?,
            report_inputs,
            effective,
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        Self::from_raw(&RawConfig::load(path)?)
    }
}
