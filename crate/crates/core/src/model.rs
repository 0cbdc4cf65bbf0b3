//! A trained map of any of the four kinds, its winner rule over sequences,
//! and the model file format: the lattice followed by `key value` lines
//! naming the kind and its parameters.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::codec::FeatureRanges;
use crate::corpus::SequenceSample;
use crate::error::{Error, Result};
use crate::lin::{lin_bmu, update_potential, LinParams, PotentialState};
use crate::rssom::{rsom_bmu, train_rssom, update_difference, DifferenceState};
use crate::som::{argmin, find_bmu, half_diameter_of, train_som, Lattice, Schedule, TrainingLog};
use crate::ssom::{firing_latencies, train_ssom, LateralGains, SpikingParams, SsomConfig};
use crate::stdp::{StdpRule, StdpVariant, StdpWindow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    Som,
    Ssom,
    Rssom,
    Lin,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::Som,
        ModelKind::Ssom,
        ModelKind::Rssom,
        ModelKind::Lin,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Som => "som",
            ModelKind::Ssom => "ssom",
            ModelKind::Rssom => "rssom",
            ModelKind::Lin => "lin",
        }
    }

    pub fn is_spiking(self) -> bool {
        self != ModelKind::Som
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                Error::invalid(
                    "run.model",
                    format!("expected som, ssom, rssom or lin, got `{s}`"),
                )
            })
    }
}

/// Everything needed to train one model.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSettings {
    pub kind: ModelKind,
    pub rows: usize,
    pub cols: usize,
    pub schedule: Schedule,
    pub spiking: SpikingParams,
    pub alpha: f64,
    pub lin: LinParams,
    /// SOM only: train on whole sequences joined into one vector.
    pub concat: bool,
    pub seed: u64,
}

impl TrainSettings {
    pub fn defaults(kind: ModelKind, rows: usize, cols: usize, seed: u64) -> Self {
        Self {
            kind,
            rows,
            cols,
            schedule: Schedule {
                epochs: 80,
                lr_start: 0.9,
                lr_end: 0.05,
                radius_start: half_diameter_of(rows, cols),
                radius_end: 1.0,
            },
            spiking: SpikingParams::for_grid(rows, cols),
            alpha: 0.5,
            lin: LinParams::default(),
            concat: false,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub kind: ModelKind,
    /// Feature-space weights for SOM; normalized `[0, 1]` weights otherwise.
    pub lattice: Lattice,
    /// Normalization ranges of the spiking kinds.
    pub ranges: Option<FeatureRanges>,
    pub spiking: SpikingParams,
    pub alpha: f64,
    pub lin: LinParams,
    pub concat: bool,
}

fn all_frames(data: &[SequenceSample]) -> Result<Vec<Vec<f64>>> {
    let dim = data.first().ok_or(Error::Empty("training data"))?.dim();
    let mut out = Vec::new();
    for s in data {
        if s.frames.is_empty() {
            return Err(Error::Empty("sequence frames"));
        }
        for f in &s.frames {
            if f.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: f.len(),
                });
            }
            out.push(f.clone());
        }
    }
    Ok(out)
}

/// Initializes a lattice from the data bounds and trains it.
pub fn train_model(
    settings: &TrainSettings,
    data: &[SequenceSample],
) -> Result<(Model, TrainingLog)> {
    let frames = all_frames(data)?;
    let TrainSettings {
        kind,
        rows,
        cols,
        seed,
        ..
    } = *settings;
    let schedule = &settings.schedule;
    if kind == ModelKind::Som {
        let vectors: Vec<Vec<f64>> = if settings.concat {
            data.iter().map(SequenceSample::concatenated).collect()
        } else {
            frames
        };
        let mut lattice = Lattice::init_from_data(rows, cols, seed, &vectors)?;
        let log = train_som(&vectors, &mut lattice, schedule, seed)?;
        let model = Model {
            kind,
            lattice,
            ranges: None,
            spiking: settings.spiking,
            alpha: settings.alpha,
            lin: settings.lin,
            concat: settings.concat,
        };
        return Ok((model, log));
    }

    let ranges = FeatureRanges::from_data(&frames)?;
    let normalized = frames
        .iter()
        .map(|f| ranges.normalize(f))
        .collect::<Result<Vec<_>>>()?;
    let mut lattice = Lattice::init_from_data(rows, cols, seed, &normalized)?;
    let params = &settings.spiking;
    let log = match kind {
        ModelKind::Ssom => train_ssom(data, &mut lattice, &ranges, schedule, params, seed)?,
        ModelKind::Rssom => train_rssom(
            data,
            &mut lattice,
            &ranges,
            schedule,
            params,
            settings.alpha,
            seed,
        )?,
        ModelKind::Lin => crate::lin::train_lin(
            data,
            &mut lattice,
            &ranges,
            schedule,
            params,
            &settings.lin,
            seed,
        )?,
        ModelKind::Som => unreachable!(),
    };
    let model = Model {
        kind,
        lattice,
        ranges: Some(ranges),
        spiking: settings.spiking,
        alpha: settings.alpha,
        lin: settings.lin,
        concat: false,
    };
    Ok((model, log))
}

/// Anything that maps a sequence to lattice winners.
pub trait WinnerModel {
    fn lattice(&self) -> &Lattice;

    /// Winning unit (flat index) after each frame. Models that consume a
    /// whole sequence at once return a single winner.
    fn frame_winners(&self, sample: &SequenceSample) -> Result<Vec<usize>>;

    fn terminal_winner(&self, sample: &SequenceSample) -> Result<usize> {
        self.frame_winners(sample)?
            .last()
            .copied()
            .ok_or(Error::Empty("sequence frames"))
    }
}

impl Model {
    fn normalized(&self, sample: &SequenceSample) -> Result<Vec<Vec<f64>>> {
        let ranges = self
            .ranges
            .as_ref()
            .ok_or_else(|| Error::Format(format!("{} model without ranges", self.kind)))?;
        sample.frames.iter().map(|f| ranges.normalize(f)).collect()
    }
}

impl WinnerModel for Model {
    fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    fn frame_winners(&self, sample: &SequenceSample) -> Result<Vec<usize>> {
        if sample.frames.is_empty() {
            return Err(Error::Empty("sequence frames"));
        }
        let lattice = &self.lattice;
        match self.kind {
            ModelKind::Som if self.concat => {
                Ok(vec![find_bmu(&sample.concatenated(), lattice)?.flat])
            }
            ModelKind::Som => sample
                .frames
                .iter()
                .map(|f| Ok(find_bmu(f, lattice)?.flat))
                .collect(),
            ModelKind::Ssom => self
                .normalized(sample)?
                .iter()
                .map(|v| {
                    let t = firing_latencies(v, lattice, self.spiking.cfg.t_max)?;
                    Ok(argmin(t).expect("lattice has at least one unit"))
                })
                .collect(),
            ModelKind::Rssom => {
                let mut state = DifferenceState::new(lattice, self.alpha)?;
                self.normalized(sample)?
                    .iter()
                    .map(|v| {
                        update_difference(v, lattice, &mut state)?;
                        Ok(rsom_bmu(&state, lattice).flat)
                    })
                    .collect()
            }
            ModelKind::Lin => {
                let mut state = PotentialState::new(lattice, self.lin.lambda)?
                    .with_input_scaling(self.lin.scale_input_by_lambda);
                self.normalized(sample)?
                    .iter()
                    .map(|v| {
                        update_potential(v, lattice, &mut state)?;
                        Ok(lin_bmu(&state, lattice).flat)
                    })
                    .collect()
            }
        }
    }
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Format(format!("bad value `{v}` for `{key}`")))
}

fn take(fields: &mut HashMap<String, String>, key: &str) -> Result<String> {
    fields
        .remove(key)
        .ok_or_else(|| Error::Format(format!("missing `{key}`")))
}

fn get<T: FromStr>(fields: &mut HashMap<String, String>, key: &str) -> Result<T> {
    parse_value(key, &take(fields, key)?)
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(f64::to_string).collect::<Vec<_>>().join(" ")
}

impl Model {
    pub fn write_to(&self, mut out: impl Write) -> Result<()> {
        self.lattice.write_to(&mut out)?;
        writeln!(out, "model {}", self.kind)?;
        if self.kind == ModelKind::Som {
            writeln!(out, "concat {}", self.concat)?;
            return Ok(());
        }
        let ranges = self
            .ranges
            .as_ref()
            .ok_or_else(|| Error::Format(format!("{} model without ranges", self.kind)))?;
        writeln!(out, "range_lo {}", join(ranges.lo()))?;
        writeln!(out, "range_hi {}", join(ranges.hi()))?;
        let c = &self.spiking.cfg;
        writeln!(out, "ssom.t_max_ms {}", c.t_max)?;
        writeln!(out, "ssom.t_ref_ms {}", c.t_ref)?;
        writeln!(out, "ssom.s_radius {}", c.s_radius)?;
        writeln!(out, "ssom.sim_step_ms {}", c.sim_step)?;
        writeln!(out, "ssom.tau_psp_ms {}", c.tau_psp)?;
        let gains = self.spiking.lateral.unwrap_or_default();
        writeln!(out, "lateral.enabled {}", self.spiking.lateral.is_some())?;
        writeln!(out, "lateral.excite_gain {}", gains.excite_gain)?;
        writeln!(out, "lateral.inhibit_gain {}", gains.inhibit_gain)?;
        let r = &self.spiking.rule;
        writeln!(out, "stdp.variant {}", r.variant)?;
        writeln!(out, "stdp.a_plus {}", r.window.a_plus)?;
        writeln!(out, "stdp.a_minus {}", r.window.a_minus)?;
        writeln!(out, "stdp.tau_plus_ms {}", r.window.tau_plus)?;
        writeln!(out, "stdp.tau_minus_ms {}", r.window.tau_minus)?;
        writeln!(out, "stdp.eta {}", r.eta)?;
        writeln!(out, "stdp.w_max {}", r.w_max)?;
        writeln!(out, "stdp.flip_branches {}", r.flip_branches)?;
        match self.kind {
            ModelKind::Rssom => writeln!(out, "rssom.alpha {}", self.alpha)?,
            ModelKind::Lin => {
                writeln!(out, "lin.lambda {}", self.lin.lambda)?;
                writeln!(
                    out,
                    "lin.scale_input_by_lambda {}",
                    self.lin.scale_input_by_lambda
                )?;
            }
            _ => {}
        }
        Ok(())
    }

    pub fn read_from(mut input: impl BufRead) -> Result<Self> {
        let lattice = Lattice::read_from(&mut input)?;
        let mut fields: HashMap<String, String> = HashMap::new();
        for line in input.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once(' ').unwrap_or((line, ""));
            if fields
                .insert(key.to_string(), value.trim().to_string())
                .is_some()
            {
                return Err(Error::Format(format!("duplicate key `{key}`")));
            }
        }
        let kind: ModelKind = take(&mut fields, "model")?
            .parse()
            .map_err(|_| Error::Format("unknown model kind".into()))?;
        let mut model = Model {
            kind,
            spiking: SpikingParams::for_grid(lattice.rows(), lattice.cols()),
            lattice,
            ranges: None,
            alpha: 0.5,
            lin: LinParams::default(),
            concat: false,
        };
        if kind == ModelKind::Som {
            model.concat = get(&mut fields, "concat")?;
        } else {
            let list = |key: &str, v: String| -> Result<Vec<f64>> {
                v.split_whitespace().map(|t| parse_value(key, t)).collect()
            };
            let lo = list("range_lo", take(&mut fields, "range_lo")?)?;
            let hi = list("range_hi", take(&mut fields, "range_hi")?)?;
            let ranges = FeatureRanges::new(lo, hi)?;
            if ranges.dim() != model.lattice.dim() {
                return Err(Error::Format(format!(
                    "ranges have {} dimensions, lattice has {}",
                    ranges.dim(),
                    model.lattice.dim()
                )));
            }
            model.ranges = Some(ranges);
            let cfg = SsomConfig {
                t_max: get(&mut fields, "ssom.t_max_ms")?,
                t_ref: get(&mut fields, "ssom.t_ref_ms")?,
                s_radius: get(&mut fields, "ssom.s_radius")?,
                sim_step: get(&mut fields, "ssom.sim_step_ms")?,
                tau_psp: get(&mut fields, "ssom.tau_psp_ms")?,
            };
            let gains = LateralGains {
                excite_gain: get(&mut fields, "lateral.excite_gain")?,
                inhibit_gain: get(&mut fields, "lateral.inhibit_gain")?,
            };
            let window = StdpWindow {
                a_plus: get(&mut fields, "stdp.a_plus")?,
                a_minus: get(&mut fields, "stdp.a_minus")?,
                tau_plus: get(&mut fields, "stdp.tau_plus_ms")?,
                tau_minus: get(&mut fields, "stdp.tau_minus_ms")?,
            };
            let eta = get(&mut fields, "stdp.eta")?;
            let w_max = get(&mut fields, "stdp.w_max")?;
            let lateral_on: bool = get(&mut fields, "lateral.enabled")?;
            let variant: StdpVariant = get(&mut fields, "stdp.variant")?;
            let flip_branches = get(&mut fields, "stdp.flip_branches")?;
            model.spiking = SpikingParams {
                cfg,
                lateral: lateral_on.then_some(gains),
                rule: StdpRule {
                    variant,
                    eta,
                    w_max,
                    window,
                    flip_branches,
                },
            };
            model.spiking.validate()?;
            match kind {
                ModelKind::Rssom => model.alpha = get(&mut fields, "rssom.alpha")?,
                ModelKind::Lin => {
                    model.lin = LinParams {
                        lambda: get(&mut fields, "lin.lambda")?,
                        scale_input_by_lambda: get(&mut fields, "lin.scale_input_by_lambda")?,
                    };
                }
                _ => {}
            }
        }
        if let Some(key) = fields.keys().min() {
            return Err(Error::Format(format!("unexpected key `{key}`")));
        }
        Ok(model)
    }
}
