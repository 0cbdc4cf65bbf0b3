//! Spiking self-organizing map.
//!
//! Units fire with a latency proportional to their mismatch with the
//! (normalized) input, the earliest unit wins, lateral connections pull
//! nearby firing times toward the winner and delay remote ones, and STDP
//! adapts the afferent weights of units that fired inside the spatial area
//! S before the reference time T.
//!
//! Lattice weights of all spiking variants live in the normalized `[0, 1]`
//! input space; [`FeatureRanges`] maps them back to feature space.
//!
//! For plasticity, an output unit's spike is placed at `t_max + t_fire`:
//! it fires once the input volley is complete, delayed by its latency.
//! Every afferent spike therefore precedes the postsynaptic one.

use crate::codec::{encode_with, EncodedInput, FeatureRanges};
use crate::corpus::SequenceSample;
use crate::error::{check_dim, Error, Result};
use crate::som::{
    argmin, decay_value, half_diameter_of, linear_decay, neighborhood, order_rng,
    quantization_error, shuffled, squared_distance, EpochLog, Lattice, Schedule, TrainingLog,
    UnitIndex,
};
use crate::stdp::StdpRule;

/// Timing parameters of the spiking variants (all times in ms).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsomConfig {
    /// Encoding horizon.
    pub t_max: f64,
    /// Reference time T: units firing later are silent.
    pub t_ref: f64,
    /// Spatial area S, in lattice units. Training decays it toward the
    /// schedule's final radius.
    pub s_radius: f64,
    pub sim_step: f64,
    pub tau_psp: f64,
}

impl SsomConfig {
    pub fn default_for(lattice: &Lattice) -> Self {
        Self::for_grid(lattice.rows(), lattice.cols())
    }

    pub fn for_grid(rows: usize, cols: usize) -> Self {
        Self {
            t_max: 20.0,
            t_ref: 15.0,
            s_radius: half_diameter_of(rows, cols),
            sim_step: 1.0,
            tau_psp: 5.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sim_step > 0.0 && self.sim_step <= self.t_ref && self.t_ref <= self.t_max) {
            return Err(Error::invalid(
                "ssom",
                format!(
                    "need 0 < sim_step <= t_ref <= t_max, got {} / {} / {}",
                    self.sim_step, self.t_ref, self.t_max
                ),
            ));
        }
        if !self.t_max.is_finite() {
            return Err(Error::invalid("ssom.t_max_ms", "must be finite"));
        }
        if !(self.s_radius > 0.0 && self.s_radius.is_finite()) {
            return Err(Error::invalid("ssom.s_radius", "must be positive"));
        }
        if !(self.tau_psp > 0.0 && self.tau_psp.is_finite()) {
            return Err(Error::invalid("ssom.tau_psp_ms", "must be positive"));
        }
        Ok(())
    }
}

/// Mexican-hat lateral connectivity acting on firing times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LateralKernel {
    pub excite_radius: f64,
    pub excite_gain: f64,
    pub inhibit_gain: f64,
}

impl LateralKernel {
    pub fn validate(&self) -> Result<()> {
        if !(self.excite_radius > 0.0) {
            return Err(Error::invalid("lateral.excite_radius", "must be positive"));
        }
        if !(self.excite_gain > 0.0 && self.inhibit_gain > 0.0) {
            return Err(Error::invalid("lateral", "gains must be positive"));
        }
        Ok(())
    }
}

/// Lateral gains; the excitatory radius follows the decayed map radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LateralGains {
    pub excite_gain: f64,
    pub inhibit_gain: f64,
}

impl Default for LateralGains {
    fn default() -> Self {
        Self {
            excite_gain: 0.5,
            inhibit_gain: 0.1,
        }
    }
}

/// Firing time of every unit for one presentation (`None` = silent).
#[derive(Debug, Clone, PartialEq)]
pub struct FiringRecord {
    pub times: Vec<Option<f64>>,
    pub winner: Option<UnitIndex>,
}

impl FiringRecord {
    /// Gates raw latencies at `t_ref` and picks the earliest unit.
    pub fn from_latencies(latencies: &[f64], lattice: &Lattice, t_ref: f64) -> Self {
        let times: Vec<Option<f64>> = latencies
            .iter()
            .map(|&t| (t <= t_ref).then_some(t))
            .collect();
        let winner = argmin(times.iter().map(|t| t.unwrap_or(f64::INFINITY)))
            .filter(|&i| times[i].is_some())
            .map(|i| lattice.unit(i));
        Self { times, winner }
    }

    pub fn winner_time(&self) -> Option<f64> {
        self.winner.and_then(|w| self.times[w.flat])
    }
}

/// Ungated latencies `t_max * ||v - clamp(w)||^2 / dim`.
pub fn firing_latencies(normalized: &[f64], lattice: &Lattice, t_max: f64) -> Result<Vec<f64>> {
    check_dim(lattice.dim(), normalized.len())?;
    let dim = lattice.dim() as f64;
    let mut clamped = vec![0.0; lattice.dim()];
    Ok((0..lattice.len())
        .map(|u| {
            for (c, &w) in clamped.iter_mut().zip(lattice.weight(u)) {
                *c = w.clamp(0.0, 1.0);
            }
            t_max * squared_distance(normalized, &clamped) / dim
        })
        .collect())
}

pub fn compute_firing_times(
    e: &EncodedInput,
    lattice: &Lattice,
    cfg: &SsomConfig,
) -> Result<FiringRecord> {
    if (e.t_max - cfg.t_max).abs() > 1e-12 {
        return Err(Error::invalid(
            "encoded input",
            format!("horizon {} does not match t_max {}", e.t_max, cfg.t_max),
        ));
    }
    let latencies = firing_latencies(&e.normalized, lattice, cfg.t_max)?;
    Ok(FiringRecord::from_latencies(&latencies, lattice, cfg.t_ref))
}

pub fn apply_lateral(
    record: &FiringRecord,
    kernel: &LateralKernel,
    lattice: &Lattice,
    cfg: &SsomConfig,
) -> Result<FiringRecord> {
    let winner = record.winner.ok_or(Error::NoWinner)?;
    let t_win = record.winner_time().ok_or(Error::NoWinner)?;
    let r = kernel.excite_radius;
    let times = record
        .times
        .iter()
        .enumerate()
        .map(|(unit, t)| {
            let t = (*t)?;
            if unit == winner.flat {
                return Some(t);
            }
            let d = lattice.grid_distance(unit, winner.flat);
            if d <= r {
                let pull = (kernel.excite_gain * (-(d * d) / (2.0 * r * r)).exp()).clamp(0.0, 1.0);
                let moved = if pull >= 1.0 {
                    t_win
                } else {
                    (t + pull * (t_win - t)).max(t_win)
                };
                Some(moved)
            } else {
                let delayed = (t + kernel.inhibit_gain * (d - r) * cfg.sim_step).min(cfg.t_max);
                (delayed <= cfg.t_ref).then_some(delayed)
            }
        })
        .collect();
    Ok(FiringRecord {
        times,
        winner: Some(winner),
    })
}

/// STDP over the S×T gate. `target(unit, k, w)` is the value the multiplicative law
/// pulls weight `w` toward. Returns false when there was no winner.
pub(crate) fn gated_learn<F>(
    lattice: &mut Lattice,
    record: &FiringRecord,
    spike_times: &[f64],
    cfg: &SsomConfig,
    rule: &StdpRule,
    lr_scale: f64,
    target: F,
) -> Result<bool>
where
    F: Fn(usize, usize, f64) -> f64,
{
    let Some(winner) = record.winner else {
        return Ok(false);
    };
    check_dim(lattice.dim(), spike_times.len())?;
    for unit in 0..lattice.len() {
        let d = lattice.grid_distance(unit, winner.flat);
        if d > cfg.s_radius {
            continue;
        }
        let Some(t_fire) = record.times[unit] else {
            continue;
        };
        if t_fire > cfg.t_ref {
            continue;
        }
        let scale = lr_scale * neighborhood(d, cfg.s_radius)?;
        if scale == 0.0 {
            continue;
        }
        let t_post = cfg.t_max + t_fire;
        for (k, &t_pre) in spike_times.iter().enumerate() {
            let w = lattice.weight(unit)[k];
            let x = target(unit, k, w);
            lattice.weight_mut(unit)[k] = rule.apply(w, x, t_pre - t_post, scale)?;
        }
    }
    Ok(true)
}

/// Adapts the afferent weights of every unit inside the S×T gate toward the
/// normalized input. Returns false (and changes nothing) without a winner.
pub fn ssom_learn(
    e: &EncodedInput,
    lattice: &mut Lattice,
    record: &FiringRecord,
    cfg: &SsomConfig,
    rule: &StdpRule,
    lr_scale: f64,
) -> Result<bool> {
    check_dim(lattice.dim(), e.dim())?;
    gated_learn(
        lattice,
        record,
        &e.spike_times,
        cfg,
        rule,
        lr_scale,
        |_, k, _| e.normalized[k],
    )
}

/// Everything a spiking trainer needs besides data, lattice and schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpikingParams {
    pub cfg: SsomConfig,
    /// `None` disables lateral interaction.
    pub lateral: Option<LateralGains>,
    pub rule: StdpRule,
}

impl SpikingParams {
    pub fn default_for(lattice: &Lattice) -> Self {
        Self::for_grid(lattice.rows(), lattice.cols())
    }

    pub fn for_grid(rows: usize, cols: usize) -> Self {
        Self {
            cfg: SsomConfig::for_grid(rows, cols),
            lateral: Some(LateralGains::default()),
            rule: StdpRule::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.cfg.validate()?;
        self.rule.validate()?;
        if let Some(g) = self.lateral {
            if !(g.excite_gain > 0.0 && g.inhibit_gain > 0.0) {
                return Err(Error::invalid("lateral", "gains must be positive"));
            }
        }
        Ok(())
    }
}

/// Per-epoch quantities handed to a variant's presentation step.
#[derive(Debug, Clone, Copy)]
pub(crate) struct EpochState {
    pub lr: f64,
    pub cfg: SsomConfig,
    pub lateral: Option<LateralKernel>,
}

/// One frame's winner selection, lateral interaction and learning given the
/// raw latencies. Returns false when no unit fired.
pub(crate) fn present_frame<F>(
    lattice: &mut Lattice,
    latencies: &[f64],
    encoded: &EncodedInput,
    epoch: &EpochState,
    rule: &StdpRule,
    target: F,
) -> Result<bool>
where
    F: Fn(usize, usize, f64) -> f64,
{
    let mut record = FiringRecord::from_latencies(latencies, lattice, epoch.cfg.t_ref);
    if record.winner.is_none() {
        return Ok(false);
    }
    if let Some(kernel) = &epoch.lateral {
        record = apply_lateral(&record, kernel, lattice, &epoch.cfg)?;
    }
    gated_learn(
        lattice,
        &record,
        &encoded.spike_times,
        &epoch.cfg,
        rule,
        epoch.lr,
        target,
    )
}

/// Shared epoch loop of the spiking trainers. `present` handles one whole
/// sequence and returns how many of its frames had no winner.
pub(crate) fn run_spiking_epochs<P>(
    data: &[SequenceSample],
    lattice: &mut Lattice,
    ranges: &FeatureRanges,
    schedule: &Schedule,
    params: &SpikingParams,
    seed: u64,
    mut present: P,
) -> Result<TrainingLog>
where
    P: FnMut(&mut Lattice, &[EncodedInput], &EpochState) -> Result<usize>,
{
    if data.is_empty() {
        return Err(Error::Empty("training data"));
    }
    schedule.validate()?;
    params.validate()?;
    check_dim(lattice.dim(), ranges.dim())?;
    let encoded: Vec<Vec<EncodedInput>> = data
        .iter()
        .map(|s| {
            s.frames
                .iter()
                .map(|f| encode_with(f, ranges, params.cfg.t_max))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let raw_frames: Vec<Vec<f64>> = data.iter().flat_map(|s| s.frames.iter().cloned()).collect();
    if raw_frames.is_empty() {
        return Err(Error::Empty("training frames"));
    }

    let mut rng = order_rng(seed);
    let mut log = TrainingLog::default();
    for epoch in 0..schedule.epochs {
        let (lr, radius) = linear_decay(epoch, schedule)?;
        let s_radius = decay_value(params.cfg.s_radius, schedule.radius_end, epoch, schedule);
        let state = EpochState {
            lr,
            cfg: SsomConfig {
                s_radius,
                ..params.cfg
            },
            lateral: params.lateral.map(|g| LateralKernel {
                excite_radius: radius,
                excite_gain: g.excite_gain,
                inhibit_gain: g.inhibit_gain,
            }),
        };
        let mut skipped = 0;
        for i in shuffled(&mut rng, data.len()) {
            skipped += present(lattice, &encoded[i], &state)?;
        }
        if !lattice.all_finite() {
            return Err(Error::Diverged { epoch });
        }
        let decoded = decode_lattice(lattice, ranges)?;
        log.epochs.push(EpochLog {
            epoch,
            lr,
            radius,
            qe: quantization_error(&raw_frames, &decoded)?,
            skipped,
        });
    }
    Ok(log)
}

/// Maps normalized weights back to feature space.
pub fn decode_lattice(lattice: &Lattice, ranges: &FeatureRanges) -> Result<Lattice> {
    check_dim(lattice.dim(), ranges.dim())?;
    let weights = (0..lattice.len())
        .flat_map(|u| ranges.denormalize(lattice.weight(u)))
        .collect();
    Lattice::from_weights(
        lattice.rows(),
        lattice.cols(),
        lattice.dim(),
        lattice.seed(),
        weights,
    )
}

/// Trains a spiking SOM; frames are presented one at a time in sequence
/// order with no state carried between them.
pub fn train_ssom(
    data: &[SequenceSample],
    lattice: &mut Lattice,
    ranges: &FeatureRanges,
    schedule: &Schedule,
    params: &SpikingParams,
    seed: u64,
) -> Result<TrainingLog> {
    let rule = params.rule;
    run_spiking_epochs(
        data,
        lattice,
        ranges,
        schedule,
        params,
        seed,
        |lattice, frames, epoch| {
            let mut skipped = 0;
            for e in frames {
                let latencies = firing_latencies(&e.normalized, lattice, epoch.cfg.t_max)?;
                if !present_frame(lattice, &latencies, e, epoch, &rule, |_, k, _| {
                    e.normalized[k]
                })? {
                    skipped += 1;
                }
            }
            Ok(skipped)
        },
    )
}
