//! Recurrent spiking SOM: each unit keeps a leaky difference vector
//! `y_i(t) = (1 - alpha) y_i(t-1) + alpha (x(t) - m_i(t))` that carries
//! memory across the frames of a sequence.

use crate::codec::FeatureRanges;
use crate::corpus::SequenceSample;
use crate::error::{check_dim, Error, Result};
use crate::som::{argmin, check_rate, neighborhood, Lattice, Schedule, TrainingLog, UnitIndex};
use crate::ssom::{present_frame, run_spiking_epochs, SpikingParams};

#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceState {
    y: Vec<f64>,
    dim: usize,
    alpha: f64,
}

impl DifferenceState {
    pub fn new(lattice: &Lattice, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::invalid(
                "rssom.alpha",
                format!("must lie in (0, 1], got {alpha}"),
            ));
        }
        Ok(Self {
            y: vec![0.0; lattice.len() * lattice.dim()],
            dim: lattice.dim(),
            alpha,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn y(&self, unit: usize) -> &[f64] {
        &self.y[unit * self.dim..(unit + 1) * self.dim]
    }

    pub fn squared_norm(&self, unit: usize) -> f64 {
        self.y(unit).iter().map(|v| v * v).sum()
    }
}

pub fn update_difference(x: &[f64], lattice: &Lattice, state: &mut DifferenceState) -> Result<()> {
    check_dim(lattice.dim(), x.len())?;
    check_dim(lattice.len() * lattice.dim(), state.y.len())?;
    let a = state.alpha;
    for unit in 0..lattice.len() {
        let m = lattice.weight(unit);
        let y = &mut state.y[unit * state.dim..(unit + 1) * state.dim];
        for k in 0..x.len() {
            y[k] = (1.0 - a) * y[k] + a * (x[k] - m[k]);
        }
    }
    Ok(())
}

/// Unit with the shortest difference vector; ties go to the lowest index.
pub fn rsom_bmu(state: &DifferenceState, lattice: &Lattice) -> UnitIndex {
    let flat = argmin((0..lattice.len()).map(|u| state.squared_norm(u)))
        .expect("lattice has at least one unit");
    lattice.unit(flat)
}

/// Classic recurrent-SOM step `m_i += lr * h(d(i, bmu)) * y_i`.
pub fn rsom_update(
    lattice: &mut Lattice,
    state: &DifferenceState,
    bmu: UnitIndex,
    lr: f64,
    radius: f64,
) -> Result<()> {
    check_dim(lattice.len() * lattice.dim(), state.y.len())?;
    check_rate(lr)?;
    neighborhood(0.0, radius)?;
    if lr == 0.0 {
        return Ok(());
    }
    for unit in 0..lattice.len() {
        let h = neighborhood(lattice.grid_distance(unit, bmu.flat), radius)?;
        if h == 0.0 {
            continue;
        }
        let step = lr * h;
        let y = state.y(unit).to_vec();
        for (w, dy) in lattice.weight_mut(unit).iter_mut().zip(y) {
            *w += step * dy;
        }
    }
    Ok(())
}

pub fn reset_state(state: &mut DifferenceState) {
    state.y.fill(0.0);
}

/// Latency of each unit from its difference vector, on the same
/// `t_max * ||.||^2 / dim` scale as the spiking SOM (inputs are normalized,
/// so the per-dimension range is 1).
pub fn difference_latencies(state: &DifferenceState, lattice: &Lattice, t_max: f64) -> Vec<f64> {
    let dim = lattice.dim() as f64;
    (0..lattice.len())
        .map(|u| t_max * state.squared_norm(u) / dim)
        .collect()
}

/// Trains a recurrent spiking SOM. The difference state is reset at the
/// start of every sequence; each frame's winner is the earliest unit by
/// difference-vector latency, and the STDP step for a synapse pulls its
/// weight along `y_i` (the multiplicative law's target is `m_ik + y_ik`).
pub fn train_rssom(
    data: &[SequenceSample],
    lattice: &mut Lattice,
    ranges: &FeatureRanges,
    schedule: &Schedule,
    params: &SpikingParams,
    alpha: f64,
    seed: u64,
) -> Result<TrainingLog> {
    let mut state = DifferenceState::new(lattice, alpha)?;
    let rule = params.rule;
    run_spiking_epochs(
        data,
        lattice,
        ranges,
        schedule,
        params,
        seed,
        |lattice, frames, epoch| {
            reset_state(&mut state);
            let mut skipped = 0;
            for e in frames {
                update_difference(&e.normalized, lattice, &mut state)?;
                let latencies = difference_latencies(&state, lattice, epoch.cfg.t_max);
                let learned = present_frame(lattice, &latencies, e, epoch, &rule, |unit, k, w| {
                    (w + state.y(unit)[k]).clamp(0.0, 1.0)
                })?;
                if !learned {
                    skipped += 1;
                }
            }
            Ok(skipped)
        },
    )
}
