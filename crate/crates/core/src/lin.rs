//! Leaky-integrator SOM. Each unit accumulates a membrane potential
//! `a_i(t) = lambda a_i(t-1) - 1/2 ||x(t) - w_i(t)||^2`; the most excited
//! (least negative) unit wins.

use crate::codec::FeatureRanges;
use crate::corpus::SequenceSample;
use crate::error::{check_dim, Error, Result};
use crate::som::{argmin, squared_distance, Lattice, Schedule, TrainingLog, UnitIndex};
use crate::ssom::{present_frame, run_spiking_epochs, SpikingParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinParams {
    pub lambda: f64,
    pub scale_input_by_lambda: bool,
}

impl Default for LinParams {
    fn default() -> Self {
        Self {
            lambda: 0.5,
            scale_input_by_lambda: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialState {
    a: Vec<f64>,
    lambda: f64,
    /// Scale the matching input by lambda (`-(lambda/2) ||x - w||^2`).
    scale_input_by_lambda: bool,
    /// Number of frames integrated since the last reset.
    steps: usize,
}

impl PotentialState {
    pub fn new(lattice: &Lattice, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::invalid(
                "lin.lambda",
                format!("must lie in [0, 1], got {lambda}"),
            ));
        }
        Ok(Self {
            a: vec![0.0; lattice.len()],
            lambda,
            scale_input_by_lambda: false,
            steps: 0,
        })
    }

    pub fn with_input_scaling(mut self, on: bool) -> Self {
        self.scale_input_by_lambda = on;
        self
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn potentials(&self) -> &[f64] {
        &self.a
    }

    fn input_gain(&self) -> f64 {
        if self.scale_input_by_lambda {
            0.5 * self.lambda
        } else {
            0.5
        }
    }

    /// Largest possible |a_i| after the integrated frames when every
    /// squared mismatch is at most `max_sq`.
    fn bound(&self, max_sq: f64) -> f64 {
        let mut geometric = 0.0;
        let mut p = 1.0;
        for _ in 0..self.steps {
            geometric += p;
            p *= self.lambda;
        }
        self.input_gain() * max_sq * geometric
    }
}

pub fn update_potential(x: &[f64], lattice: &Lattice, state: &mut PotentialState) -> Result<()> {
    check_dim(lattice.dim(), x.len())?;
    check_dim(lattice.len(), state.a.len())?;
    let gain = state.input_gain();
    for (unit, a) in state.a.iter_mut().enumerate() {
        *a = state.lambda * *a - gain * squared_distance(x, lattice.weight(unit));
    }
    state.steps += 1;
    Ok(())
}

/// Unit with the largest potential; ties go to the lowest index.
pub fn lin_bmu(state: &PotentialState, lattice: &Lattice) -> UnitIndex {
    let flat = argmin(state.a.iter().map(|a| -a)).expect("lattice has at least one unit");
    lattice.unit(flat)
}

pub fn reset_potentials(state: &mut PotentialState) {
    state.a.fill(0.0);
    state.steps = 0;
}

/// Latency `t_max * (-a_i) / bound`, where the bound is the most negative
/// potential reachable with normalized inputs after the frames seen so far.
pub fn potential_latencies(state: &PotentialState, lattice: &Lattice, t_max: f64) -> Vec<f64> {
    let bound = state.bound(lattice.dim() as f64);
    state
        .a
        .iter()
        .map(|a| {
            if bound > 0.0 {
                (t_max * -a / bound).min(t_max)
            } else {
                0.0
            }
        })
        .collect()
}

fn check_potentials(state: &PotentialState, max_sq: f64) -> Result<()> {
    let bound = if state.lambda < 1.0 {
        state.input_gain() * max_sq / (1.0 - state.lambda)
    } else {
        f64::INFINITY
    };
    for &a in &state.a {
        if !a.is_finite() || a > 0.0 || -a > bound * (1.0 + 1e-12) {
            return Err(Error::InvariantViolated(format!(
                "leaky potential {a} outside [-{bound}, 0]"
            )));
        }
    }
    Ok(())
}

/// Trains a leaky-integrator SOM. Potentials are reset at the start of each
/// sequence; per frame the winner is the most excited unit (gated by its
/// latency against the reference time) and STDP pulls weights in the S×T
/// gate toward the current frame.
pub fn train_lin(
    data: &[SequenceSample],
    lattice: &mut Lattice,
    ranges: &FeatureRanges,
    schedule: &Schedule,
    params: &SpikingParams,
    lin: &LinParams,
    seed: u64,
) -> Result<TrainingLog> {
    let mut state =
        PotentialState::new(lattice, lin.lambda)?.with_input_scaling(lin.scale_input_by_lambda);
    let rule = params.rule;
    run_spiking_epochs(
        data,
        lattice,
        ranges,
        schedule,
        params,
        seed,
        |lattice, frames, epoch| {
            reset_potentials(&mut state);
            let mut skipped = 0;
            let mut max_sq: f64 = 0.0;
            for e in frames {
                for u in 0..lattice.len() {
                    max_sq = max_sq.max(squared_distance(&e.normalized, lattice.weight(u)));
                }
                update_potential(&e.normalized, lattice, &mut state)?;
                check_potentials(&state, max_sq)?;
                let latencies = potential_latencies(&state, lattice, epoch.cfg.t_max);
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
