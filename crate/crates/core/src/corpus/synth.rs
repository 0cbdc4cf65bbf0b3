//! Synthetic labeled sequences with Gaussian per-frame clusters.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::SequenceSample;
use crate::error::{Error, Result};
use crate::som::squared_distance;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub n_classes: usize,
    pub samples_per_class: usize,
    pub dim: usize,
    pub frames: usize,
    /// Minimum distance between any two cluster means, in noise standard
    /// deviations.
    pub separation: f64,
    /// Two classes whose frame means are the same list in opposite order.
    pub order_task: bool,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n_classes: 3,
            samples_per_class: 50,
            dim: 12,
            frames: 9,
            separation: 5.0,
            order_task: false,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.separation > 0.0 && self.separation.is_finite()) {
            return Err(Error::invalid(
                "synth.separation",
                format!("must be positive, got {}", self.separation),
            ));
        }
        if self.n_classes == 0 || self.samples_per_class == 0 || self.dim == 0 || self.frames == 0 {
            return Err(Error::invalid(
                "synth",
                "classes, samples per class, dim and frames must all be positive",
            ));
        }
        if self.order_task && self.n_classes != 2 {
            return Err(Error::invalid(
                "synth.classes",
                format!(
                    "the order task has exactly 2 classes, got {}",
                    self.n_classes
                ),
            ));
        }
        Ok(())
    }
}

pub fn class_label(c: usize) -> String {
    format!("c{c}")
}

const MAX_DRAWS: usize = 100_000;

/// Draws `n` points uniformly in `[-s, s]^dim`, rejecting any closer than
/// `s` to an earlier one.
fn separated_means(rng: &mut ChaCha8Rng, n: usize, dim: usize, s: f64) -> Result<Vec<Vec<f64>>> {
    let mut means: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut draws = 0;
    while means.len() < n {
        draws += 1;
        if draws > MAX_DRAWS {
            return Err(Error::invalid(
                "synth",
                format!("could not place {n} means {s} apart in {dim} dimensions"),
            ));
        }
        let m: Vec<f64> = (0..dim).map(|_| rng.random_range(-s..=s)).collect();
        if means.iter().all(|o| squared_distance(o, &m) >= s * s) {
            means.push(m);
        }
    }
    Ok(means)
}

/// Frame means per class (`[class][frame]`).
pub fn class_means(spec: &SynthSpec) -> Result<Vec<Vec<Vec<f64>>>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let per_class = if spec.order_task { 1 } else { spec.n_classes };
    let flat = separated_means(&mut rng, per_class * spec.frames, spec.dim, spec.separation)?;
    let mut means: Vec<Vec<Vec<f64>>> = flat.chunks(spec.frames).map(<[_]>::to_vec).collect();
    if spec.order_task {
        let reversed = means[0].iter().rev().cloned().collect();
        means.push(reversed);
    }
    Ok(means)
}

/// Samples are class-major; each frame is its class mean plus unit-variance
/// Gaussian noise.
pub fn synth_generate(spec: &SynthSpec) -> Result<Vec<SequenceSample>> {
    let means = class_means(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(1);
    let mut out = Vec::with_capacity(means.len() * spec.samples_per_class);
    for (c, frame_means) in means.iter().enumerate() {
        let label = class_label(c);
        for i in 0..spec.samples_per_class {
            let frames = frame_means
                .iter()
                .map(|m| {
                    m.iter()
                        .map(|&mu| mu + rng.sample::<f64, _>(StandardNormal))
                        .collect()
                })
                .collect();
            out.push(SequenceSample {
                utt_id: format!("{label}_{i:04}"),
                label: label.clone(),
                macro_class: None,
                frames,
                padded: false,
            });
        }
    }
    Ok(out)
}
