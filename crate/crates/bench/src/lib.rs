//! Inputs shared by the benchmarks.

use pulsom_core::corpus::{synth_generate, SynthSpec};
use pulsom_core::{AudioBuffer, Lattice, SequenceSample};

/// A deterministic pseudo-random lattice of `side`×`side` units.
pub fn lattice(side: usize, dim: usize) -> Lattice {
    Lattice::random(side, side, 7, &vec![0.0; dim], &vec![1.0; dim]).expect("valid lattice")
}

/// One second of a two-tone signal at 16 kHz.
pub fn tone_second() -> AudioBuffer {
    let samples = (0..16_000)
        .map(|n| {
            let t = n as f64 / 16_000.0;
            0.4 * (2.0 * std::f64::consts::PI * 440.0 * t).sin()
                + 0.2 * (2.0 * std::f64::consts::PI * 2300.0 * t).sin()
        })
        .collect();
    AudioBuffer::new(samples, 16_000).expect("finite samples")
}

pub fn synthetic(per_class: usize) -> Vec<SequenceSample> {
    synth_generate(&SynthSpec {
        samples_per_class: per_class,
        seed: 3,
        ..SynthSpec::default()
    })
    .expect("valid spec")
}
