//! Latency (time-to-first-spike) coding of feature vectors.
//!
//! Each component is normalized against a corpus-wide range and emitted as a
//! single spike: the larger the value, the earlier the spike.

use crate::error::{check_dim, check_finite, Error, Result};
use crate::som::data_bounds;

/// Per-dimension value ranges used for normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRanges {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl FeatureRanges {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        check_dim(lo.len(), hi.len())?;
        check_finite(&lo, "range lower bounds")?;
        check_finite(&hi, "range upper bounds")?;
        if let Some(k) = (0..lo.len()).find(|&k| lo[k] > hi[k]) {
            return Err(Error::invalid(
                "ranges",
                format!("lo[{k}] = {} exceeds hi[{k}] = {}", lo[k], hi[k]),
            ));
        }
        Ok(Self { lo, hi })
    }

    /// Unit box `[0, 1]^dim`.
    pub fn unit(dim: usize) -> Self {
        Self {
            lo: vec![0.0; dim],
            hi: vec![1.0; dim],
        }
    }

    pub fn from_data(data: &[Vec<f64>]) -> Result<Self> {
        let (lo, hi) = data_bounds(data)?;
        Self::new(lo, hi)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    /// Maps `x` into `[0, 1]^dim`; degenerate dimensions map to 0.5.
    pub fn normalize(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        check_finite(x, "input vector")?;
        Ok(x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(&v, (&lo, &hi))| {
                if hi > lo {
                    ((v - lo) / (hi - lo)).clamp(0.0, 1.0)
                } else {
                    0.5
                }
            })
            .collect())
    }

    /// Inverse of [`FeatureRanges::normalize`] for in-range inputs.
    pub fn denormalize(&self, v: &[f64]) -> Vec<f64> {
        v.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(&v, (&lo, &hi))| lo + v * (hi - lo))
            .collect()
    }
}

/// One presentation: a spike per input neuron.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedInput {
    /// ms, each within `[0, t_max]`
    pub spike_times: Vec<f64>,
    pub t_max: f64,
    pub source: Vec<f64>,
    /// Normalized components the spike times were derived from.
    pub normalized: Vec<f64>,
}

impl EncodedInput {
    pub fn dim(&self) -> usize {
        self.spike_times.len()
    }
}

fn check_horizon(t_max: f64) -> Result<()> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::invalid(
            "t_max",
            format!("must be positive, got {t_max}"),
        ));
    }
    Ok(())
}

/// Linear latency code: `t = t_max * (1 - v)` with `v` the clamped,
/// range-normalized component.
pub fn encode_latency(x: &[f64], lo: &[f64], hi: &[f64], t_max: f64) -> Result<EncodedInput> {
    let ranges = FeatureRanges::new(lo.to_vec(), hi.to_vec())?;
    encode_with(x, &ranges, t_max)
}

pub fn encode_with(x: &[f64], ranges: &FeatureRanges, t_max: f64) -> Result<EncodedInput> {
    check_horizon(t_max)?;
    let normalized = ranges.normalize(x)?;
    let spike_times = normalized.iter().map(|v| t_max * (1.0 - v)).collect();
    Ok(EncodedInput {
        spike_times,
        t_max,
        source: x.to_vec(),
        normalized,
    })
}

/// Recovers the normalized vector from spike times.
pub fn decode_latency(e: &EncodedInput) -> Vec<f64> {
    e.spike_times.iter().map(|t| 1.0 - t / e.t_max).collect()
}

/// Causal exponential postsynaptic trace of a spike at `spike_time`.
pub fn psp_trace(spike_time: f64, t: f64, tau_psp: f64) -> f64 {
    if t < spike_time {
        0.0
    } else {
        (-(t - spike_time) / tau_psp).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encode_examples() {
        let e = encode_latency(&[1.0, 0.0, 0.5], &[0.0; 3], &[1.0; 3], 20.0).unwrap();
        assert_eq!(e.spike_times, vec![0.0, 20.0, 10.0]);
        assert_eq!(e.source, vec![1.0, 0.0, 0.5]);
    }

    #[test]
    fn degenerate_range_encodes_midway() {
        let e = encode_latency(&[3.0, 2.0], &[3.0, 0.0], &[3.0, 4.0], 20.0).unwrap();
        assert_eq!(e.spike_times, vec![10.0, 10.0]);
    }

    #[test]
    fn out_of_range_inputs_are_clamped() {
        let e = encode_latency(&[-5.0, 9.0], &[0.0; 2], &[1.0; 2], 20.0).unwrap();
        assert_eq!(e.spike_times, vec![20.0, 0.0]);
    }

    #[test]
    fn encode_errors() {
        assert!(encode_latency(&[f64::NAN], &[0.0], &[1.0], 20.0).is_err());
        assert!(encode_latency(&[0.5], &[1.0], &[0.0], 20.0).is_err());
        assert!(encode_latency(&[0.5], &[0.0], &[1.0], 0.0).is_err());
    }

    #[test]
    fn decode_examples() {
        let e = EncodedInput {
            spike_times: vec![0.0, 10.0, 20.0],
            t_max: 20.0,
            source: vec![],
            normalized: vec![],
        };
        assert_eq!(decode_latency(&e), vec![1.0, 0.5, 0.0]);
        let silent = EncodedInput {
            spike_times: vec![20.0; 4],
            ..e
        };
        assert_eq!(decode_latency(&silent), vec![0.0; 4]);
    }

    #[test]
    fn psp_examples() {
        assert_eq!(psp_trace(5.0, 4.9, 2.0), 0.0);
        assert_eq!(psp_trace(5.0, 5.0, 2.0), 1.0);
        assert!((psp_trace(5.0, 7.0, 2.0) - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn ranges_round_trip() {
        let r = FeatureRanges::new(vec![-2.0, 10.0], vec![2.0, 30.0]).unwrap();
        let v = r.normalize(&[1.0, 15.0]).unwrap();
        assert_eq!(v, vec![0.75, 0.25]);
        assert_eq!(r.denormalize(&v), vec![1.0, 15.0]);
    }
}
