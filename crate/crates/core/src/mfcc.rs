//! Speech front-end: pre-emphasis, 50%-overlap Hamming frames, power
//! spectrum, triangular mel filterbank, log10 and a DCT down to 12 cepstral
//! coefficients per frame.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{check_finite, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::invalid("sample_rate", "must be positive"));
        }
        check_finite(&samples, "audio samples")?;
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Floor applied before the logarithm of filterbank energies.
pub const LOG_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MfccConfig {
    pub preemph_a: f64,
    pub frame_len: usize,
    pub hop: usize,
    pub n_filters: usize,
    pub n_coeffs: usize,
    pub fft_size: usize,
    /// Feed squared magnitudes (true) or magnitudes (false) to the filterbank.
    pub use_power: bool,
}

impl Default for MfccConfig {
    fn default() -> Self {
        Self {
            preemph_a: 0.95,
            frame_len: 256,
            hop: 128,
            n_filters: 26,
            n_coeffs: 12,
            fft_size: 256,
            use_power: true,
        }
    }
}

impl MfccConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.9..=1.0).contains(&self.preemph_a) {
            return Err(Error::invalid(
                "mfcc.preemph_a",
                format!("must lie in [0.9, 1.0], got {}", self.preemph_a),
            ));
        }
        if self.frame_len < 2 || self.hop * 2 != self.frame_len {
            return Err(Error::invalid(
                "mfcc.hop",
                format!(
                    "frames overlap by half: hop must be frame_len / 2 (frame_len {}, hop {})",
                    self.frame_len, self.hop
                ),
            ));
        }
        if self.n_coeffs == 0 || self.n_coeffs > self.n_filters {
            return Err(Error::invalid(
                "mfcc.n_coeffs",
                format!("need 1 <= n_coeffs <= n_filters ({})", self.n_filters),
            ));
        }
        if self.fft_size < self.frame_len {
            return Err(Error::invalid("mfcc.fft_size", "must be >= frame_len"));
        }
        Ok(())
    }
}

/// `y[0] = s[0]`, `y[n] = s[n] - a s[n-1]`.
pub fn preemphasis(buf: &AudioBuffer, a: f64) -> Result<AudioBuffer> {
    if buf.is_empty() {
        return Err(Error::Empty("audio buffer"));
    }
    if !(0.9..=1.0).contains(&a) {
        return Err(Error::invalid(
            "preemph_a",
            format!("must lie in [0.9, 1.0], got {a}"),
        ));
    }
    let s = &buf.samples;
    let mut out = Vec::with_capacity(s.len());
    out.push(s[0]);
    out.extend(s.windows(2).map(|w| w[1] - a * w[0]));
    Ok(AudioBuffer {
        samples: out,
        sample_rate: buf.sample_rate,
    })
}

pub fn frame_count(len: usize, frame_len: usize, hop: usize) -> usize {
    if len < frame_len || hop == 0 {
        0
    } else {
        (len - frame_len) / hop + 1
    }
}

/// Frames starting at 0, hop, 2·hop, …; a trailing partial frame is dropped.
pub fn frame_signal(buf: &AudioBuffer, frame_len: usize, hop: usize) -> Result<Vec<Vec<f64>>> {
    if frame_len == 0 || hop == 0 {
        return Err(Error::invalid(
            "frame",
            "frame_len and hop must be positive",
        ));
    }
    if buf.len() < frame_len {
        return Err(Error::invalid(
            "frame_len",
            format!(
                "buffer of {} samples is shorter than one frame ({frame_len})",
                buf.len()
            ),
        ));
    }
    let n = frame_count(buf.len(), frame_len, hop);
    Ok((0..n)
        .map(|i| buf.samples[i * hop..i * hop + frame_len].to_vec())
        .collect())
}

/// `0.54 - 0.46 cos(2 pi n / (N - 1))`.
pub fn hamming_window(n: usize, len: usize) -> Result<f64> {
    if len < 2 || n >= len {
        return Err(Error::invalid(
            "hamming",
            format!("need 0 <= n < N and N > 1, got n={n}, N={len}"),
        ));
    }
    Ok(0.54 - 0.46 * (2.0 * PI * n as f64 / (len - 1) as f64).cos())
}

/// Squared DFT magnitudes for bins `0..=fft_size/2`; the frame is
/// zero-padded to `fft_size`.
pub fn power_spectrum(frame: &[f64], fft_size: usize) -> Result<Vec<f64>> {
    if frame.len() > fft_size {
        return Err(Error::invalid(
            "fft_size",
            format!(
                "frame of {} samples exceeds fft_size {fft_size}",
                frame.len()
            ),
        ));
    }
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(fft_size);
    let mut buf: Vec<Complex<f64>> = frame
        .iter()
        .map(|&x| Complex::new(x, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(fft_size)
        .collect();
    fft.process(&mut buf);
    Ok(buf[..fft_size / 2 + 1]
        .iter()
        .map(|c| c.norm_sqr())
        .collect())
}

pub fn mel_scale(hz: f64) -> Result<f64> {
    if !(hz >= 0.0) {
        return Err(Error::invalid(
            "frequency",
            format!("must be >= 0, got {hz}"),
        ));
    }
    Ok(2595.0 * (1.0 + hz / 700.0).log10())
}

pub fn mel_inverse(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular filters with centers equally spaced on the mel axis between
/// 0 Hz and Nyquist; each row has `fft_size/2 + 1` weights.
#[derive(Debug, Clone, PartialEq)]
pub struct MelFilterbank {
    filters: Vec<Vec<f64>>,
}

impl MelFilterbank {
    pub fn new(n_filters: usize, fft_size: usize, sample_rate: u32) -> Result<Self> {
        if n_filters == 0 {
            return Err(Error::invalid("mfcc.n_filters", "must be positive"));
        }
        let n_bins = fft_size / 2 + 1;
        let mel_max = mel_scale(sample_rate as f64 / 2.0)?;
        let edges: Vec<usize> = (0..n_filters + 2)
            .map(|i| {
                let hz = mel_inverse(mel_max * i as f64 / (n_filters + 1) as f64);
                (((fft_size + 1) as f64 * hz / sample_rate as f64).floor() as usize).min(n_bins - 1)
            })
            .collect();
        if let Some(i) = edges.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::invalid(
                "mfcc.n_filters",
                format!(
                    "{n_filters} filters are too many for fft_size {fft_size}: \
                     edges {i} and {} share FFT bin {}",
                    i + 1,
                    edges[i]
                ),
            ));
        }
        let filters = edges
            .windows(3)
            .map(|e| {
                let (lo, center, hi) = (e[0], e[1], e[2]);
                (0..n_bins)
                    .map(|b| {
                        if b >= lo && b < center {
                            (b - lo) as f64 / (center - lo) as f64
                        } else if b >= center && b <= hi {
                            (hi - b) as f64 / (hi - center) as f64
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(Self { filters })
    }

    pub fn filters(&self) -> &[Vec<f64>] {
        &self.filters
    }

    /// `log10(max(filter · spectrum, LOG_FLOOR))` per filter.
    pub fn apply(&self, spectrum: &[f64]) -> Result<Vec<f64>> {
        let n_bins = self.filters[0].len();
        if spectrum.len() != n_bins {
            return Err(Error::DimensionMismatch {
                expected: n_bins,
                actual: spectrum.len(),
            });
        }
        Ok(self
            .filters
            .iter()
            .map(|f| {
                let e: f64 = f.iter().zip(spectrum).map(|(w, s)| w * s).sum();
                e.max(LOG_FLOOR).log10()
            })
            .collect())
    }
}

pub fn mel_filterbank(spectrum: &[f64], cfg: &MfccConfig, sample_rate: u32) -> Result<Vec<f64>> {
    MelFilterbank::new(cfg.n_filters, cfg.fft_size, sample_rate)?.apply(spectrum)
}

/// Orthonormal type-II DCT basis, rows `1..=n_coeffs` (the mean term is
/// dropped).
#[derive(Debug, Clone, PartialEq)]
pub struct DctBasis {
    rows: Vec<Vec<f64>>,
}

impl DctBasis {
    pub fn new(n_inputs: usize, n_coeffs: usize) -> Result<Self> {
        if n_coeffs >= n_inputs {
            return Err(Error::invalid(
                "mfcc.n_coeffs",
                format!("{n_coeffs} coefficients after c0 need more than {n_coeffs} filters, got {n_inputs}"),
            ));
        }
        let n = n_inputs as f64;
        let scale = (2.0 / n).sqrt();
        let rows = (1..=n_coeffs)
            .map(|k| {
                (0..n_inputs)
                    .map(|i| scale * (PI * k as f64 * (2 * i + 1) as f64 / (2.0 * n)).cos())
                    .collect()
            })
            .collect();
        Ok(Self { rows })
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
}

pub fn dct_coeffs(log_energies: &[f64], n_coeffs: usize) -> Result<Vec<f64>> {
    Ok(DctBasis::new(log_energies.len(), n_coeffs)?.apply(log_energies))
}

/// Reusable per-frame pipeline with precomputed window, filterbank and DCT.
pub struct MfccExtractor {
    cfg: MfccConfig,
    window: Vec<f64>,
    filterbank: MelFilterbank,
    dct: DctBasis,
    fft: std::sync::Arc<dyn rustfft::Fft<f64>>,
}

impl MfccExtractor {
    pub fn new(cfg: MfccConfig, sample_rate: u32) -> Result<Self> {
        cfg.validate()?;
        let window = (0..cfg.frame_len)
            .map(|n| hamming_window(n, cfg.frame_len))
            .collect::<Result<_>>()?;
        let filterbank = MelFilterbank::new(cfg.n_filters, cfg.fft_size, sample_rate)?;
        let dct = DctBasis::new(cfg.n_filters, cfg.n_coeffs)?;
        let fft = FftPlanner::<f64>::new().plan_fft_forward(cfg.fft_size);
        Ok(Self {
            cfg,
            window,
            filterbank,
            dct,
            fft,
        })
    }

    pub fn config(&self) -> &MfccConfig {
        &self.cfg
    }

    /// Coefficients of one (pre-emphasized, unwindowed) frame.
    pub fn frame_coeffs(&self, frame: &[f64]) -> Result<Vec<f64>> {
        if frame.len() != self.cfg.frame_len {
            return Err(Error::DimensionMismatch {
                expected: self.cfg.frame_len,
                actual: frame.len(),
            });
        }
        let mut buf: Vec<Complex<f64>> = frame
            .iter()
            .zip(&self.window)
            .map(|(s, w)| Complex::new(s * w, 0.0))
            .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
            .take(self.cfg.fft_size)
            .collect();
        self.fft.process(&mut buf);
        let spectrum: Vec<f64> = buf[..self.cfg.fft_size / 2 + 1]
            .iter()
            .map(|c| {
                if self.cfg.use_power {
                    c.norm_sqr()
                } else {
                    c.norm()
                }
            })
            .collect();
        Ok(self.dct.apply(&self.filterbank.apply(&spectrum)?))
    }

    pub fn extract(&self, buf: &AudioBuffer) -> Result<Vec<Vec<f64>>> {
        let emphasized = preemphasis(buf, self.cfg.preemph_a)?;
        frame_signal(&emphasized, self.cfg.frame_len, self.cfg.hop)?
            .iter()
            .map(|f| self.frame_coeffs(f))
            .collect()
    }
}

/// One coefficient vector per frame.
pub fn mfcc_pipeline(buf: &AudioBuffer, cfg: &MfccConfig) -> Result<Vec<Vec<f64>>> {
    MfccExtractor::new(*cfg, buf.sample_rate)?.extract(buf)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn buffer(samples: Vec<f64>) -> AudioBuffer {
        AudioBuffer::new(samples, 16000).unwrap()
    }

    #[test]
    fn preemphasis_examples() {
        let y = preemphasis(&buffer(vec![1.0, 0.0, 0.0]), 0.95).unwrap();
        assert_eq!(y.samples, vec![1.0, -0.95, 0.0]);
        let y = preemphasis(&buffer(vec![2.0; 5]), 0.95).unwrap();
        assert_eq!(y.samples[0], 2.0);
        for v in &y.samples[1..] {
            assert!((v - 0.05 * 2.0).abs() < 1e-12);
        }
        let ramp: Vec<f64> = (0..6).map(f64::from).collect();
        let y = preemphasis(&buffer(ramp), 1.0).unwrap();
        assert!(y.samples[1..].iter().all(|&v| v == 1.0));
        assert!(preemphasis(&buffer(vec![]), 0.95).is_err());
        assert!(preemphasis(&buffer(vec![1.0]), 0.5).is_err());
    }

    #[test]
    fn framing_examples() {
        assert_eq!(
            frame_signal(&buffer(vec![0.0; 1024]), 256, 128)
                .unwrap()
                .len(),
            7
        );
        assert_eq!(
            frame_signal(&buffer(vec![0.0; 256]), 256, 128)
                .unwrap()
                .len(),
            1
        );
        assert!(frame_signal(&buffer(vec![0.0; 255]), 256, 128).is_err());
        let ramp: Vec<f64> = (0..600).map(f64::from).collect();
        let frames = frame_signal(&buffer(ramp), 256, 128).unwrap();
        assert_eq!(frames.len(), 3);
        assert_eq!(frames[2][0], 256.0);
    }

    #[test]
    fn hamming_examples() {
        assert!((hamming_window(0, 256).unwrap() - 0.08).abs() < 1e-12);
        assert!((hamming_window(255, 256).unwrap() - 0.08).abs() < 1e-12);
        assert!((hamming_window(5, 11).unwrap() - 1.0).abs() < 1e-12);
        for n in 0..256 {
            let a = hamming_window(n, 256).unwrap();
            let b = hamming_window(255 - n, 256).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
        assert!(hamming_window(256, 256).is_err());
        assert!(hamming_window(0, 1).is_err());
    }

    #[test]
    fn zero_frame_has_zero_spectrum() {
        let s = power_spectrum(&[0.0; 256], 256).unwrap();
        assert_eq!(s.len(), 129);
        assert!(s.iter().all(|&v| v == 0.0));
        assert!(power_spectrum(&[0.0; 300], 256).is_err());
    }

    #[test]
    fn mel_examples() {
        assert_eq!(mel_scale(0.0).unwrap(), 0.0);
        let m = mel_scale(700.0).unwrap();
        assert!((m - 2595.0 * 2f64.log10()).abs() < 1e-12);
        assert!((m - 781.17).abs() < 0.01);
        assert!(mel_scale(-1.0).is_err());
        assert!((mel_inverse(m) - 700.0).abs() < 1e-9);
    }

    #[test]
    fn filterbank_construction() {
        let fb = MelFilterbank::new(26, 256, 16000).unwrap();
        assert_eq!(fb.filters().len(), 26);
        for f in fb.filters() {
            assert_eq!(f.len(), 129);
            assert!(f.iter().sum::<f64>() > 0.0);
            assert_eq!(f.iter().cloned().fold(f64::MIN, f64::max), 1.0);
        }
        let silent = fb.apply(&[0.0; 129]).unwrap();
        assert!(silent.iter().all(|&v| v == -10.0));
        assert!(MelFilterbank::new(120, 256, 16000).is_err());
    }

    #[test]
    fn dct_of_constant_vanishes() {
        let c = dct_coeffs(&[-10.0; 26], 12).unwrap();
        assert_eq!(c.len(), 12);
        assert!(c.iter().all(|v| v.abs() < 1e-9));
        assert!(dct_coeffs(&[0.0; 12], 12).is_err());
    }

    #[test]
    fn silence_gives_zero_cepstrum() {
        let out = mfcc_pipeline(&buffer(vec![0.0; 2048]), &MfccConfig::default()).unwrap();
        assert_eq!(out.len(), 15);
        for frame in out {
            assert_eq!(frame.len(), 12);
            assert!(frame.iter().all(|v| v.abs() < 1e-9));
        }
    }

    #[test]
    fn config_validation() {
        let mut c = MfccConfig::default();
        assert!(c.validate().is_ok());
        c.hop = 100;
        assert!(c.validate().is_err());
        let c = MfccConfig {
            n_coeffs: 30,
            ..MfccConfig::default()
        };
        assert!(c.validate().is_err());
        let c = MfccConfig {
            preemph_a: 0.5,
            ..MfccConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
