//! Corpus ingestion: TIMIT-layout directories of SPHERE audio with
//! `.phn`/`.wrd` alignments, segment-to-sequence extraction, macro-classes,
//! synthetic data and the CSV dataset cache.

mod alignment;
mod classes;
mod dataset;
mod sphere;
mod synth;

use std::fs;
use std::path::{Path, PathBuf};

pub use alignment::{parse_alignment, read_alignment, AlignmentKind, Segment};
pub use classes::{macro_class, macro_class_names, MACRO_CLASSES};
pub use dataset::{read_dataset, write_dataset, write_frame_rows, write_frames_header};
pub use sphere::{
    decode_sphere, encode_sphere, parse_header, read_sphere, write_sphere, SphereHeader,
};
pub use synth::{class_label, class_means, synth_generate, SynthSpec};

use crate::error::{Error, Result};
use crate::mfcc::{MfccConfig, MfccExtractor};

/// A labeled sequence of feature frames.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSample {
    pub utt_id: String,
    pub label: String,
    pub macro_class: Option<String>,
    pub frames: Vec<Vec<f64>>,
    /// Edge frames were replicated because the segment was too short.
    pub padded: bool,
}

impl SequenceSample {
    pub fn dim(&self) -> usize {
        self.frames.first().map_or(0, Vec::len)
    }

    /// All frames joined into one vector.
    pub fn concatenated(&self) -> Vec<f64> {
        self.frames.concat()
    }
}

/// Default number of frames taken from the middle of each segment.
pub const MIDDLE_FRAMES: usize = 9;

/// Inclusive range of frame indices overlapping the segment's samples, where
/// frame `i` covers `[i*hop, i*hop + frame_len)`.
pub fn frame_span(
    seg: &Segment,
    n_frames: usize,
    hop: usize,
    frame_len: usize,
) -> Result<(usize, usize)> {
    if hop == 0 || frame_len == 0 {
        return Err(Error::invalid(
            "frame",
            "hop and frame_len must be positive",
        ));
    }
    let first = if seg.start_sample >= frame_len {
        (seg.start_sample - frame_len) / hop + 1
    } else {
        0
    };
    let last = ((seg.end_sample.max(1) - 1) / hop).min(n_frames.saturating_sub(1));
    if n_frames == 0 || first > last {
        return Err(Error::invalid(
            "segment",
            format!(
                "`{}` [{}, {}) overlaps no frame",
                seg.label, seg.start_sample, seg.end_sample
            ),
        ));
    }
    Ok((first, last))
}

/// The `k` frames centered on the segment's middle frame; short segments
/// replicate their edge frames outward.
pub fn middle_frames(
    seg: &Segment,
    mfcc: &[Vec<f64>],
    hop: usize,
    frame_len: usize,
    k: usize,
) -> Result<SequenceSample> {
    if k == 0 {
        return Err(Error::invalid("k", "must be at least 1"));
    }
    let (first, last) = frame_span(seg, mfcc.len(), hop, frame_len)?;
    let count = last - first + 1;
    let start = (first + count / 2) as isize - (k / 2) as isize;
    let frames = (0..k as isize)
        .map(|j| {
            let i = (start + j).clamp(first as isize, last as isize) as usize;
            mfcc[i].clone()
        })
        .collect();
    Ok(SequenceSample {
        utt_id: seg.utt_id.clone(),
        label: seg.label.clone(),
        macro_class: None,
        frames,
        padded: count < k,
    })
}

/// One utterance of a corpus tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Utterance {
    /// Path relative to the corpus root, without extension, `/`-separated.
    pub id: String,
    pub audio: PathBuf,
    pub alignment: PathBuf,
}

fn has_extension(path: &Path, ext: &str) -> bool {
    path.extension()
        .is_some_and(|e| e.to_string_lossy().eq_ignore_ascii_case(ext))
}

fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    entries.sort();
    for path in entries {
        if path.is_dir() {
            walk(&path, out)?;
        } else if has_extension(&path, "wav") {
            out.push(path);
        }
    }
    Ok(())
}

/// Finds every `.wav` under `root` with a sibling alignment file of the
/// given kind, in path order. A non-empty `filter` keeps utterances whose id
/// starts with one of its prefixes (case-insensitive), e.g. `train/dr1`.
pub fn discover_utterances(
    root: &Path,
    kind: AlignmentKind,
    filter: &[String],
) -> Result<Vec<Utterance>> {
    let mut wavs = Vec::new();
    walk(root, &mut wavs)?;
    let filter: Vec<String> = filter.iter().map(|f| f.to_ascii_lowercase()).collect();
    let mut out = Vec::new();
    for audio in wavs {
        let ext = kind.extension();
        let alignment = [
            audio.with_extension(ext),
            audio.with_extension(ext.to_ascii_uppercase()),
        ]
        .into_iter()
        .find(|p| p.is_file());
        let Some(alignment) = alignment else {
            continue;
        };
        let rel = audio
            .strip_prefix(root)
            .unwrap_or(&audio)
            .with_extension("");
        let id = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        let lower = id.to_ascii_lowercase();
        if filter.is_empty() || filter.iter().any(|f| lower.starts_with(f.as_str())) {
            out.push(Utterance {
                id,
                audio,
                alignment,
            });
        }
    }
    Ok(out)
}

/// Per-frame features of one utterance and the sequences cut from it.
#[derive(Debug, Clone, PartialEq)]
pub struct UtteranceFeatures {
    pub frames: Vec<Vec<f64>>,
    pub samples: Vec<SequenceSample>,
}

/// Runs the front-end over an utterance and cuts one sequence per aligned
/// segment. Phone segments carry their macro-class.
pub fn utterance_features(
    utt: &Utterance,
    kind: AlignmentKind,
    cfg: &MfccConfig,
    k: usize,
) -> Result<UtteranceFeatures> {
    let audio = read_sphere(&utt.audio)?;
    let frames = MfccExtractor::new(*cfg, audio.sample_rate)?
        .extract(&audio)
        .map_err(|e| match e {
            Error::InvalidParameter { reason, .. } if audio.len() < cfg.frame_len => {
                Error::Malformed {
                    path: utt.audio.clone(),
                    line: 0,
                    reason,
                }
            }
            other => other,
        })?;
    let segments = read_alignment(&utt.alignment, kind)?;
    let mut samples = Vec::with_capacity(segments.len());
    for (i, seg) in segments.iter().enumerate() {
        let seg = Segment {
            utt_id: utt.id.clone(),
            ..seg.clone()
        };
        let mut sample = middle_frames(&seg, &frames, cfg.hop, cfg.frame_len, k).map_err(|e| {
            Error::Malformed {
                path: utt.alignment.clone(),
                line: i + 1,
                reason: e.to_string(),
            }
        })?;
        if kind == AlignmentKind::Phn {
            let class = macro_class(&seg.label).map_err(|e| Error::Malformed {
                path: utt.alignment.clone(),
                line: i + 1,
                reason: e.to_string(),
            })?;
            sample.macro_class = Some(class.to_string());
        }
        samples.push(sample);
    }
    Ok(UtteranceFeatures { frames, samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn numbered(n: usize) -> Vec<Vec<f64>> {
        (0..n).map(|i| vec![i as f64]).collect()
    }

    fn picked(s: &SequenceSample) -> Vec<usize> {
        s.frames.iter().map(|f| f[0] as usize).collect()
    }

    // hop 1, frame_len 1: frame i covers exactly sample i
    fn seg(start: usize, end: usize) -> Segment {
        Segment::new("u", "iy", start, end).unwrap()
    }

    #[test]
    fn exact_nine_frames() {
        let s = middle_frames(&seg(3, 12), &numbered(30), 1, 1, 9).unwrap();
        assert_eq!(picked(&s), (3..12).collect::<Vec<_>>());
        assert!(!s.padded);
    }

    #[test]
    fn twenty_frames_take_the_middle() {
        let s = middle_frames(&seg(0, 20), &numbered(20), 1, 1, 9).unwrap();
        assert_eq!(picked(&s), (6..15).collect::<Vec<_>>());
    }

    #[test]
    fn five_frames_replicate_edges() {
        let s = middle_frames(&seg(0, 5), &numbered(20), 1, 1, 9).unwrap();
        assert_eq!(picked(&s), vec![0, 0, 0, 1, 2, 3, 4, 4, 4]);
        assert!(s.padded);
    }

    #[test]
    fn overlapping_frames_with_real_hop() {
        // frames of 256 with hop 128: samples [300, 700) touch frames 1..=5
        let span = frame_span(&seg(300, 700), 100, 128, 256).unwrap();
        assert_eq!(span, (1, 5));
        let span = frame_span(&seg(384, 700), 100, 128, 256).unwrap();
        assert_eq!(span, (2, 5));
        let span = frame_span(&seg(0, 1), 100, 128, 256).unwrap();
        assert_eq!(span, (0, 0));
    }

    #[test]
    fn segment_past_the_frames_is_an_error() {
        assert!(middle_frames(&seg(50, 60), &numbered(20), 1, 1, 9).is_err());
        assert!(middle_frames(&seg(0, 5), &numbered(20), 1, 1, 0).is_err());
    }

    #[test]
    fn concatenation() {
        let s = middle_frames(&seg(0, 2), &numbered(2), 1, 1, 3).unwrap();
        assert_eq!(s.concatenated(), vec![0.0, 1.0, 1.0]);
    }
}
