//! CSV caches: one row per sequence (`utt_id,label,macro_class,f0c1..`)
//! and one row per frame (`utt_id,frame_idx,c1..`).

use std::io::{Read, Write};

use super::SequenceSample;
use crate::error::{Error, Result};

fn sequence_header(frames: usize, dim: usize) -> Vec<String> {
    let mut h = vec!["utt_id".to_string(), "label".into(), "macro_class".into()];
    for f in 0..frames {
        for c in 1..=dim {
            h.push(format!("f{f}c{c}"));
        }
    }
    h
}

pub fn write_dataset(out: impl Write, samples: &[SequenceSample]) -> Result<()> {
    let first = samples.first().ok_or(Error::Empty("dataset"))?;
    let (frames, dim) = (first.frames.len(), first.dim());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(sequence_header(frames, dim))?;
    for s in samples {
        if s.frames.len() != frames || s.dim() != dim || s.frames.iter().any(|f| f.len() != dim) {
            return Err(Error::Format(format!(
                "sample `{}` does not have {frames} frames of dimension {dim}",
                s.utt_id
            )));
        }
        let mut row = vec![
            s.utt_id.clone(),
            s.label.clone(),
            s.macro_class.clone().unwrap_or_default(),
        ];
        row.extend(s.frames.iter().flatten().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses `f<frame>c<coeff>` (frame from 0, coefficient from 1).
fn parse_column(name: &str) -> Option<(usize, usize)> {
    let rest = name.strip_prefix('f')?;
    let (f, c) = rest.split_once('c')?;
    Some((f.parse().ok()?, c.parse().ok()?))
}

pub fn read_dataset(input: impl Read) -> Result<Vec<SequenceSample>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    let fixed: Vec<&str> = header.iter().take(3).collect();
    if fixed != ["utt_id", "label", "macro_class"] {
        return Err(Error::Format(
            "dataset header must start with utt_id,label,macro_class".into(),
        ));
    }
    let coords: Vec<(usize, usize)> = header
        .iter()
        .skip(3)
        .map(|h| parse_column(h).ok_or_else(|| Error::Format(format!("bad feature column `{h}`"))))
        .collect::<Result<_>>()?;
    let dim = coords.iter().map(|&(_, c)| c).max().unwrap_or(0);
    if dim == 0 || !coords.len().is_multiple_of(dim) {
        return Err(Error::Format(
            "dataset has no complete feature frames".into(),
        ));
    }
    let frames = coords.len() / dim;
    if !header.iter().skip(3).eq(sequence_header(frames, dim)
        .iter()
        .skip(3)
        .map(String::as_str))
    {
        return Err(Error::Format(format!(
            "feature columns must run f0c1..f{}c{dim} in order",
            frames - 1
        )));
    }
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let values: Vec<f64> = rec
            .iter()
            .skip(3)
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Error::Format(format!("line {line}: bad feature value `{v}`")))
            })
            .collect::<Result<_>>()?;
        let macro_class = match &rec[2] {
            "" => None,
            m => Some(m.to_string()),
        };
        out.push(SequenceSample {
            utt_id: rec[0].to_string(),
            label: rec[1].to_string(),
            macro_class,
            frames: values.chunks(dim).map(<[_]>::to_vec).collect(),
            padded: false,
        });
    }
    Ok(out)
}

pub fn write_frames_header(w: &mut csv::Writer<impl Write>, dim: usize) -> Result<()> {
    let mut h = vec!["utt_id".to_string(), "frame_idx".into()];
    h.extend((1..=dim).map(|c| format!("c{c}")));
    w.write_record(h)?;
    Ok(())
}

pub fn write_frame_rows(
    w: &mut csv::Writer<impl Write>,
    utt_id: &str,
    frames: &[Vec<f64>],
) -> Result<()> {
    for (i, f) in frames.iter().enumerate() {
        let mut row = vec![utt_id.to_string(), i.to_string()];
        row.extend(f.iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    Ok(())
}
