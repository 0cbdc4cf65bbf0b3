//! Time-aligned transcriptions (`start end label` per line, in samples).

use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlignmentKind {
    Phn,
    Wrd,
}

impl AlignmentKind {
    pub fn extension(self) -> &'static str {
        match self {
            AlignmentKind::Phn => "phn",
            AlignmentKind::Wrd => "wrd",
        }
    }
}

impl FromStr for AlignmentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "phn" => Ok(AlignmentKind::Phn),
            "wrd" => Ok(AlignmentKind::Wrd),
            other => Err(Error::invalid(
                "corpus.kind",
                format!("expected `phn` or `wrd`, got `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub utt_id: String,
    pub label: String,
    pub start_sample: usize,
    /// exclusive
    pub end_sample: usize,
}

impl Segment {
    pub fn new(utt_id: &str, label: &str, start_sample: usize, end_sample: usize) -> Result<Self> {
        if start_sample >= end_sample {
            return Err(Error::invalid(
                "segment",
                format!("start {start_sample} must precede end {end_sample}"),
            ));
        }
        Ok(Self {
            utt_id: utt_id.to_string(),
            label: label.to_string(),
            start_sample,
            end_sample,
        })
    }
}

/// Parses alignment text. Segments must be ordered and non-overlapping;
/// blank lines are skipped.
pub fn parse_alignment(text: &str, utt_id: &str, path: &Path) -> Result<Vec<Segment>> {
    let malformed = |line: usize, reason: String| Error::Malformed {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let mut out: Vec<Segment> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        let [start, end, label] = fields[..] else {
            return Err(malformed(
                n,
                format!("expected `start end label`, got `{}`", line.trim()),
            ));
        };
        let parse = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| malformed(n, format!("`{s}` is not a sample index")))
        };
        let (start, end) = (parse(start)?, parse(end)?);
        if start >= end {
            return Err(malformed(
                n,
                format!("start {start} is not before end {end}"),
            ));
        }
        if let Some(prev) = out.last() {
            if start < prev.end_sample {
                return Err(malformed(
                    n,
                    format!(
                        "segment starting at {start} overlaps `{}` ending at {}",
                        prev.label, prev.end_sample
                    ),
                ));
            }
        }
        out.push(Segment {
            utt_id: utt_id.to_string(),
            label: label.to_string(),
            start_sample: start,
            end_sample: end,
        });
    }
    Ok(out)
}

/// Reads a `.phn` or `.wrd` file (both share the line format); the
/// utterance id is the file stem.
pub fn read_alignment(path: &Path, _kind: AlignmentKind) -> Result<Vec<Segment>> {
    let text = fs::read_to_string(path)?;
    let utt_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_alignment(&text, &utt_id, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Vec<Segment>> {
        parse_alignment(text, "sa1", Path::new("sa1.phn"))
    }

    #[test]
    fn boundary_line() {
        let segs = parse("0 1600 h#\n").unwrap();
        assert_eq!(segs, vec![Segment::new("sa1", "h#", 0, 1600).unwrap()]);
    }

    #[test]
    fn empty_file() {
        assert!(parse("").unwrap().is_empty());
        assert!(parse("\n  \n").unwrap().is_empty());
    }

    #[test]
    fn reversed_span_names_line() {
        let err = parse("0 5 h#\n10 5 x\n").unwrap_err();
        assert!(matches!(err, Error::Malformed { line: 2, .. }), "{err}");
    }

    #[test]
    fn malformed_lines() {
        assert!(matches!(
            parse("0 10\n"),
            Err(Error::Malformed { line: 1, .. })
        ));
        assert!(matches!(
            parse("0 a b\n"),
            Err(Error::Malformed { line: 1, .. })
        ));
        assert!(matches!(
            parse("0 10 a b\n"),
            Err(Error::Malformed { line: 1, .. })
        ));
    }

    #[test]
    fn overlap_is_an_error() {
        let err = parse("0 100 a\n90 200 b\n").unwrap_err();
        assert!(matches!(err, Error::Malformed { line: 2, .. }));
        // touching segments and gaps are fine
        assert_eq!(parse("0 100 a\n100 200 b\n300 400 c\n").unwrap().len(), 3);
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("phn".parse::<AlignmentKind>().unwrap(), AlignmentKind::Phn);
        assert_eq!(AlignmentKind::Wrd.extension(), "wrd");
        assert!("txt".parse::<AlignmentKind>().is_err());
    }
}
