//! NIST SPHERE audio (16-bit linear PCM, mono).

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mfcc::AudioBuffer;

const MAGIC: &str = "NIST_1A";
const HEADER_SIZE: usize = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct SphereHeader {
    pub header_size: usize,
    pub sample_rate: u32,
    pub channel_count: u32,
    pub sample_n_bytes: u32,
    pub little_endian: bool,
    pub sample_count: Option<usize>,
}

fn unsupported(path: &Path, reason: impl Into<String>) -> Error {
    Error::UnsupportedEncoding {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn header_line<'a>(lines: &mut impl Iterator<Item = &'a str>, path: &Path) -> Result<&'a str> {
    lines.next().ok_or_else(|| Error::NotSphere {
        path: path.to_path_buf(),
    })
}

pub fn parse_header(bytes: &[u8], path: &Path) -> Result<SphereHeader> {
    let not_sphere = || Error::NotSphere {
        path: path.to_path_buf(),
    };
    if bytes.len() < 16 || &bytes[..MAGIC.len()] != MAGIC.as_bytes() {
        return Err(not_sphere());
    }
    let preamble = String::from_utf8_lossy(&bytes[..16]);
    let mut lines = preamble.lines();
    header_line(&mut lines, path)?;
    let header_size: usize = header_line(&mut lines, path)?
        .trim()
        .parse()
        .map_err(|_| not_sphere())?;
    if header_size < 16 {
        return Err(not_sphere());
    }
    if bytes.len() < header_size {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            expected: header_size,
            found: bytes.len(),
        });
    }
    let text = String::from_utf8_lossy(&bytes[..header_size]);

    let mut sample_rate = None;
    let mut channel_count = 1;
    let mut sample_n_bytes = 2;
    let mut little_endian = true;
    let mut sample_count = None;
    let mut ended = false;
    for line in text.lines().skip(2) {
        let line = line.trim();
        if line == "end_head" {
            ended = true;
            break;
        }
        let mut parts = line.splitn(3, char::is_whitespace);
        let (Some(key), Some(_ty), Some(value)) = (parts.next(), parts.next(), parts.next()) else {
            continue;
        };
        let value = value.trim();
        let int = || -> Result<u64> {
            value
                .parse()
                .map_err(|_| unsupported(path, format!("bad value `{value}` for {key}")))
        };
        match key {
            "sample_rate" => sample_rate = Some(int()? as u32),
            "channel_count" => channel_count = int()? as u32,
            "sample_n_bytes" => sample_n_bytes = int()? as u32,
            "sample_count" => sample_count = Some(int()? as usize),
            "sample_byte_format" => {
                little_endian = match value {
                    "01" => true,
                    "10" => false,
                    other => return Err(unsupported(path, format!("byte format `{other}`"))),
                }
            }
            "sample_coding" if value != "pcm" => {
                return Err(unsupported(path, format!("sample coding `{value}`")));
            }
            _ => {}
        }
    }
    if !ended {
        return Err(not_sphere());
    }
    let sample_rate = sample_rate.ok_or_else(|| unsupported(path, "missing sample_rate"))?;
    if sample_rate == 0 {
        return Err(unsupported(path, "sample_rate is zero"));
    }
    if channel_count != 1 {
        return Err(unsupported(path, format!("{channel_count} channels")));
    }
    if sample_n_bytes != 2 {
        return Err(unsupported(path, format!("{sample_n_bytes}-byte samples")));
    }
    Ok(SphereHeader {
        header_size,
        sample_rate,
        channel_count,
        sample_n_bytes,
        little_endian,
        sample_count,
    })
}

/// Decodes samples to reals by dividing by 32768.
pub fn decode_sphere(bytes: &[u8], path: &Path) -> Result<AudioBuffer> {
    let header = parse_header(bytes, path)?;
    let data = &bytes[header.header_size..];
    let count = header.sample_count.unwrap_or(data.len() / 2);
    let expected = count * 2;
    if data.len() < expected || (header.sample_count.is_none() && data.len() % 2 == 1) {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            expected: expected.max(data.len() + 1),
            found: data.len(),
        });
    }
    let samples = data[..expected]
        .chunks_exact(2)
        .map(|b| {
            let v = if header.little_endian {
                i16::from_le_bytes([b[0], b[1]])
            } else {
                i16::from_be_bytes([b[0], b[1]])
            };
            f64::from(v) / 32768.0
        })
        .collect();
    AudioBuffer::new(samples, header.sample_rate)
}

pub fn read_sphere(path: &Path) -> Result<AudioBuffer> {
    decode_sphere(&fs::read(path)?, path)
}

/// Little-endian 16-bit mono SPHERE bytes with a 1024-byte header.
pub fn encode_sphere(samples: &[i16], sample_rate: u32) -> Vec<u8> {
    let fields = format!(
        "{MAGIC}\n{HEADER_SIZE:7}\n\
         sample_count -i {}\n\
         sample_rate -i {sample_rate}\n\
         channel_count -i 1\n\
         sample_n_bytes -i 2\n\
         sample_byte_format -s2 01\n\
         sample_coding -s3 pcm\n\
         sample_min -i {}\n\
         sample_max -i {}\n\
         end_head\n",
        samples.len(),
        samples.iter().min().copied().unwrap_or(0),
        samples.iter().max().copied().unwrap_or(0),
    );
    let mut out = fields.into_bytes();
    out.resize(HEADER_SIZE, b' ');
    for s in samples {
        out.extend_from_slice(&s.to_le_bytes());
    }
    out
}

pub fn write_sphere(path: &Path, samples: &[i16], sample_rate: u32) -> Result<()> {
    fs::write(path, encode_sphere(samples, sample_rate))?;
    Ok(())
}
