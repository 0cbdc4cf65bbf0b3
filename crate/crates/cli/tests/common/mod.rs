#![allow(dead_code)]

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use pulsom_core::corpus::write_sphere;

pub const PHN_A: &str =
    "0 2000 h#\n2000 4500 aa\n4500 6000 s\n6000 8500 iy\n8500 10000 n\n10000 16000 h#\n";
pub const PHN_B: &str = "0 3000 h#\n3000 5000 s\n5000 8000 aa\n8000 9000 t\n9000 16000 h#\n";

/// One second of two tones plus a little deterministic hash noise.
fn audio(f1: f64, f2: f64) -> Vec<i16> {
    (0..16000u32)
        .map(|n| {
            let t = f64::from(n) / 16000.0;
            let noise = f64::from(n.wrapping_mul(2_654_435_761) >> 20) / 4096.0 - 0.5;
            let v = 6000.0 * (2.0 * PI * f1 * t).sin()
                + 3000.0 * (2.0 * PI * f2 * t).sin()
                + 200.0 * noise;
            v as i16
        })
        .collect()
}

/// Two utterances under `root/train/dr1/<speaker>/`, 11 phone segments.
pub fn write_fixture_corpus(root: &Path) -> usize {
    for (speaker, utt, f1, f2, phn) in [
        ("fcjf0", "sa1", 440.0, 2300.0, PHN_A),
        ("mdab0", "sx9", 300.0, 1200.0, PHN_B),
    ] {
        let dir = root.join("train/dr1").join(speaker);
        fs::create_dir_all(&dir).unwrap();
        write_sphere(&dir.join(format!("{utt}.wav")), &audio(f1, f2), 16000).unwrap();
        fs::write(dir.join(format!("{utt}.phn")), phn).unwrap();
    }
    PHN_A.lines().count() + PHN_B.lines().count()
}

pub fn write_config(dir: &Path, name: &str, lines: &[&str]) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, lines.join("\n") + "\n").unwrap();
    path
}
