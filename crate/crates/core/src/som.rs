//! Kohonen lattice, best-matching-unit search, neighborhood kernel, linear
//! decay schedules and the baseline training loop.
//!
//! The spiking variants in [`crate::ssom`], [`crate::rssom`] and
//! [`crate::lin`] reuse the lattice, the kernel and the schedule defined here.

use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, check_finite, Error, Result};

/// Magic tag that opens every serialized lattice.
pub const LATTICE_MAGIC: &str = "PULSOM1";

/// Address of one unit on the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnitIndex {
    pub row: usize,
    pub col: usize,
    pub flat: usize,
}

/// A rows×cols grid of units, each holding a `dim`-length weight vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    rows: usize,
    cols: usize,
    dim: usize,
    seed: u64,
    weights: Vec<f64>,
}

impl Lattice {
    pub fn from_weights(
        rows: usize,
        cols: usize,
        dim: usize,
        seed: u64,
        weights: Vec<f64>,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("lattice", "rows and cols must be positive"));
        }
        if dim == 0 {
            return Err(Error::invalid("lattice", "dim must be positive"));
        }
        check_dim(rows * cols * dim, weights.len())?;
        check_finite(&weights, "lattice weights")?;
        Ok(Self {
            rows,
            cols,
            dim,
            seed,
            weights,
        })
    }

    /// Uniform random weights in the per-dimension box `[lo[k], hi[k]]`.
    pub fn random(rows: usize, cols: usize, seed: u64, lo: &[f64], hi: &[f64]) -> Result<Self> {
        check_dim(lo.len(), hi.len())?;
        let dim = lo.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::with_capacity(rows * cols * dim);
        for _ in 0..rows * cols {
            for k in 0..dim {
                let u: f64 = rng.random();
                weights.push(lo[k] + u * (hi[k] - lo[k]));
            }
        }
        Self::from_weights(rows, cols, dim, seed, weights)
    }

    /// Random initialization inside the per-dimension min/max of `data`.
    pub fn init_from_data(rows: usize, cols: usize, seed: u64, data: &[Vec<f64>]) -> Result<Self> {
        let (lo, hi) = data_bounds(data)?;
        Self::random(rows, cols, seed, &lo, &hi)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, flat: usize) -> &[f64] {
        &self.weights[flat * self.dim..(flat + 1) * self.dim]
    }

    pub fn weight_mut(&mut self, flat: usize) -> &mut [f64] {
        &mut self.weights[flat * self.dim..(flat + 1) * self.dim]
    }

    pub fn unit(&self, flat: usize) -> UnitIndex {
        UnitIndex {
            row: flat / self.cols,
            col: flat % self.cols,
            flat,
        }
    }

    pub fn unit_at(&self, row: usize, col: usize) -> Result<UnitIndex> {
        if row >= self.rows || col >= self.cols {
            return Err(Error::invalid(
                "unit",
                format!(
                    "({row}, {col}) outside a {}x{} lattice",
                    self.rows, self.cols
                ),
            ));
        }
        Ok(self.unit(row * self.cols + col))
    }

    /// Euclidean distance between two units in lattice coordinates.
    pub fn grid_distance(&self, a: usize, b: usize) -> f64 {
        let (ra, ca) = ((a / self.cols) as f64, (a % self.cols) as f64);
        let (rb, cb) = ((b / self.cols) as f64, (b % self.cols) as f64);
        ((ra - rb).powi(2) + (ca - cb).powi(2)).sqrt()
    }

    /// Half the larger lattice dimension, floored at 1.
    pub fn half_diameter(&self) -> f64 {
        half_diameter_of(self.rows, self.cols)
    }

    pub fn all_finite(&self) -> bool {
        self.weights.iter().all(|w| w.is_finite())
    }

    /// Writes the header line and one line of weights per unit.
    pub fn write_to(&self, mut out: impl Write) -> Result<()> {
        writeln!(
            out,
            "{LATTICE_MAGIC} {} {} {} {}",
            self.rows, self.cols, self.dim, self.seed
        )?;
        for unit in 0..self.len() {
            let line = self
                .weight(unit)
                .iter()
                .map(|w| w.to_string())
                .collect::<Vec<_>>()
                .join(" ");
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    /// Reads a lattice written by [`Lattice::write_to`], consuming exactly
    /// the header and the weight lines.
    pub fn read_from(mut input: impl BufRead) -> Result<Self> {
        let mut line = String::new();
        input.read_line(&mut line)?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 || fields[0] != LATTICE_MAGIC {
            return Err(Error::Format(format!(
                "expected `{LATTICE_MAGIC} <rows> <cols> <dim> <seed>` header"
            )));
        }
        let parse = |s: &str, what: &str| -> Result<u64> {
            s.parse()
                .map_err(|_| Error::Format(format!("bad {what} `{s}` in header")))
        };
        let rows = parse(fields[1], "rows")? as usize;
        let cols = parse(fields[2], "cols")? as usize;
        let dim = parse(fields[3], "dim")? as usize;
        let seed = parse(fields[4], "seed")?;

        let mut weights = Vec::with_capacity(rows * cols * dim);
        for unit in 0..rows * cols {
            line.clear();
            if input.read_line(&mut line)? == 0 {
                return Err(Error::Format(format!(
                    "expected {} weight lines, found {unit}",
                    rows * cols
                )));
            }
            let before = weights.len();
            for tok in line.split_whitespace() {
                let v: f64 = tok
                    .parse()
                    .map_err(|_| Error::Format(format!("bad weight `{tok}` on unit {unit}")))?;
                weights.push(v);
            }
            if weights.len() - before != dim {
                return Err(Error::Format(format!(
                    "unit {unit} has {} components, expected {dim}",
                    weights.len() - before
                )));
            }
        }
        Self::from_weights(rows, cols, dim, seed, weights)
    }
}

/// Half the larger of `rows` and `cols`, floored at 1.
pub fn half_diameter_of(rows: usize, cols: usize) -> f64 {
    (rows.max(cols) as f64 / 2.0).max(1.0)
}

/// Per-dimension (min, max) over a non-empty set of equal-length vectors.
pub fn data_bounds(data: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>)> {
    let first = data.first().ok_or(Error::Empty("training data"))?;
    let mut lo = first.clone();
    let mut hi = first.clone();
    for x in data {
        check_dim(lo.len(), x.len())?;
        check_finite(x, "training data")?;
        for (k, &v) in x.iter().enumerate() {
            lo[k] = lo[k].min(v);
            hi[k] = hi[k].max(v);
        }
    }
    Ok((lo, hi))
}

#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

/// Index of the smallest value; ties go to the lowest index.
pub(crate) fn argmin(values: impl IntoIterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.into_iter().enumerate() {
        match best {
            Some((_, b)) if v >= b => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

/// Unit minimizing the squared Euclidean distance to `x`.
pub fn find_bmu(x: &[f64], lattice: &Lattice) -> Result<UnitIndex> {
    check_dim(lattice.dim(), x.len())?;
    check_finite(x, "input vector")?;
    let flat = argmin((0..lattice.len()).map(|u| squared_distance(x, lattice.weight(u))))
        .expect("lattice has at least one unit");
    Ok(lattice.unit(flat))
}

/// Gaussian neighborhood kernel with a hard cutoff beyond three radii.
pub fn neighborhood(grid_dist: f64, radius: f64) -> Result<f64> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::invalid(
            "radius",
            format!("must be > 0, got {radius}"),
        ));
    }
    if !(grid_dist >= 0.0) {
        return Err(Error::invalid(
            "grid_dist",
            format!("must be >= 0, got {grid_dist}"),
        ));
    }
    if grid_dist > 3.0 * radius {
        return Ok(0.0);
    }
    Ok((-(grid_dist * grid_dist) / (2.0 * radius * radius)).exp())
}

pub(crate) fn check_rate(lr: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lr) {
        return Err(Error::invalid(
            "lr",
            format!("must lie in [0, 1], got {lr}"),
        ));
    }
    Ok(())
}

/// Classic Kohonen step: `m_i += lr * h(d(i, bmu)) * (x - m_i)`.
pub fn som_update(
    x: &[f64],
    lattice: &mut Lattice,
    bmu: UnitIndex,
    lr: f64,
    radius: f64,
) -> Result<()> {
    check_dim(lattice.dim(), x.len())?;
    check_rate(lr)?;
    neighborhood(0.0, radius)?;
    if lr == 0.0 {
        return Ok(());
    }
    for unit in 0..lattice.len() {
        let h = neighborhood(lattice.grid_distance(unit, bmu.flat), radius)?;
        if h == 0.0 {
            continue;
        }
        let step = lr * h;
        for (w, &xi) in lattice.weight_mut(unit).iter_mut().zip(x) {
            *w += step * (xi - *w);
        }
    }
    Ok(())
}

/// Linear learning-rate and radius decay over a fixed number of epochs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub epochs: usize,
    pub lr_start: f64,
    pub lr_end: f64,
    pub radius_start: f64,
    pub radius_end: f64,
}

impl Schedule {
    pub fn new(
        epochs: usize,
        lr_start: f64,
        lr_end: f64,
        radius_start: f64,
        radius_end: f64,
    ) -> Result<Self> {
        let s = Self {
            epochs,
            lr_start,
            lr_end,
            radius_start,
            radius_end,
        };
        s.validate()?;
        Ok(s)
    }

    /// 80 epochs, learning rate 0.9 → 0.05, radius from half the lattice
    /// diameter down to 1.
    pub fn for_lattice(lattice: &Lattice) -> Self {
        Self {
            epochs: 80,
            lr_start: 0.9,
            lr_end: 0.05,
            radius_start: lattice.half_diameter(),
            radius_end: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::invalid("schedule.epochs", "must be >= 1"));
        }
        if !(self.lr_end > 0.0 && self.lr_start >= self.lr_end && self.lr_start <= 1.0) {
            return Err(Error::invalid(
                "schedule.lr",
                format!(
                    "need 1 >= lr_start >= lr_end > 0, got {} -> {}",
                    self.lr_start, self.lr_end
                ),
            ));
        }
        if !(self.radius_end > 0.0 && self.radius_start >= self.radius_end) {
            return Err(Error::invalid(
                "schedule.radius",
                format!(
                    "need radius_start >= radius_end > 0, got {} -> {}",
                    self.radius_start, self.radius_end
                ),
            ));
        }
        Ok(())
    }
}

fn interpolate(start: f64, end: f64, t: usize, epochs: usize) -> f64 {
    if epochs == 1 {
        return start;
    }
    start + (end - start) * t as f64 / (epochs - 1) as f64
}

/// `(lr, radius)` for epoch `t`.
pub fn linear_decay(t: usize, schedule: &Schedule) -> Result<(f64, f64)> {
    if t >= schedule.epochs {
        return Err(Error::EpochOutOfRange {
            epoch: t,
            epochs: schedule.epochs,
        });
    }
    Ok((
        interpolate(schedule.lr_start, schedule.lr_end, t, schedule.epochs),
        interpolate(
            schedule.radius_start,
            schedule.radius_end,
            t,
            schedule.epochs,
        ),
    ))
}

/// Linear interpolation of an arbitrary quantity over the schedule's epochs.
pub(crate) fn decay_value(start: f64, end: f64, t: usize, schedule: &Schedule) -> f64 {
    interpolate(start, end, t, schedule.epochs)
}

/// Mean distance from each sample to its best-matching unit.
pub fn quantization_error(data: &[Vec<f64>], lattice: &Lattice) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::Empty("quantization error data"));
    }
    let mut total = 0.0;
    for x in data {
        let bmu = find_bmu(x, lattice)?;
        total += squared_distance(x, lattice.weight(bmu.flat)).sqrt();
    }
    Ok(total / data.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub lr: f64,
    pub radius: f64,
    pub qe: f64,
    /// Presentations skipped because no unit fired before the reference time.
    pub skipped: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingLog {
    pub epochs: Vec<EpochLog>,
}

impl TrainingLog {
    pub fn total_skipped(&self) -> usize {
        self.epochs.iter().map(|e| e.skipped).sum()
    }

    pub fn final_qe(&self) -> Option<f64> {
        self.epochs.last().map(|e| e.qe)
    }

    /// CSV with header `epoch,lr,radius,qe`.
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "epoch,lr,radius,qe")?;
        for e in &self.epochs {
            writeln!(out, "{},{},{},{}", e.epoch, e.lr, e.radius, e.qe)?;
        }
        Ok(())
    }
}

/// Shuffle RNG for the sample order; a separate stream from the one that
/// initializes the weights.
pub(crate) fn order_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

pub(crate) fn shuffled(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order
}

/// Sequential Kohonen training over shuffled samples.
pub fn train_som(
    data: &[Vec<f64>],
    lattice: &mut Lattice,
    schedule: &Schedule,
    seed: u64,
) -> Result<TrainingLog> {
    if data.is_empty() {
        return Err(Error::Empty("training data"));
    }
    schedule.validate()?;
    for x in data {
        check_dim(lattice.dim(), x.len())?;
    }
    let mut rng = order_rng(seed);
    let mut log = TrainingLog::default();
    for epoch in 0..schedule.epochs {
        let (lr, radius) = linear_decay(epoch, schedule)?;
        for i in shuffled(&mut rng, data.len()) {
            let bmu = find_bmu(&data[i], lattice)?;
            som_update(&data[i], lattice, bmu, lr, radius)?;
        }
        if !lattice.all_finite() {
            return Err(Error::Diverged { epoch });
        }
        log.epochs.push(EpochLog {
            epoch,
            lr,
            radius,
            qe: quantization_error(data, lattice)?,
            skipped: 0,
        });
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_unit() -> Lattice {
        Lattice::from_weights(1, 2, 2, 0, vec![0.0, 0.0, 1.0, 1.0]).unwrap()
    }

    #[test]
    fn bmu_examples() {
        let l = two_unit();
        assert_eq!(find_bmu(&[0.1, 0.1], &l).unwrap().flat, 0);
        let exact = find_bmu(&[1.0, 1.0], &l).unwrap();
        assert_eq!(exact.flat, 1);
        assert_eq!(squared_distance(&[1.0, 1.0], l.weight(1)), 0.0);
        // equidistant: lowest flat index wins
        assert_eq!(find_bmu(&[0.5, 0.5], &l).unwrap().flat, 0);
    }

    #[test]
    fn bmu_dimension_mismatch() {
        let err = find_bmu(&[0.0, 0.0, 0.0], &two_unit()).unwrap_err();
        assert!(matches!(
            err,
            Error::DimensionMismatch {
                expected: 2,
                actual: 3
            }
        ));
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(neighborhood(0.0, 2.0).unwrap(), 1.0);
        assert!((neighborhood(2.0, 2.0).unwrap() - (-0.5f64).exp()).abs() < 1e-15);
        assert!((neighborhood(2.0, 2.0).unwrap() - 0.60653).abs() < 1e-5);
        assert_eq!(neighborhood(8.0, 2.0).unwrap(), 0.0);
        assert!(neighborhood(1.0, 0.0).is_err());
        assert!(neighborhood(1.0, -1.0).is_err());
    }

    #[test]
    fn update_examples() {
        let mut l = Lattice::from_weights(1, 1, 2, 0, vec![0.0, 0.0]).unwrap();
        let bmu = l.unit(0);
        som_update(&[3.0, 4.0], &mut l, bmu, 1.0, 1.0).unwrap();
        assert_eq!(l.weight(0), &[3.0, 4.0]);

        let mut l = Lattice::from_weights(1, 1, 1, 0, vec![0.0]).unwrap();
        som_update(&[1.0], &mut l, bmu, 0.5, 1.0).unwrap();
        assert_eq!(l.weight(0), &[0.5]);

        let mut l = two_unit();
        let before = l.clone();
        som_update(&[5.0, 5.0], &mut l, bmu, 0.0, 1.0).unwrap();
        assert_eq!(l, before);
    }

    #[test]
    fn update_leaves_units_beyond_cutoff() {
        let mut l = Lattice::from_weights(1, 5, 1, 0, vec![0.0; 5]).unwrap();
        let bmu = l.unit(0);
        som_update(&[1.0], &mut l, bmu, 1.0, 1.0).unwrap();
        // unit 4 sits at grid distance 4 > 3 * radius
        assert_eq!(l.weight(4), &[0.0]);
        assert!(l.weight(3)[0] > 0.0);
        assert!(som_update(&[1.0], &mut l, bmu, 1.5, 1.0).is_err());
    }

    #[test]
    fn decay_examples() {
        let s = Schedule::new(80, 0.9, 0.05, 4.0, 1.0).unwrap();
        assert_eq!(linear_decay(0, &s).unwrap(), (0.9, 4.0));
        let (lr, r) = linear_decay(79, &s).unwrap();
        assert!((lr - 0.05).abs() < 1e-15);
        assert!((r - 1.0).abs() < 1e-15);
        // midpoint of an odd-length schedule
        let s3 = Schedule::new(3, 0.9, 0.05, 4.0, 1.0).unwrap();
        assert!((linear_decay(1, &s3).unwrap().0 - 0.475).abs() < 1e-15);
        assert!(matches!(
            linear_decay(80, &s),
            Err(Error::EpochOutOfRange { .. })
        ));
        let single = Schedule::new(1, 0.9, 0.05, 4.0, 1.0).unwrap();
        assert_eq!(linear_decay(0, &single).unwrap(), (0.9, 4.0));
    }

    #[test]
    fn schedule_validation() {
        assert!(Schedule::new(0, 0.9, 0.05, 4.0, 1.0).is_err());
        assert!(Schedule::new(10, 0.05, 0.9, 4.0, 1.0).is_err());
        assert!(Schedule::new(10, 0.9, 0.0, 4.0, 1.0).is_err());
        assert!(Schedule::new(10, 0.9, 0.05, 0.5, 1.0).is_err());
    }

    #[test]
    fn quantization_error_examples() {
        let l = two_unit();
        assert_eq!(
            quantization_error(&[vec![0.0, 0.0], vec![1.0, 1.0]], &l).unwrap(),
            0.0
        );
        let single = Lattice::from_weights(1, 1, 1, 0, vec![0.0]).unwrap();
        assert_eq!(
            quantization_error(&[vec![1.0], vec![-1.0]], &single).unwrap(),
            1.0
        );
        assert_eq!(quantization_error(&[vec![2.5]], &single).unwrap(), 2.5);
        assert!(matches!(
            quantization_error(&[], &single),
            Err(Error::Empty(_))
        ));
    }

    #[test]
    fn training_converges_on_constant_data() {
        let mut l = Lattice::from_weights(1, 1, 2, 0, vec![-3.0, 7.0]).unwrap();
        let s = Schedule::new(40, 0.9, 0.05, 1.0, 1.0).unwrap();
        let data = vec![vec![0.25, -0.5]; 10];
        train_som(&data, &mut l, &s, 3).unwrap();
        assert!((l.weight(0)[0] - 0.25).abs() < 1e-6);
        assert!((l.weight(0)[1] + 0.5).abs() < 1e-6);
    }

    #[test]
    fn serialization_round_trip() {
        let l = Lattice::random(3, 4, 11, &[-1.0, 0.0, 5.0], &[1.0, 1e-9, 6.0]).unwrap();
        let mut buf = Vec::new();
        l.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("PULSOM1 3 4 3 11\n"));
        assert_eq!(text.lines().count(), 13);
        let back = Lattice::read_from(&buf[..]).unwrap();
        assert_eq!(back, l);
    }

    #[test]
    fn read_rejects_bad_header() {
        assert!(Lattice::read_from(&b"SOM 1 1 1 0\n0\n"[..]).is_err());
        assert!(Lattice::read_from(&b"PULSOM1 1 1 2 0\n0\n"[..]).is_err());
        assert!(Lattice::read_from(&b"PULSOM1 2 1 1 0\n0\n"[..]).is_err());
    }

    #[test]
    fn log_csv() {
        let log = TrainingLog {
            epochs: vec![EpochLog {
                epoch: 0,
                lr: 0.9,
                radius: 4.0,
                qe: 0.5,
                skipped: 0,
            }],
        };
        let mut buf = Vec::new();
        log.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "epoch,lr,radius,qe\n0,0.9,4,0.5\n"
        );
    }
}
