//! Unit labeling by majority vote, sequence classification and per-class
//! recognition-rate reports.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::Write;

use crate::corpus::{macro_class, SequenceSample};
use crate::error::{Error, Result};
use crate::model::WinnerModel;
use crate::som::{argmin, Lattice};

/// Prediction when no unit carries a label.
pub const REJECTED: &str = "rejected";

/// Per-unit hit histograms and the label each unit was assigned.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitLabelMap {
    hits: Vec<BTreeMap<String, usize>>,
    labels: Vec<Option<String>>,
}

/// Mode of a histogram; ties go to the lexicographically smallest label.
fn mode(hist: &BTreeMap<String, usize>) -> Option<String> {
    let best = hist.values().copied().max()?;
    hist.iter()
        .find(|(_, &n)| n == best)
        .map(|(l, _)| l.clone())
}

impl UnitLabelMap {
    pub fn empty(n_units: usize) -> Self {
        Self {
            hits: vec![BTreeMap::new(); n_units],
            labels: vec![None; n_units],
        }
    }

    /// Builds the map from `(label, winning units)` pairs.
    pub fn from_hits<'a, I>(n_units: usize, hits: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, Vec<usize>)>,
    {
        let mut map = Self::empty(n_units);
        for (label, units) in hits {
            for u in units {
                let hist = map.hits.get_mut(u).ok_or(Error::DimensionMismatch {
                    expected: n_units,
                    actual: u + 1,
                })?;
                *hist.entry(label.to_string()).or_default() += 1;
            }
        }
        map.labels = map.hits.iter().map(mode).collect();
        Ok(map)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, unit: usize) -> Option<&str> {
        self.labels.get(unit)?.as_deref()
    }

    pub fn histogram(&self, unit: usize) -> &BTreeMap<String, usize> {
        &self.hits[unit]
    }

    pub fn labeled_units(&self) -> usize {
        self.labels.iter().filter(|l| l.is_some()).count()
    }

    /// Label of `unit`, or of the nearest labeled unit in lattice distance
    /// (ties to the lowest index); `None` if nothing is labeled.
    pub fn resolve(&self, unit: usize, lattice: &Lattice) -> Option<&str> {
        if let Some(l) = self.label(unit) {
            return Some(l);
        }
        let nearest = argmin((0..self.len()).map(|u| {
            if self.labels[u].is_some() {
                lattice.grid_distance(unit, u)
            } else {
                f64::INFINITY
            }
        }))?;
        self.label(nearest)
    }
}

/// Which winners a sequence contributes: the terminal one, or one per frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EvalOptions {
    pub frame_vote: bool,
}

fn voting_units<M: WinnerModel + ?Sized>(
    model: &M,
    sample: &SequenceSample,
    opts: EvalOptions,
) -> Result<Vec<usize>> {
    if opts.frame_vote {
        model.frame_winners(sample)
    } else {
        Ok(vec![model.terminal_winner(sample)?])
    }
}

pub fn calibrate<M: WinnerModel + ?Sized>(
    model: &M,
    train: &[SequenceSample],
    opts: EvalOptions,
) -> Result<UnitLabelMap> {
    if train.is_empty() {
        return Err(Error::Empty("calibration data"));
    }
    let hits = train
        .iter()
        .map(|s| Ok((s.label.as_str(), voting_units(model, s, opts)?)))
        .collect::<Result<Vec<_>>>()?;
    UnitLabelMap::from_hits(model.lattice().len(), hits)
}

/// Label from the winning units: the resolved label of a single winner, or
/// the majority over per-frame labels (ties lexicographic).
pub fn predict_from_units(labels: &UnitLabelMap, lattice: &Lattice, units: &[usize]) -> String {
    let mut votes: BTreeMap<&str, usize> = BTreeMap::new();
    for &u in units {
        if let Some(l) = labels.resolve(u, lattice) {
            *votes.entry(l).or_default() += 1;
        }
    }
    let Some(best) = votes.values().copied().max() else {
        return REJECTED.to_string();
    };
    votes
        .into_iter()
        .find(|&(_, n)| n == best)
        .map(|(l, _)| l.to_string())
        .unwrap_or_else(|| REJECTED.to_string())
}

pub fn classify<M: WinnerModel + ?Sized>(
    model: &M,
    labels: &UnitLabelMap,
    sample: &SequenceSample,
    opts: EvalOptions,
) -> Result<String> {
    let units = voting_units(model, sample, opts)?;
    Ok(predict_from_units(labels, model.lattice(), &units))
}

/// How labels are grouped into the classes a report is broken down by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClassMap {
    /// Each label is its own class.
    #[default]
    Label,
    /// Phones grouped into macro-classes.
    Macro,
}

impl std::str::FromStr for ClassMap {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "label" => Ok(ClassMap::Label),
            "macro" => Ok(ClassMap::Macro),
            other => Err(Error::invalid(
                "eval.class_map",
                format!("expected `label` or `macro`, got `{other}`"),
            )),
        }
    }
}

impl ClassMap {
    pub fn true_class(self, sample: &SequenceSample) -> Result<String> {
        match self {
            ClassMap::Label => Ok(sample.label.clone()),
            ClassMap::Macro => match &sample.macro_class {
                Some(c) => Ok(c.clone()),
                None => Ok(macro_class(&sample.label)?.to_string()),
            },
        }
    }

    pub fn predicted_class(self, label: &str) -> String {
        match self {
            ClassMap::Macro if label != REJECTED => {
                macro_class(label).map_or_else(|_| label.to_string(), str::to_string)
            }
            _ => label.to_string(),
        }
    }

    /// Classes a report should list even when absent from the data.
    pub fn expected_classes(self) -> Vec<String> {
        match self {
            ClassMap::Label => Vec::new(),
            ClassMap::Macro => crate::corpus::macro_class_names()
                .map(str::to_string)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassRow {
    pub class: String,
    pub correct: usize,
    pub total: usize,
    /// percent
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    /// Sorted by class name.
    pub rows: Vec<ClassRow>,
    /// Unweighted mean of the row rates.
    pub average: f64,
    /// Expected classes with no samples; excluded from the average.
    pub empty_classes: Vec<String>,
    /// `(true, predicted) -> count`
    pub confusion: BTreeMap<(String, String), usize>,
}

pub fn average_rate(rates: &[f64]) -> Result<f64> {
    if rates.is_empty() {
        return Err(Error::Empty("class rates"));
    }
    Ok(rates.iter().sum::<f64>() / rates.len() as f64)
}

impl EvalReport {
    /// Report over `(true class, predicted class)` pairs.
    pub fn from_pairs<S: AsRef<str>>(pairs: &[(S, S)], expected: &[String]) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Empty("evaluation data"));
        }
        let mut counts: BTreeMap<String, (usize, usize)> = BTreeMap::new();
        let mut confusion = BTreeMap::new();
        for (t, p) in pairs {
            let (t, p) = (t.as_ref(), p.as_ref());
            let c = counts.entry(t.to_string()).or_default();
            c.1 += 1;
            if t == p {
                c.0 += 1;
            }
            *confusion.entry((t.to_string(), p.to_string())).or_default() += 1;
        }
        let mut report = Self::from_counts(
            counts
                .into_iter()
                .map(|(class, (correct, total))| (class, correct, total)),
            expected,
        )?;
        report.confusion = confusion;
        Ok(report)
    }

    /// Report from per-class `(class, correct, total)` counts.
    pub fn from_counts<I>(counts: I, expected: &[String]) -> Result<Self>
    where
        I: IntoIterator<Item = (String, usize, usize)>,
    {
        let mut rows = Vec::new();
        let mut seen = BTreeSet::new();
        for (class, correct, total) in counts {
            if correct > total {
                return Err(Error::invalid(
                    "report",
                    format!("class `{class}` has {correct} correct out of {total}"),
                ));
            }
            seen.insert(class.clone());
            if total > 0 {
                rows.push(ClassRow {
                    rate: 100.0 * correct as f64 / total as f64,
                    class,
                    correct,
                    total,
                });
            }
        }
        rows.sort_by(|a, b| a.class.cmp(&b.class));
        let rates: Vec<f64> = rows.iter().map(|r| r.rate).collect();
        let average = average_rate(&rates)?;
        let present: BTreeSet<&str> = rows.iter().map(|r| r.class.as_str()).collect();
        let empty_classes: Vec<String> = expected
            .iter()
            .cloned()
            .chain(seen)
            .filter(|c| !present.contains(c.as_str()))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        Ok(Self {
            rows,
            average,
            empty_classes,
            confusion: BTreeMap::new(),
        })
    }

    pub fn total(&self) -> usize {
        self.rows.iter().map(|r| r.total).sum()
    }

    pub fn correct(&self) -> usize {
        self.rows.iter().map(|r| r.correct).sum()
    }

    /// Aligned text table with an `Average` row.
    pub fn to_table(&self, title: &str) -> String {
        let width = self
            .rows
            .iter()
            .map(|r| r.class.len())
            .chain([7, "Class".len()])
            .max()
            .unwrap_or(7);
        let mut out = String::new();
        if !title.is_empty() {
            let _ = writeln!(out, "{title}");
        }
        let _ = writeln!(
            out,
            "{:<width$}  {:>8}  {:>7}  {:>7}",
            "Class", "Rate(%)", "Correct", "Total"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<width$}  {:>8.2}  {:>7}  {:>7}",
                r.class, r.rate, r.correct, r.total
            );
        }
        let _ = writeln!(
            out,
            "{:<width$}  {:>8.2}  {:>7}  {:>7}",
            "Average",
            self.average,
            self.correct(),
            self.total()
        );
        if !self.empty_classes.is_empty() {
            let _ = writeln!(out, "No samples: {}", self.empty_classes.join(", "));
        }
        out
    }

    /// CSV `class,correct,total,rate`.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["class", "correct", "total", "rate"])?;
        for r in &self.rows {
            w.write_record([
                r.class.clone(),
                r.correct.to_string(),
                r.total.to_string(),
                r.rate.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// CSV `true,predicted,count`.
    pub fn write_confusion_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["true", "predicted", "count"])?;
        for ((t, p), n) in &self.confusion {
            w.write_record([t.as_str(), p.as_str(), &n.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads `class,correct,total,rate` back into a report.
    pub fn read_csv(input: impl std::io::Read) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let mut counts = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            if rec.len() != 4 {
                return Err(Error::Format(
                    "report rows need class,correct,total,rate".into(),
                ));
            }
            let num = |i: usize| -> Result<usize> {
                rec[i]
                    .parse()
                    .map_err(|_| Error::Format(format!("bad count `{}`", &rec[i])))
            };
            counts.push((rec[0].to_string(), num(1)?, num(2)?));
        }
        Self::from_counts(counts, &[])
    }
}

/// Evaluates `data` against a calibrated map.
pub fn report<M: WinnerModel + ?Sized>(
    model: &M,
    labels: &UnitLabelMap,
    data: &[SequenceSample],
    opts: EvalOptions,
    class_map: ClassMap,
) -> Result<EvalReport> {
    let pairs = data
        .iter()
        .map(|s| {
            let predicted = classify(model, labels, s, opts)?;
            Ok((
                class_map.true_class(s)?,
                class_map.predicted_class(&predicted),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    EvalReport::from_pairs(&pairs, &class_map.expected_classes())
}

/// Side-by-side rates of several reports (one column per report), with an
/// `Average` row.
pub fn combined_table(reports: &[(String, EvalReport)]) -> String {
    let classes: BTreeSet<&str> = reports
        .iter()
        .flat_map(|(_, r)| r.rows.iter().map(|row| row.class.as_str()))
        .collect();
    let width = classes
        .iter()
        .map(|c| c.len())
        .chain([7, 5])
        .max()
        .unwrap_or(7);
    let col = reports
        .iter()
        .map(|(n, _)| n.len())
        .chain([8])
        .max()
        .unwrap_or(8);
    let mut out = String::new();
    let _ = write!(out, "{:<width$}", "Class");
    for (name, _) in reports {
        let _ = write!(out, "  {name:>col$}");
    }
    out.push('\n');
    let cell = |r: &EvalReport, class: &str| {
        r.rows
            .iter()
            .find(|row| row.class == class)
            .map_or_else(|| "-".to_string(), |row| format!("{:.2}", row.rate))
    };
    for class in &classes {
        let _ = write!(out, "{class:<width$}");
        for (_, r) in reports {
            let _ = write!(out, "  {:>col$}", cell(r, class));
        }
        out.push('\n');
    }
    let _ = write!(out, "{:<width$}", "Average");
    for (_, r) in reports {
        let _ = write!(out, "  {:>col$.2}", r.average);
    }
    out.push('\n');
    out
}
