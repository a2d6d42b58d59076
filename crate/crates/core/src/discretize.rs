//! Mean ± σ discretization of continuous trait scores.
//!
//! `alpha = mean - sigma`, `beta = mean + sigma`, with the population
//! standard deviation. Scores below `alpha` are low, above `beta` high, and
//! the closed interval `[alpha, beta]` is mid.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::inventory::Dimension;
use crate::io;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassLabel {
    Low,
    Mid,
    High,
}

impl ClassLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::Low => "low",
            ClassLabel::Mid => "mid",
            ClassLabel::High => "high",
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "low" => Ok(ClassLabel::Low),
            "mid" => Ok(ClassLabel::Mid),
            "high" => Ok(ClassLabel::High),
            _ => Err(Error::validation("label", format!("unknown class label {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "3class")]
    ThreeClass,
    #[serde(rename = "2class")]
    TwoClass,
}

impl Mode {
    pub fn classes(self) -> &'static [ClassLabel] {
        match self {
            Mode::ThreeClass => &[ClassLabel::Low, ClassLabel::Mid, ClassLabel::High],
            Mode::TwoClass => &[ClassLabel::Low, ClassLabel::High],
        }
    }

    pub fn class_names(self) -> Vec<String> {
        self.classes().iter().map(|c| c.as_str().to_owned()).collect()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::ThreeClass => "3class",
            Mode::TwoClass => "2class",
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "3class" => Ok(Mode::ThreeClass),
            "2class" => Ok(Mode::TwoClass),
            _ => Err(Error::validation("mode", format!("expected 3class or 2class, got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub dimension: Dimension,
    pub mean: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Thresholds {
    pub fn from_moments(dimension: Dimension, mean: f64, sigma: f64) -> Self {
        Thresholds {
            dimension,
            mean,
            sigma,
            alpha: mean - sigma,
            beta: mean + sigma,
        }
    }

    /// Same thresholds moved by `c`.
    pub fn shifted(&self, c: f64) -> Self {
        Self::from_moments(self.dimension, self.mean + c, self.sigma)
    }
}

pub fn compute_thresholds(dimension: Dimension, scores: &[f64]) -> Result<Thresholds> {
    if scores.is_empty() {
        return Err(Error::validation(
            format!("scores for {dimension}"),
            "cannot compute thresholds of an empty score list",
        ));
    }
    let n = scores.len() as f64;
    let rough = scores.iter().sum::<f64>() / n;
    let mean = rough + scores.iter().map(|x| x - rough).sum::<f64>() / n;
    let var = scores.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    Ok(Thresholds::from_moments(dimension, mean, var.sqrt()))
}

pub fn bin_score(score: f64, t: &Thresholds) -> ClassLabel {
    if score < t.alpha {
        ClassLabel::Low
    } else if score > t.beta {
        ClassLabel::High
    } else {
        ClassLabel::Mid
    }
}

pub fn bin_scores(scores: &[f64], t: &Thresholds) -> Vec<ClassLabel> {
    scores.iter().map(|&s| bin_score(s, t)).collect()
}

/// Label counts in low, mid, high order.
pub fn class_counts(labels: &[ClassLabel]) -> [usize; 3] {
    let mut out = [0; 3];
    for l in labels {
        out[*l as usize] += 1;
    }
    out
}

/// Drops mid-labelled samples, keeping order.
pub fn filter_two_class<T: Clone>(
    labels: &[ClassLabel],
    vectors: &[T],
) -> Result<(Vec<ClassLabel>, Vec<T>)> {
    if labels.len() != vectors.len() {
        return Err(Error::validation(
            "labels",
            format!("{} labels for {} samples", labels.len(), vectors.len()),
        ));
    }
    Ok(labels
        .iter()
        .zip(vectors)
        .filter(|(l, _)| **l != ClassLabel::Mid)
        .map(|(l, v)| (*l, v.clone()))
        .unzip())
}

/// Class labels per participant and dimension, as stored in a labels CSV
/// (`participant_id,E,A,C,N,O`). An empty cell means no label, which is how
/// two-class files record mid samples.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LabelTable {
    pub ids: Vec<String>,
    pub labels: Vec<[Option<ClassLabel>; 5]>,
}

impl LabelTable {
    /// Labels every participant in every dimension with its thresholds;
    /// two-class mode leaves mid cells empty.
    pub fn from_scores(
        scores: &[crate::inventory::ScoredParticipant],
        thresholds: &[Thresholds],
        mode: Mode,
    ) -> Self {
        let mut table = LabelTable::default();
        for p in scores {
            let mut row = [None; 5];
            for t in thresholds {
                let label = bin_score(p.score.get(t.dimension), t);
                if mode == Mode::ThreeClass || label != ClassLabel::Mid {
                    row[t.dimension.index()] = Some(label);
                }
            }
            table.ids.push(p.participant_id.clone());
            table.labels.push(row);
        }
        table
    }

    pub fn get(&self, id: &str, dim: Dimension) -> Option<Option<ClassLabel>> {
        self.ids
            .iter()
            .position(|x| x == id)
            .map(|i| self.labels[i][dim.index()])
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut header = vec!["participant_id".to_owned()];
        header.extend(Dimension::ALL.iter().map(|d| d.letter().to_owned()));
        let rows: Vec<Vec<String>> = self
            .ids
            .iter()
            .zip(&self.labels)
            .map(|(id, row)| {
                std::iter::once(id.clone())
                    .chain(row.iter().map(|l| l.map(|l| l.as_str().to_owned()).unwrap_or_default()))
                    .collect()
            })
            .collect();
        io::csv_bytes(&header, &rows)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let (header, rows) = io::read_csv(path)?;
        let expected: Vec<&str> = std::iter::once("participant_id")
            .chain(Dimension::ALL.iter().map(|d| d.letter()))
            .collect();
        if header != expected {
            return Err(io::row_error(path, 1, format!("expected header {}", expected.join(","))));
        }
        let mut table = LabelTable::default();
        for (line, rec) in rows {
            let mut row = [None; 5];
            for (d, slot) in row.iter_mut().enumerate() {
                let cell = rec.get(d + 1).unwrap_or_default();
                if !cell.is_empty() {
                    *slot = Some(
                        cell.parse()
                            .map_err(|e: Error| io::row_error(path, line, format!("{}: {e}", expected[d + 1])))?,
                    );
                }
            }
            table.ids.push(rec.get(0).unwrap_or_default().to_owned());
            table.labels.push(row);
        }
        Ok(table)
    }
}

/// Thresholds file contents: the mode the labels were produced for and one
/// entry per dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSet {
    pub mode: Mode,
    pub thresholds: Vec<Thresholds>,
}

impl ThresholdSet {
    pub fn get(&self, dim: Dimension) -> Option<&Thresholds> {
        self.thresholds.iter().find(|t| t.dimension == dim)
    }
}
