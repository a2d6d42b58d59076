//! Stratified k-fold cross-validation and precision/recall/F reporting.
//!
//! Confusion matrices are pooled across folds before any metric is taken.
//! Weighted averages use true-class support as weights, so weighted recall
//! equals pooled accuracy.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::c45::{train, Dataset, TrainParams, TreeModel};
use crate::discretize::{bin_score, compute_thresholds, ClassLabel, Mode, Thresholds};
use crate::inventory::Dimension;
use crate::io;
use crate::{Error, Result};

/// Fold index for every sample.
///
/// Samples are shuffled within each class, then dealt round-robin with one
/// counter that carries over from class to class. Fold sizes and per-class
/// fold counts therefore differ by at most one.
pub fn stratified_folds(labels: &[usize], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::validation("folds", format!("need at least 2 folds, got {k}")));
    }
    if k > labels.len() {
        return Err(Error::validation(
            "folds",
            format!("{k} folds for {} samples", labels.len()),
        ));
    }
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut by_class = vec![Vec::new(); n_classes];
    for (i, &l) in labels.iter().enumerate() {
        by_class[l].push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![0; labels.len()];
    let mut next = 0;
    for members in &mut by_class {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            folds[i] = next % k;
            next += 1;
        }
    }
    Ok(folds)
}

/// Counts indexed by (true class, predicted class).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<String>,
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn new(classes: Vec<String>) -> Self {
        let k = classes.len();
        ConfusionMatrix {
            classes,
            counts: vec![vec![0; k]; k],
        }
    }

    pub fn from_counts(classes: Vec<String>, counts: Vec<Vec<usize>>) -> Result<Self> {
        if counts.len() != classes.len() || counts.iter().any(|r| r.len() != classes.len()) {
            return Err(Error::validation(
                "counts",
                format!("confusion matrix must be {0}x{0}", classes.len()),
            ));
        }
        Ok(ConfusionMatrix { classes, counts })
    }

    pub fn record(&mut self, truth: usize, predicted: usize) {
        self.counts[truth][predicted] += 1;
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for (row, other_row) in self.counts.iter_mut().zip(&other.counts) {
            for (c, o) in row.iter_mut().zip(other_row) {
                *c += o;
            }
        }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn support(&self, class: usize) -> usize {
        self.counts[class].iter().sum()
    }

    pub fn accuracy(&self) -> f64 {
        let diag: usize = (0..self.classes.len()).map(|i| self.counts[i][i]).sum();
        ratio(diag as f64, self.total() as f64)
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f_measure(precision: f64, recall: f64) -> f64 {
    ratio(2.0 * precision * recall, precision + recall)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: String,
    pub support: usize,
    pub precision: f64,
    pub recall: f64,
    pub f: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub dimension: String,
    pub per_class: Vec<ClassMetrics>,
    pub precision: f64,
    pub recall: f64,
    pub f: f64,
}

/// Per-class and support-weighted precision, recall and F.
pub fn prf(cm: &ConfusionMatrix, dimension: &str) -> MetricsRow {
    let k = cm.classes.len();
    let total = cm.total() as f64;
    let per_class: Vec<ClassMetrics> = (0..k)
        .map(|c| {
            let tp = cm.counts[c][c] as f64;
            let predicted: usize = (0..k).map(|t| cm.counts[t][c]).sum();
            let support = cm.support(c);
            let precision = ratio(tp, predicted as f64);
            let recall = ratio(tp, support as f64);
            ClassMetrics {
                class: cm.classes[c].clone(),
                support,
                precision,
                recall,
                f: f_measure(precision, recall),
            }
        })
        .collect();
    let weighted = |g: fn(&ClassMetrics) -> f64| {
        ratio(per_class.iter().map(|m| m.support as f64 * g(m)).sum(), total)
    };
    MetricsRow {
        dimension: dimension.to_owned(),
        precision: weighted(|m| m.precision),
        recall: weighted(|m| m.recall),
        f: weighted(|m| m.f),
        per_class,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvOutcome {
    pub metrics: MetricsRow,
    pub confusion: ConfusionMatrix,
    pub folds: Vec<usize>,
    /// One model per fold, in fold order.
    pub trees: Vec<TreeModel>,
}

fn check_training_classes(data: &Dataset, train_idx: &[usize], fold: usize, k: usize) -> Result<()> {
    let all = data.class_counts(&(0..data.len()).collect::<Vec<_>>());
    let seen = data.class_counts(train_idx);
    for (c, (&total, &in_train)) in all.iter().zip(&seen).enumerate() {
        if total > 0 && in_train == 0 {
            return Err(Error::EmptyTrainingClass {
                fold,
                class: data.classes[c].clone(),
                folds: k,
            });
        }
    }
    Ok(())
}

fn fold_split(folds: &[usize], fold: usize) -> (Vec<usize>, Vec<usize>) {
    (0..folds.len()).partition(|&i| folds[i] != fold)
}

fn reduce(
    dimension: &str,
    classes: Vec<String>,
    folds: Vec<usize>,
    results: Vec<(TreeModel, ConfusionMatrix)>,
) -> CvOutcome {
    let mut confusion = ConfusionMatrix::new(classes);
    let mut trees = Vec::with_capacity(results.len());
    for (tree, cm) in results {
        confusion.merge(&cm);
        trees.push(tree);
    }
    CvOutcome {
        metrics: prf(&confusion, dimension),
        confusion,
        folds,
        trees,
    }
}

/// k-fold cross-validation with fixed labels. Folds run in parallel and
/// are reduced in fold order.
pub fn cross_validate(
    data: &Dataset,
    dimension: &str,
    k: usize,
    params: &TrainParams,
    seed: u64,
) -> Result<CvOutcome> {
    params.validate()?;
    let folds = stratified_folds(&data.labels, k, seed)?;
    let results = (0..k)
        .into_par_iter()
        .map(|fold| {
            let (train_idx, test_idx) = fold_split(&folds, fold);
            check_training_classes(data, &train_idx, fold, k)?;
            let model = train(&data.subset(&train_idx), params)?;
            let mut cm = ConfusionMatrix::new(data.classes.clone());
            for &i in &test_idx {
                cm.record(data.labels[i], model.predict(&data.rows[i])?.class);
            }
            Ok((model, cm))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(reduce(dimension, data.classes.clone(), folds, results))
}

fn class_index(mode: Mode, label: ClassLabel) -> Option<usize> {
    mode.classes().iter().position(|&c| c == label)
}

/// Cross-validation that recomputes the discretization thresholds on each
/// training fold and bins the held-out scores with them.
///
/// `data.labels` are ignored except for stratification; pass labels from
/// global thresholds there. In two-class mode, samples binned as mid are
/// dropped from both the training and the test side of each fold.
pub fn cross_validate_per_fold(
    data: &Dataset,
    scores: &[f64],
    dimension: Dimension,
    mode: Mode,
    k: usize,
    params: &TrainParams,
    seed: u64,
) -> Result<CvOutcome> {
    params.validate()?;
    if scores.len() != data.len() {
        return Err(Error::validation(
            "scores",
            format!("{} scores for {} samples", scores.len(), data.len()),
        ));
    }
    let folds = stratified_folds(&data.labels, k, seed)?;
    let classes = mode.class_names();
    let results = (0..k)
        .into_par_iter()
        .map(|fold| {
            let (train_idx, test_idx) = fold_split(&folds, fold);
            let train_scores: Vec<f64> = train_idx.iter().map(|&i| scores[i]).collect();
            let t = compute_thresholds(dimension, &train_scores)?;
            let relabel = |idx: &[usize], t: &Thresholds| -> (Vec<usize>, Vec<usize>) {
                idx.iter()
                    .filter_map(|&i| class_index(mode, bin_score(scores[i], t)).map(|c| (i, c)))
                    .unzip()
            };
            let (kept, labels) = relabel(&train_idx, &t);
            let mut train_data = data.subset(&kept);
            train_data.labels = labels;
            train_data.classes = classes.clone();
            let kept_all: Vec<usize> = (0..train_data.len()).collect();
            check_training_classes(&train_data, &kept_all, fold, k)?;
            let model = train(&train_data, params)?;
            let mut cm = ConfusionMatrix::new(classes.clone());
            let (test_kept, test_labels) = relabel(&test_idx, &t);
            for (i, truth) in test_kept.into_iter().zip(test_labels) {
                cm.record(truth, model.predict(&data.rows[i])?.class);
            }
            Ok((model, cm))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(reduce(dimension.letter(), classes, folds, results))
}

pub fn metrics_csv(rows: &[MetricsRow]) -> Result<Vec<u8>> {
    let header: Vec<String> = ["dimension", "class", "support", "precision", "recall", "f_value"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut out = Vec::new();
    for row in rows {
        let support: usize = row.per_class.iter().map(|m| m.support).sum();
        out.push(vec![
            row.dimension.clone(),
            "weighted".to_owned(),
            support.to_string(),
            io::fmt_f64(row.precision),
            io::fmt_f64(row.recall),
            io::fmt_f64(row.f),
        ]);
        for m in &row.per_class {
            out.push(vec![
                row.dimension.clone(),
                m.class.clone(),
                m.support.to_string(),
                io::fmt_f64(m.precision),
                io::fmt_f64(m.recall),
                io::fmt_f64(m.f),
            ]);
        }
    }
    io::csv_bytes(&header, &out)
}

/// Aligned text table: one weighted row per dimension followed by its
/// per-class rows.
pub fn metrics_table(rows: &[MetricsRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<10} {:>7} {:>7} {:>8}", "DIMENSION", "P", "R", "F-VALUE");
    for row in rows {
        let _ = writeln!(
            s,
            "{:<10} {:>7.3} {:>7.3} {:>8.3}",
            row.dimension, row.precision, row.recall, row.f
        );
        for m in &row.per_class {
            let _ = writeln!(
                s,
                "  {:<8} {:>7.3} {:>7.3} {:>8.3}  (n={})",
                m.class, m.precision, m.recall, m.f, m.support
            );
        }
    }
    s
}

pub fn confusion_json(matrices: &BTreeMap<String, ConfusionMatrix>) -> Result<Vec<u8>> {
    io::to_pretty_json(matrices)
}
