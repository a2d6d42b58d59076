//! C4.5 decision trees.
//!
//! Splits are chosen by gain ratio over numeric (binary, midpoint
//! thresholds) and categorical (multiway) features, restricted to
//! candidates whose information gain reaches the mean gain of all
//! positive-gain candidates. Grown trees are post-pruned by replacing a
//! subtree with a leaf whenever the leaf's pessimistic error estimate is no
//! worse than the subtree's.
//!
//! All ties resolve by column order, then lower threshold, then class order,
//! so training is bit-reproducible.

mod prune;
mod split;
mod tree;

use serde::{Deserialize, Serialize};

pub use prune::{added_errors, pessimistic_errors, prune};
pub use split::{best_split, candidate_splits, gain_ratio, Candidate, Split, TIE_EPSILON};
pub use tree::{
    grow_tree, top_features, train, PathStep, Prediction, TreeModel, TreeNode, MODEL_FORMAT,
};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    /// Cells hold the category index as an integral float.
    Categorical { categories: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    #[serde(flatten)]
    pub kind: ColumnKind,
}

impl Column {
    pub fn numeric(name: &str) -> Self {
        Column {
            name: name.to_owned(),
            kind: ColumnKind::Numeric,
        }
    }

    pub fn categorical(name: &str, categories: &[&str]) -> Self {
        Column {
            name: name.to_owned(),
            kind: ColumnKind::Categorical {
                categories: categories.iter().map(|s| s.to_string()).collect(),
            },
        }
    }

    pub fn is_categorical(&self) -> bool {
        matches!(self.kind, ColumnKind::Categorical { .. })
    }
}

/// Rectangular, fully observed training data with class indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub classes: Vec<String>,
}

impl Dataset {
    pub fn new(
        columns: Vec<Column>,
        rows: Vec<Vec<f64>>,
        labels: Vec<usize>,
        classes: Vec<String>,
    ) -> Result<Self> {
        let data = Dataset {
            columns,
            rows,
            labels,
            classes,
        };
        data.validate()?;
        Ok(data)
    }

    fn validate(&self) -> Result<()> {
        if self.rows.len() != self.labels.len() {
            return Err(Error::validation(
                "labels",
                format!("{} labels for {} rows", self.labels.len(), self.rows.len()),
            ));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != self.columns.len() {
                return Err(Error::validation(
                    format!("rows[{i}]"),
                    format!("{} cells for {} columns", row.len(), self.columns.len()),
                ));
            }
            for (col, &x) in self.columns.iter().zip(row) {
                let ok = match &col.kind {
                    ColumnKind::Numeric => x.is_finite(),
                    ColumnKind::Categorical { categories } => {
                        x >= 0.0 && x.fract() == 0.0 && (x as usize) < categories.len()
                    }
                };
                if !ok {
                    return Err(Error::validation(
                        format!("rows[{i}].{}", col.name),
                        format!("invalid cell value {x}"),
                    ));
                }
            }
            if self.labels[i] >= self.classes.len() {
                return Err(Error::validation(
                    format!("labels[{i}]"),
                    format!("class index {} out of range", self.labels[i]),
                ));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn class_counts(&self, idx: &[usize]) -> Vec<usize> {
        let mut counts = vec![0; self.classes.len()];
        for &i in idx {
            counts[self.labels[i]] += 1;
        }
        counts
    }

    /// Rows selected by `idx`, sharing columns and classes.
    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            columns: self.columns.clone(),
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            classes: self.classes.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainParams {
    /// Minimum samples on at least two branches of any split.
    pub min_leaf: usize,
    /// Pruning confidence factor.
    pub cf: f64,
    pub max_depth: Option<usize>,
    pub prune: bool,
    /// Restrict candidates to those with at least the mean positive gain.
    pub gain_floor: bool,
    /// Reserved for randomized tie handling; training is deterministic.
    pub seed: u64,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            min_leaf: 2,
            cf: 0.25,
            max_depth: None,
            prune: true,
            gain_floor: true,
            seed: 0,
        }
    }
}

impl TrainParams {
    pub fn validate(&self) -> Result<()> {
        if self.min_leaf < 1 {
            return Err(Error::validation("min_leaf", "must be at least 1"));
        }
        if !(self.cf > 0.0 && self.cf < 0.5) {
            return Err(Error::validation("cf", format!("{} not in (0, 0.5)", self.cf)));
        }
        Ok(())
    }
}

/// Shannon entropy in bits of a class-count vector.
pub fn entropy(class_counts: &[usize]) -> Result<f64> {
    let total: usize = class_counts.iter().sum();
    if total == 0 {
        return Err(Error::validation("class_counts", "entropy of an empty distribution"));
    }
    Ok(entropy_of(class_counts, total))
}

pub(crate) fn entropy_of(counts: &[usize], total: usize) -> f64 {
    let n = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum::<f64>()
        + 0.0
}

/// Index of the largest count; ties go to the lower index.
pub(crate) fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (k, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = k;
        }
    }
    best
}
