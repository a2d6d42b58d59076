use serde::{Deserialize, Serialize};

use super::{entropy_of, ColumnKind, Dataset, TrainParams};

/// Gains and gain ratios closer than this are treated as equal.
pub const TIE_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Split {
    /// `value <= threshold` goes left.
    Numeric { feature: usize, threshold: f64 },
    /// One branch per category observed at the node.
    Categorical { feature: usize },
}

impl Split {
    pub fn feature(&self) -> usize {
        match *self {
            Split::Numeric { feature, .. } | Split::Categorical { feature } => feature,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub split: Split,
    pub gain: f64,
    pub split_info: f64,
    pub gain_ratio: f64,
}

fn score(parent_entropy: f64, total: usize, branches: &[Vec<usize>]) -> (f64, f64) {
    let n = total as f64;
    let mut children = 0.0;
    let mut split_info = 0.0;
    for counts in branches {
        let size: usize = counts.iter().sum();
        if size == 0 {
            continue;
        }
        let w = size as f64 / n;
        children += w * entropy_of(counts, size);
        split_info -= w * w.log2();
    }
    (parent_entropy - children, split_info)
}

fn candidate(split: Split, parent_entropy: f64, total: usize, branches: &[Vec<usize>]) -> Candidate {
    let (gain, split_info) = score(parent_entropy, total, branches);
    let gain_ratio = if split_info > 0.0 { gain / split_info } else { 0.0 };
    Candidate {
        split,
        gain,
        split_info,
        gain_ratio,
    }
}

fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = lo + (hi - lo) / 2.0;
    if m < hi {
        m
    } else {
        lo
    }
}

/// Class counts of the branches `split` induces on the rows in `idx`.
fn branch_counts(data: &Dataset, idx: &[usize], split: &Split) -> Vec<Vec<usize>> {
    let k = data.n_classes();
    match *split {
        Split::Numeric { feature, threshold } => {
            let mut out = vec![vec![0; k]; 2];
            for &i in idx {
                let side = usize::from(data.rows[i][feature] > threshold);
                out[side][data.labels[i]] += 1;
            }
            out
        }
        Split::Categorical { feature } => {
            let n_cat = match &data.columns[feature].kind {
                ColumnKind::Categorical { categories } => categories.len(),
                ColumnKind::Numeric => 0,
            };
            let mut out = vec![vec![0; k]; n_cat];
            for &i in idx {
                out[data.rows[i][feature] as usize][data.labels[i]] += 1;
            }
            out
        }
    }
}

/// Gain ratio of `split` over the whole dataset; 0 when the split puts
/// every row on one branch.
pub fn gain_ratio(data: &Dataset, split: &Split) -> f64 {
    let idx: Vec<usize> = (0..data.len()).collect();
    if idx.is_empty() {
        return 0.0;
    }
    let parent = entropy_of(&data.class_counts(&idx), idx.len());
    candidate(*split, parent, idx.len(), &branch_counts(data, &idx, split)).gain_ratio
}

/// Every admissible split of the rows in `idx`, in column order and, within
/// a numeric column, ascending threshold order.
///
/// A numeric split needs `min_leaf` rows on both sides; a categorical split
/// needs at least two observed categories holding `min_leaf` rows each.
pub fn candidate_splits(data: &Dataset, idx: &[usize], params: &TrainParams) -> Vec<Candidate> {
    let total = idx.len();
    if total == 0 {
        return Vec::new();
    }
    let k = data.n_classes();
    let parent_counts = data.class_counts(idx);
    let parent = entropy_of(&parent_counts, total);
    let min_leaf = params.min_leaf.max(1);
    let mut out = Vec::new();

    for (f, col) in data.columns.iter().enumerate() {
        match &col.kind {
            ColumnKind::Numeric => {
                let mut sorted: Vec<usize> = idx.to_vec();
                sorted.sort_by(|&a, &b| data.rows[a][f].total_cmp(&data.rows[b][f]));
                let mut left = vec![0usize; k];
                let mut right = parent_counts.clone();
                let mut n_left = 0;
                for w in 0..sorted.len() - 1 {
                    let i = sorted[w];
                    left[data.labels[i]] += 1;
                    right[data.labels[i]] -= 1;
                    n_left += 1;
                    let lo = data.rows[i][f];
                    let hi = data.rows[sorted[w + 1]][f];
                    if lo == hi {
                        continue;
                    }
                    if n_left < min_leaf || total - n_left < min_leaf {
                        continue;
                    }
                    let split = Split::Numeric {
                        feature: f,
                        threshold: midpoint(lo, hi),
                    };
                    out.push(candidate(split, parent, total, &[left.clone(), right.clone()]));
                }
            }
            ColumnKind::Categorical { .. } => {
                let split = Split::Categorical { feature: f };
                let branches = branch_counts(data, idx, &split);
                let sizes: Vec<usize> = branches.iter().map(|b| b.iter().sum()).collect();
                let observed = sizes.iter().filter(|&&s| s > 0).count();
                let big = sizes.iter().filter(|&&s| s >= min_leaf).count();
                if observed >= 2 && big >= 2 {
                    out.push(candidate(split, parent, total, &branches));
                }
            }
        }
    }
    out
}

/// Picks the split for the rows in `idx`, or `None` when no candidate has
/// positive gain.
pub(crate) fn select(candidates: &[Candidate], gain_floor: bool) -> Option<Candidate> {
    let positive: Vec<&Candidate> = candidates.iter().filter(|c| c.gain > TIE_EPSILON).collect();
    if positive.is_empty() {
        return None;
    }
    let floor = if gain_floor {
        positive.iter().map(|c| c.gain).sum::<f64>() / positive.len() as f64 - TIE_EPSILON
    } else {
        f64::NEG_INFINITY
    };
    let mut best: Option<&Candidate> = None;
    for c in positive.into_iter().filter(|c| c.gain >= floor) {
        match best {
            Some(b) if c.gain_ratio <= b.gain_ratio + TIE_EPSILON => {}
            _ => best = Some(c),
        }
    }
    best.copied()
}

pub(crate) fn best_split_at(data: &Dataset, idx: &[usize], params: &TrainParams) -> Option<Candidate> {
    select(&candidate_splits(data, idx, params), params.gain_floor)
}

/// Best split over the whole dataset, with the feature name.
pub fn best_split(data: &Dataset, params: &TrainParams) -> Option<(String, Split)> {
    let idx: Vec<usize> = (0..data.len()).collect();
    best_split_at(data, &idx, params).map(|c| (data.columns[c.split.feature()].name.clone(), c.split))
}

pub(crate) fn partition(data: &Dataset, idx: &[usize], split: &Split) -> Vec<(Option<usize>, Vec<usize>)> {
    match *split {
        Split::Numeric { feature, threshold } => {
            let (le, gt): (Vec<usize>, Vec<usize>) =
                idx.iter().partition(|&&i| data.rows[i][feature] <= threshold);
            vec![(None, le), (None, gt)]
        }
        Split::Categorical { feature } => {
            let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
            for &i in idx {
                groups.entry(data.rows[i][feature] as usize).or_default().push(i);
            }
            groups.into_iter().map(|(c, rows)| (Some(c), rows)).collect()
        }
    }
}
