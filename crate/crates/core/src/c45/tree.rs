use std::collections::VecDeque;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::prune::prune;
use super::split::{best_split_at, partition, Split};
use super::{majority, Column, ColumnKind, Dataset, TrainParams};
use crate::io;
use crate::{Error, Result};

pub const MODEL_FORMAT: &str = "persona-c45/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryBranch {
    pub category: String,
    pub node: TreeNode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase")]
pub enum TreeNode {
    Leaf {
        class: usize,
        /// Training rows per class that reached this leaf.
        distribution: Vec<usize>,
    },
    Numeric {
        feature: String,
        feature_index: usize,
        threshold: f64,
        distribution: Vec<usize>,
        le: Box<TreeNode>,
        gt: Box<TreeNode>,
    },
    Categorical {
        feature: String,
        feature_index: usize,
        distribution: Vec<usize>,
        branches: Vec<CategoryBranch>,
        /// Branch taken by categories not seen in training: the one that
        /// received the most training rows.
        fallback: usize,
    },
}

impl TreeNode {
    pub fn leaf(distribution: Vec<usize>) -> Self {
        TreeNode::Leaf {
            class: majority(&distribution),
            distribution,
        }
    }

    pub fn distribution(&self) -> &[usize] {
        match self {
            TreeNode::Leaf { distribution, .. }
            | TreeNode::Numeric { distribution, .. }
            | TreeNode::Categorical { distribution, .. } => distribution,
        }
    }

    pub fn children(&self) -> Vec<&TreeNode> {
        match self {
            TreeNode::Leaf { .. } => Vec::new(),
            TreeNode::Numeric { le, gt, .. } => vec![le, gt],
            TreeNode::Categorical { branches, .. } => branches.iter().map(|b| &b.node).collect(),
        }
    }

    pub fn feature(&self) -> Option<&str> {
        match self {
            TreeNode::Leaf { .. } => None,
            TreeNode::Numeric { feature, .. } | TreeNode::Categorical { feature, .. } => Some(feature),
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().iter().map(|c| c.node_count()).sum::<usize>()
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            _ => self.children().iter().map(|c| c.leaf_count()).sum(),
        }
    }

    pub fn depth(&self) -> usize {
        self.children().iter().map(|c| 1 + c.depth()).max().unwrap_or(0)
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, TreeNode::Leaf { .. })
    }
}

fn grow_node(data: &Dataset, idx: &[usize], depth: usize, params: &TrainParams) -> TreeNode {
    let distribution = data.class_counts(idx);
    let pure = distribution.iter().filter(|&&c| c > 0).count() <= 1;
    let too_small = idx.len() < 2 * params.min_leaf;
    let at_limit = params.max_depth.is_some_and(|d| depth >= d);
    if pure || too_small || at_limit {
        return TreeNode::leaf(distribution);
    }
    let Some(best) = best_split_at(data, idx, params) else {
        return TreeNode::leaf(distribution);
    };
    let feature_index = best.split.feature();
    let feature = data.columns[feature_index].name.clone();
    let parts = partition(data, idx, &best.split);
    match best.split {
        Split::Numeric { threshold, .. } => {
            let mut parts = parts.into_iter();
            let (_, le_idx) = parts.next().expect("two partitions");
            let (_, gt_idx) = parts.next().expect("two partitions");
            TreeNode::Numeric {
                feature,
                feature_index,
                threshold,
                distribution,
                le: Box::new(grow_node(data, &le_idx, depth + 1, params)),
                gt: Box::new(grow_node(data, &gt_idx, depth + 1, params)),
            }
        }
        Split::Categorical { .. } => {
            let categories = match &data.columns[feature_index].kind {
                ColumnKind::Categorical { categories } => categories,
                ColumnKind::Numeric => unreachable!("categorical split on numeric column"),
            };
            let mut fallback = 0;
            let mut largest = 0;
            let branches = parts
                .into_iter()
                .enumerate()
                .map(|(b, (cat, rows))| {
                    if rows.len() > largest {
                        largest = rows.len();
                        fallback = b;
                    }
                    CategoryBranch {
                        category: categories[cat.expect("category branch")].clone(),
                        node: grow_node(data, &rows, depth + 1, params),
                    }
                })
                .collect();
            TreeNode::Categorical {
                feature,
                feature_index,
                distribution,
                branches,
                fallback,
            }
        }
    }
}

/// Grows an unpruned tree.
pub fn grow_tree(data: &Dataset, params: &TrainParams) -> Result<TreeNode> {
    params.validate()?;
    if data.is_empty() {
        return Err(Error::validation("dataset", "cannot grow a tree on an empty dataset"));
    }
    let idx: Vec<usize> = (0..data.len()).collect();
    Ok(grow_node(data, &idx, 0, params))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub format: String,
    /// Feature schema version the columns came from, if any.
    pub schema_version: Option<String>,
    pub dimension: Option<String>,
    pub mode: Option<String>,
    pub params: TrainParams,
    pub classes: Vec<String>,
    pub features: Vec<Column>,
    pub root: TreeNode,
}

/// Grows and, unless disabled in `params`, prunes a tree.
pub fn train(data: &Dataset, params: &TrainParams) -> Result<TreeModel> {
    let grown = grow_tree(data, params)?;
    let root = if params.prune {
        prune(&grown, data, params.cf)
    } else {
        grown
    };
    Ok(TreeModel {
        format: MODEL_FORMAT.to_owned(),
        schema_version: None,
        dimension: None,
        mode: None,
        params: *params,
        classes: data.classes.clone(),
        features: data.columns.clone(),
        root,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathStep {
    pub feature: String,
    pub decision: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    pub class: usize,
    pub label: String,
    pub path: Vec<PathStep>,
}

impl TreeModel {
    pub fn predict(&self, row: &[f64]) -> Result<Prediction> {
        if row.len() != self.features.len() {
            return Err(Error::SchemaMismatch {
                expected: format!("{} features", self.features.len()),
                found: format!("{} values", row.len()),
            });
        }
        let mut node = &self.root;
        let mut path = Vec::new();
        loop {
            match node {
                TreeNode::Leaf { class, .. } => {
                    return Ok(Prediction {
                        class: *class,
                        label: self.classes[*class].clone(),
                        path,
                    });
                }
                TreeNode::Numeric {
                    feature,
                    feature_index,
                    threshold,
                    le,
                    gt,
                    ..
                } => {
                    let x = row[*feature_index];
                    let (op, next) = if x <= *threshold { ("<=", le) } else { (">", gt) };
                    path.push(PathStep {
                        feature: feature.clone(),
                        decision: format!("{op} {threshold}"),
                    });
                    node = next;
                }
                TreeNode::Categorical {
                    feature,
                    feature_index,
                    branches,
                    fallback,
                    ..
                } => {
                    let name = match &self.features[*feature_index].kind {
                        ColumnKind::Categorical { categories } => {
                            let x = row[*feature_index];
                            (x >= 0.0 && x.fract() == 0.0)
                                .then(|| categories.get(x as usize))
                                .flatten()
                                .cloned()
                                .unwrap_or_else(|| x.to_string())
                        }
                        ColumnKind::Numeric => row[*feature_index].to_string(),
                    };
                    let hit = branches.iter().position(|b| b.category == name);
                    let decision = match hit {
                        Some(_) => format!("= {name}"),
                        None => format!("= {name} (unseen, to {})", branches[*fallback].category),
                    };
                    path.push(PathStep {
                        feature: feature.clone(),
                        decision,
                    });
                    node = &branches[hit.unwrap_or(*fallback)].node;
                }
            }
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        io::write_atomic(path, &io::to_pretty_json(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let model: TreeModel = io::read_json(path)?;
        if model.format != MODEL_FORMAT {
            return Err(Error::SchemaMismatch {
                expected: MODEL_FORMAT.to_owned(),
                found: model.format,
            });
        }
        Ok(model)
    }
}

/// Split features at depths below `depth_limit`, breadth first, each
/// feature listed once at its shallowest depth.
pub fn top_features(tree: &TreeNode, depth_limit: usize) -> Vec<(usize, String)> {
    let mut out: Vec<(usize, String)> = Vec::new();
    let mut queue = VecDeque::from([(0usize, tree)]);
    while let Some((depth, node)) = queue.pop_front() {
        if depth >= depth_limit {
            continue;
        }
        if let Some(f) = node.feature() {
            if !out.iter().any(|(_, g)| g == f) {
                out.push((depth, f.to_owned()));
            }
        }
        for child in node.children() {
            queue.push_back((depth + 1, child));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classes(k: usize) -> Vec<String> {
        (0..k).map(|c| format!("c{c}")).collect()
    }

    /// Four points in XOR quadrants. On the exact unit lattice every split
    /// has zero gain, so the points are jittered off the lattice.
    pub(crate) fn jittered_xor() -> Dataset {
        Dataset::new(
            vec![Column::numeric("a"), Column::numeric("b")],
            vec![vec![0.1, 0.2], vec![0.2, 0.9], vec![0.9, 0.1], vec![0.8, 0.95]],
            vec![0, 1, 1, 0],
            classes(2),
        )
        .unwrap()
    }

    #[test]
    fn pure_dataset_is_single_leaf() {
        let data = Dataset::new(
            vec![Column::numeric("x")],
            vec![vec![1.0], vec![2.0], vec![3.0]],
            vec![1, 1, 1],
            classes(2),
        )
        .unwrap();
        let t = grow_tree(&data, &TrainParams::default()).unwrap();
        assert_eq!(
            t,
            TreeNode::Leaf {
                class: 1,
                distribution: vec![0, 3]
            }
        );
    }

    #[test]
    fn empty_dataset_is_error() {
        let data = Dataset::new(vec![Column::numeric("x")], vec![], vec![], classes(2)).unwrap();
        assert!(grow_tree(&data, &TrainParams::default()).is_err());
    }

    #[test]
    fn xor_depth_two_fits_exactly() {
        let data = jittered_xor();
        let p = TrainParams {
            min_leaf: 1,
            prune: false,
            ..Default::default()
        };
        let model = train(&data, &p).unwrap();
        // a <= 0.15 isolates the first point, then b <= 0.925 splits the rest.
        assert_eq!(model.root.depth(), 2);
        assert_eq!(top_features(&model.root, 2), vec![(0, "a".into()), (1, "b".into())]);
        for (row, &y) in data.rows.iter().zip(&data.labels) {
            assert_eq!(model.predict(row).unwrap().class, y);
        }
    }

    #[test]
    fn lattice_xor_has_no_positive_gain_split() {
        let data = Dataset::new(
            vec![Column::numeric("a"), Column::numeric("b")],
            vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]],
            vec![0, 1, 1, 0],
            classes(2),
        )
        .unwrap();
        let p = TrainParams { min_leaf: 1, ..Default::default() };
        assert!(grow_tree(&data, &p).unwrap().is_leaf());
    }

    #[test]
    fn numeric_boundary_goes_left() {
        let data = Dataset::new(
            vec![Column::numeric("x")],
            vec![vec![1.0], vec![2.0], vec![3.0], vec![4.0]],
            vec![0, 0, 1, 1],
            classes(2),
        )
        .unwrap();
        let m = train(&data, &TrainParams { min_leaf: 1, prune: false, ..Default::default() }).unwrap();
        let p = m.predict(&[2.5]).unwrap();
        assert_eq!(p.class, 0);
        assert_eq!(p.path.len(), 1);
        assert_eq!(p.path[0].decision, "<= 2.5");
        assert_eq!(m.predict(&[2.5000001]).unwrap().class, 1);
        assert!(m.predict(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn single_leaf_prediction_has_empty_path() {
        let data = Dataset::new(vec![Column::numeric("x")], vec![vec![1.0]], vec![0], classes(3)).unwrap();
        let m = train(&data, &TrainParams::default()).unwrap();
        let p = m.predict(&[9.0]).unwrap();
        assert_eq!(p.label, "c0");
        assert!(p.path.is_empty());
        assert!(top_features(&m.root, 2).is_empty());
    }

    #[test]
    fn unseen_category_uses_fallback() {
        let col = Column::categorical("c", &["a", "b", "z"]);
        let data = Dataset::new(
            vec![col],
            vec![vec![0.0], vec![0.0], vec![0.0], vec![1.0], vec![1.0]],
            vec![0, 0, 0, 1, 1],
            classes(2),
        )
        .unwrap();
        let m = train(&data, &TrainParams { min_leaf: 1, prune: false, ..Default::default() }).unwrap();
        let p = m.predict(&[2.0]).unwrap();
        assert_eq!(p.class, 0);
        assert!(p.path[0].decision.contains("unseen"));
    }

    #[test]
    fn top_features_breadth_first() {
        let leaf = |c| TreeNode::leaf(if c == 0 { vec![1, 0] } else { vec![0, 1] });
        let tree = TreeNode::Numeric {
            feature: "root".into(),
            feature_index: 0,
            threshold: 1.0,
            distribution: vec![2, 2],
            le: Box::new(TreeNode::Numeric {
                feature: "left".into(),
                feature_index: 1,
                threshold: 1.0,
                distribution: vec![1, 1],
                le: Box::new(leaf(0)),
                gt: Box::new(TreeNode::Numeric {
                    feature: "deep".into(),
                    feature_index: 2,
                    threshold: 0.0,
                    distribution: vec![0, 1],
                    le: Box::new(leaf(1)),
                    gt: Box::new(leaf(1)),
                }),
            }),
            gt: Box::new(TreeNode::Numeric {
                feature: "right".into(),
                feature_index: 3,
                threshold: 1.0,
                distribution: vec![1, 1],
                le: Box::new(leaf(0)),
                gt: Box::new(leaf(1)),
            }),
        };
        assert_eq!(
            top_features(&tree, 2),
            vec![(0, "root".to_string()), (1, "left".to_string()), (1, "right".to_string())]
        );
    }
}
