use statrs::distribution::{ContinuousCDF, Normal};

use super::tree::{CategoryBranch, TreeNode};
use super::{majority, ColumnKind, Dataset};

/// Extra errors to add to `errors` observed among `n` rows so that the
/// total is the upper limit of the binomial error count at confidence `cf`.
///
/// Zero observed errors use the exact binomial bound `n(1 - cf^(1/n))`,
/// fractional counts below one interpolate to it, and everything else uses
/// the normal approximation with a continuity correction of one half.
pub fn added_errors(n: f64, errors: f64, cf: f64) -> f64 {
    if n <= 0.0 {
        return 0.0;
    }
    let exact_zero = || n * (1.0 - (cf.ln() / n).exp());
    if errors < 1e-6 {
        exact_zero()
    } else if errors < 0.9999 {
        let v0 = exact_zero();
        v0 + errors * (added_errors(n, 1.0, cf) - v0)
    } else if errors + 0.5 >= n {
        0.67 * (n - errors)
    } else {
        let z = Normal::standard().inverse_cdf(1.0 - cf);
        let c = z * z;
        let e = errors + 0.5;
        let upper = (e + c / 2.0 + (c * (e * (1.0 - e / n) + c / 4.0)).sqrt()) / (n + c);
        n * upper - errors
    }
}

/// Pessimistic error count: observed errors plus [`added_errors`].
pub fn pessimistic_errors(n: f64, errors: f64, cf: f64) -> f64 {
    errors + added_errors(n, errors, cf)
}

fn leaf_estimate(counts: &[usize], cf: f64) -> f64 {
    let n: usize = counts.iter().sum();
    let errors = n - counts[majority(counts)];
    pessimistic_errors(n as f64, errors as f64, cf)
}

/// Bottom-up subtree replacement: a split node becomes a leaf when the
/// collapsed leaf's pessimistic error on `data` is no larger than the sum
/// over its (already pruned) children. Never adds nodes.
pub fn prune(tree: &TreeNode, data: &Dataset, cf: f64) -> TreeNode {
    let idx: Vec<usize> = (0..data.len()).collect();
    prune_node(tree, data, &idx, cf).0
}

fn route(data: &Dataset, idx: &[usize], node: &TreeNode) -> Vec<Vec<usize>> {
    match node {
        TreeNode::Leaf { .. } => Vec::new(),
        TreeNode::Numeric {
            feature_index,
            threshold,
            ..
        } => {
            let (le, gt) = idx
                .iter()
                .partition(|&&i| data.rows[i][*feature_index] <= *threshold);
            vec![le, gt]
        }
        TreeNode::Categorical {
            feature_index,
            branches,
            fallback,
            ..
        } => {
            let categories = match &data.columns[*feature_index].kind {
                ColumnKind::Categorical { categories } => categories.clone(),
                ColumnKind::Numeric => Vec::new(),
            };
            let mut out = vec![Vec::new(); branches.len()];
            for &i in idx {
                let name = categories.get(data.rows[i][*feature_index] as usize);
                let b = name
                    .and_then(|n| branches.iter().position(|br| &br.category == n))
                    .unwrap_or(*fallback);
                out[b].push(i);
            }
            out
        }
    }
}

fn prune_node(node: &TreeNode, data: &Dataset, idx: &[usize], cf: f64) -> (TreeNode, f64) {
    let counts = data.class_counts(idx);
    if idx.is_empty() {
        return (node.clone(), 0.0);
    }
    let as_leaf = leaf_estimate(&counts, cf);
    if let TreeNode::Leaf { class, .. } = node {
        let n = idx.len();
        let errors = n - counts[*class];
        let pruned = TreeNode::Leaf {
            class: *class,
            distribution: counts,
        };
        return (pruned, pessimistic_errors(n as f64, errors as f64, cf));
    }

    let parts = route(data, idx, node);
    let children: Vec<(TreeNode, f64)> = node
        .children()
        .into_iter()
        .zip(&parts)
        .map(|(child, rows)| prune_node(child, data, rows, cf))
        .collect();
    let subtree: f64 = children.iter().map(|(_, e)| e).sum();

    if as_leaf <= subtree + 1e-9 {
        return (TreeNode::leaf(counts), as_leaf);
    }

    let mut children = children.into_iter().map(|(c, _)| c);
    let rebuilt = match node {
        TreeNode::Numeric {
            feature,
            feature_index,
            threshold,
            ..
        } => TreeNode::Numeric {
            feature: feature.clone(),
            feature_index: *feature_index,
            threshold: *threshold,
            distribution: counts,
            le: Box::new(children.next().expect("le child")),
            gt: Box::new(children.next().expect("gt child")),
        },
        TreeNode::Categorical {
            feature,
            feature_index,
            branches,
            fallback,
            ..
        } => TreeNode::Categorical {
            feature: feature.clone(),
            feature_index: *feature_index,
            distribution: counts,
            branches: branches
                .iter()
                .zip(children)
                .map(|(b, node)| CategoryBranch {
                    category: b.category.clone(),
                    node,
                })
                .collect(),
            fallback: *fallback,
        },
        TreeNode::Leaf { .. } => unreachable!("leaves return early"),
    };
    (rebuilt, subtree)
}
