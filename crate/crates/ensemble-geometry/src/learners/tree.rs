use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::learners::Dataset;
use crate::space::ScoreMatrix;

/// Knobs for a single random tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Features sampled (without replacement) at each split.
    pub k_features: usize,
    pub seed: u64,
}

impl TreeParams {
    /// Defaults chosen to approximate an unpruned random tree.
    pub fn new(k_features: usize, seed: u64) -> Self {
        TreeParams { max_depth: 20, min_leaf: 1, k_features, seed }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf { counts: Vec<u32> },
}

/// A trained random tree over a fixed feature/class layout.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomTreeModel {
    nodes: Vec<TreeNode>,
    root: usize,
    params: TreeParams,
    num_features: usize,
    num_classes: usize,
}

impl RandomTreeModel {
    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn params(&self) -> &TreeParams {
        &self.params
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// Depth of the deepest leaf (a lone root leaf has depth 0).
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], at: usize) -> usize {
            match &nodes[at] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, self.root)
    }

    fn leaf_counts(&self, row: &[f64]) -> &[u32] {
        let mut at = self.root;
        loop {
            match &self.nodes[at] {
                TreeNode::Leaf { counts } => return counts,
                TreeNode::Split { feature, threshold, left, right } => {
                    at = if row[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }
}

/// Trains a random tree with default depth/leaf settings.
pub fn train_random_tree(ds: &Dataset, k_features: usize, seed: u64) -> Result<RandomTreeModel> {
    train_random_tree_with(ds, TreeParams::new(k_features, seed))
}

/// Trains a random tree: greedy recursive Gini splitting over `k_features`
/// randomly sampled candidate features per node, with midpoint thresholds
/// between consecutive distinct values.
pub fn train_random_tree_with(ds: &Dataset, params: TreeParams) -> Result<RandomTreeModel> {
    if params.k_features < 1 {
        return Err(Error::InvalidArgument("need at least one candidate feature per split".into()));
    }
    if params.min_leaf < 1 {
        return Err(Error::InvalidArgument("min_leaf must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut nodes = Vec::new();
    let indices: Vec<usize> = (0..ds.num_instances()).collect();
    let root = grow(&mut nodes, ds, &indices, 0, &params, &mut rng);
    Ok(RandomTreeModel {
        nodes,
        root,
        params,
        num_features: ds.num_features(),
        num_classes: ds.num_classes(),
    })
}

fn class_counts(ds: &Dataset, indices: &[usize]) -> Vec<u32> {
    let mut counts = vec![0u32; ds.num_classes()];
    for &i in indices {
        counts[ds.labels()[i]] += 1;
    }
    counts
}

/// Weighted Gini impurity of a two-way split, up to the constant node size.
fn weighted_gini(left: &[u32], right: &[u32]) -> f64 {
    fn side(counts: &[u32]) -> f64 {
        let total: u32 = counts.iter().sum();
        if total == 0 {
            return 0.0;
        }
        let t = total as f64;
        let sq: f64 = counts.iter().map(|&c| (c as f64) * (c as f64)).sum();
        t * (1.0 - sq / (t * t))
    }
    side(left) + side(right)
}

fn grow(
    nodes: &mut Vec<TreeNode>,
    ds: &Dataset,
    indices: &[usize],
    depth: usize,
    params: &TreeParams,
    rng: &mut ChaCha8Rng,
) -> usize {
    let counts = class_counts(ds, indices);
    let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
    if pure || depth >= params.max_depth || indices.len() < 2 * params.min_leaf {
        nodes.push(TreeNode::Leaf { counts });
        return nodes.len() - 1;
    }

    let k = params.k_features.min(ds.num_features());
    let candidates = rand::seq::index::sample(rng, ds.num_features(), k);

    let mut best: Option<(f64, usize, f64)> = None; // (impurity, feature, threshold)
    let mut sorted: Vec<usize> = Vec::with_capacity(indices.len());
    for feature in candidates {
        sorted.clear();
        sorted.extend_from_slice(indices);
        sorted.sort_unstable_by(|&a, &b| {
            ds.feature(a, feature).total_cmp(&ds.feature(b, feature))
        });

        let mut left = vec![0u32; ds.num_classes()];
        let mut right = counts.clone();
        for t in 1..sorted.len() {
            let moved = ds.labels()[sorted[t - 1]];
            left[moved] += 1;
            right[moved] -= 1;
            let lo = ds.feature(sorted[t - 1], feature);
            let hi = ds.feature(sorted[t], feature);
            if lo == hi {
                continue;
            }
            if t < params.min_leaf || sorted.len() - t < params.min_leaf {
                continue;
            }
            let impurity = weighted_gini(&left, &right);
            if best.as_ref().is_none_or(|(b, _, _)| impurity < *b) {
                // The midpoint can round onto `hi` for adjacent floats; fall
                // back to `lo` so `x <= threshold` keeps both sides non-empty.
                let mid = 0.5 * (lo + hi);
                let threshold = if mid < hi { mid } else { lo };
                best = Some((impurity, feature, threshold));
            }
        }
    }

    let Some((_, feature, threshold)) = best else {
        nodes.push(TreeNode::Leaf { counts });
        return nodes.len() - 1;
    };

    let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
        .iter()
        .partition(|&&i| ds.feature(i, feature) <= threshold);
    let left = grow(nodes, ds, &left_idx, depth + 1, params, rng);
    let right = grow(nodes, ds, &right_idx, depth + 1, params, rng);
    nodes.push(TreeNode::Split { feature, threshold, left, right });
    nodes.len() - 1
}

pub(crate) fn leaf_scores(counts: &[u32], p: usize) -> Vec<f64> {
    let total: u32 = counts.iter().sum();
    counts
        .iter()
        .map(|&c| (c as f64 + 1.0) / (total as f64 + p as f64))
        .collect()
}

/// Routes every instance to its leaf and emits Laplace-smoothed class
/// frequencies, `(count_j + 1) / (leaf_total + p)`. Rows sum to one.
pub fn predict_scores(model: &RandomTreeModel, ds: &Dataset, classifier_id: &str) -> Result<ScoreMatrix> {
    if ds.num_features() != model.num_features {
        return Err(Error::ShapeMismatch(format!(
            "model expects {} features but dataset has {}",
            model.num_features,
            ds.num_features()
        )));
    }
    if ds.num_classes() != model.num_classes {
        return Err(Error::ShapeMismatch(format!(
            "model expects {} classes but dataset has {}",
            model.num_classes,
            ds.num_classes()
        )));
    }
    let p = model.num_classes;
    let mut scores = Vec::with_capacity(ds.num_instances() * p);
    for i in 0..ds.num_instances() {
        scores.extend(leaf_scores(model.leaf_counts(ds.row(i)), p));
    }
    ScoreMatrix::new(classifier_id, ds.num_instances(), p, scores)
}
