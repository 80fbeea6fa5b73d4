use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::learners::{bootstrap_sample, train_random_tree, Dataset, RandomTreeModel};
use crate::learners::tree::predict_scores;
use crate::space::EnsembleGroup;

/// A bag of random trees that can score any compatible dataset.
#[derive(Debug, Clone)]
pub struct RandomForest {
    trees: Vec<RandomTreeModel>,
    k_features: usize,
}

/// Trains `m` random trees, each on its own bootstrap sample, with
/// `K = ceil(sqrt(d))` candidate features per split. Tree `i` is seeded with
/// `seed + i`, so training is parallelized without affecting the result.
pub fn build_forest(train: &Dataset, m: usize, seed: u64) -> Result<RandomForest> {
    if m < 1 {
        return Err(Error::InvalidArgument("forest needs at least one tree".into()));
    }
    let k_features = (train.num_features() as f64).sqrt().ceil() as usize;
    let trees: Vec<RandomTreeModel> = (0..m)
        .into_par_iter()
        .map(|i| {
            let tree_seed = seed.wrapping_add(i as u64);
            let sample = bootstrap_sample(train, tree_seed);
            train_random_tree(&sample, k_features, tree_seed)
        })
        .collect::<Result<_>>()?;
    Ok(RandomForest { trees, k_features })
}

impl RandomForest {
    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    pub fn trees(&self) -> &[RandomTreeModel] {
        &self.trees
    }

    pub fn k_features(&self) -> usize {
        self.k_features
    }

    /// Scores a dataset with every tree, as members `tree-0 .. tree-(m-1)`.
    pub fn score_group(&self, ds: &Dataset) -> Result<EnsembleGroup> {
        let members = self
            .trees
            .iter()
            .enumerate()
            .map(|(i, tree)| predict_scores(tree, ds, &format!("tree-{i}")))
            .collect::<Result<Vec<_>>>()?;
        EnsembleGroup::new(members)
    }
}
