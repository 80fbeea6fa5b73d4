use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::space::IdealLabels;

/// A numeric feature table with one class label per instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    d: usize,
    /// Row-major n×d feature values.
    features: Vec<f64>,
    /// 0-based class index per instance.
    labels: Vec<usize>,
    class_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        features: Vec<f64>,
        d: usize,
        labels: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        if d < 1 {
            return Err(Error::InvalidArgument("dataset needs at least one feature".into()));
        }
        if features.len() % d != 0 {
            return Err(Error::ShapeMismatch(format!(
                "{} feature values do not tile rows of width {d}",
                features.len()
            )));
        }
        let n = features.len() / d;
        if n < 1 {
            return Err(Error::InvalidArgument("dataset needs at least one instance".into()));
        }
        if labels.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "{} labels for {n} instances",
                labels.len()
            )));
        }
        if class_names.is_empty() {
            return Err(Error::InvalidArgument("dataset needs at least one class name".into()));
        }
        let p = class_names.len();
        for (i, name) in class_names.iter().enumerate() {
            if class_names[..i].contains(name) {
                return Err(Error::InvalidArgument(format!("duplicate class name {name:?}")));
            }
        }
        if n < p {
            return Err(Error::InvalidArgument(format!(
                "{n} instances cannot cover {p} classes"
            )));
        }
        if let Some((i, &c)) = labels.iter().enumerate().find(|(_, &c)| c >= p) {
            return Err(Error::InvalidLabels(format!(
                "label index {c} at instance {} exceeds class count {p}",
                i + 1
            )));
        }
        if let Some(k) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite feature value at instance {}, feature {}",
                k / d + 1,
                k % d + 1
            )));
        }
        Ok(Dataset { n, d, features, labels, class_names })
    }

    pub fn num_instances(&self) -> usize {
        self.n
    }

    pub fn num_features(&self) -> usize {
        self.d
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn feature(&self, instance: usize, feature: usize) -> f64 {
        self.features[instance * self.d + feature]
    }

    pub fn row(&self, instance: usize) -> &[f64] {
        &self.features[instance * self.d..(instance + 1) * self.d]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    /// One-hot label matrix for the score-space framework.
    pub fn ideal_labels(&self) -> Result<IdealLabels> {
        IdealLabels::from_class_indices(&self.labels, self.num_classes())
    }

    /// Count of instances per class.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.num_classes()];
        for &c in &self.labels {
            counts[c] += 1;
        }
        counts
    }

    fn take_rows(&self, indices: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(indices.len() * self.d);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Dataset {
            n: indices.len(),
            d: self.d,
            features,
            labels,
            class_names: self.class_names.clone(),
        }
    }
}

/// Splits a dataset into disjoint, exhaustive train/test partitions that
/// preserve per-class proportions.
///
/// Each class contributes `round(fraction * count)` instances to the training
/// side, adjusted so that neither side is left empty for any class. The
/// shuffle is seeded, so identical inputs give identical partitions.
pub fn stratified_split(ds: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train fraction must lie strictly between 0 and 1, got {train_fraction}"
        )));
    }
    let p = ds.num_classes();
    if p < 2 {
        return Err(Error::Stratification(
            "stratification needs at least two classes".into(),
        ));
    }
    let mut per_class: Vec<Vec<usize>> = vec![Vec::new(); p];
    for (i, &c) in ds.labels().iter().enumerate() {
        per_class[c].push(i);
    }
    for (c, idx) in per_class.iter().enumerate() {
        if idx.len() < 2 {
            return Err(Error::Stratification(format!(
                "class {:?} has {} instance(s); need at least 2 to appear on both sides",
                ds.class_names()[c],
                idx.len()
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    for idx in &mut per_class {
        idx.shuffle(&mut rng);
        let count = idx.len();
        let want = (train_fraction * count as f64).round() as usize;
        let take = want.clamp(1, count - 1);
        train_idx.extend_from_slice(&idx[..take]);
        test_idx.extend_from_slice(&idx[take..]);
    }
    Ok((ds.take_rows(&train_idx), ds.take_rows(&test_idx)))
}

/// Draws `n` instances with replacement; seeded and deterministic.
pub fn bootstrap_sample(ds: &Dataset, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let indices: Vec<usize> = (0..ds.num_instances())
        .map(|_| rng.random_range(0..ds.num_instances()))
        .collect();
    ds.take_rows(&indices)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_class(n_per_class: usize) -> Dataset {
        let n = 2 * n_per_class;
        let features: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
        Dataset::new(features, 1, labels, vec!["a".into(), "b".into()]).unwrap()
    }

    #[test]
    fn split_preserves_per_class_proportions() {
        let ds = two_class(5);
        let (train, test) = stratified_split(&ds, 0.8, 1).unwrap();
        assert_eq!(train.num_instances(), 8);
        assert_eq!(test.num_instances(), 2);
        assert_eq!(train.class_counts(), vec![4, 4]);
        assert_eq!(test.class_counts(), vec![1, 1]);
    }

    #[test]
    fn split_is_deterministic_and_partitions_the_data() {
        let ds = two_class(10);
        let (tr1, te1) = stratified_split(&ds, 0.7, 9).unwrap();
        let (tr2, te2) = stratified_split(&ds, 0.7, 9).unwrap();
        assert_eq!(tr1, tr2);
        assert_eq!(te1, te2);
        // Feature value doubles as instance identity here.
        let mut seen: Vec<i64> = (0..tr1.num_instances())
            .map(|i| tr1.feature(i, 0) as i64)
            .chain((0..te1.num_instances()).map(|i| te1.feature(i, 0) as i64))
            .collect();
        seen.sort_unstable();
        assert_eq!(seen, (0..20).collect::<Vec<i64>>());
    }

    #[test]
    fn half_split_of_four_gives_one_of_each_class_per_side() {
        let ds = two_class(2);
        let (train, test) = stratified_split(&ds, 0.5, 3).unwrap();
        assert_eq!(train.class_counts(), vec![1, 1]);
        assert_eq!(test.class_counts(), vec![1, 1]);
    }

    #[test]
    fn split_rejects_underpopulated_classes() {
        let ds = Dataset::new(
            vec![0.0, 1.0, 2.0],
            1,
            vec![0, 0, 1],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        assert!(matches!(stratified_split(&ds, 0.8, 0), Err(Error::Stratification(_))));
        assert!(stratified_split(&ds, 1.0, 0).is_err());
    }

    #[test]
    fn bootstrap_keeps_size_and_is_deterministic() {
        let ds = two_class(50);
        let a = bootstrap_sample(&ds, 7);
        let b = bootstrap_sample(&ds, 7);
        assert_eq!(a.num_instances(), 100);
        assert_eq!(a, b);
        assert_ne!(a, bootstrap_sample(&ds, 8));
    }

    #[test]
    fn bootstrap_unique_fraction_approaches_one_minus_inv_e() {
        let n = 1000;
        let features: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let labels = vec![0usize; n];
        let ds = Dataset::new(features, 1, labels, vec!["a".into()]).unwrap();
        let seeds = 120;
        let mut total = 0.0;
        for seed in 0..seeds {
            let sample = bootstrap_sample(&ds, seed);
            let mut drawn: Vec<i64> =
                (0..n).map(|i| sample.feature(i, 0) as i64).collect();
            drawn.sort_unstable();
            drawn.dedup();
            total += drawn.len() as f64 / n as f64;
        }
        let mean = total / seeds as f64;
        let expected = 1.0 - (-1.0f64).exp();
        assert!((mean - expected).abs() < 0.02, "mean unique fraction {mean}");
    }

    #[test]
    fn dataset_validation() {
        assert!(Dataset::new(vec![1.0, 2.0], 1, vec![0, 2], vec!["a".into(), "b".into()]).is_err());
        assert!(Dataset::new(vec![1.0], 1, vec![0], vec!["a".into(), "a".into()]).is_err());
        assert!(Dataset::new(vec![f64::NAN], 1, vec![0], vec!["a".into()]).is_err());
        assert!(Dataset::new(vec![1.0, 2.0, 3.0], 2, vec![0], vec!["a".into()]).is_err());
    }
}
