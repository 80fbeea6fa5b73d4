//! The score-space data model.
//!
//! A classifier's output for a whole dataset — one probability score per
//! (instance, class) cell — is a single point in an `n·p`-dimensional
//! Euclidean space. The true labels form the ideal point in the same space.
//! Performance of a classifier and dissimilarity between two classifiers are
//! then the same thing: a Euclidean distance.

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;

/// Anything that behaves as a point in the `n·p`-dimensional score space.
///
/// Coordinates are stored row-major: instance-major, class-minor, matching
/// [`flatten_index`].
pub trait ScorePoint {
    fn num_instances(&self) -> usize;
    fn num_classes(&self) -> usize;
    /// Flattened coordinates, length `n * p`.
    fn coords(&self) -> &[f64];

    fn shape(&self) -> (usize, usize) {
        (self.num_instances(), self.num_classes())
    }
}

/// Maps a 1-based (instance, class) cell to its 1-based flattened index.
///
/// The layout is instance-major: `l = (i - 1) * p + j`.
pub fn flatten_index(i: usize, j: usize, p: usize) -> Result<usize> {
    if p < 1 {
        return Err(Error::InvalidArgument("class count p must be at least 1".into()));
    }
    if i < 1 {
        return Err(Error::InvalidArgument(format!("instance index {i} is not 1-based")));
    }
    if j < 1 || j > p {
        return Err(Error::InvalidArgument(format!(
            "class index {j} out of range 1..={p}"
        )));
    }
    Ok((i - 1) * p + j)
}

/// Inverse of [`flatten_index`]: recovers the 1-based (instance, class) pair.
pub fn unflatten_index(l: usize, p: usize) -> Result<(usize, usize)> {
    if p < 1 {
        return Err(Error::InvalidArgument("class count p must be at least 1".into()));
    }
    if l < 1 {
        return Err(Error::InvalidArgument(format!("linear index {l} is not 1-based")));
    }
    Ok(((l - 1) / p + 1, (l - 1) % p + 1))
}

fn check_shape(n: usize, p: usize, len: usize, what: &str) -> Result<()> {
    if n < 1 {
        return Err(Error::InvalidArgument(format!("{what}: need at least one instance")));
    }
    if p < 2 {
        return Err(Error::InvalidArgument(format!("{what}: need at least two classes")));
    }
    if len != n * p {
        return Err(Error::ShapeMismatch(format!(
            "{what}: {len} values for a {n}x{p} matrix (expected {})",
            n * p
        )));
    }
    Ok(())
}

/// One classifier's scores for all `n` instances and `p` classes.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    classifier_id: String,
    n: usize,
    p: usize,
    scores: Vec<f64>,
}

impl ScoreMatrix {
    /// Builds a validated score matrix: every entry must lie in `[0, 1]`.
    ///
    /// `scores` is row-major (instance-major), length `n * p`.
    pub fn new(classifier_id: impl Into<String>, n: usize, p: usize, scores: Vec<f64>) -> Result<Self> {
        let classifier_id = classifier_id.into();
        check_shape(n, p, scores.len(), &classifier_id)?;
        for (l, &s) in scores.iter().enumerate() {
            if !s.is_finite() || !(0.0..=1.0).contains(&s) {
                let (i, j) = unflatten_index(l + 1, p)?;
                return Err(Error::InvalidScore(format!(
                    "{classifier_id}: score {s} at instance {i}, class {j} is outside [0, 1]"
                )));
            }
        }
        Ok(ScoreMatrix { classifier_id, n, p, scores })
    }

    /// Builds an unconstrained point in the score space.
    ///
    /// Fused outputs under signed weights and abstract geometric point sets
    /// legitimately leave `[0, 1]`, so only shape and finiteness are checked.
    /// Ingestion paths (file loaders, learners) always go through [`Self::new`].
    pub fn point(classifier_id: impl Into<String>, n: usize, p: usize, coords: Vec<f64>) -> Result<Self> {
        let classifier_id = classifier_id.into();
        check_shape(n, p, coords.len(), &classifier_id)?;
        if let Some(l) = coords.iter().position(|v| !v.is_finite()) {
            let (i, j) = unflatten_index(l + 1, p)?;
            return Err(Error::InvalidScore(format!(
                "{classifier_id}: non-finite coordinate at instance {i}, class {j}"
            )));
        }
        Ok(ScoreMatrix { classifier_id, n, p, scores: coords })
    }

    pub fn classifier_id(&self) -> &str {
        &self.classifier_id
    }

    /// 0-based cell access.
    pub fn get(&self, instance: usize, class: usize) -> f64 {
        self.scores[instance * self.p + class]
    }

    /// 0-based instance row.
    pub fn row(&self, instance: usize) -> &[f64] {
        &self.scores[instance * self.p..(instance + 1) * self.p]
    }
}

impl ScorePoint for ScoreMatrix {
    fn num_instances(&self) -> usize {
        self.n
    }
    fn num_classes(&self) -> usize {
        self.p
    }
    fn coords(&self) -> &[f64] {
        &self.scores
    }
}

/// The 0/1 real-label matrix: the ideal point `O`.
#[derive(Debug, Clone, PartialEq)]
pub struct IdealLabels {
    n: usize,
    p: usize,
    labels: Vec<f64>,
}

impl IdealLabels {
    /// Validates that every entry is exactly 0 or 1 and that every instance
    /// row carries at least one true label (multi-label rows may carry more).
    pub fn new(n: usize, p: usize, labels: Vec<f64>) -> Result<Self> {
        check_shape(n, p, labels.len(), "ideal labels")?;
        for (l, &v) in labels.iter().enumerate() {
            if v != 0.0 && v != 1.0 {
                let (i, j) = unflatten_index(l + 1, p)?;
                return Err(Error::InvalidLabels(format!(
                    "entry {v} at instance {i}, class {j} is not 0 or 1"
                )));
            }
        }
        for i in 0..n {
            if labels[i * p..(i + 1) * p].iter().all(|&v| v == 0.0) {
                return Err(Error::InvalidLabels(format!(
                    "instance {} has no true label",
                    i + 1
                )));
            }
        }
        Ok(IdealLabels { n, p, labels })
    }

    /// One-hot encodes 0-based class indices.
    pub fn from_class_indices(indices: &[usize], p: usize) -> Result<Self> {
        let n = indices.len();
        let mut labels = vec![0.0; n * p];
        for (i, &c) in indices.iter().enumerate() {
            if c >= p {
                return Err(Error::InvalidLabels(format!(
                    "class index {c} at instance {} exceeds class count {p}",
                    i + 1
                )));
            }
            labels[i * p + c] = 1.0;
        }
        IdealLabels::new(n, p, labels)
    }

    /// 0-based cell access.
    pub fn get(&self, instance: usize, class: usize) -> f64 {
        self.labels[instance * self.p + class]
    }

    /// True when every instance row carries exactly one true label.
    pub fn is_single_label(&self) -> bool {
        (0..self.n).all(|i| {
            self.labels[i * self.p..(i + 1) * self.p]
                .iter()
                .filter(|&&v| v == 1.0)
                .count()
                == 1
        })
    }

    /// The unique true class of an instance, if the row is single-label.
    pub fn true_class(&self, instance: usize) -> Option<usize> {
        let row = &self.labels[instance * self.p..(instance + 1) * self.p];
        let mut found = None;
        for (j, &v) in row.iter().enumerate() {
            if v == 1.0 {
                if found.is_some() {
                    return None;
                }
                found = Some(j);
            }
        }
        found
    }
}

impl ScorePoint for IdealLabels {
    fn num_instances(&self) -> usize {
        self.n
    }
    fn num_classes(&self) -> usize {
        self.p
    }
    fn coords(&self) -> &[f64] {
        &self.labels
    }
}

/// An ordered group of `m` score matrices sharing one (n, p) shape.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleGroup {
    members: Vec<ScoreMatrix>,
}

impl EnsembleGroup {
    pub fn new(members: Vec<ScoreMatrix>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::InvalidArgument("ensemble group needs at least one member".into()))?;
        let shape = first.shape();
        for m in &members {
            if m.shape() != shape {
                return Err(Error::ShapeMismatch(format!(
                    "member {} is {}x{} but the group is {}x{}",
                    m.classifier_id(),
                    m.num_instances(),
                    m.num_classes(),
                    shape.0,
                    shape.1
                )));
            }
        }
        for (k, m) in members.iter().enumerate() {
            if members[..k].iter().any(|o| o.classifier_id() == m.classifier_id()) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate classifier id {:?} in group",
                    m.classifier_id()
                )));
            }
        }
        Ok(EnsembleGroup { members })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        false // m >= 1 by construction
    }

    pub fn shape(&self) -> (usize, usize) {
        self.members[0].shape()
    }

    pub fn members(&self) -> &[ScoreMatrix] {
        &self.members
    }

    pub fn member(&self, k: usize) -> &ScoreMatrix {
        &self.members[k]
    }

    /// New group holding clones of the members at `indices`, in that order.
    pub fn subgroup(&self, indices: &[usize]) -> Result<EnsembleGroup> {
        for &k in indices {
            if k >= self.members.len() {
                return Err(Error::InvalidArgument(format!(
                    "member index {k} out of range for group of {}",
                    self.members.len()
                )));
            }
        }
        EnsembleGroup::new(indices.iter().map(|&k| self.members[k].clone()).collect())
    }
}

/// Performance and dissimilarity distances of a group against an ideal point.
#[derive(Debug, Clone)]
pub struct DistanceSummary {
    performance: Vec<f64>,
    dissimilarity: SymMatrix,
}

impl DistanceSummary {
    /// Builds a summary from raw distance data.
    ///
    /// `dissimilarity` must be symmetric with a zero diagonal and nonnegative
    /// entries; `performance` entries must be nonnegative.
    pub fn new(performance: Vec<f64>, dissimilarity: SymMatrix) -> Result<Self> {
        if performance.len() != dissimilarity.dim() {
            return Err(Error::ShapeMismatch(format!(
                "{} performance entries vs {}x{} dissimilarity matrix",
                performance.len(),
                dissimilarity.dim(),
                dissimilarity.dim()
            )));
        }
        if performance.iter().any(|&d| !d.is_finite() || d < 0.0) {
            return Err(Error::InvalidArgument("performance distances must be nonnegative".into()));
        }
        for i in 0..dissimilarity.dim() {
            if dissimilarity.get(i, i) != 0.0 {
                return Err(Error::InvalidArgument("dissimilarity diagonal must be zero".into()));
            }
            for j in (i + 1)..dissimilarity.dim() {
                let d = dissimilarity.get(i, j);
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::InvalidArgument(
                        "dissimilarity distances must be nonnegative".into(),
                    ));
                }
            }
        }
        Ok(DistanceSummary { performance, dissimilarity })
    }

    pub fn num_members(&self) -> usize {
        self.performance.len()
    }

    pub fn performance(&self) -> &[f64] {
        &self.performance
    }

    pub fn dissimilarity(&self) -> &SymMatrix {
        &self.dissimilarity
    }
}

fn ensure_same_shape(a: &impl ScorePoint, b: &impl ScorePoint) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} vs {}x{}",
            a.num_instances(),
            a.num_classes(),
            b.num_instances(),
            b.num_classes()
        )));
    }
    Ok(())
}

/// Euclidean distance between two points of identical shape.
pub fn euclidean_distance(a: &impl ScorePoint, b: &impl ScorePoint) -> Result<f64> {
    ensure_same_shape(a, b)?;
    Ok(distance_unchecked(a.coords(), b.coords()))
}

pub(crate) fn distance_unchecked(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Performance distribution: each member's distance to the ideal point.
pub fn performance_distances(group: &EnsembleGroup, ideal: &impl ScorePoint) -> Result<Vec<f64>> {
    group
        .members()
        .iter()
        .map(|m| euclidean_distance(m, ideal))
        .collect()
}

/// Dissimilarity distribution: the symmetric matrix of pairwise distances.
pub fn dissimilarity_matrix(group: &EnsembleGroup) -> SymMatrix {
    let m = group.len();
    SymMatrix::from_fn(m, |i, j| {
        if i == j {
            0.0
        } else {
            distance_unchecked(group.member(i).coords(), group.member(j).coords())
        }
    })
}

/// Both distributions in one pass.
pub fn distance_summary(group: &EnsembleGroup, ideal: &impl ScorePoint) -> Result<DistanceSummary> {
    DistanceSummary::new(performance_distances(group, ideal)?, dissimilarity_matrix(group))
}
