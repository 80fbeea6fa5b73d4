//! Shared fixtures for unit tests.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::space::{EnsembleGroup, IdealLabels, ScoreMatrix, ScorePoint};

/// The 2-instance, 3-class worked scenario: three classifiers and the ideal
/// point `{0,1,0,1,0,1}`.
pub fn example1() -> (EnsembleGroup, IdealLabels) {
    let s1 = ScoreMatrix::new("cf1", 2, 3, vec![0.5, 0.6, 0.3, 0.7, 0.3, 0.9]).unwrap();
    let s2 = ScoreMatrix::new("cf2", 2, 3, vec![0.4, 0.7, 0.2, 0.3, 0.6, 0.7]).unwrap();
    let s3 = ScoreMatrix::new("cf3", 2, 3, vec![0.6, 0.8, 0.4, 0.2, 0.6, 0.8]).unwrap();
    let ideal = IdealLabels::new(2, 3, vec![0.0, 1.0, 0.0, 1.0, 0.0, 1.0]).unwrap();
    (EnsembleGroup::new(vec![s1, s2, s3]).unwrap(), ideal)
}

/// Six planar points around the origin used by the subset-selection tests:
/// one at radius 1, two at radius ~1.5, three at radius 2. These are abstract
/// geometric points (coordinates leave [0, 1]), so the ideal is the origin as
/// a raw point.
pub fn example4() -> (EnsembleGroup, ScoreMatrix) {
    let coords: [(f64, f64); 6] = [
        (0.0, -1.0),
        (-1.42, 0.5),
        (1.42, 0.5),
        (-1.732, -1.0),
        (1.732, -1.0),
        (0.0, 2.0),
    ];
    let members: Vec<ScoreMatrix> = coords
        .iter()
        .enumerate()
        .map(|(k, &(x, y))| ScoreMatrix::point(format!("S{}", k + 1), 1, 2, vec![x, y]).unwrap())
        .collect();
    let ideal = ScoreMatrix::point("O", 1, 2, vec![0.0, 0.0]).unwrap();
    (EnsembleGroup::new(members).unwrap(), ideal)
}

/// Uniform-[0,1] score group with a random single-or-multi-label ideal (at
/// least one true label per row).
pub fn random_valid_group(
    rng: &mut ChaCha8Rng,
    m: usize,
    n: usize,
    p: usize,
) -> (EnsembleGroup, IdealLabels) {
    let members: Vec<ScoreMatrix> = (0..m)
        .map(|k| {
            let scores: Vec<f64> = (0..n * p).map(|_| rng.random::<f64>()).collect();
            ScoreMatrix::new(format!("cf{k}"), n, p, scores).unwrap()
        })
        .collect();
    let mut labels = vec![0.0; n * p];
    for i in 0..n {
        for j in 0..p {
            labels[i * p + j] = if rng.random::<f64>() < 0.4 { 1.0 } else { 0.0 };
        }
        if labels[i * p..(i + 1) * p].iter().all(|&v| v == 0.0) {
            let j = rng.random_range(0..p);
            labels[i * p + j] = 1.0;
        }
    }
    (
        EnsembleGroup::new(members).unwrap(),
        IdealLabels::new(n, p, labels).unwrap(),
    )
}

/// Independent selection oracle: enumerate subsets lexicographically, fuse
/// each by direct coordinate averaging, measure the distance, keep the first
/// minimum. Shares no code with the moment-based evaluator it checks.
pub fn brute_force_best_centroid_subset(
    group: &EnsembleGroup,
    ideal: &impl ScorePoint,
    m_prime: usize,
) -> (Vec<usize>, f64) {
    let m = group.len();
    let dim = ideal.coords().len();
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut subset: Vec<usize> = (0..m_prime).collect();
    loop {
        let mut centroid = vec![0.0; dim];
        for &k in &subset {
            for (c, s) in centroid.iter_mut().zip(group.member(k).coords()) {
                *c += s;
            }
        }
        let mut d2 = 0.0;
        for (c, o) in centroid.iter().zip(ideal.coords()) {
            let diff = c / m_prime as f64 - o;
            d2 += diff * diff;
        }
        let d = d2.sqrt();
        if best.as_ref().is_none_or(|(b, _)| d < *b) {
            best = Some((d, subset.clone()));
        }
        // Next lexicographic combination.
        let mut i = m_prime;
        loop {
            if i == 0 {
                let (obj, sub) = best.unwrap();
                return (sub, obj);
            }
            i -= 1;
            if subset[i] != i + m - m_prime {
                subset[i] += 1;
                for t in (i + 1)..m_prime {
                    subset[t] = subset[t - 1] + 1;
                }
                break;
            }
        }
    }
}
