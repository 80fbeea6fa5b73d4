//! Accuracy metric, the shrink experiment, and summary statistics.
//!
//! The shrink experiment is the end-to-end harness: per trial it splits the
//! data, grows a forest, then removes one randomly chosen tree at a time,
//! re-fitting the optimal weights on the training partition at every size and
//! evaluating both fusion schemes on both partitions. Guarantees that hold on
//! the training partition by construction are checked and reported; test-side
//! orderings are reported but never asserted.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fusion::{centroid_fuse, weighted_fuse};
use crate::learners::{build_forest, stratified_split, Dataset};
use crate::space::{euclidean_distance, IdealLabels, ScorePoint};
use crate::weights::solve_optimal_weights;

/// Fraction of instances whose argmax score hits the true class.
/// Ties go to the lowest class index. Defined for single-label data only;
/// Euclidean distance remains available for multi-label data.
pub fn accuracy(scores: &impl ScorePoint, ideal: &IdealLabels) -> Result<f64> {
    if scores.shape() != ideal.shape() {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} scores vs {}x{} labels",
            scores.num_instances(),
            scores.num_classes(),
            ideal.num_instances(),
            ideal.num_classes()
        )));
    }
    if !ideal.is_single_label() {
        return Err(Error::UnsupportedMetric(
            "accuracy needs single-label data (exactly one true class per instance)".into(),
        ));
    }
    let p = scores.num_classes();
    let n = scores.num_instances();
    let mut hits = 0usize;
    for i in 0..n {
        let row = &scores.coords()[i * p..(i + 1) * p];
        let mut arg = 0usize;
        for (j, &v) in row.iter().enumerate() {
            if v > row[arg] {
                arg = j;
            }
        }
        if ideal.true_class(i) == Some(arg) {
            hits += 1;
        }
    }
    Ok(hits as f64 / n as f64)
}

/// Sample Pearson correlation coefficient.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "vectors of length {} and {} cannot be correlated",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::InvalidArgument("correlation needs at least two pairs".into()));
    }
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        cov += (x - mean_a) * (y - mean_b);
        var_a += (x - mean_a) * (x - mean_a);
        var_b += (y - mean_b) * (y - mean_b);
    }
    if var_a == 0.0 || var_b == 0.0 {
        return Err(Error::ZeroVariance(
            "pearson correlation is undefined for a constant vector".into(),
        ));
    }
    Ok(cov / (var_a * var_b).sqrt())
}

/// Paired t statistic over the differences `a - b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedT {
    pub t: f64,
    pub df: usize,
    pub mean_diff: f64,
    /// Set when the differences have zero variance around a nonzero mean;
    /// `t` is then signed infinity.
    pub degenerate: bool,
}

pub fn paired_t(a: &[f64], b: &[f64]) -> Result<PairedT> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "paired test needs equal lengths, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::InvalidArgument("paired test needs at least two pairs".into()));
    }
    let n = a.len() as f64;
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    let sd = var.sqrt();
    let df = a.len() - 1;
    if sd == 0.0 {
        if mean == 0.0 {
            return Ok(PairedT { t: 0.0, df, mean_diff: 0.0, degenerate: false });
        }
        return Ok(PairedT {
            t: mean.signum() * f64::INFINITY,
            df,
            mean_diff: mean,
            degenerate: true,
        });
    }
    Ok(PairedT { t: mean / (sd / n.sqrt()), df, mean_diff: mean, degenerate: false })
}

/// One averaged row of the shrink experiment, at ensemble size `m`.
/// Field order matches the results-file column order. `best_single_acc` and
/// `avg_single_acc` are measured on the test partition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub m: usize,
    pub rf_train_acc: f64,
    pub wrf_train_acc: f64,
    pub rf_train_dist: f64,
    pub wrf_train_dist: f64,
    pub rf_test_acc: f64,
    pub wrf_test_acc: f64,
    pub rf_test_dist: f64,
    pub wrf_test_dist: f64,
    pub best_single_acc: f64,
    pub avg_single_acc: f64,
}

/// Outcome of one guaranteed-on-train invariant across all trials and sizes.
/// `worst` is the largest violation observed (negative when the inequality
/// held with margin everywhere).
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantCheck {
    pub name: &'static str,
    pub passed: bool,
    pub worst: f64,
}

/// Slack for the train-side inequality guarantees (weighted <= centroid <=
/// mean single).
pub const TRAIN_INVARIANT_SLACK: f64 = 1e-10;

/// Slack for the nested-chain monotonicity guarantee. Near-singular grams
/// produce interpolating weight vectors with norms up to ~1e3, and the fused
/// residual then carries rounding noise of order `|w| * eps * sqrt(n*p)`,
/// a few 1e-10 in practice. Structural violations (a wrong solver) show up
/// orders of magnitude above this.
pub const MONOTONE_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct ShrinkReport {
    pub rows: Vec<ExperimentRow>,
    pub checks: Vec<InvariantCheck>,
}

impl ShrinkReport {
    pub fn all_checks_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ExperimentConfig {
    /// Ensemble size to start from; shrinks down to 2.
    pub m_max: usize,
    pub trials: usize,
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig { m_max: 30, trials: 30, train_fraction: 0.8, seed: 42 }
    }
}

struct TrialMetrics {
    // Indexed by size: entry 0 holds m = 2, the last holds m = m_max.
    rows: Vec<[f64; 10]>,
    wmv_le_mv_worst: f64,
    mv_le_mean_single_worst: f64,
    wmv_monotone_worst: f64,
}

/// Runs the shrink experiment and averages the per-size metrics over trials.
///
/// Per trial: stratified split, forest of `m_max` trees on the training
/// partition, then repeated removal of one uniformly random member down to
/// m = 2, re-fitting the optimal weights on the training partition at every
/// size. Trials run in parallel with derived seeds; aggregation order is
/// fixed, so the output is identical for any thread count.
pub fn shrink_experiment(ds: &Dataset, config: &ExperimentConfig) -> Result<ShrinkReport> {
    if config.m_max < 2 {
        return Err(Error::InvalidArgument("the experiment needs at least two trees".into()));
    }
    if config.trials < 1 {
        return Err(Error::InvalidArgument("the experiment needs at least one trial".into()));
    }
    if ds.num_classes() < 2 {
        return Err(Error::InvalidArgument(
            "the experiment needs at least two classes".into(),
        ));
    }
    let mut master = ChaCha8Rng::seed_from_u64(config.seed);
    let trial_seeds: Vec<u64> = (0..config.trials).map(|_| master.next_u64()).collect();

    let trials: Vec<TrialMetrics> = trial_seeds
        .par_iter()
        .map(|&trial_seed| run_trial(ds, config, trial_seed))
        .collect::<Result<_>>()?;

    let sizes = config.m_max - 1;
    let mut rows = Vec::with_capacity(sizes);
    for s in 0..sizes {
        let mut acc = [0.0f64; 10];
        for trial in &trials {
            for (a, v) in acc.iter_mut().zip(trial.rows[s]) {
                *a += v;
            }
        }
        for a in &mut acc {
            *a /= config.trials as f64;
        }
        rows.push(ExperimentRow {
            m: s + 2,
            rf_train_acc: acc[0],
            wrf_train_acc: acc[1],
            rf_train_dist: acc[2],
            wrf_train_dist: acc[3],
            rf_test_acc: acc[4],
            wrf_test_acc: acc[5],
            rf_test_dist: acc[6],
            wrf_test_dist: acc[7],
            best_single_acc: acc[8],
            avg_single_acc: acc[9],
        });
    }

    let worst =
        |f: fn(&TrialMetrics) -> f64| trials.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
    let checks = vec![
        check(
            "wmv_train_dist <= mv_train_dist",
            worst(|t| t.wmv_le_mv_worst),
            TRAIN_INVARIANT_SLACK,
        ),
        check(
            "mv_train_dist <= mean_single_train_dist",
            worst(|t| t.mv_le_mean_single_worst),
            TRAIN_INVARIANT_SLACK,
        ),
        check(
            "wmv_train_dist non-increasing in m (nested chain)",
            worst(|t| t.wmv_monotone_worst),
            MONOTONE_SLACK,
        ),
    ];
    Ok(ShrinkReport { rows, checks })
}

fn check(name: &'static str, worst: f64, slack: f64) -> InvariantCheck {
    InvariantCheck { name, passed: worst <= slack, worst }
}

fn run_trial(ds: &Dataset, config: &ExperimentConfig, trial_seed: u64) -> Result<TrialMetrics> {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
    let split_seed = rng.next_u64();
    let forest_seed = rng.next_u64();

    let (train, test) = stratified_split(ds, config.train_fraction, split_seed)?;
    let forest = build_forest(&train, config.m_max, forest_seed)?;
    let train_group = forest.score_group(&train)?;
    let test_group = forest.score_group(&test)?;
    let train_ideal = train.ideal_labels()?;
    let test_ideal = test.ideal_labels()?;

    let single_train_dist: Vec<f64> = train_group
        .members()
        .iter()
        .map(|s| euclidean_distance(s, &train_ideal))
        .collect::<Result<_>>()?;
    let single_test_acc: Vec<f64> = test_group
        .members()
        .iter()
        .map(|s| accuracy(s, &test_ideal))
        .collect::<Result<_>>()?;

    let mut alive: Vec<usize> = (0..config.m_max).collect();
    let mut rows = vec![[0.0f64; 10]; config.m_max - 1];
    let mut wmv_le_mv_worst = f64::NEG_INFINITY;
    let mut mv_le_mean_single_worst = f64::NEG_INFINITY;
    let mut wmv_monotone_worst = f64::NEG_INFINITY;
    let mut prev_wmv_train = f64::NEG_INFINITY; // residual at the next-larger size

    loop {
        let m = alive.len();
        let sub_train = train_group.subgroup(&alive)?;
        let sub_test = test_group.subgroup(&alive)?;

        let mv_train = centroid_fuse(&sub_train);
        let rf_train_dist = euclidean_distance(&mv_train.fused, &train_ideal)?;
        let rf_train_acc = accuracy(&mv_train.fused, &train_ideal)?;

        let solution = solve_optimal_weights(&sub_train, &train_ideal, 0.0)?;
        let wrf_train_dist = solution.residual;
        let wmv_train = weighted_fuse(&sub_train, &solution.weights)?.fused;
        let wrf_train_acc = accuracy(&wmv_train, &train_ideal)?;

        let mv_test = centroid_fuse(&sub_test);
        let rf_test_dist = euclidean_distance(&mv_test.fused, &test_ideal)?;
        let rf_test_acc = accuracy(&mv_test.fused, &test_ideal)?;

        let wmv_test = weighted_fuse(&sub_test, &solution.weights)?.fused;
        let wrf_test_dist = euclidean_distance(&wmv_test, &test_ideal)?;
        let wrf_test_acc = accuracy(&wmv_test, &test_ideal)?;

        let best_single_acc = alive
            .iter()
            .map(|&k| single_test_acc[k])
            .fold(f64::NEG_INFINITY, f64::max);
        let avg_single_acc =
            alive.iter().map(|&k| single_test_acc[k]).sum::<f64>() / m as f64;
        let mean_single_train =
            alive.iter().map(|&k| single_train_dist[k]).sum::<f64>() / m as f64;

        wmv_le_mv_worst = wmv_le_mv_worst.max(wrf_train_dist - rf_train_dist);
        mv_le_mean_single_worst =
            mv_le_mean_single_worst.max(rf_train_dist - mean_single_train);
        // Removing a member must not improve the optimal-weight residual.
        wmv_monotone_worst = wmv_monotone_worst.max(prev_wmv_train - wrf_train_dist);
        prev_wmv_train = wrf_train_dist;

        rows[m - 2] = [
            rf_train_acc,
            wrf_train_acc,
            rf_train_dist,
            wrf_train_dist,
            rf_test_acc,
            wrf_test_acc,
            rf_test_dist,
            wrf_test_dist,
            best_single_acc,
            avg_single_acc,
        ];

        if m == 2 {
            break;
        }
        let removed = rng.random_range(0..m);
        alive.remove(removed);
    }

    Ok(TrialMetrics { rows, wmv_le_mv_worst, mv_le_mean_single_worst, wmv_monotone_worst })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::ScoreMatrix;
    use crate::synth;

    #[test]
    fn accuracy_of_the_ideal_point_is_one() {
        let ideal = IdealLabels::from_class_indices(&[0, 1, 2], 3).unwrap();
        assert_eq!(accuracy(&ideal, &ideal).unwrap(), 1.0);
    }

    #[test]
    fn accuracy_breaks_ties_toward_the_lowest_class() {
        let s = ScoreMatrix::new("s", 1, 2, vec![0.5, 0.5]).unwrap();
        let right = IdealLabels::from_class_indices(&[0], 2).unwrap();
        let wrong = IdealLabels::from_class_indices(&[1], 2).unwrap();
        assert_eq!(accuracy(&s, &right).unwrap(), 1.0);
        assert_eq!(accuracy(&s, &wrong).unwrap(), 0.0);
    }

    #[test]
    fn accuracy_counts_fractions() {
        let s = ScoreMatrix::new("s", 2, 2, vec![0.9, 0.1, 0.9, 0.1]).unwrap();
        let ideal = IdealLabels::from_class_indices(&[0, 1], 2).unwrap();
        assert_eq!(accuracy(&s, &ideal).unwrap(), 0.5);
    }

    #[test]
    fn accuracy_rejects_multi_label_data() {
        let s = ScoreMatrix::new("s", 1, 3, vec![0.9, 0.1, 0.3]).unwrap();
        let multi = IdealLabels::new(1, 3, vec![1.0, 0.0, 1.0]).unwrap();
        assert!(matches!(accuracy(&s, &multi), Err(Error::UnsupportedMetric(_))));
        // Euclidean distance remains available on the same input.
        assert!(euclidean_distance(&s, &multi).is_ok());
    }

    #[test]
    fn pearson_on_known_vectors() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-12);
        let r = pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]).unwrap();
        assert!((r - 0.9820).abs() < 1e-3);
    }

    #[test]
    fn pearson_rejects_constant_vectors() {
        assert!(matches!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(Error::ZeroVariance(_))
        ));
        assert!(pearson(&[1.0], &[1.0]).is_err());
        assert!(pearson(&[1.0, 2.0], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn pearson_is_invariant_under_positive_affine_transforms() {
        let a = [0.3, 1.7, 0.9, 2.4, 1.1];
        let b = [2.0, 0.5, 1.4, 0.2, 1.9];
        let r = pearson(&a, &b).unwrap();
        let a2: Vec<f64> = a.iter().map(|x| 3.5 * x + 11.0).collect();
        let b2: Vec<f64> = b.iter().map(|x| 0.25 * x - 4.0).collect();
        assert!((pearson(&a2, &b2).unwrap() - r).abs() < 1e-12);
    }

    #[test]
    fn paired_t_on_known_vectors() {
        let same = paired_t(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(same.t, 0.0);
        assert!(!same.degenerate);

        let shifted = paired_t(&[2.0, 4.0, 6.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!((shifted.t - 3.464).abs() < 1e-3);
        assert_eq!(shifted.df, 2);
        assert!((shifted.mean_diff - 2.0).abs() < 1e-12);

        let constant = paired_t(&[2.0, 3.0, 4.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!(constant.degenerate);
        assert!(constant.t.is_infinite() && constant.t > 0.0);
    }

    #[test]
    fn shrink_experiment_structure_and_guarantees() {
        let ds = synth::separable(120, 5);
        let config = ExperimentConfig { m_max: 6, trials: 3, train_fraction: 0.8, seed: 9 };
        let report = shrink_experiment(&ds, &config).unwrap();
        assert_eq!(report.rows.len(), 5);
        assert_eq!(report.rows.first().unwrap().m, 2);
        assert_eq!(report.rows.last().unwrap().m, 6);
        for row in &report.rows {
            assert!(row.wrf_train_dist <= row.rf_train_dist + TRAIN_INVARIANT_SLACK);
            assert!(row.rf_train_acc >= 0.0 && row.rf_train_acc <= 1.0);
        }
        assert!(report.all_checks_passed(), "checks: {:?}", report.checks);
    }

    #[test]
    fn shrink_experiment_is_deterministic() {
        let ds = synth::noisy(90, 2);
        let config = ExperimentConfig { m_max: 4, trials: 2, train_fraction: 0.75, seed: 31 };
        let a = shrink_experiment(&ds, &config).unwrap();
        let b = shrink_experiment(&ds, &config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_row_experiment_with_two_trees() {
        let ds = synth::separable(60, 1);
        let config = ExperimentConfig { m_max: 2, trials: 2, train_fraction: 0.8, seed: 4 };
        let report = shrink_experiment(&ds, &config).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.rows[0].m, 2);
    }
}
