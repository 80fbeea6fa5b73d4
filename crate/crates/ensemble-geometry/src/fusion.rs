//! Fusion of a group of score points.
//!
//! Soft majority voting is the centroid of the member points; weighted
//! majority voting is an arbitrary linear combination. The centroid's
//! distance to the ideal point is also available in closed form from the
//! performance and dissimilarity distributions alone, which is what makes
//! ensemble performance predictable without refusing any matrices.

use crate::error::{Error, Result};
use crate::space::{DistanceSummary, EnsembleGroup, ScoreMatrix, ScorePoint};
use crate::weights::WeightVector;

/// How a fused point was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FusionMethod {
    /// Coordinate-wise mean of the members (soft majority voting).
    Centroid,
    /// Linear combination with per-classifier scalar weights.
    Weighted,
}

/// A fused point plus how it was obtained.
///
/// The fused coordinates may leave `[0, 1]` under signed weights; the fused
/// point is carried as an unconstrained [`ScoreMatrix::point`].
#[derive(Debug, Clone)]
pub struct FusionResult {
    pub fused: ScoreMatrix,
    pub method: FusionMethod,
    pub weights: Option<WeightVector>,
    pub distance_to_ideal: Option<f64>,
}

/// Fuses a group by majority voting: the centroid of the member points.
pub fn centroid_fuse(group: &EnsembleGroup) -> FusionResult {
    let (n, p) = group.shape();
    let m = group.len() as f64;
    let mut coords = vec![0.0; n * p];
    for member in group.members() {
        for (c, s) in coords.iter_mut().zip(member.coords()) {
            *c += s;
        }
    }
    for c in &mut coords {
        *c /= m;
    }
    let fused = ScoreMatrix::point("fused", n, p, coords).expect("centroid of finite points");
    FusionResult { fused, method: FusionMethod::Centroid, weights: None, distance_to_ideal: None }
}

/// Fuses a group by weighted majority voting: `F = sum_k w_k * S_k`.
pub fn weighted_fuse(group: &EnsembleGroup, weights: &WeightVector) -> Result<FusionResult> {
    if weights.len() != group.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} weights for a group of {} members",
            weights.len(),
            group.len()
        )));
    }
    let (n, p) = group.shape();
    let mut coords = vec![0.0; n * p];
    for (member, &w) in group.members().iter().zip(weights.values()) {
        for (c, s) in coords.iter_mut().zip(member.coords()) {
            *c += w * s;
        }
    }
    let fused = ScoreMatrix::point("fused", n, p, coords)?;
    Ok(FusionResult {
        fused,
        method: FusionMethod::Weighted,
        weights: Some(weights.clone()),
        distance_to_ideal: None,
    })
}

/// Window inside which a slightly negative radicand is treated as rounding
/// noise rather than inconsistent distance data.
const RADICAND_NOISE_WINDOW: f64 = 1e-9;

/// Shared closed-form kernel: centroid-to-ideal distance from the sums of
/// squared performance and squared pairwise dissimilarity distances.
pub(crate) fn centroid_distance_from_moments(
    m: usize,
    sum_perf_sq: f64,
    sum_diss_sq: f64,
) -> Result<f64> {
    let mf = m as f64;
    let radicand = mf * sum_perf_sq - sum_diss_sq;
    if radicand < -RADICAND_NOISE_WINDOW {
        return Err(Error::Geometry(format!(
            "radicand {radicand} below the rounding window; \
             no point set realizes these distances"
        )));
    }
    Ok(radicand.max(0.0).sqrt() / mf)
}

/// Closed-form centroid performance.
///
/// From the performance and dissimilarity distributions alone:
/// `ed(C, O) = (1/m) * sqrt(m * sum_i perf_i^2 - sum_{i<j} diss_ij^2)`.
pub fn predict_centroid_distance(summary: &DistanceSummary) -> Result<f64> {
    let m = summary.num_members();
    let sum_perf_sq: f64 = summary.performance().iter().map(|d| d * d).sum();
    let mut sum_diss_sq = 0.0;
    for i in 0..m {
        for j in (i + 1)..m {
            let d = summary.dissimilarity().get(i, j);
            sum_diss_sq += d * d;
        }
    }
    centroid_distance_from_moments(m, sum_perf_sq, sum_diss_sq)
}

/// Closed-form weighted performance.
///
/// Scaling member `k` by `m * w_k` turns the centroid of the scaled points
/// into exactly `F = sum_k w_k * S_k`, so the centroid formula applies to the
/// scaled points' distance summary.
pub fn predict_weighted_distance(
    group: &EnsembleGroup,
    weights: &WeightVector,
    ideal: &impl ScorePoint,
) -> Result<f64> {
    let m = group.len();
    if weights.len() != m {
        return Err(Error::ShapeMismatch(format!(
            "{} weights for a group of {m} members",
            weights.len()
        )));
    }
    let (n, p) = group.shape();
    if ideal.shape() != (n, p) {
        return Err(Error::ShapeMismatch(format!(
            "ideal is {}x{} but the group is {n}x{p}",
            ideal.num_instances(),
            ideal.num_classes()
        )));
    }
    let scaled: Vec<Vec<f64>> = group
        .members()
        .iter()
        .zip(weights.values())
        .map(|(member, &w)| member.coords().iter().map(|s| m as f64 * w * s).collect())
        .collect();
    let mut sum_perf_sq = 0.0;
    for coords in &scaled {
        let d2: f64 = coords
            .iter()
            .zip(ideal.coords())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        sum_perf_sq += d2;
    }
    let mut sum_diss_sq = 0.0;
    for i in 0..m {
        for j in (i + 1)..m {
            sum_diss_sq += scaled[i]
                .iter()
                .zip(&scaled[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
        }
    }
    centroid_distance_from_moments(m, sum_perf_sq, sum_diss_sq)
}

/// Centroid performance in `c_p` units when all members sit at a common
/// performance distance and all pairs at `theta` times that distance:
/// `sqrt(1 - theta^2 * (m - 1) / (2m))`.
pub fn theta_limit_curve(theta: f64, m: u64) -> Result<f64> {
    if !theta.is_finite() || theta < 0.0 {
        return Err(Error::InvalidArgument(format!("theta must be nonnegative, got {theta}")));
    }
    if m < 2 {
        return Err(Error::InvalidArgument(format!("need at least two members, got {m}")));
    }
    let mf = m as f64;
    let radicand = 1.0 - (mf - 1.0) / (2.0 * mf) * theta * theta;
    if radicand < 0.0 {
        let max_theta = (2.0 * mf / (mf - 1.0)).sqrt();
        return Err(Error::Domain(format!(
            "theta {theta} exceeds the maximum {max_theta:.6} for m = {m}"
        )));
    }
    Ok(radicand.sqrt())
}

/// Sum over instances of the per-instance Euclidean distance between a fused
/// point and the ideal point. Dominates the dataset-level distance.
pub fn instance_level_objective(fused: &impl ScorePoint, ideal: &impl ScorePoint) -> Result<f64> {
    if fused.shape() != ideal.shape() {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} vs {}x{}",
            fused.num_instances(),
            fused.num_classes(),
            ideal.num_instances(),
            ideal.num_classes()
        )));
    }
    let p = fused.num_classes();
    let mut total = 0.0;
    for i in 0..fused.num_instances() {
        let f = &fused.coords()[i * p..(i + 1) * p];
        let o = &ideal.coords()[i * p..(i + 1) * p];
        total += f
            .iter()
            .zip(o)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SymMatrix;
    use crate::space::{distance_summary, euclidean_distance, IdealLabels};
    use crate::testutil::example1;

    #[test]
    fn centroid_matches_worked_example() {
        let (group, ideal) = example1();
        let fused = centroid_fuse(&group);
        let expected = [0.5, 0.7, 0.3, 0.4, 0.5, 0.8];
        for (c, e) in fused.fused.coords().iter().zip(expected) {
            assert!((c - e).abs() < 1e-12, "{c} vs {e}");
        }
        let d = euclidean_distance(&fused.fused, &ideal).unwrap();
        assert!((d - 1.08f64.sqrt()).abs() < 1e-12);
        assert!((d - 1.04).abs() < 0.005);
    }

    #[test]
    fn single_member_centroid_is_the_member() {
        let s = ScoreMatrix::new("only", 1, 2, vec![0.3, 0.9]).unwrap();
        let group = EnsembleGroup::new(vec![s.clone()]).unwrap();
        assert_eq!(centroid_fuse(&group).fused.coords(), s.coords());
    }

    #[test]
    fn two_member_centroid_is_the_midpoint() {
        let a = ScoreMatrix::new("a", 1, 2, vec![0.2, 0.8]).unwrap();
        let b = ScoreMatrix::new("b", 1, 2, vec![0.6, 0.0]).unwrap();
        let group = EnsembleGroup::new(vec![a, b]).unwrap();
        assert_eq!(centroid_fuse(&group).fused.coords(), &[0.4, 0.4]);
    }

    #[test]
    fn uniform_weights_reproduce_the_centroid() {
        let (group, _) = example1();
        let w = WeightVector::uniform(group.len());
        let fused = weighted_fuse(&group, &w).unwrap();
        let centroid = centroid_fuse(&group);
        for (a, b) in fused.fused.coords().iter().zip(centroid.fused.coords()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn weighted_fuse_combines_basis_points() {
        let a = ScoreMatrix::new("a", 1, 2, vec![1.0, 0.0]).unwrap();
        let b = ScoreMatrix::new("b", 1, 2, vec![0.0, 1.0]).unwrap();
        let group = EnsembleGroup::new(vec![a, b]).unwrap();
        let w = WeightVector::new(vec![0.6, 0.8]).unwrap();
        assert_eq!(weighted_fuse(&group, &w).unwrap().fused.coords(), &[0.6, 0.8]);
    }

    #[test]
    fn weighted_fuse_allows_signed_weights_and_out_of_range_output() {
        let a = ScoreMatrix::new("a", 1, 2, vec![1.0, 0.0]).unwrap();
        let b = ScoreMatrix::new("b", 1, 2, vec![1.0, 1.0]).unwrap();
        let group = EnsembleGroup::new(vec![a, b]).unwrap();
        let w = WeightVector::new(vec![-1.0, 1.0]).unwrap();
        assert_eq!(weighted_fuse(&group, &w).unwrap().fused.coords(), &[0.0, 1.0]);
        let w2 = WeightVector::new(vec![2.0, 1.0]).unwrap();
        assert_eq!(weighted_fuse(&group, &w2).unwrap().fused.coords(), &[3.0, 1.0]);
    }

    #[test]
    fn weight_length_mismatch_is_an_error() {
        let (group, _) = example1();
        assert!(weighted_fuse(&group, &WeightVector::uniform(2)).is_err());
    }

    #[test]
    fn closed_form_matches_worked_example() {
        let (group, ideal) = example1();
        let summary = distance_summary(&group, &ideal).unwrap();
        let predicted = predict_centroid_distance(&summary).unwrap();
        let direct = euclidean_distance(&centroid_fuse(&group).fused, &ideal).unwrap();
        assert!((predicted - direct).abs() <= 1e-9 * direct.max(1.0));
        assert!((predicted - 1.04).abs() < 0.005);
    }

    #[test]
    fn closed_form_on_basis_summary() {
        // Three orthonormal points at distance 1 from the ideal, sqrt(2) apart.
        let mut diss = SymMatrix::zeros(3);
        for i in 0..3 {
            for j in (i + 1)..3 {
                diss.set(i, j, 2.0f64.sqrt());
            }
        }
        let summary = DistanceSummary::new(vec![1.0; 3], diss).unwrap();
        let d = predict_centroid_distance(&summary).unwrap();
        assert!((d - 1.0 / 3.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn closed_form_antipodal_pair_reaches_zero() {
        let mut diss = SymMatrix::zeros(2);
        diss.set(0, 1, 2.0);
        let summary = DistanceSummary::new(vec![1.0, 1.0], diss).unwrap();
        assert_eq!(predict_centroid_distance(&summary).unwrap(), 0.0);
    }

    #[test]
    fn closed_form_rejects_unrealizable_distances() {
        let mut diss = SymMatrix::zeros(2);
        diss.set(0, 1, 5.0);
        let summary = DistanceSummary::new(vec![1.0, 1.0], diss).unwrap();
        assert!(matches!(predict_centroid_distance(&summary), Err(Error::Geometry(_))));
    }

    #[test]
    fn weighted_prediction_agrees_with_direct_distance() {
        let a = ScoreMatrix::new("a", 1, 2, vec![1.0, 0.0]).unwrap();
        let b = ScoreMatrix::new("b", 1, 2, vec![1.0, 1.0]).unwrap();
        let group = EnsembleGroup::new(vec![a, b]).unwrap();
        let ideal = IdealLabels::new(1, 2, vec![0.0, 1.0]).unwrap();
        let w = WeightVector::new(vec![-1.0, 1.0]).unwrap();
        let predicted = predict_weighted_distance(&group, &w, &ideal).unwrap();
        assert!(predicted.abs() < 1e-9, "F lands exactly on O");

        let single = EnsembleGroup::new(vec![ScoreMatrix::new("s", 1, 2, vec![1.0, 1.0]).unwrap()])
            .unwrap();
        let o = ScoreMatrix::point("o", 1, 2, vec![1.0, 0.0]).unwrap();
        let w = WeightVector::new(vec![0.5]).unwrap();
        let predicted = predict_weighted_distance(&single, &w, &o).unwrap();
        assert!((predicted - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn uniform_weighted_prediction_equals_centroid_prediction() {
        let (group, ideal) = example1();
        let summary = distance_summary(&group, &ideal).unwrap();
        let centroid = predict_centroid_distance(&summary).unwrap();
        let w = WeightVector::uniform(group.len());
        let weighted = predict_weighted_distance(&group, &w, &ideal).unwrap();
        assert!((centroid - weighted).abs() < 1e-12);
    }

    #[test]
    fn theta_curve_reported_points() {
        assert!((theta_limit_curve(1.0, 27).unwrap() - 0.720).abs() < 1e-3);
        assert!((theta_limit_curve(0.25, 1_000_000).unwrap() - 0.984).abs() < 1e-3);
        assert!((theta_limit_curve(0.5, 1_000_000).unwrap() - 0.935).abs() < 1e-3);
        assert!((theta_limit_curve(0.75, 1_000_000).unwrap() - 0.848).abs() < 1e-3);
        assert!((theta_limit_curve(1.0, 1_000_000).unwrap() - 0.707).abs() < 1e-3);
        assert_eq!(theta_limit_curve(0.0, 2).unwrap(), 1.0);
        assert_eq!(theta_limit_curve(0.0, 999).unwrap(), 1.0);
        assert_eq!(theta_limit_curve(2.0, 2).unwrap(), 0.0);
        assert!(matches!(theta_limit_curve(2.0, 3), Err(Error::Domain(_))));
        assert!(theta_limit_curve(1.0, 1).is_err());
        assert!(theta_limit_curve(-0.5, 3).is_err());
    }

    #[test]
    fn theta_curve_is_strictly_decreasing() {
        for &theta in &[0.25, 0.5, 0.75, 1.0] {
            let mut prev = theta_limit_curve(theta, 2).unwrap();
            for m in 3..40 {
                let v = theta_limit_curve(theta, m).unwrap();
                assert!(v < prev, "not decreasing in m at theta={theta}, m={m}");
                prev = v;
            }
        }
        for m in [2u64, 5, 50] {
            let mut prev = theta_limit_curve(0.0, m).unwrap();
            for k in 1..=10 {
                let v = theta_limit_curve(0.1 * k as f64, m).unwrap();
                assert!(v < prev, "not decreasing in theta at m={m}");
                prev = v;
            }
        }
    }

    #[test]
    fn instance_objective_matches_hand_sum() {
        let (group, ideal) = example1();
        let c = centroid_fuse(&group).fused;
        let v = instance_level_objective(&c, &ideal).unwrap();
        let expected = 0.43f64.sqrt() + 0.65f64.sqrt();
        assert!((v - expected).abs() < 1e-12);
        assert!((v - 1.4619).abs() < 5e-4);
        // Sum of per-instance norms dominates the norm of the concatenation.
        let d = euclidean_distance(&c, &ideal).unwrap();
        assert!(v >= d);
        // And zero when the fused point is the ideal point.
        assert_eq!(instance_level_objective(&ideal, &ideal).unwrap(), 0.0);
    }
}
