//! Least-squares weights for weighted majority voting.
//!
//! The optimal weights minimize `ed(F, O)^2` for `F = sum_k w_k * S_k`, which
//! is the orthogonal projection of the ideal point onto the span of the
//! members. Setting the gradient to zero yields m linear equations in m
//! unknowns, built from inner products of the flattened members.

use crate::error::{Error, Result};
use crate::fusion::weighted_fuse;
use crate::linalg::{least_squares, SymMatrix};
use crate::space::{euclidean_distance, EnsembleGroup, ScorePoint};

/// Per-classifier scalar weights. Unconstrained: entries may be negative and
/// need not sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    values: Vec<f64>,
}

impl WeightVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("weight vector must be non-empty".into()));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("weight {k} is not finite")));
        }
        Ok(WeightVector { values })
    }

    /// The majority-voting weights `1/m`.
    pub fn uniform(m: usize) -> Self {
        assert!(m > 0, "uniform weights need at least one member");
        WeightVector { values: vec![1.0 / m as f64; m] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // non-empty by construction
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// The m×m linear system whose solution is the optimal weight vector.
#[derive(Debug, Clone)]
pub struct NormalEquations {
    gram: SymMatrix,
    rhs: Vec<f64>,
    ridge_applied: bool,
    ridge_lambda: f64,
}

impl NormalEquations {
    /// Gram matrix of member inner products, `a_qk = <S_k, S_q>`.
    pub fn gram(&self) -> &SymMatrix {
        &self.gram
    }

    /// Right-hand side of ideal-point projections, `b_q = <O, S_q>`.
    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn ridge_applied(&self) -> bool {
        self.ridge_applied
    }

    pub fn ridge_lambda(&self) -> f64 {
        self.ridge_lambda
    }
}

/// Builds the normal equations from flattened member inner products.
///
/// Summation order is fixed (coordinate order per member pair), so the result
/// does not depend on any parallel schedule.
pub fn build_normal_equations(
    group: &EnsembleGroup,
    ideal: &impl ScorePoint,
) -> Result<NormalEquations> {
    if ideal.shape() != group.shape() {
        return Err(Error::ShapeMismatch(format!(
            "ideal is {}x{} but the group is {}x{}",
            ideal.num_instances(),
            ideal.num_classes(),
            group.shape().0,
            group.shape().1
        )));
    }
    let m = group.len();
    let gram = SymMatrix::from_fn(m, |q, k| {
        dot(group.member(q).coords(), group.member(k).coords())
    });
    let rhs: Vec<f64> = (0..m)
        .map(|q| dot(ideal.coords(), group.member(q).coords()))
        .collect();
    Ok(NormalEquations { gram, rhs, ridge_applied: false, ridge_lambda: 0.0 })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A pivot below this fraction of the largest member norm marks the system
/// as numerically singular.
pub(crate) const PIVOT_REL_TOL: f64 = 1e-10;

/// Optimal weights plus solver diagnostics.
#[derive(Debug, Clone)]
pub struct WeightSolution {
    pub weights: WeightVector,
    /// Achieved `ed(F, O)` of the weighted fusion under these weights.
    pub residual: f64,
    /// True when the member set was numerically dependent (or an explicit
    /// ridge was requested) and the degenerate-system path produced the
    /// weights.
    pub ridge_applied: bool,
    /// The ridge actually applied; stays 0 when a dependent member set was
    /// resolved by the rank-truncated exact solve instead.
    pub ridge_lambda: f64,
    /// Numerical rank of the member set, which equals the gram matrix rank.
    pub gram_rank: usize,
}

pub(crate) struct RawSolution {
    pub weights: Vec<f64>,
    pub ridge_applied: bool,
    pub ridge_lambda: f64,
    pub gram_rank: usize,
}

/// Least-squares weights for `min |sum_k w_k col_k - target|`, with the
/// degenerate-system policy.
///
/// The solve runs on the member columns directly (column-pivoted QR) rather
/// than on their gram matrix: squaring into normal equations would square the
/// condition number and misjudge nearly-dependent members that the optimum
/// genuinely exploits. Numerically dependent columns are truncated with zero
/// weight, which keeps the achieved residual at the true optimum (the fit is
/// the projection onto the span, and dropping duplicates does not change the
/// span). A ridge is only applied when the caller asks for one, by solving
/// the stacked system `[A; sqrt(lambda) I]`; an automatic ridge would bias
/// the residual by `lambda * |w|^2`, breaking the monotone-chain and
/// optimality guarantees whenever the exact weights are large.
pub(crate) fn solve_weight_least_squares(
    columns: &[&[f64]],
    target: &[f64],
    user_ridge: f64,
) -> RawSolution {
    let m = columns.len();
    if user_ridge > 0.0 {
        let n = target.len();
        let sqrt_lambda = user_ridge.sqrt();
        let stacked: Vec<Vec<f64>> = columns
            .iter()
            .enumerate()
            .map(|(k, col)| {
                let mut c = Vec::with_capacity(n + m);
                c.extend_from_slice(col);
                c.resize(n + m, 0.0);
                c[n + k] = sqrt_lambda;
                c
            })
            .collect();
        let mut rhs = target.to_vec();
        rhs.resize(n + m, 0.0);
        let refs: Vec<&[f64]> = stacked.iter().map(|c| c.as_slice()).collect();
        // The stacked columns are always independent; report the rank of the
        // raw member set for diagnostics.
        let ls = least_squares(&refs, &rhs, 0.0);
        let rank = least_squares(columns, target, PIVOT_REL_TOL).rank;
        return RawSolution {
            weights: ls.solution,
            ridge_applied: true,
            ridge_lambda: user_ridge,
            gram_rank: rank,
        };
    }
    let ls = least_squares(columns, target, PIVOT_REL_TOL);
    RawSolution {
        weights: ls.solution,
        ridge_applied: ls.rank < m,
        ridge_lambda: 0.0,
        gram_rank: ls.rank,
    }
}

/// Computes the least-squares optimal weights for a group against an ideal
/// point, with optional ridge regularization (`ridge = 0` for none).
///
/// Numerically dependent member sets (pivot below `1e-10` of the largest
/// member norm) are solved exactly on the pivoted independent subset with
/// zero weights elsewhere, flagged through `ridge_applied`; the achieved
/// residual is still the true optimum.
pub fn solve_optimal_weights(
    group: &EnsembleGroup,
    ideal: &impl ScorePoint,
    ridge: f64,
) -> Result<WeightSolution> {
    if !ridge.is_finite() || ridge < 0.0 {
        return Err(Error::InvalidArgument(format!("ridge must be nonnegative, got {ridge}")));
    }
    if ideal.shape() != group.shape() {
        return Err(Error::ShapeMismatch(format!(
            "ideal is {}x{} but the group is {}x{}",
            ideal.num_instances(),
            ideal.num_classes(),
            group.shape().0,
            group.shape().1
        )));
    }
    let columns: Vec<&[f64]> = group.members().iter().map(|s| s.coords()).collect();
    let raw = solve_weight_least_squares(&columns, ideal.coords(), ridge);
    let weights = WeightVector::new(raw.weights)?;
    let fused = weighted_fuse(group, &weights)?;
    let residual = euclidean_distance(&fused.fused, ideal)?;
    Ok(WeightSolution {
        weights,
        residual,
        ridge_applied: raw.ridge_applied,
        ridge_lambda: raw.ridge_lambda,
        gram_rank: raw.gram_rank,
    })
}
