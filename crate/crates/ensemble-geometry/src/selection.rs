//! Subset selection: pick m' of m members so the fused subset lands as close
//! to the ideal point as possible.
//!
//! The problem is a maximum-diversity-style combinatorial search, so the
//! module pairs an exact enumerator (with an evaluation budget) with a greedy
//! constructor and a swap-based local search. The majority-voting objective
//! is evaluated from precomputed distance moments, never by refusing score
//! matrices; the weighted objective solves the subset's normal equations,
//! carved out of the full gram matrix.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fusion::centroid_distance_from_moments;
use crate::linalg::SymMatrix;
use crate::space::{distance_unchecked, EnsembleGroup, ScorePoint};
use crate::weights::PIVOT_REL_TOL;

/// Which fusion scheme the subset is optimized for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionObjective {
    /// Majority voting: distance of the subset centroid to the ideal point.
    Mv,
    /// Weighted majority voting: optimal-weight residual of the subset.
    Wmv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionMethod {
    Exact,
    Greedy,
    LocalSearch,
}

/// A chosen subset, its achieved objective, and the search effort.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    /// Sorted 0-based member indices.
    pub chosen: Vec<usize>,
    /// Achieved distance to the ideal point under the chosen objective.
    pub objective: f64,
    pub method: SelectionMethod,
    /// Number of subset objective evaluations performed.
    pub evaluations: u64,
}

/// Default cap on the number of subsets the exact enumerator may visit.
pub const DEFAULT_SUBSET_CAP: u64 = 2_000_000;

/// Default iteration budget for the local search.
pub const DEFAULT_LOCAL_SEARCH_ITERS: u64 = 1000;

enum EvalKind<'a> {
    Mv { perf_sq: Vec<f64>, diss_sq: SymMatrix },
    Wmv { columns: Vec<&'a [f64]>, ideal: &'a [f64] },
}

/// Shared objective evaluator over member index subsets.
struct Evaluator<'a> {
    kind: EvalKind<'a>,
    evaluations: u64,
}

impl<'a> Evaluator<'a> {
    fn build(
        group: &'a EnsembleGroup,
        ideal: &'a impl ScorePoint,
        objective: SelectionObjective,
    ) -> Result<Self> {
        if ideal.shape() != group.shape() {
            return Err(Error::ShapeMismatch(format!(
                "ideal is {}x{} but the group is {}x{}",
                ideal.num_instances(),
                ideal.num_classes(),
                group.shape().0,
                group.shape().1
            )));
        }
        let kind = match objective {
            SelectionObjective::Mv => {
                let m = group.len();
                let perf_sq: Vec<f64> = group
                    .members()
                    .iter()
                    .map(|s| {
                        let d = distance_unchecked(s.coords(), ideal.coords());
                        d * d
                    })
                    .collect();
                let diss_sq = SymMatrix::from_fn(m, |i, j| {
                    if i == j {
                        0.0
                    } else {
                        let d = distance_unchecked(
                            group.member(i).coords(),
                            group.member(j).coords(),
                        );
                        d * d
                    }
                });
                EvalKind::Mv { perf_sq, diss_sq }
            }
            SelectionObjective::Wmv => EvalKind::Wmv {
                columns: group.members().iter().map(|s| s.coords()).collect(),
                ideal: ideal.coords(),
            },
        };
        Ok(Evaluator { kind, evaluations: 0 })
    }

    /// Objective of one subset (indices sorted ascending).
    fn eval(&mut self, subset: &[usize]) -> Result<f64> {
        self.evaluations += 1;
        match &self.kind {
            EvalKind::Mv { perf_sq, diss_sq } => {
                let mut sum_p2 = 0.0;
                let mut sum_d2 = 0.0;
                for (a, &i) in subset.iter().enumerate() {
                    sum_p2 += perf_sq[i];
                    for &j in &subset[a + 1..] {
                        sum_d2 += diss_sq.get(i, j);
                    }
                }
                centroid_distance_from_moments(subset.len(), sum_p2, sum_d2)
            }
            EvalKind::Wmv { columns, ideal } => {
                let sub: Vec<&[f64]> = subset.iter().map(|&i| columns[i]).collect();
                Ok(crate::linalg::least_squares(&sub, ideal, PIVOT_REL_TOL).residual)
            }
        }
    }
}

fn binomial(m: u64, k: u64) -> u128 {
    let k = k.min(m - k);
    let mut acc: u128 = 1;
    for t in 0..k {
        acc = acc.saturating_mul((m - t) as u128) / (t + 1) as u128;
    }
    acc
}

fn validate_subset_size(m: usize, m_prime: usize) -> Result<()> {
    if m_prime < 1 || m_prime > m {
        return Err(Error::InvalidArgument(format!(
            "subset size {m_prime} out of range 1..={m}"
        )));
    }
    Ok(())
}

/// Exhaustive search over all size-`m_prime` subsets.
///
/// Enumeration is lexicographic and keeps the first subset achieving the
/// minimum, so ties resolve to the lexicographically smallest index set.
/// `m_prime = 1` is allowed as the degenerate single-member case.
pub fn exact_best_subset(
    group: &EnsembleGroup,
    ideal: &impl ScorePoint,
    m_prime: usize,
    objective: SelectionObjective,
    cap: u64,
) -> Result<SelectionResult> {
    let m = group.len();
    validate_subset_size(m, m_prime)?;
    let combinations = binomial(m as u64, m_prime as u64);
    if combinations > cap as u128 {
        return Err(Error::Budget { combinations, cap });
    }
    let mut eval = Evaluator::build(group, ideal, objective)?;

    let mut best: Option<(f64, Vec<usize>)> = None;
    match &eval.kind {
        EvalKind::Mv { .. } => {
            // Incremental enumeration over the precomputed moments: extending
            // a prefix by one member only adds its squared performance and
            // its squared distances to the members already chosen.
            let (perf_sq, diss_sq) = match &eval.kind {
                EvalKind::Mv { perf_sq, diss_sq } => (perf_sq.clone(), diss_sq.clone()),
                _ => unreachable!(),
            };
            let mut chosen: Vec<usize> = Vec::with_capacity(m_prime);
            let mut evals = 0u64;
            enumerate_mv(
                &perf_sq,
                &diss_sq,
                m,
                m_prime,
                0,
                0.0,
                0.0,
                &mut chosen,
                &mut best,
                &mut evals,
            )?;
            eval.evaluations = evals;
        }
        EvalKind::Wmv { .. } => {
            let mut chosen: Vec<usize> = Vec::with_capacity(m_prime);
            enumerate_generic(&mut eval, m, m_prime, 0, &mut chosen, &mut best)?;
        }
    }

    let (objective_value, chosen) = best.expect("at least one subset was evaluated");
    Ok(SelectionResult {
        chosen,
        objective: objective_value,
        method: SelectionMethod::Exact,
        evaluations: eval.evaluations,
    })
}

#[allow(clippy::too_many_arguments)]
fn enumerate_mv(
    perf_sq: &[f64],
    diss_sq: &SymMatrix,
    m: usize,
    m_prime: usize,
    start: usize,
    sum_p2: f64,
    sum_d2: f64,
    chosen: &mut Vec<usize>,
    best: &mut Option<(f64, Vec<usize>)>,
    evals: &mut u64,
) -> Result<()> {
    if chosen.len() == m_prime {
        *evals += 1;
        let obj = centroid_distance_from_moments(m_prime, sum_p2, sum_d2)?;
        if best.as_ref().is_none_or(|(b, _)| obj < *b) {
            *best = Some((obj, chosen.clone()));
        }
        return Ok(());
    }
    let remaining = m_prime - chosen.len();
    for v in start..=(m - remaining) {
        let added_d2: f64 = chosen.iter().map(|&u| diss_sq.get(u, v)).sum();
        chosen.push(v);
        enumerate_mv(
            perf_sq,
            diss_sq,
            m,
            m_prime,
            v + 1,
            sum_p2 + perf_sq[v],
            sum_d2 + added_d2,
            chosen,
            best,
            evals,
        )?;
        chosen.pop();
    }
    Ok(())
}

fn enumerate_generic(
    eval: &mut Evaluator,
    m: usize,
    m_prime: usize,
    start: usize,
    chosen: &mut Vec<usize>,
    best: &mut Option<(f64, Vec<usize>)>,
) -> Result<()> {
    if chosen.len() == m_prime {
        let obj = eval.eval(chosen)?;
        if best.as_ref().is_none_or(|(b, _)| obj < *b) {
            *best = Some((obj, chosen.clone()));
        }
        return Ok(());
    }
    let remaining = m_prime - chosen.len();
    for v in start..=(m - remaining) {
        chosen.push(v);
        enumerate_generic(eval, m, m_prime, v + 1, chosen, best)?;
        chosen.pop();
    }
    Ok(())
}

/// Forward greedy construction: best singleton first, then repeatedly the
/// member whose addition minimizes the objective. Ties keep the lowest index.
pub fn greedy_forward_subset(
    group: &EnsembleGroup,
    ideal: &impl ScorePoint,
    m_prime: usize,
    objective: SelectionObjective,
) -> Result<SelectionResult> {
    let m = group.len();
    validate_subset_size(m, m_prime)?;
    let mut eval = Evaluator::build(group, ideal, objective)?;

    let mut chosen: Vec<usize> = Vec::with_capacity(m_prime);
    let mut current_obj = f64::INFINITY;
    for _ in 0..m_prime {
        let mut best_step: Option<(f64, usize)> = None;
        for v in 0..m {
            if chosen.contains(&v) {
                continue;
            }
            let mut candidate = chosen.clone();
            candidate.push(v);
            candidate.sort_unstable();
            let obj = eval.eval(&candidate)?;
            if best_step.as_ref().is_none_or(|(b, _)| obj < *b) {
                best_step = Some((obj, v));
            }
        }
        let (obj, v) = best_step.expect("at least one candidate per step");
        chosen.push(v);
        chosen.sort_unstable();
        current_obj = obj;
    }
    Ok(SelectionResult {
        chosen,
        objective: current_obj,
        method: SelectionMethod::Greedy,
        evaluations: eval.evaluations,
    })
}

/// Swap-based local search seeded from the greedy solution.
///
/// Each iteration scans the full in/out swap neighborhood and applies the
/// best improving swap. At a local optimum the search restarts from a random
/// subset while the iteration budget lasts; the best subset ever seen wins.
/// Deterministic for a fixed seed.
pub fn local_search_subset(
    group: &EnsembleGroup,
    ideal: &impl ScorePoint,
    m_prime: usize,
    objective: SelectionObjective,
    iterations: u64,
    seed: u64,
) -> Result<SelectionResult> {
    let m = group.len();
    if m_prime < 2 || m_prime >= m {
        return Err(Error::InvalidArgument(format!(
            "local search needs 2 <= m' < m, got m' = {m_prime} with m = {m}"
        )));
    }
    let greedy = greedy_forward_subset(group, ideal, m_prime, objective)?;
    let mut eval = Evaluator::build(group, ideal, objective)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut best = (greedy.objective, greedy.chosen.clone());
    let mut current = (greedy.objective, greedy.chosen);
    let mut iters = 0u64;

    while iters < iterations {
        // Descend to a local optimum.
        let mut moved = true;
        while moved && iters < iterations {
            moved = false;
            iters += 1;
            let mut best_swap: Option<(f64, Vec<usize>)> = None;
            for &out in &current.1 {
                for v in 0..m {
                    if current.1.binary_search(&v).is_ok() {
                        continue;
                    }
                    let mut candidate: Vec<usize> =
                        current.1.iter().copied().filter(|&u| u != out).collect();
                    candidate.push(v);
                    candidate.sort_unstable();
                    let obj = eval.eval(&candidate)?;
                    if obj < current.0 && best_swap.as_ref().is_none_or(|(b, _)| obj < *b) {
                        best_swap = Some((obj, candidate));
                    }
                }
            }
            if let Some(swap) = best_swap {
                current = swap;
                moved = true;
            }
        }
        if current.0 < best.0 {
            best = current.clone();
        }
        if iters >= iterations {
            break;
        }
        // Restart from a random subset; costs one iteration.
        iters += 1;
        let mut restart: Vec<usize> =
            rand::seq::index::sample(&mut rng, m, m_prime).into_vec();
        restart.sort_unstable();
        let obj = eval.eval(&restart)?;
        current = (obj, restart);
        if current.0 < best.0 {
            best = current.clone();
        }
    }
    if current.0 < best.0 {
        best = current;
    }

    Ok(SelectionResult {
        chosen: best.1,
        objective: best.0,
        method: SelectionMethod::LocalSearch,
        evaluations: eval.evaluations,
    })
}

/// The diversity term of the centroid identity, `(1/m'^2) * sum_{i<j in sub}
/// ed(S_i, S_j)^2`, normalized so that
/// `ed(C, O)^2 = (1/m') * sum_{i in sub} perf_i^2 - diversity` holds exactly.
pub fn diversity_objective(group: &EnsembleGroup, subset: &[usize]) -> Result<f64> {
    if subset.is_empty() {
        return Err(Error::InvalidArgument("subset must be non-empty".into()));
    }
    for (a, &i) in subset.iter().enumerate() {
        if i >= group.len() {
            return Err(Error::InvalidArgument(format!(
                "member index {i} out of range for group of {}",
                group.len()
            )));
        }
        if subset[a + 1..].contains(&i) {
            return Err(Error::InvalidArgument(format!("duplicate member index {i}")));
        }
    }
    let mp = subset.len() as f64;
    let mut sum = 0.0;
    for (a, &i) in subset.iter().enumerate() {
        for &j in &subset[a + 1..] {
            let d = distance_unchecked(group.member(i).coords(), group.member(j).coords());
            sum += d * d;
        }
    }
    Ok(sum / (mp * mp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::centroid_fuse;
    use crate::space::{euclidean_distance, ScoreMatrix};
    use crate::testutil::{brute_force_best_centroid_subset, example4, random_valid_group};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_singleton_picks_the_closest_point() {
        let (group, ideal) = example4();
        let r = exact_best_subset(&group, &ideal, 1, SelectionObjective::Mv, 100).unwrap();
        assert_eq!(r.chosen, vec![0]);
        assert!((r.objective - 1.0).abs() < 1e-12);
        assert_eq!(r.evaluations, 6);
    }

    #[test]
    fn exact_pair_beats_the_equal_radius_pairs() {
        // The equal-radius pairs {S2,S3} and {S1,S6} both reach exactly 0.5,
        // but the mixed-radius pair {S2,S5} (midpoint (0.156, -0.25)) does
        // strictly better; {S3,S4} mirrors it and loses the lexicographic tie.
        let (group, ideal) = example4();
        let r = exact_best_subset(&group, &ideal, 2, SelectionObjective::Mv, 100).unwrap();
        assert_eq!(r.chosen, vec![1, 4]);
        assert!((r.objective - 0.2946794869005976).abs() < 1e-12);
        let (oracle_sub, oracle_obj) = brute_force_best_centroid_subset(&group, &ideal, 2);
        assert_eq!(r.chosen, oracle_sub);
        assert!((r.objective - oracle_obj).abs() < 1e-9);

        let mut eval = Evaluator::build(&group, &ideal, SelectionObjective::Mv).unwrap();
        assert!((eval.eval(&[1, 2]).unwrap() - 0.5).abs() < 1e-12);
        assert!((eval.eval(&[0, 5]).unwrap() - 0.5).abs() < 1e-12);
        assert!((eval.eval(&[2, 3]).unwrap() - r.objective).abs() < 1e-12, "mirrored tie");
    }

    #[test]
    fn exact_triple_finds_a_zero_distance_centroid() {
        // Two triples reach the ideal point exactly: {S1,S2,S3} and
        // {S4,S5,S6}. Lexicographic tie-breaking keeps the first.
        let (group, ideal) = example4();
        let r = exact_best_subset(&group, &ideal, 3, SelectionObjective::Mv, 100).unwrap();
        assert_eq!(r.chosen, vec![0, 1, 2]);
        assert!(r.objective.abs() < 1e-7);
        let (oracle_sub, oracle_obj) = brute_force_best_centroid_subset(&group, &ideal, 3);
        assert_eq!(r.chosen, oracle_sub);
        assert!(oracle_obj.abs() < 1e-12);

        let mut eval = Evaluator::build(&group, &ideal, SelectionObjective::Mv).unwrap();
        assert!(eval.eval(&[3, 4, 5]).unwrap().abs() < 1e-7, "the outer triple ties");
    }

    #[test]
    fn greedy_pair_takes_the_closest_point_then_its_antipode() {
        let (group, ideal) = example4();
        let r = greedy_forward_subset(&group, &ideal, 2, SelectionObjective::Mv).unwrap();
        assert_eq!(r.chosen, vec![0, 5]);
        assert!((r.objective - 0.5).abs() < 1e-12);
    }

    #[test]
    fn greedy_full_group_equals_full_ensemble_objective() {
        let (group, ideal) = example4();
        let r = greedy_forward_subset(&group, &ideal, group.len(), SelectionObjective::Mv)
            .unwrap();
        assert_eq!(r.chosen, (0..group.len()).collect::<Vec<_>>());
        let full = euclidean_distance(&centroid_fuse(&group).fused, &ideal).unwrap();
        assert!((r.objective - full).abs() < 1e-9);
    }

    #[test]
    fn local_search_reaches_a_global_optimum_on_the_worked_points() {
        let (group, ideal) = example4();
        let r = local_search_subset(&group, &ideal, 3, SelectionObjective::Mv, 1000, 7).unwrap();
        assert!(r.objective.abs() < 1e-7);
        let g = greedy_forward_subset(&group, &ideal, 3, SelectionObjective::Mv).unwrap();
        assert!(r.objective <= g.objective + 1e-12);
    }

    #[test]
    fn local_search_is_deterministic_per_seed() {
        let (group, ideal) = example4();
        let a = local_search_subset(&group, &ideal, 3, SelectionObjective::Mv, 50, 123).unwrap();
        let b = local_search_subset(&group, &ideal, 3, SelectionObjective::Mv, 50, 123).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn budget_cap_is_enforced() {
        let (group, ideal) = example4();
        let err = exact_best_subset(&group, &ideal, 3, SelectionObjective::Mv, 10);
        assert!(matches!(err, Err(Error::Budget { combinations: 20, cap: 10 })));
    }

    #[test]
    fn method_chain_is_ordered_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..25 {
            let (group, ideal) = random_valid_group(&mut rng, 10, 4, 3);
            for objective in [SelectionObjective::Mv, SelectionObjective::Wmv] {
                let exact =
                    exact_best_subset(&group, &ideal, 3, objective, DEFAULT_SUBSET_CAP).unwrap();
                let greedy = greedy_forward_subset(&group, &ideal, 3, objective).unwrap();
                let local =
                    local_search_subset(&group, &ideal, 3, objective, 200, 11).unwrap();
                assert!(exact.objective <= local.objective + 1e-12);
                assert!(local.objective <= greedy.objective + 1e-12);
            }
        }
    }

    #[test]
    fn optimal_weights_never_lose_to_uniform_weights_per_size() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let (group, ideal) = random_valid_group(&mut rng, 8, 5, 3);
        for m_prime in 2..=4 {
            let mv = exact_best_subset(&group, &ideal, m_prime, SelectionObjective::Mv, 1000)
                .unwrap();
            let wmv = exact_best_subset(&group, &ideal, m_prime, SelectionObjective::Wmv, 1000)
                .unwrap();
            assert!(wmv.objective <= mv.objective + 1e-9);
        }
    }

    #[test]
    fn mv_identity_links_diversity_to_the_centroid_distance() {
        let (group, ideal) = example4();
        let div = diversity_objective(&group, &[3, 4, 5]).unwrap();
        assert!((div - 4.0).abs() < 1e-3);
        let mut eval = Evaluator::build(&group, &ideal, SelectionObjective::Mv).unwrap();
        let perf_sq_sum: f64 = [3, 4, 5]
            .iter()
            .map(|&i| {
                let d = euclidean_distance(group.member(i), &ideal).unwrap();
                d * d
            })
            .sum();
        let ed2 = eval.eval(&[3, 4, 5]).unwrap().powi(2);
        assert!((perf_sq_sum / 3.0 - div - ed2).abs() < 1e-9);
    }

    #[test]
    fn diversity_edge_cases() {
        let (group, _) = example4();
        assert_eq!(diversity_objective(&group, &[2]).unwrap(), 0.0);
        let twin = ScoreMatrix::point("twin", 1, 2, group.member(0).coords().to_vec()).unwrap();
        let dup = EnsembleGroup::new(vec![group.member(0).clone(), twin]).unwrap();
        assert_eq!(diversity_objective(&dup, &[0, 1]).unwrap(), 0.0);
        assert!(diversity_objective(&group, &[]).is_err());
        assert!(diversity_objective(&group, &[0, 0]).is_err());
        assert!(diversity_objective(&group, &[9]).is_err());
    }
}
