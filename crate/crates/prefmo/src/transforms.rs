//! Transformations from symbolic-reward instances to vector-reward instances:
//! counting rewards, the ordered-reward (decumulative) construction, the
//! ordered-history basis-change construction, and numeric verification of the
//! value-identity lemmas linking all three.

use crate::error::{Error, Result};
use crate::linalg::{self, dot};
use crate::mdp::{evaluate_policy, History, MdpInstance, Policy, RewardSpec};
use crate::momdp::{pareto_dominates, vector_evaluate};

pub const SINGULARITY_REL_TOL: f64 = 1e-10;

/// Strict total order over the d symbolic labels: `perm[k]` is the original
/// label index ranked k-th from worst. Applying the order reindexes labels so
/// that label 0 is worst and label d-1 is best.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewardOrder {
    perm: Vec<usize>,
}

impl RewardOrder {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let d = perm.len();
        let mut seen = vec![false; d];
        for &p in &perm {
            if p >= d || seen[p] {
                return Err(Error::validation(
                    "reward order must be a permutation of the label indices",
                ));
            }
            seen[p] = true;
        }
        Ok(RewardOrder { perm })
    }

    pub fn identity(d: usize) -> Self {
        RewardOrder {
            perm: (0..d).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    /// rank[original label] = position in the order (0 = worst).
    pub fn ranks(&self) -> Vec<usize> {
        let mut rank = vec![0; self.perm.len()];
        for (r, &label) in self.perm.iter().enumerate() {
            rank[label] = r;
        }
        rank
    }

    /// Canonicalizes a symbolic instance: labels reindexed so the known order
    /// is simply label 0 < label 1 < ... < label d-1.
    pub fn canonicalize(&self, mdp: &MdpInstance) -> Result<MdpInstance> {
        let (num_labels, labels) = match mdp.reward() {
            RewardSpec::Symbolic { num_labels, labels } => (*num_labels, labels),
            other => {
                return Err(Error::validation(format!(
                    "symbolic reward required, instance has {} reward",
                    other.kind()
                )))
            }
        };
        if num_labels != self.perm.len() {
            return Err(Error::DimensionMismatch {
                expected: num_labels,
                got: self.perm.len(),
            });
        }
        let rank = self.ranks();
        let relabeled: Vec<usize> = labels.iter().map(|&l| rank[l]).collect();
        mdp.with_reward(RewardSpec::Symbolic {
            num_labels,
            labels: relabeled,
        })
    }
}

/// Ordered list of d histories h_0 < h_1 < ... < h_{d-1} (worst first).
#[derive(Debug, Clone)]
pub struct OrderedHistories {
    pub histories: Vec<History>,
}

impl OrderedHistories {
    pub fn new(histories: Vec<History>) -> Self {
        OrderedHistories { histories }
    }
}

/// Basis-change matrix whose columns are the counting value vectors of the
/// ordered histories, together with its inverse and a condition estimate.
#[derive(Debug, Clone)]
pub struct BasisMatrix {
    pub h: Vec<Vec<f64>>,
    pub h_inv: Vec<Vec<f64>>,
    pub condition: f64,
}

/// Counting reward: the canonical vector of the label at each (s, a).
pub fn counting_reward(mdp: &MdpInstance) -> Result<RewardSpec> {
    let (d, labels) = match mdp.reward() {
        RewardSpec::Symbolic { num_labels, labels } => (*num_labels, labels),
        other => {
            return Err(Error::validation(format!(
                "symbolic reward required, instance has {} reward",
                other.kind()
            )))
        }
    };
    let values = labels
        .iter()
        .map(|&l| {
            let mut v = vec![0.0; d];
            v[l] = 1.0;
            v
        })
        .collect();
    Ok(RewardSpec::Vector { dim: d, values })
}

/// Decumulative (suffix-sum) transform: out_k = sum_{j >= k} v_j.
pub fn decumulative(v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    let mut acc = 0.0;
    for k in (0..v.len()).rev() {
        acc += v[k];
        out[k] = acc;
    }
    out
}

/// Inverse of [`decumulative`]: first differences.
pub fn decumulative_inverse(v: &[f64]) -> Vec<f64> {
    (0..v.len())
        .map(|k| if k + 1 < v.len() { v[k] - v[k + 1] } else { v[k] })
        .collect()
}

/// Ordered-reward transform: label ranked i (0-based, worst first) becomes the
/// 0/1 step vector with i+1 leading ones (the decumulative of its canonical
/// vector).
pub fn ordered_reward_transform(mdp: &MdpInstance, order: &RewardOrder) -> Result<MdpInstance> {
    let canonical = order.canonicalize(mdp)?;
    let (d, labels) = match canonical.reward() {
        RewardSpec::Symbolic { num_labels, labels } => (*num_labels, labels.clone()),
        _ => unreachable!(),
    };
    let values = labels
        .iter()
        .map(|&l| {
            let mut v = vec![0.0; d];
            for x in v.iter_mut().take(l + 1) {
                *x = 1.0;
            }
            v
        })
        .collect();
    canonical.with_reward(RewardSpec::Vector { dim: d, values })
}

/// Discounted sum of canonical label indicators along a history.
pub fn history_count_vector(mdp: &MdpInstance, h: &History) -> Result<Vec<f64>> {
    let d = match mdp.reward() {
        RewardSpec::Symbolic { num_labels, .. } => *num_labels,
        other => {
            return Err(Error::validation(format!(
                "symbolic reward required, instance has {} reward",
                other.kind()
            )))
        }
    };
    mdp.validate_history(h)?;
    let mut acc = vec![0.0; d];
    let mut disc = 1.0;
    for i in 0..h.len() {
        let l = mdp.symbolic_label(h.states[i], h.actions[i])?;
        acc[l] += disc;
        disc *= mdp.discount();
    }
    Ok(acc)
}

/// Builds the basis matrix from d ordered histories; errors when the count
/// vectors are (near-)dependent, violating the independence assumption.
pub fn history_basis_matrix(mdp: &MdpInstance, ordered: &OrderedHistories) -> Result<BasisMatrix> {
    let d = match mdp.reward() {
        RewardSpec::Symbolic { num_labels, .. } => *num_labels,
        other => {
            return Err(Error::validation(format!(
                "symbolic reward required, instance has {} reward",
                other.kind()
            )))
        }
    };
    if ordered.histories.len() != d {
        return Err(Error::validation(format!(
            "expected {d} ordered histories, got {}",
            ordered.histories.len()
        )));
    }
    let columns: Vec<Vec<f64>> = ordered
        .histories
        .iter()
        .map(|h| history_count_vector(mdp, h))
        .collect::<Result<_>>()?;
    let h: Vec<Vec<f64>> = (0..d)
        .map(|row| (0..d).map(|col| columns[col][row]).collect())
        .collect();
    let h_inv = linalg::invert(&h, SINGULARITY_REL_TOL).map_err(|_| {
        Error::IndependenceViolation(
            "history count vectors are singular or near-singular".into(),
        )
    })?;
    let residual = {
        let prod = linalg::mat_mul(&h, &h_inv);
        let mut r: f64 = 0.0;
        for (i, row) in prod.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                r = r.max((x - expect).abs());
            }
        }
        r
    };
    if residual > 1e-8 {
        return Err(Error::IndependenceViolation(format!(
            "basis inversion residual {residual:.3e} exceeds 1e-8"
        )));
    }
    Ok(BasisMatrix {
        condition: linalg::condition(&h, &h_inv),
        h,
        h_inv,
    })
}

/// Ordered-history transform: label i maps to the decumulative of the i-th
/// column of H^{-1}.
pub fn ordered_history_transform(
    mdp: &MdpInstance,
    ordered: &OrderedHistories,
) -> Result<(MdpInstance, BasisMatrix)> {
    let basis = history_basis_matrix(mdp, ordered)?;
    let (d, labels) = match mdp.reward() {
        RewardSpec::Symbolic { num_labels, labels } => (*num_labels, labels.clone()),
        _ => unreachable!(),
    };
    let reward_vectors: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let col: Vec<f64> = (0..d).map(|row| basis.h_inv[row][i]).collect();
            decumulative(&col)
        })
        .collect();
    let values = labels.iter().map(|&l| reward_vectors[l].clone()).collect();
    let out = mdp.with_reward(RewardSpec::Vector { dim: d, values })?;
    Ok((out, basis))
}

/// Substitutes concrete values for the symbolic labels of a canonical instance.
pub fn substitute_values(mdp: &MdpInstance, x: &[f64]) -> Result<MdpInstance> {
    let (d, labels) = match mdp.reward() {
        RewardSpec::Symbolic { num_labels, labels } => (*num_labels, labels),
        other => {
            return Err(Error::validation(format!(
                "symbolic reward required, instance has {} reward",
                other.kind()
            )))
        }
    };
    if x.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: x.len(),
        });
    }
    mdp.with_reward(RewardSpec::Scalar(labels.iter().map(|&l| x[l]).collect()))
}

fn require_strictly_increasing(x: &[f64]) -> Result<()> {
    if x.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::validation(
            "label values must be strictly increasing in the known order",
        ));
    }
    Ok(())
}

/// First-difference weight vector (x_1, x_2 - x_1, ..., x_d - x_{d-1}).
pub fn difference_weights(x: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|i| if i == 0 { x[0] } else { x[i] - x[i - 1] })
        .collect()
}

/// Max-over-states residual of the two value identities relating the scalar
/// value function under substituted label values to the counting and
/// decumulative vector value functions.
pub fn verify_lemma1(
    mdp: &MdpInstance,
    order: &RewardOrder,
    x: &[f64],
    policy: &Policy,
    tol: f64,
) -> Result<f64> {
    require_strictly_increasing(x)?;
    let canonical = order.canonicalize(mdp)?;
    let scalar = substitute_values(&canonical, x)?;
    let v = evaluate_policy(&scalar, policy, tol)?;

    let counting = canonical.with_reward(counting_reward(&canonical)?)?;
    let v_bar = vector_evaluate(&counting, policy, tol)?;

    let ordered = ordered_reward_transform(&canonical, &RewardOrder::identity(x.len()))?;
    let v_arrow = vector_evaluate(&ordered, policy, tol)?;

    let diffs = difference_weights(x);
    let mut residual: f64 = 0.0;
    for s in 0..canonical.n_states() {
        residual = residual.max((v[s] - dot(x, &v_bar.values[s])).abs());
        residual = residual.max((v[s] - dot(&diffs, &v_arrow.values[s])).abs());
    }
    Ok(residual)
}

/// Max-over-states residual of the ordered-history value identity: with
/// r_i = x . r_bar_i, the scalar value equals the inner product of the
/// r-difference weights with the basis-transformed vector value function.
pub fn verify_lemma2(
    mdp: &MdpInstance,
    ordered: &OrderedHistories,
    x: &[f64],
    policy: &Policy,
    tol: f64,
) -> Result<f64> {
    let scalar = substitute_values(mdp, x)?;
    let v = evaluate_policy(&scalar, policy, tol)?;

    let (transformed, basis) = ordered_history_transform(mdp, ordered)?;
    let v_h = vector_evaluate(&transformed, policy, tol)?;

    let d = x.len();
    let r: Vec<f64> = (0..d)
        .map(|i| {
            let col: Vec<f64> = (0..d).map(|row| basis.h[row][i]).collect();
            dot(x, &col)
        })
        .collect();
    require_strictly_increasing(&r).map_err(|_| {
        Error::validation(
            "history values r_i are not strictly increasing under the supplied label values",
        )
    })?;
    let weights = difference_weights(&r);
    let mut residual: f64 = 0.0;
    for s in 0..mdp.n_states() {
        residual = residual.max((v[s] - dot(&weights, &v_h.values[s])).abs());
    }
    Ok(residual)
}

#[derive(Debug, Clone)]
pub struct SoundnessCounterexample {
    pub x: Vec<f64>,
    pub dominant_policy: Vec<usize>,
    pub dominated_policy: Vec<usize>,
    pub state: usize,
    pub scalar_gap: f64,
}

#[derive(Debug, Clone)]
pub struct SoundnessReport {
    pub pairs_checked: usize,
    pub dominances_found: usize,
    pub counterexample: Option<SoundnessCounterexample>,
}

impl SoundnessReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Checks, over enumerated deterministic policies and the supplied label-value
/// samples, that per-state Pareto dominance of decumulative vector values
/// implies the same scalar order. The implication relies on the values being
/// increasing in the label order; feeding a decreasing sample makes the check
/// fail, which is the intended diagnostic.
pub fn dominance_soundness_check(
    mdp: &MdpInstance,
    order: &RewardOrder,
    samples: &[Vec<f64>],
    tol: f64,
    cap: usize,
) -> Result<SoundnessReport> {
    let canonical = order.canonicalize(mdp)?;
    let transformed = ordered_reward_transform(&canonical, &RewardOrder::identity(order.len()))?;
    let policies = crate::mdp::enumerate_deterministic_policies(&canonical, cap)?;
    let vector_values = crate::exec::try_map(policies.clone(), |actions| {
        vector_evaluate(&transformed, &Policy::Deterministic(actions), tol)
    })?;

    let mut report = SoundnessReport {
        pairs_checked: 0,
        dominances_found: 0,
        counterexample: None,
    };
    // Record which per-state dominances hold; they do not depend on x.
    let mut dominant_states: Vec<(usize, usize, Vec<usize>)> = Vec::new();
    for i in 0..policies.len() {
        for j in 0..policies.len() {
            if i == j {
                continue;
            }
            report.pairs_checked += 1;
            let states: Vec<usize> = (0..canonical.n_states())
                .filter(|&s| {
                    pareto_dominates(&vector_values[i].values[s], &vector_values[j].values[s])
                        .unwrap_or(false)
                })
                .collect();
            if !states.is_empty() {
                report.dominances_found += states.len();
                dominant_states.push((i, j, states));
            }
        }
    }
    'samples: for x in samples {
        let scalar = substitute_values(&canonical, x)?;
        let values = crate::exec::try_map(policies.clone(), |actions| {
            evaluate_policy(&scalar, &Policy::Deterministic(actions), tol)
        })?;
        for (i, j, states) in &dominant_states {
            for &s in states {
                let gap = values[*i][s] - values[*j][s];
                if gap < -1e-8 {
                    report.counterexample = Some(SoundnessCounterexample {
                        x: x.clone(),
                        dominant_policy: policies[*i].clone(),
                        dominated_policy: policies[*j].clone(),
                        state: s,
                        scalar_gap: gap,
                    });
                    break 'samples;
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn symbolic_single_state(labels: Vec<usize>, d: usize, gamma: f64) -> MdpInstance {
        let n_actions = labels.len();
        MdpInstance::from_dense(
            vec![vec![vec![1.0]; n_actions]],
            gamma,
            RewardSpec::Symbolic {
                num_labels: d,
                labels,
            },
            vec![1.0],
        )
        .unwrap()
    }

    #[test]
    fn counting_reward_canonical_vectors() {
        let mdp = symbolic_single_state(vec![1, 0, 2], 3, 0.5);
        let r = counting_reward(&mdp).unwrap();
        match r {
            RewardSpec::Vector { dim, values } => {
                assert_eq!(dim, 3);
                assert_eq!(values[0], vec![0.0, 1.0, 0.0]);
                assert_eq!(values[1], vec![1.0, 0.0, 0.0]);
                assert_eq!(values[2], vec![0.0, 0.0, 1.0]);
            }
            _ => panic!("expected vector reward"),
        }
    }

    #[test]
    fn decumulative_examples() {
        assert_eq!(decumulative(&[1.0, 2.0, 3.0]), vec![6.0, 5.0, 3.0]);
        assert_eq!(decumulative(&[0.0, 1.0, 0.0]), vec![1.0, 1.0, 0.0]);
        let v = vec![0.3, -1.2, 4.5];
        let round = decumulative_inverse(&decumulative(&v));
        for (a, b) in round.iter().zip(&v) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn ordered_reward_step_vectors() {
        let mdp = symbolic_single_state(vec![0, 1, 2], 3, 0.5);
        let t = ordered_reward_transform(&mdp, &RewardOrder::identity(3)).unwrap();
        assert_eq!(t.vector_reward(0, 0).unwrap(), &[1.0, 0.0, 0.0]);
        assert_eq!(t.vector_reward(0, 1).unwrap(), &[1.0, 1.0, 0.0]);
        assert_eq!(t.vector_reward(0, 2).unwrap(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn history_count_vector_examples() {
        let mdp = symbolic_single_state(vec![0, 1], 2, 0.5);
        let h = History::new(vec![0, 0], vec![1]).unwrap();
        assert_eq!(history_count_vector(&mdp, &h).unwrap(), vec![0.0, 1.0]);
        let empty = History::new(vec![0], vec![]).unwrap();
        assert_eq!(history_count_vector(&mdp, &empty).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn identity_basis_reduces_to_ordered_rewards() {
        // gamma = 0 makes single-step histories produce exact canonical vectors.
        let mdp = symbolic_single_state(vec![0, 1, 2], 3, 0.0);
        let ordered = OrderedHistories::new(vec![
            History::new(vec![0, 0], vec![0]).unwrap(),
            History::new(vec![0, 0], vec![1]).unwrap(),
            History::new(vec![0, 0], vec![2]).unwrap(),
        ]);
        let basis = history_basis_matrix(&mdp, &ordered).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_eq!(basis.h[i][j], expect);
                assert!((basis.h_inv[i][j] - expect).abs() < 1e-12);
            }
        }
        let (via_histories, _) = ordered_history_transform(&mdp, &ordered).unwrap();
        let via_order = ordered_reward_transform(&mdp, &RewardOrder::identity(3)).unwrap();
        assert_eq!(via_histories.reward(), via_order.reward());
    }

    #[test]
    fn duplicated_history_is_singular() {
        let mdp = symbolic_single_state(vec![0, 1], 2, 0.5);
        let h = History::new(vec![0, 0], vec![0]).unwrap();
        let ordered = OrderedHistories::new(vec![h.clone(), h]);
        let err = history_basis_matrix(&mdp, &ordered).unwrap_err();
        assert!(matches!(err, Error::IndependenceViolation(_)));
    }

    #[test]
    fn lemma1_hand_example() {
        // Single state, single action with label ranked second of three,
        // gamma = 0.5, x = (0, 1, 5): v = 2, and both identities give 2.
        let mdp = symbolic_single_state(vec![1, 0, 2], 3, 0.5);
        let r = verify_lemma1(
            &mdp,
            &RewardOrder::identity(3),
            &[0.0, 1.0, 5.0],
            &Policy::Deterministic(vec![0]),
            1e-12,
        )
        .unwrap();
        assert!(r < 1e-9, "residual {r}");
    }

    #[test]
    fn lemma1_rejects_non_increasing_values() {
        let mdp = symbolic_single_state(vec![0, 1], 2, 0.5);
        let err = verify_lemma1(
            &mdp,
            &RewardOrder::identity(2),
            &[1.0, 1.0],
            &Policy::Deterministic(vec![0]),
            1e-9,
        );
        assert!(err.is_err());
    }

    #[test]
    fn lemma2_d1_scalar_algebra() {
        let mdp = symbolic_single_state(vec![0], 1, 0.5);
        let ordered = OrderedHistories::new(vec![History::new(vec![0, 0], vec![0]).unwrap()]);
        let r = verify_lemma2(
            &mdp,
            &ordered,
            &[3.0],
            &Policy::Deterministic(vec![0]),
            1e-12,
        )
        .unwrap();
        assert!(r < 1e-8, "residual {r}");
    }

    #[test]
    fn soundness_passes_with_increasing_and_fails_with_decreasing() {
        // Two actions: one takes the better label, one the worse. The better
        // action statewise dominates in the decumulative representation.
        let mdp = symbolic_single_state(vec![0, 1], 2, 0.5);
        let order = RewardOrder::identity(2);
        let ok = dominance_soundness_check(&mdp, &order, &[vec![0.0, 1.0]], 1e-10, 100).unwrap();
        assert!(ok.passed());
        assert!(ok.dominances_found > 0);
        let bad = dominance_soundness_check(&mdp, &order, &[vec![1.0, 0.0]], 1e-10, 100).unwrap();
        assert!(!bad.passed());
    }
}
