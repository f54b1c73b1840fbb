//! Seeded random generators for instances, policies, label values and point
//! clouds. Everything is deterministic under a fixed seed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::Result;
use crate::mdp::{History, MdpInstance, Policy, RewardSpec};
use crate::transforms::OrderedHistories;

#[derive(Debug, Clone, Copy)]
pub enum RewardKind {
    Scalar,
    Vector(usize),
    Symbolic(usize),
}

#[derive(Debug, Clone, Copy)]
pub struct InstanceConfig {
    pub n_states: usize,
    pub n_actions: usize,
    pub gamma: f64,
    pub reward: RewardKind,
    /// Maximum number of successor states per (s, a).
    pub max_successors: usize,
}

pub fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

pub fn random_instance<R: Rng>(cfg: &InstanceConfig, rng: &mut R) -> Result<MdpInstance> {
    let n = cfg.n_states;
    let na = cfg.n_actions;
    let k = cfg.max_successors.clamp(1, n);
    let mut succ = vec![vec![Vec::new(); na]; n];
    for row in succ.iter_mut() {
        for cell in row.iter_mut() {
            let mut targets: Vec<usize> = (0..n).collect();
            // Partial Fisher-Yates draw of k distinct successors.
            for i in 0..k {
                let j = rng.gen_range(i..n);
                targets.swap(i, j);
            }
            let weights: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..1.0)).collect();
            let total: f64 = weights.iter().sum();
            *cell = targets[..k]
                .iter()
                .zip(&weights)
                .map(|(&t, &w)| (t, w / total))
                .collect();
            cell.sort_by_key(|&(t, _)| t);
            // Renormalize exactly within 1e-12.
            let s: f64 = cell.iter().map(|&(_, p)| p).sum();
            for e in cell.iter_mut() {
                e.1 /= s;
            }
        }
    }
    let mut mu: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..1.0)).collect();
    let total: f64 = mu.iter().sum();
    for p in mu.iter_mut() {
        *p /= total;
    }
    let reward = match cfg.reward {
        RewardKind::Scalar => {
            RewardSpec::Scalar((0..n * na).map(|_| rng.gen_range(0.0..1.0)).collect())
        }
        RewardKind::Vector(d) => RewardSpec::Vector {
            dim: d,
            values: (0..n * na)
                .map(|_| (0..d).map(|_| rng.gen_range(0.0..1.0)).collect())
                .collect(),
        },
        RewardKind::Symbolic(d) => {
            assert!(d <= n * na, "need at least d state-action pairs");
            // First d pairs get each label once so every label is used.
            let mut labels: Vec<usize> = (0..n * na)
                .map(|i| if i < d { i } else { rng.gen_range(0..d) })
                .collect();
            // Shuffle so label placement is not positional.
            for i in (1..labels.len()).rev() {
                let j = rng.gen_range(0..=i);
                labels.swap(i, j);
            }
            RewardSpec::Symbolic {
                num_labels: d,
                labels,
            }
        }
    };
    MdpInstance::from_sparse(n, na, succ, cfg.gamma, reward, mu)
}

pub fn random_deterministic_policy<R: Rng>(mdp: &MdpInstance, rng: &mut R) -> Policy {
    Policy::Deterministic(
        (0..mdp.n_states())
            .map(|_| rng.gen_range(0..mdp.n_actions()))
            .collect(),
    )
}

/// Strictly increasing label values with x_1 >= 0 and gaps bounded away
/// from zero.
pub fn random_increasing_values<R: Rng>(d: usize, rng: &mut R) -> Vec<f64> {
    let mut x = Vec::with_capacity(d);
    let mut acc = rng.gen_range(0.0..0.5);
    for _ in 0..d {
        x.push(acc);
        acc += rng.gen_range(0.05..1.0);
    }
    x
}

/// d random valid histories with independent count vectors. Retries sampling
/// until the basis conditioning is acceptable; errors if no well-conditioned
/// set is found.
pub fn random_ordered_histories<R: Rng>(
    mdp: &MdpInstance,
    max_len: usize,
    max_condition: f64,
    rng: &mut R,
) -> Result<OrderedHistories> {
    let d = match mdp.reward() {
        RewardSpec::Symbolic { num_labels, .. } => *num_labels,
        _ => return Err(crate::error::Error::validation("symbolic reward required")),
    };
    for _ in 0..200 {
        let mut hs: Vec<History> = Vec::with_capacity(d);
        for _ in 0..d {
            let len = rng.gen_range(1..=max_len);
            let pi = random_deterministic_policy(mdp, rng);
            let seed = rng.gen::<u64>();
            hs.push(crate::mdp::sample_history(mdp, &pi, len, seed)?);
        }
        let ordered = OrderedHistories::new(hs);
        if let Ok(basis) = crate::transforms::history_basis_matrix(mdp, &ordered) {
            if basis.condition <= max_condition {
                return Ok(ordered);
            }
        }
    }
    Err(crate::error::Error::Numerical(
        "failed to sample a well-conditioned ordered-history basis".into(),
    ))
}

/// Random nonnegative point cloud in [0, hi]^d.
pub fn random_points<R: Rng>(count: usize, d: usize, hi: f64, rng: &mut R) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| (0..d).map(|_| rng.gen_range(0.0..hi)).collect())
        .collect()
}
