//! Vector-reward evaluation, dominance relations, Pareto frontier and
//! epsilon-cover construction, and scalarization at the reward, history and
//! value levels.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::exec;
use crate::linalg::dot;
use crate::mdp::{
    enumerate_deterministic_policies, evaluate_policy, history_expectation, MdpInstance, Policy,
    RewardSpec,
};

/// Per-state value vectors of a policy under a vector reward.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorValueFunction {
    pub dim: usize,
    /// `values[s]` is the d-vector at state s.
    pub values: Vec<Vec<f64>>,
}

impl VectorValueFunction {
    /// mu-weighted aggregate value vector.
    pub fn aggregate(&self, mu: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (s, v) in self.values.iter().enumerate() {
            for (k, x) in v.iter().enumerate() {
                out[k] += mu[s] * x;
            }
        }
        out
    }
}

#[derive(Clone)]
pub enum ScalarizingFunction {
    Linear(Vec<f64>),
    /// f(v) = -max_i (reference_i - v_i): larger is better, monotone.
    ChebyshevToIdeal(Vec<f64>),
    UserMonotone(UserMonotone),
}

#[derive(Clone)]
pub struct UserMonotone {
    dim: usize,
    eval: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
}

impl UserMonotone {
    /// Wraps a user evaluator after a sampled monotonicity check: on 1000
    /// seeded random pairs with u >= v componentwise, f(u) >= f(v) must hold.
    pub fn new(
        dim: usize,
        eval: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
        seed: u64,
    ) -> Result<Self> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        for _ in 0..1000 {
            let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let u: Vec<f64> = v.iter().map(|x| x + rng.gen_range(0.0..5.0)).collect();
            if eval(&u) < eval(&v) {
                return Err(Error::validation(
                    "declared-monotone scalarizing function failed the sampled monotonicity check",
                ));
            }
        }
        Ok(UserMonotone { dim, eval })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

impl ScalarizingFunction {
    pub fn apply(&self, v: &[f64]) -> Result<f64> {
        match self {
            ScalarizingFunction::Linear(w) => {
                if w.len() != v.len() {
                    return Err(Error::DimensionMismatch {
                        expected: w.len(),
                        got: v.len(),
                    });
                }
                Ok(dot(w, v))
            }
            ScalarizingFunction::ChebyshevToIdeal(reference) => {
                if reference.len() != v.len() {
                    return Err(Error::DimensionMismatch {
                        expected: reference.len(),
                        got: v.len(),
                    });
                }
                Ok(-reference
                    .iter()
                    .zip(v)
                    .map(|(r, x)| r - x)
                    .fold(f64::NEG_INFINITY, f64::max))
            }
            ScalarizingFunction::UserMonotone(f) => {
                if f.dim != v.len() {
                    return Err(Error::DimensionMismatch {
                        expected: f.dim,
                        got: v.len(),
                    });
                }
                Ok((f.eval)(v))
            }
        }
    }
}

/// A set of mutually non-dominated (policy, mu-aggregated value vector) pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoSet {
    pub entries: Vec<FrontierPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontierPoint {
    pub policy: Vec<usize>,
    pub value: Vec<f64>,
}

/// Strict Pareto dominance: u >= v componentwise and u != v.
pub fn pareto_dominates(u: &[f64], v: &[f64]) -> Result<bool> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            got: v.len(),
        });
    }
    let mut strict = false;
    for (a, b) in u.iter().zip(v) {
        if a < b {
            return Ok(false);
        }
        if a > b {
            strict = true;
        }
    }
    Ok(strict)
}

/// Statewise joint dominance between two vector value functions: no component
/// smaller in any state, strictly greater somewhere.
pub fn pareto_dominates_statewise(
    u: &VectorValueFunction,
    v: &VectorValueFunction,
) -> Result<bool> {
    if u.dim != v.dim || u.values.len() != v.values.len() {
        return Err(Error::DimensionMismatch {
            expected: u.dim,
            got: v.dim,
        });
    }
    let mut strict = false;
    for (us, vs) in u.values.iter().zip(&v.values) {
        for (a, b) in us.iter().zip(vs) {
            if a < b {
                return Ok(false);
            }
            if a > b {
                strict = true;
            }
        }
    }
    Ok(strict)
}

/// Lorenz vector: prefix sums of components sorted in non-decreasing order.
pub fn lorenz_vector(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut acc = 0.0;
    sorted
        .iter()
        .map(|x| {
            acc += x;
            acc
        })
        .collect()
}

pub fn lorenz_dominates(u: &[f64], v: &[f64]) -> Result<bool> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            got: v.len(),
        });
    }
    pareto_dominates(&lorenz_vector(u), &lorenz_vector(v))
}

/// Componentwise Bellman iteration for a vector reward; equals coordinatewise
/// scalar evaluation of each reward projection.
pub fn vector_evaluate(
    mdp: &MdpInstance,
    policy: &Policy,
    tol: f64,
) -> Result<VectorValueFunction> {
    let dim = match mdp.reward() {
        RewardSpec::Vector { dim, .. } => *dim,
        other => {
            return Err(Error::validation(format!(
                "vector reward required, instance has {} reward",
                other.kind()
            )))
        }
    };
    let mut per_state = vec![vec![0.0; dim]; mdp.n_states()];
    for k in 0..dim {
        let scalar = mdp.with_reward(scalar_projection(mdp, k)?)?;
        let v = evaluate_policy(&scalar, policy, tol)?;
        for (s, x) in v.into_iter().enumerate() {
            per_state[s][k] = x;
        }
    }
    Ok(VectorValueFunction {
        dim,
        values: per_state,
    })
}

/// Scalar reward table taking coordinate `k` of a vector reward.
pub fn scalar_projection(mdp: &MdpInstance, k: usize) -> Result<RewardSpec> {
    match mdp.reward() {
        RewardSpec::Vector { dim, values } => {
            if k >= *dim {
                return Err(Error::DimensionMismatch {
                    expected: *dim,
                    got: k,
                });
            }
            Ok(RewardSpec::Scalar(values.iter().map(|v| v[k]).collect()))
        }
        other => Err(Error::validation(format!(
            "vector reward required, instance has {} reward",
            other.kind()
        ))),
    }
}

/// All Pareto-nondominated (deterministic policy, mu-aggregated value) pairs,
/// sorted by value vector in non-increasing lexicographic order.
pub fn pareto_frontier(mdp: &MdpInstance, tol: f64, cap: usize) -> Result<ParetoSet> {
    let policies = enumerate_deterministic_policies(mdp, cap)?;
    let mu = mdp.initial_distribution().to_vec();
    let points = exec::try_map(policies, |actions| {
        let vvf = vector_evaluate(mdp, &Policy::Deterministic(actions.clone()), tol)?;
        Ok(FrontierPoint {
            value: vvf.aggregate(&mu),
            policy: actions,
        })
    })?;
    let mut frontier = Vec::new();
    'outer: for (i, p) in points.iter().enumerate() {
        for (j, q) in points.iter().enumerate() {
            if i != j && pareto_dominates(&q.value, &p.value)? {
                continue 'outer;
            }
        }
        frontier.push(p.clone());
    }
    frontier.sort_by(|a, b| {
        lex_cmp(&b.value, &a.value).then_with(|| a.policy.cmp(&b.policy))
    });
    Ok(ParetoSet { entries: frontier })
}

pub(crate) fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        let c = x.total_cmp(y);
        if c != std::cmp::Ordering::Equal {
            return c;
        }
    }
    std::cmp::Ordering::Equal
}

/// Greedy multiplicative epsilon-cover: scan points in non-increasing
/// lexicographic order and keep a point iff no kept point already
/// (1+epsilon)-covers it. Requires nonnegative coordinates.
pub fn epsilon_cover(points: &[Vec<f64>], epsilon: f64) -> Result<Vec<Vec<f64>>> {
    let idx = epsilon_cover_indices(points, epsilon)?;
    Ok(idx.into_iter().map(|i| points[i].clone()).collect())
}

/// Same greedy construction, returning indices into `points`.
pub fn epsilon_cover_indices(points: &[Vec<f64>], epsilon: f64) -> Result<Vec<usize>> {
    if !(epsilon > 0.0) {
        return Err(Error::validation("epsilon must be positive"));
    }
    for p in points {
        if p.iter().any(|&x| x < 0.0) {
            return Err(Error::validation(
                "epsilon-cover requires nonnegative coordinates",
            ));
        }
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| lex_cmp(&points[b], &points[a]));
    let mut cover: Vec<usize> = Vec::new();
    let factor = 1.0 + epsilon;
    'points: for i in order {
        for &c in &cover {
            if points[c]
                .iter()
                .zip(points[i].iter())
                .all(|(ci, pi)| factor * ci >= *pi)
            {
                continue 'points;
            }
        }
        cover.push(i);
    }
    Ok(cover)
}

/// Exhaustive check that `cover` is an epsilon-cover of `points`.
pub fn verify_cover(cover: &[Vec<f64>], points: &[Vec<f64>], epsilon: f64) -> bool {
    let factor = 1.0 + epsilon;
    points.iter().all(|p| {
        cover
            .iter()
            .any(|c| c.iter().zip(p.iter()).all(|(ci, pi)| factor * ci >= *pi))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarizationLevel {
    Reward,
    History,
    Value,
}

/// Applies a scalarizing function at one of the three levels and returns the
/// mu-aggregated scalar value of the policy.
pub fn scalarize(
    mdp: &MdpInstance,
    f: &ScalarizingFunction,
    level: ScalarizationLevel,
    policy: &Policy,
    tol: f64,
    horizon: usize,
    cap: usize,
) -> Result<f64> {
    let (dim, values) = match mdp.reward() {
        RewardSpec::Vector { dim, values } => (*dim, values),
        other => {
            return Err(Error::validation(format!(
                "vector reward required, instance has {} reward",
                other.kind()
            )))
        }
    };
    match level {
        ScalarizationLevel::Reward => {
            let scalarized: Result<Vec<f64>> = values.iter().map(|v| f.apply(v)).collect();
            let scalar = mdp.with_reward(RewardSpec::Scalar(scalarized?))?;
            let v = evaluate_policy(&scalar, policy, tol)?;
            Ok(dot(mdp.initial_distribution(), &v))
        }
        ScalarizationLevel::History => {
            let n_actions = mdp.n_actions();
            let gamma = mdp.discount();
            let mut err = None;
            let got = history_expectation(mdp, policy, horizon, cap, |h| {
                let mut acc = vec![0.0; dim];
                let mut disc = 1.0;
                for i in 0..h.len() {
                    let r = &values[h.states[i] * n_actions + h.actions[i]];
                    for (k, x) in r.iter().enumerate() {
                        acc[k] += disc * x;
                    }
                    disc *= gamma;
                }
                match f.apply(&acc) {
                    Ok(x) => x,
                    Err(e) => {
                        err.get_or_insert(e);
                        0.0
                    }
                }
            })?;
            match err {
                Some(e) => Err(e),
                None => Ok(got),
            }
        }
        ScalarizationLevel::Value => {
            let vvf = vector_evaluate(mdp, policy, tol)?;
            f.apply(&vvf.aggregate(mdp.initial_distribution()))
        }
    }
}
