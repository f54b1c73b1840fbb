//! Preference relations over histories, probabilistic dominance between
//! policies, tournament analytics (Condorcet, Copeland, Borda, cycles) and
//! optimal mixed policies via a zero-sum matrix game.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::exec;
use crate::linalg::dot;
use crate::lp::{solve_lp, LinearProgram, LpStatus, Sense, VarBound};
use crate::mdp::{
    enumerate_histories, history_value, sample_history_with, History, MdpInstance, Policy,
};
use crate::momdp::{pareto_dominates, ScalarizingFunction};

const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrefOrdering {
    FirstPreferred,
    SecondPreferred,
    Equivalent,
    Incomparable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PreferenceKind {
    UtilityBased,
    ParetoInduced,
    Scalarized,
    UserSupplied,
}

/// How incomparable history pairs enter duel probabilities: on neither side
/// (default, so p + q may fall below 1) or on both sides like equivalences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IncomparableHandling {
    #[default]
    Neither,
    BothSides,
}

/// Deterministic comparator over histories with a provenance tag.
#[derive(Clone)]
pub struct HistoryPreference {
    pub kind: PreferenceKind,
    cmp: Arc<dyn Fn(&History, &History) -> PrefOrdering + Send + Sync>,
}

impl HistoryPreference {
    pub fn new(
        kind: PreferenceKind,
        cmp: Arc<dyn Fn(&History, &History) -> PrefOrdering + Send + Sync>,
    ) -> Self {
        HistoryPreference { kind, cmp }
    }

    pub fn compare(&self, a: &History, b: &History) -> PrefOrdering {
        (self.cmp)(a, b)
    }
}

fn order_from_scalars(a: f64, b: f64) -> PrefOrdering {
    if (a - b).abs() <= TIE_TOL {
        PrefOrdering::Equivalent
    } else if a > b {
        PrefOrdering::FirstPreferred
    } else {
        PrefOrdering::SecondPreferred
    }
}

/// Preference induced by the scalar discounted history value.
pub fn utility_preference(mdp: &MdpInstance) -> Result<HistoryPreference> {
    mdp.scalar_reward(0, 0)?; // kind check
    let mdp = mdp.clone();
    Ok(HistoryPreference::new(
        PreferenceKind::UtilityBased,
        Arc::new(move |a, b| {
            let va = history_value(&mdp, a).unwrap_or(f64::NAN);
            let vb = history_value(&mdp, b).unwrap_or(f64::NAN);
            order_from_scalars(va, vb)
        }),
    ))
}

fn vector_history_value(mdp: &MdpInstance, h: &History) -> Result<Vec<f64>> {
    let r = mdp.vector_reward(0, 0)?;
    let dim = r.len();
    let mut acc = vec![0.0; dim];
    let mut disc = 1.0;
    for i in 0..h.len() {
        let rv = mdp.vector_reward(h.states[i], h.actions[i])?;
        for (k, x) in rv.iter().enumerate() {
            acc[k] += disc * x;
        }
        disc *= mdp.discount();
    }
    Ok(acc)
}

/// Preference induced over histories by Pareto dominance of their vector
/// values; incomparable pairs are reported as such.
pub fn pareto_preference(mdp: &MdpInstance) -> Result<HistoryPreference> {
    mdp.vector_reward(0, 0)?;
    let mdp = mdp.clone();
    Ok(HistoryPreference::new(
        PreferenceKind::ParetoInduced,
        Arc::new(move |a, b| {
            let va = vector_history_value(&mdp, a).unwrap_or_default();
            let vb = vector_history_value(&mdp, b).unwrap_or_default();
            if va == vb {
                return PrefOrdering::Equivalent;
            }
            if pareto_dominates(&va, &vb).unwrap_or(false) {
                PrefOrdering::FirstPreferred
            } else if pareto_dominates(&vb, &va).unwrap_or(false) {
                PrefOrdering::SecondPreferred
            } else {
                PrefOrdering::Incomparable
            }
        }),
    ))
}

/// Total preference obtained by scalarizing vector history values.
pub fn scalarized_preference(
    mdp: &MdpInstance,
    f: ScalarizingFunction,
) -> Result<HistoryPreference> {
    mdp.vector_reward(0, 0)?;
    let mdp = mdp.clone();
    Ok(HistoryPreference::new(
        PreferenceKind::Scalarized,
        Arc::new(move |a, b| {
            let va = vector_history_value(&mdp, a)
                .and_then(|v| f.apply(&v))
                .unwrap_or(f64::NAN);
            let vb = vector_history_value(&mdp, b)
                .and_then(|v| f.apply(&v))
                .unwrap_or(f64::NAN);
            order_from_scalars(va, vb)
        }),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DuelMethod {
    Exact,
    MonteCarlo { n: usize, seed: u64 },
}

/// p = P[first's history is preferred-or-equivalent], q the symmetric quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DuelResult {
    pub p: f64,
    pub q: f64,
    pub method: DuelMethod,
    pub horizon: usize,
}

fn tally(
    ord: PrefOrdering,
    incomparable: IncomparableHandling,
    weight: f64,
    p: &mut f64,
    q: &mut f64,
) {
    match ord {
        PrefOrdering::FirstPreferred => *p += weight,
        PrefOrdering::SecondPreferred => *q += weight,
        PrefOrdering::Equivalent => {
            *p += weight;
            *q += weight;
        }
        PrefOrdering::Incomparable => {
            if incomparable == IncomparableHandling::BothSides {
                *p += weight;
                *q += weight;
            }
        }
    }
}

/// Exact duel over the product of the two independent horizon-length history
/// distributions.
pub fn duel_exact(
    mdp: &MdpInstance,
    first: &Policy,
    second: &Policy,
    pref: &HistoryPreference,
    horizon: usize,
    incomparable: IncomparableHandling,
    cap: usize,
) -> Result<DuelResult> {
    let hs1 = enumerate_histories(mdp, first, horizon, cap)?;
    let hs2 = enumerate_histories(mdp, second, horizon, cap)?;
    let mut p = 0.0;
    let mut q = 0.0;
    for (h1, p1) in &hs1 {
        for (h2, p2) in &hs2 {
            tally(pref.compare(h1, h2), incomparable, p1 * p2, &mut p, &mut q);
        }
    }
    Ok(DuelResult {
        p,
        q,
        method: DuelMethod::Exact,
        horizon,
    })
}

/// Unbiased sampling estimator of [`duel_exact`]: n independent history pairs.
pub fn duel_monte_carlo(
    mdp: &MdpInstance,
    first: &Policy,
    second: &Policy,
    pref: &HistoryPreference,
    horizon: usize,
    n: usize,
    seed: u64,
    incomparable: IncomparableHandling,
) -> Result<DuelResult> {
    if n == 0 {
        return Err(Error::validation("sample count must be at least 1"));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut p = 0.0;
    let mut q = 0.0;
    let w = 1.0 / n as f64;
    for _ in 0..n {
        let h1 = sample_history_with(mdp, first, horizon, &mut rng)?;
        let h2 = sample_history_with(mdp, second, horizon, &mut rng)?;
        tally(pref.compare(&h1, &h2), incomparable, w, &mut p, &mut q);
    }
    Ok(DuelResult {
        p,
        q,
        method: DuelMethod::MonteCarlo { n, seed },
        horizon,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DuelOutcome {
    First,
    Second,
    Tie,
}

pub fn probabilistic_dominance(d: &DuelResult) -> DuelOutcome {
    if (d.p - d.q).abs() <= TIE_TOL {
        DuelOutcome::Tie
    } else if d.p > d.q {
        DuelOutcome::First
    } else {
        DuelOutcome::Second
    }
}

/// Square matrix of duels over a finite policy list.
#[derive(Debug, Clone)]
pub struct Tournament {
    pub duels: Vec<Vec<DuelResult>>,
}

impl Tournament {
    pub fn size(&self) -> usize {
        self.duels.len()
    }

    /// Fills a tournament from a duel function evaluated once per unordered
    /// pair; (j, i) is the index-swapped mirror of (i, j), so antisymmetry is
    /// exact by construction. Pairs are evaluated in parallel.
    pub fn from_duel_fn<F>(n: usize, duel: F) -> Result<Tournament>
    where
        F: Fn(usize, usize) -> Result<DuelResult> + Send + Sync,
    {
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in i..n {
                pairs.push((i, j));
            }
        }
        let results = exec::try_map(pairs.clone(), |(i, j)| duel(i, j))?;
        let placeholder = DuelResult {
            p: 0.0,
            q: 0.0,
            method: DuelMethod::Exact,
            horizon: 0,
        };
        let mut duels = vec![vec![placeholder; n]; n];
        for ((i, j), r) in pairs.into_iter().zip(results) {
            duels[i][j] = r;
            duels[j][i] = DuelResult {
                p: r.q,
                q: r.p,
                ..r
            };
        }
        Ok(Tournament { duels })
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.size();
        for (i, row) in self.duels.iter().enumerate() {
            if row.len() != n {
                return Err(Error::validation("tournament matrix must be square"));
            }
            if (self.duels[i][i].p - self.duels[i][i].q).abs() > TIE_TOL {
                return Err(Error::validation("diagonal duels must have p = q"));
            }
            for j in 0..n {
                if self.duels[i][j].p != self.duels[j][i].q {
                    return Err(Error::validation(
                        "tournament is inconsistent under index swap",
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Policy whose every off-diagonal duel is a win or tie, if one exists.
pub fn condorcet_winner(t: &Tournament) -> Option<usize> {
    let n = t.size();
    (0..n).find(|&i| {
        (0..n).all(|j| {
            i == j
                || matches!(
                    probabilistic_dominance(&t.duels[i][j]),
                    DuelOutcome::First | DuelOutcome::Tie
                )
        })
    })
}

/// Copeland score = wins - losses; argmax with ties broken by lowest index.
pub fn copeland_winner(t: &Tournament) -> usize {
    let n = t.size();
    let score = |i: usize| -> i64 {
        (0..n)
            .filter(|&j| j != i)
            .map(|j| match probabilistic_dominance(&t.duels[i][j]) {
                DuelOutcome::First => 1,
                DuelOutcome::Second => -1,
                DuelOutcome::Tie => 0,
            })
            .sum()
    };
    (0..n).max_by_key(|&i| (score(i), std::cmp::Reverse(i))).unwrap_or(0)
}

/// Borda score = sum_j p_ij over opponents; argmax, lowest index on ties.
pub fn borda_winner(t: &Tournament) -> usize {
    let n = t.size();
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for i in 0..n {
        let score: f64 = (0..n).filter(|&j| j != i).map(|j| t.duels[i][j].p).sum();
        if score > best_score + TIE_TOL {
            best = i;
            best_score = score;
        }
    }
    best
}

/// All 3-cycles under strict probabilistic dominance, deduplicated up to
/// rotation (each reported with its smallest index first).
pub fn detect_cycles(t: &Tournament) -> Vec<(usize, usize, usize)> {
    let n = t.size();
    let beats = |i: usize, j: usize| probabilistic_dominance(&t.duels[i][j]) == DuelOutcome::First;
    let mut cycles = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if i < j && i < k && j != k && beats(i, j) && beats(j, k) && beats(k, i) {
                    cycles.push((i, j, k));
                }
            }
        }
    }
    cycles
}

/// Maximin mixed strategy of the symmetric zero-sum game with payoff
/// M[i][j] = p_ij - q_ij, via linear programming.
pub fn optimal_mixed_policy(t: &Tournament) -> Result<(Vec<f64>, f64)> {
    t.validate()?;
    let n = t.size();
    // Variables: weights w_0..w_{n-1} >= 0, game value v free.
    // maximize v  s.t.  sum_i w_i M[i][j] - v >= 0 for all j,  sum w = 1.
    let mut objective = vec![0.0; n + 1];
    objective[n] = 1.0;
    let mut lp = LinearProgram::new(true, objective);
    lp.bounds = vec![VarBound::NonNegative; n + 1];
    lp.bounds[n] = VarBound::Free;
    for j in 0..n {
        let mut coeffs = vec![0.0; n + 1];
        for (i, c) in coeffs.iter_mut().enumerate().take(n) {
            *c = t.duels[i][j].p - t.duels[i][j].q;
        }
        coeffs[n] = -1.0;
        lp.constrain(coeffs, Sense::Ge, 0.0);
    }
    let mut simplex = vec![1.0; n];
    simplex.push(0.0);
    lp.constrain(simplex, Sense::Eq, 1.0);
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Numerical(
            "mixed-policy game LP did not reach optimality".into(),
        ));
    }
    let weights: Vec<f64> = sol.x[..n].to_vec();
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Numerical("mixed weights do not sum to 1".into()));
    }
    Ok((weights, sol.x[n]))
}

/// Chebyshev-horizon heuristic for a duel: pick H so the truncated discounted
/// tail falls under `bound` relative to the value scale.
pub fn duel_horizon(mdp: &MdpInstance, bound: f64) -> usize {
    mdp.truncation_horizon(bound)
}

/// Convenience: expected payoff of weights against each column of the game.
pub fn game_payoffs(t: &Tournament, weights: &[f64]) -> Vec<f64> {
    let n = t.size();
    (0..n)
        .map(|j| {
            let col: Vec<f64> = (0..n).map(|i| t.duels[i][j].p - t.duels[i][j].q).collect();
            dot(weights, &col)
        })
        .collect()
}
