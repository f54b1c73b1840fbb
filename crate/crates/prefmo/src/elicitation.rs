//! Simulated-oracle preference elicitation: comparison queries over the
//! epsilon-cover of an enumerated frontier narrow a polytope of admissible
//! difference weights until one candidate is feasibly best.

use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::lp::{solve_lp, LinearProgram, LpStatus, Sense};
use crate::momdp::{epsilon_cover_indices, FrontierPoint, ParetoSet};
use crate::transforms::difference_weights;

const MARGIN_TOL: f64 = 1e-9;

/// Linear constraints over difference weights w, on top of the base simplex
/// w >= 0, sum w = 1. Each cut is `coeffs . w >= 0`.
#[derive(Debug, Clone)]
pub struct AdmissibleRewardPolytope {
    dim: usize,
    cuts: Vec<Vec<f64>>,
}

impl AdmissibleRewardPolytope {
    /// Initial polytope from a known label order: the order is already encoded
    /// by the difference-weight representation being nonnegative, so the base
    /// region is the unit simplex.
    pub fn from_order(dim: usize) -> Self {
        AdmissibleRewardPolytope {
            dim,
            cuts: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cuts(&self) -> &[Vec<f64>] {
        &self.cuts
    }

    /// Maximum of `dir . w` over the polytope; errors if the region is empty.
    pub fn max_margin(&self, dir: &[f64]) -> Result<f64> {
        let mut lp = LinearProgram::new(true, dir.to_vec());
        lp.constrain(vec![1.0; self.dim], Sense::Eq, 1.0);
        for cut in &self.cuts {
            lp.constrain(cut.clone(), Sense::Ge, 0.0);
        }
        let sol = solve_lp(&lp)?;
        match sol.status {
            LpStatus::Optimal => Ok(sol.objective),
            LpStatus::Infeasible => Err(Error::InconsistentOracle),
            LpStatus::Unbounded => Err(Error::Numerical(
                "margin LP unbounded over the simplex".into(),
            )),
        }
    }

    pub fn is_feasible(&self) -> Result<bool> {
        match self.max_margin(&vec![0.0; self.dim]) {
            Ok(_) => Ok(true),
            Err(Error::InconsistentOracle) => Ok(false),
            Err(e) => Err(e),
        }
    }

    /// Membership check within a small tolerance.
    pub fn contains(&self, w: &[f64]) -> bool {
        if w.len() != self.dim {
            return false;
        }
        let sum: f64 = w.iter().sum();
        (sum - 1.0).abs() <= 1e-9
            && w.iter().all(|&x| x >= -1e-9)
            && self.cuts.iter().all(|c| dot(c, w) >= -1e-9)
    }

    /// Adds the linear cut from an answered comparison: preferring `u` over
    /// `v` asserts w . (u - v) >= 0. The region never grows; emptiness is
    /// detected and reported as oracle inconsistency.
    pub fn update(&mut self, u: &[f64], v: &[f64], first_preferred: bool) -> Result<()> {
        let cut: Vec<f64> = if first_preferred {
            u.iter().zip(v).map(|(a, b)| a - b).collect()
        } else {
            v.iter().zip(u).map(|(a, b)| a - b).collect()
        };
        self.cuts.push(cut);
        if !self.is_feasible()? {
            return Err(Error::InconsistentOracle);
        }
        Ok(())
    }

    /// Chebyshev center of the region inside the simplex: the weight vector
    /// maximizing its smallest slack.
    pub fn center(&self) -> Result<Vec<f64>> {
        // Variables: w_0..w_{d-1}, delta; maximize delta.
        let d = self.dim;
        let mut objective = vec![0.0; d + 1];
        objective[d] = 1.0;
        let mut lp = LinearProgram::new(true, objective);
        let mut simplex = vec![1.0; d];
        simplex.push(0.0);
        lp.constrain(simplex, Sense::Eq, 1.0);
        for i in 0..d {
            let mut coeffs = vec![0.0; d + 1];
            coeffs[i] = 1.0;
            coeffs[d] = -1.0;
            lp.constrain(coeffs, Sense::Ge, 0.0);
        }
        for cut in &self.cuts {
            let norm = dot(cut, cut).sqrt().max(1e-12);
            let mut coeffs: Vec<f64> = cut.clone();
            coeffs.push(-norm);
            lp.constrain(coeffs, Sense::Ge, 0.0);
        }
        let sol = solve_lp(&lp)?;
        if sol.status != LpStatus::Optimal {
            return Err(Error::InconsistentOracle);
        }
        Ok(sol.x[..d].to_vec())
    }
}

/// Comparison query between two candidate aggregated value vectors.
#[derive(Debug, Clone)]
pub struct Query {
    pub first: FrontierPoint,
    pub second: FrontierPoint,
    pub answer_first_preferred: bool,
}

/// Deterministic stand-in for the human expert: hidden strictly increasing
/// label values x*, answering by the induced difference-weight scalarization.
#[derive(Debug, Clone)]
pub struct SimulatedOracle {
    x_star: Vec<f64>,
}

impl SimulatedOracle {
    pub fn new(x_star: Vec<f64>) -> Result<Self> {
        if x_star.is_empty() {
            return Err(Error::validation("oracle values must be nonempty"));
        }
        if x_star[0] < 0.0 {
            return Err(Error::validation("oracle values must be nonnegative"));
        }
        if x_star.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::validation(
                "oracle values must be strictly increasing",
            ));
        }
        Ok(SimulatedOracle { x_star })
    }

    pub fn x_star(&self) -> &[f64] {
        &self.x_star
    }

    /// Hidden difference weights, normalized onto the simplex (scaling leaves
    /// every comparison unchanged).
    pub fn weights(&self) -> Vec<f64> {
        let mut w = difference_weights(&self.x_star);
        let total: f64 = w.iter().sum();
        if total > 0.0 {
            for x in w.iter_mut() {
                *x /= total;
            }
        }
        w
    }

    pub fn prefers_first(&self, u: &[f64], v: &[f64]) -> bool {
        let w = self.weights();
        dot(&w, u) >= dot(&w, v)
    }
}

#[derive(Debug, Clone)]
pub struct ElicitationOutcome {
    pub recommended: FrontierPoint,
    pub polytope: AdmissibleRewardPolytope,
    pub queries: Vec<Query>,
    pub cover_size: usize,
}

/// Interactive loop over the epsilon-cover of a frontier: each round asks the
/// oracle about the candidate pair in maximal disagreement under the current
/// polytope (decided by two small LPs per pair), cuts the polytope with the
/// answer, and drops the loser. Ends when a single candidate is feasibly best
/// or the query budget is exhausted.
pub fn elicit_loop(
    frontier: &ParetoSet,
    epsilon: f64,
    oracle: &SimulatedOracle,
    max_queries: usize,
) -> Result<ElicitationOutcome> {
    if frontier.entries.is_empty() {
        return Err(Error::validation("frontier is empty"));
    }
    let values: Vec<Vec<f64>> = frontier.entries.iter().map(|e| e.value.clone()).collect();
    // Cover the frontier after shifting by its componentwise minimum: the
    // multiplicative cover then resolves at the scale of the frontier's spread
    // instead of its absolute magnitude, and comparisons are shift-invariant.
    let dim = values[0].len();
    let floor: Vec<f64> = (0..dim)
        .map(|i| values.iter().map(|v| v[i]).fold(f64::INFINITY, f64::min))
        .collect();
    let shifted: Vec<Vec<f64>> = values
        .iter()
        .map(|v| v.iter().zip(&floor).map(|(a, b)| a - b).collect())
        .collect();
    let cover = epsilon_cover_indices(&shifted, epsilon)?;
    if cover.is_empty() {
        return Err(Error::validation("epsilon-cover is empty"));
    }
    let mut polytope = AdmissibleRewardPolytope::from_order(dim);
    let mut candidates: Vec<usize> = cover.clone();
    let mut queries = Vec::new();

    while candidates.len() > 1 && queries.len() < max_queries {
        // Disagreement pair: each member strictly better under some feasible
        // weight; score by the smaller of the two attainable margins.
        let mut best: Option<(f64, usize, usize)> = None;
        for (ci, &i) in candidates.iter().enumerate() {
            for &j in candidates.iter().skip(ci + 1) {
                if values[i] == values[j] {
                    continue;
                }
                let diff: Vec<f64> = values[i]
                    .iter()
                    .zip(&values[j])
                    .map(|(a, b)| a - b)
                    .collect();
                let m_ij = polytope.max_margin(&diff)?;
                if m_ij <= MARGIN_TOL {
                    continue;
                }
                let neg: Vec<f64> = diff.iter().map(|x| -x).collect();
                let m_ji = polytope.max_margin(&neg)?;
                if m_ji <= MARGIN_TOL {
                    continue;
                }
                let score = m_ij.min(m_ji);
                if best.map_or(true, |(s, _, _)| score > s + MARGIN_TOL) {
                    best = Some((score, i, j));
                }
            }
        }
        let Some((_, i, j)) = best else {
            break; // no remaining disagreement: any candidate is feasibly best
        };
        let first_preferred = oracle.prefers_first(&values[i], &values[j]);
        polytope.update(&values[i], &values[j], first_preferred)?;
        queries.push(Query {
            first: frontier.entries[i].clone(),
            second: frontier.entries[j].clone(),
            answer_first_preferred: first_preferred,
        });
        let loser = if first_preferred { j } else { i };
        candidates.retain(|&c| c != loser);
    }

    let recommended_idx = if candidates.len() == 1 {
        candidates[0]
    } else {
        // Budget exhausted or all remaining candidates tie: score by the
        // polytope's center weighting.
        let center = polytope.center()?;
        *candidates
            .iter()
            .max_by(|&&a, &&b| {
                dot(&center, &values[a])
                    .total_cmp(&dot(&center, &values[b]))
                    .then(b.cmp(&a))
            })
            .unwrap()
    };
    Ok(ElicitationOutcome {
        recommended: frontier.entries[recommended_idx].clone(),
        polytope,
        queries,
        cover_size: cover.len(),
    })
}
