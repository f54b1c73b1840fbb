//! Ideal point, Chebyshev-optimal policies via occupancy-measure linear
//! programming, minimax regret over the simplex of difference weights, and
//! the equivalence check between the two objectives.

use crate::error::{Error, Result};
use crate::exec;
use crate::linalg::dot;
use crate::lp::{solve_lp, LinearProgram, LpStatus, Sense, VarBound};
use crate::mdp::{enumerate_deterministic_policies, value_iteration, MdpInstance, Policy, RewardSpec};
use crate::momdp::{scalar_projection, vector_evaluate};

const OCCUPANCY_TOL: f64 = 1e-8;

/// Per-objective best achievable mu-weighted values and the policies attaining
/// them.
#[derive(Debug, Clone)]
pub struct IdealPoint {
    pub point: Vec<f64>,
    pub maximizers: Vec<Vec<usize>>,
}

/// Discounted expected state-action visitation frequencies.
#[derive(Debug, Clone)]
pub struct OccupancyMeasure {
    /// `values[s * n_actions + a]`
    pub values: Vec<f64>,
    pub n_actions: usize,
}

impl OccupancyMeasure {
    pub fn get(&self, s: usize, a: usize) -> f64 {
        self.values[s * self.n_actions + a]
    }

    pub fn state_mass(&self, s: usize) -> f64 {
        (0..self.n_actions).map(|a| self.get(s, a)).sum()
    }

    /// Checks flow conservation and total mass 1/(1-gamma) within 1e-8.
    pub fn validate(&self, mdp: &MdpInstance) -> Result<()> {
        let n = mdp.n_states();
        let gamma = mdp.discount();
        for sp in 0..n {
            let mut flow = self.state_mass(sp);
            for s in 0..n {
                for a in 0..mdp.n_actions() {
                    flow -= gamma * mdp.transition_prob(s, a, sp) * self.get(s, a);
                }
            }
            if (flow - mdp.initial_distribution()[sp]).abs() > OCCUPANCY_TOL {
                return Err(Error::Numerical(format!(
                    "occupancy flow conservation violated at state {sp}"
                )));
            }
        }
        let total: f64 = self.values.iter().sum();
        let expected = 1.0 / (1.0 - gamma);
        if (total - expected).abs() > OCCUPANCY_TOL * expected.max(1.0) {
            return Err(Error::Numerical(format!(
                "occupancy mass {total} differs from {expected}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ChebyshevSolution {
    /// Optimal value of max_i (I_i - f_i(policy)).
    pub regret: f64,
    pub ideal: IdealPoint,
    pub occupancy: OccupancyMeasure,
    pub policy: Policy,
    /// Objectives attaining the inner max at the solution, within 1e-8.
    pub active_components: Vec<usize>,
}

/// Ideal point: each component solved as a standard MDP on the coordinate
/// projection, then mu-aggregated. Components solve in parallel.
pub fn ideal_point(mdp: &MdpInstance, tol: f64) -> Result<IdealPoint> {
    let dim = match mdp.reward() {
        RewardSpec::Vector { dim, .. } => *dim,
        other => {
            return Err(Error::validation(format!(
                "vector reward required, instance has {} reward",
                other.kind()
            )))
        }
    };
    let per_component = exec::try_map((0..dim).collect(), |k| {
        let scalar = mdp.with_reward(scalar_projection(mdp, k)?)?;
        let (v, policy) = value_iteration(&scalar, tol)?;
        let actions = match policy {
            Policy::Deterministic(a) => a,
            _ => unreachable!(),
        };
        Ok((dot(mdp.initial_distribution(), &v), actions))
    })?;
    let (point, maximizers) = per_component.into_iter().unzip();
    Ok(IdealPoint { point, maximizers })
}

/// Chebyshev-optimal randomized stationary policy via the occupancy polytope:
/// minimize z subject to z >= I_i - sum_{s,a} x(s,a) R_i(s,a) and the flow
/// constraints. The induced policy normalizes occupancies per state, with a
/// uniform fallback on unvisited states.
pub fn chebyshev_optimal(mdp: &MdpInstance, tol: f64) -> Result<ChebyshevSolution> {
    let (dim, reward_values) = match mdp.reward() {
        RewardSpec::Vector { dim, values } => (*dim, values),
        other => {
            return Err(Error::validation(format!(
                "vector reward required, instance has {} reward",
                other.kind()
            )))
        }
    };
    let ideal = ideal_point(mdp, tol)?;
    let n = mdp.n_states();
    let na = mdp.n_actions();
    let nv = n * na + 1; // occupancies then z
    let zcol = n * na;

    let mut objective = vec![0.0; nv];
    objective[zcol] = 1.0;
    let mut lp = LinearProgram::new(false, objective);
    lp.bounds = vec![VarBound::NonNegative; nv];
    lp.bounds[zcol] = VarBound::Free;

    let gamma = mdp.discount();
    for sp in 0..n {
        let mut coeffs = vec![0.0; nv];
        for a in 0..na {
            coeffs[sp * na + a] += 1.0;
        }
        for s in 0..n {
            for a in 0..na {
                let p = mdp.transition_prob(s, a, sp);
                if p > 0.0 {
                    coeffs[s * na + a] -= gamma * p;
                }
            }
        }
        lp.constrain(coeffs, Sense::Eq, mdp.initial_distribution()[sp]);
    }
    for i in 0..dim {
        // z + sum x(s,a) R_i(s,a) >= I_i
        let mut coeffs = vec![0.0; nv];
        for s in 0..n {
            for a in 0..na {
                coeffs[s * na + a] = reward_values[s * na + a][i];
            }
        }
        coeffs[zcol] = 1.0;
        lp.constrain(coeffs, Sense::Ge, ideal.point[i]);
    }

    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Numerical(format!(
            "occupancy LP ended with status {:?}",
            sol.status
        )));
    }
    let occupancy = OccupancyMeasure {
        values: sol.x[..n * na].to_vec(),
        n_actions: na,
    };
    occupancy.validate(mdp)?;
    let policy = occupancy_to_policy(&occupancy, n);

    let gaps: Vec<f64> = (0..dim)
        .map(|i| {
            let f_i: f64 = (0..n * na)
                .map(|k| occupancy.values[k] * reward_values[k][i])
                .sum();
            ideal.point[i] - f_i
        })
        .collect();
    let regret = sol.objective;
    let active_components = (0..dim).filter(|&i| gaps[i] >= regret - 1e-8).collect();
    Ok(ChebyshevSolution {
        regret,
        ideal,
        occupancy,
        policy,
        active_components,
    })
}

#[derive(Debug, Clone)]
pub struct RegretReport {
    /// Minimax regret over the unit simplex of weights (equals the Chebyshev
    /// value).
    pub value: f64,
    pub solution: ChebyshevSolution,
    /// Worst-case regret of the same policy when the weight set is the unit
    /// hypercube instead of the simplex; reported for comparison only and
    /// computed over the enumerated deterministic class (None when the
    /// enumeration cap is exceeded).
    pub hypercube_value: Option<f64>,
}

/// Minimax regret with the admissible weight set modeled as the unit simplex,
/// whose vertices are the canonical vectors and the origin. The optimization
/// reduces to the Chebyshev LP.
pub fn minimax_regret(mdp: &MdpInstance, tol: f64, cap: usize) -> Result<RegretReport> {
    let solution = chebyshev_optimal(mdp, tol)?;
    let hypercube_value = match aggregated_policy_values(mdp, tol, cap) {
        Ok(values) => {
            let mine: Vec<f64> = {
                let (dim, reward_values) = match mdp.reward() {
                    RewardSpec::Vector { dim, values } => (*dim, values),
                    _ => unreachable!(),
                };
                (0..dim)
                    .map(|i| {
                        (0..mdp.n_states() * mdp.n_actions())
                            .map(|k| solution.occupancy.values[k] * reward_values[k][i])
                            .sum()
                    })
                    .collect()
            };
            let worst = values
                .iter()
                .map(|(_, g)| {
                    g.iter()
                        .zip(&mine)
                        .map(|(a, b)| (a - b).max(0.0))
                        .sum::<f64>()
                })
                .fold(0.0, f64::max);
            Some(worst)
        }
        Err(Error::CapExceeded { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(RegretReport {
        value: solution.regret,
        solution,
        hypercube_value,
    })
}

/// mu-aggregated value vectors of all deterministic policies.
pub fn aggregated_policy_values(
    mdp: &MdpInstance,
    tol: f64,
    cap: usize,
) -> Result<Vec<(Vec<usize>, Vec<f64>)>> {
    let policies = enumerate_deterministic_policies(mdp, cap)?;
    let mu = mdp.initial_distribution().to_vec();
    exec::try_map(policies, |actions| {
        let vvf = vector_evaluate(mdp, &Policy::Deterministic(actions.clone()), tol)?;
        Ok((actions, vvf.aggregate(&mu)))
    })
}

#[derive(Debug, Clone)]
pub struct Lemma3Report {
    pub lp_value: f64,
    /// Best Chebyshev objective among deterministic policies.
    pub best_chebyshev: f64,
    /// Best simplex-regret objective among deterministic policies, with the
    /// inner maximum taken over enumerated opponents rather than the ideal
    /// point, so the two routes are computed independently.
    pub best_regret: f64,
    pub chebyshev_argmin: Vec<usize>,
    pub regret_argmin: Vec<usize>,
    pub equal: bool,
}

/// Numeric check that the Chebyshev objective and the simplex minimax-regret
/// objective coincide (values and argmin sets) over the enumerated
/// deterministic class, and that the LP optimum is at least as good.
pub fn verify_lemma3(mdp: &MdpInstance, tol: f64, cap: usize) -> Result<Lemma3Report> {
    let dim = match mdp.reward() {
        RewardSpec::Vector { dim, .. } => *dim,
        other => {
            return Err(Error::validation(format!(
                "vector reward required, instance has {} reward",
                other.kind()
            )))
        }
    };
    let solution = chebyshev_optimal(mdp, tol)?;
    let values = aggregated_policy_values(mdp, tol, cap)?;

    // Route 1: Chebyshev distance to the value-iteration ideal point.
    let chebyshev: Vec<f64> = values
        .iter()
        .map(|(_, g)| {
            (0..dim)
                .map(|i| solution.ideal.point[i] - g[i])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    // Route 2: regret maximized over simplex vertices (canonical vectors and
    // the origin) with the inner best taken over the enumerated opponents.
    let regret: Vec<f64> = values
        .iter()
        .map(|(_, g)| {
            let mut worst: f64 = 0.0; // origin vertex contributes 0
            for i in 0..dim {
                let best_opponent = values
                    .iter()
                    .map(|(_, g2)| g2[i])
                    .fold(f64::NEG_INFINITY, f64::max);
                worst = worst.max(best_opponent - g[i]);
            }
            worst
        })
        .collect();

    let min_of = |xs: &[f64]| xs.iter().copied().fold(f64::INFINITY, f64::min);
    let best_chebyshev = min_of(&chebyshev);
    let best_regret = min_of(&regret);
    let argmin = |xs: &[f64], best: f64| -> Vec<usize> {
        xs.iter()
            .enumerate()
            .filter(|(_, &x)| x <= best + 1e-8)
            .map(|(i, _)| i)
            .collect()
    };
    let chebyshev_argmin = argmin(&chebyshev, best_chebyshev);
    let regret_argmin = argmin(&regret, best_regret);
    let equal = (best_chebyshev - best_regret).abs() <= 1e-8
        && chebyshev_argmin == regret_argmin
        && solution.regret <= best_chebyshev + 1e-8;
    Ok(Lemma3Report {
        lp_value: solution.regret,
        best_chebyshev,
        best_regret,
        chebyshev_argmin,
        regret_argmin,
        equal,
    })
}

/// Normalizes per-state occupancies into a randomized stationary policy;
/// unvisited states fall back to uniform action probabilities.
pub fn occupancy_to_policy(x: &OccupancyMeasure, n_states: usize) -> Policy {
    let na = x.n_actions;
    let rows = (0..n_states)
        .map(|s| {
            let mass = x.state_mass(s);
            if mass > 1e-12 {
                (0..na).map(|a| x.get(s, a) / mass).collect()
            } else {
                vec![1.0 / na as f64; na]
            }
        })
        .collect();
    Policy::Randomized(rows)
}

/// Discounted visitation frequencies of a stationary policy from the initial
/// distribution, by solving the flow equations directly.
pub fn policy_to_occupancy(mdp: &MdpInstance, policy: &Policy) -> Result<OccupancyMeasure> {
    mdp.validate_policy(policy)?;
    let n = mdp.n_states();
    let na = mdp.n_actions();
    let probs: Vec<Vec<f64>> = match policy {
        Policy::Deterministic(actions) => (0..n)
            .map(|s| {
                let mut row = vec![0.0; na];
                row[actions[s]] = 1.0;
                row
            })
            .collect(),
        Policy::Randomized(rows) => rows.clone(),
        Policy::Mixed(_) => {
            return Err(Error::validation(
                "occupancy requires a stationary policy; mix occupancies of components instead",
            ))
        }
    };
    // (I - gamma P_pi^T) rho = mu
    let gamma = mdp.discount();
    let mut a = vec![vec![0.0; n]; n];
    for (sp, row) in a.iter_mut().enumerate() {
        row[sp] = 1.0;
        for s in 0..n {
            let mut p = 0.0;
            for (act, &pa) in probs[s].iter().enumerate() {
                if pa > 0.0 {
                    p += pa * mdp.transition_prob(s, act, sp);
                }
            }
            row[s] -= gamma * p;
        }
    }
    let rho = crate::linalg::solve(&a, mdp.initial_distribution(), 1e-14)?;
    let mut values = vec![0.0; n * na];
    for s in 0..n {
        for act in 0..na {
            values[s * na + act] = rho[s] * probs[s][act];
        }
    }
    Ok(OccupancyMeasure {
        values,
        n_actions: na,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_action_symmetric() -> MdpInstance {
        MdpInstance::from_dense(
            vec![vec![vec![1.0], vec![1.0]]],
            0.0,
            RewardSpec::Vector {
                dim: 2,
                values: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            },
            vec![1.0],
        )
        .unwrap()
    }

    #[test]
    fn ideal_point_incomparable_actions() {
        let mdp = two_action_symmetric();
        let ip = ideal_point(&mdp, 1e-10).unwrap();
        assert!((ip.point[0] - 1.0).abs() < 1e-9);
        assert!((ip.point[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ideal_point_single_policy() {
        let mdp = MdpInstance::from_dense(
            vec![vec![vec![1.0]]],
            0.5,
            RewardSpec::Vector {
                dim: 2,
                values: vec![vec![1.0, 0.5]],
            },
            vec![1.0],
        )
        .unwrap();
        let ip = ideal_point(&mdp, 1e-12).unwrap();
        assert!((ip.point[0] - 2.0).abs() < 1e-9);
        assert!((ip.point[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn chebyshev_symmetric_split() {
        let mdp = two_action_symmetric();
        let sol = chebyshev_optimal(&mdp, 1e-10).unwrap();
        assert!((sol.regret - 0.5).abs() < 1e-8, "z* = {}", sol.regret);
        match &sol.policy {
            Policy::Randomized(rows) => {
                assert!((rows[0][0] - 0.5).abs() < 1e-6);
                assert!((rows[0][1] - 0.5).abs() < 1e-6);
            }
            _ => panic!("expected randomized policy"),
        }
        assert_eq!(sol.active_components, vec![0, 1]);
    }

    #[test]
    fn chebyshev_single_objective_attains_ideal() {
        let mdp = MdpInstance::from_dense(
            vec![vec![vec![1.0], vec![1.0]]],
            0.5,
            RewardSpec::Vector {
                dim: 1,
                values: vec![vec![0.0], vec![1.0]],
            },
            vec![1.0],
        )
        .unwrap();
        let sol = chebyshev_optimal(&mdp, 1e-10).unwrap();
        assert!(sol.regret.abs() < 1e-8);
    }

    #[test]
    fn minimax_equals_chebyshev() {
        let mdp = two_action_symmetric();
        let report = minimax_regret(&mdp, 1e-10, 1000).unwrap();
        assert!((report.value - 0.5).abs() < 1e-8);
        assert!(report.hypercube_value.is_some());
    }

    #[test]
    fn lemma3_symmetric_instance() {
        let mdp = two_action_symmetric();
        let report = verify_lemma3(&mdp, 1e-10, 1000).unwrap();
        assert!(report.equal, "{report:?}");
        // Each deterministic policy misses one objective entirely; the LP's
        // randomized split halves the gap.
        assert!((report.best_chebyshev - 1.0).abs() < 1e-9);
        assert!((report.lp_value - 0.5).abs() < 1e-8);
    }

    #[test]
    fn occupancy_roundtrip_deterministic() {
        let mdp = MdpInstance::from_dense(
            vec![
                vec![vec![0.5, 0.5], vec![1.0, 0.0]],
                vec![vec![0.5, 0.5], vec![0.0, 1.0]],
            ],
            0.8,
            RewardSpec::Scalar(vec![0.0; 4]),
            vec![0.5, 0.5],
        )
        .unwrap();
        let pi = Policy::Deterministic(vec![1, 0]);
        let occ = policy_to_occupancy(&mdp, &pi).unwrap();
        occ.validate(&mdp).unwrap();
        match occupancy_to_policy(&occ, 2) {
            Policy::Randomized(rows) => {
                assert!((rows[0][1] - 1.0).abs() < 1e-8);
                assert!((rows[1][0] - 1.0).abs() < 1e-8);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn uniform_policy_on_symmetric_chain() {
        // Hand solution: rho = mu / (1 - gamma) by symmetry, occupancy uniform
        // per state.
        let mdp = MdpInstance::from_dense(
            vec![
                vec![vec![0.5, 0.5], vec![0.5, 0.5]],
                vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            ],
            0.5,
            RewardSpec::Scalar(vec![0.0; 4]),
            vec![0.5, 0.5],
        )
        .unwrap();
        let pi = Policy::Randomized(vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
        let occ = policy_to_occupancy(&mdp, &pi).unwrap();
        for v in &occ.values {
            assert!((v - 0.5).abs() < 1e-10, "{:?}", occ.values);
        }
    }

    #[test]
    fn unvisited_state_fallback_is_uniform() {
        let occ = OccupancyMeasure {
            values: vec![1.0, 0.0, 0.0, 0.0],
            n_actions: 2,
        };
        match occupancy_to_policy(&occ, 2) {
            Policy::Randomized(rows) => {
                assert_eq!(rows[1], vec![0.5, 0.5]);
            }
            _ => panic!(),
        }
    }
}
