//! Cross-checks of the solvers against independent oracles: Monte-Carlo
//! estimates, exhaustive enumeration, brute-force comparators, vertex
//! enumeration for the LP, and hand-solved closed forms.

use prefmo::fixtures;
use prefmo::gen::{self, InstanceConfig, RewardKind};
use prefmo::linalg::dot;
use prefmo::lp::{solve_lp, LinearProgram, LpStatus, Sense};
use prefmo::mdp::{
    enumerate_deterministic_policies, enumerate_histories, evaluate_policy, history_expectation,
    history_value, sample_history_with, value_iteration, History, MdpInstance, Policy, RewardSpec,
};
use prefmo::momdp::lorenz_dominates;
use prefmo::pbmdp::{duel_exact, duel_monte_carlo, utility_preference, IncomparableHandling};
use prefmo::regret::{occupancy_to_policy, policy_to_occupancy};
use rand::Rng;

#[test]
fn policy_value_matches_monte_carlo_history_values() {
    let mut rng = gen::rng(7);
    let cfg = InstanceConfig {
        n_states: 6,
        n_actions: 3,
        gamma: 0.8,
        reward: RewardKind::Scalar,
        max_successors: 3,
    };
    let mdp = gen::random_instance(&cfg, &mut rng).unwrap();
    let policy = gen::random_deterministic_policy(&mdp, &mut rng);

    let v = evaluate_policy(&mdp, &policy, 1e-12).unwrap();
    let exact = dot(mdp.initial_distribution(), &v);

    let horizon = mdp.truncation_horizon(1e-9);
    let n = 20_000;
    let samples: Vec<f64> = (0..n)
        .map(|_| {
            let h = sample_history_with(&mdp, &policy, horizon, &mut rng).unwrap();
            history_value(&mdp, &h).unwrap()
        })
        .collect();
    let mean: f64 = samples.iter().sum::<f64>() / n as f64;
    let var: f64 = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let se = (var / n as f64).sqrt();
    assert!(
        (mean - exact).abs() <= 3.0 * se + 1e-6,
        "MC mean {mean} vs exact {exact}, se {se}"
    );
}

#[test]
fn value_iteration_matches_policy_enumeration() {
    for seed in 0..10u64 {
        let mut rng = gen::rng(100 + seed);
        let cfg = InstanceConfig {
            n_states: 3,
            n_actions: rng.gen_range(2..=3),
            gamma: rng.gen_range(0.3..0.9),
            reward: RewardKind::Scalar,
            max_successors: 2,
        };
        let mdp = gen::random_instance(&cfg, &mut rng).unwrap();
        let (v, _) = value_iteration(&mdp, 1e-11).unwrap();

        let mut best = vec![f64::NEG_INFINITY; mdp.n_states()];
        for actions in enumerate_deterministic_policies(&mdp, 10_000).unwrap() {
            let pv = evaluate_policy(&mdp, &Policy::Deterministic(actions), 1e-11).unwrap();
            for (b, x) in best.iter_mut().zip(&pv) {
                *b = b.max(*x);
            }
        }
        for (a, b) in v.iter().zip(&best) {
            assert!((a - b).abs() <= 1e-7, "VI {a} vs enumeration {b}");
        }
    }
}

#[test]
fn sampled_history_marginals_match_enumeration() {
    let mut rng = gen::rng(3);
    let cfg = InstanceConfig {
        n_states: 2,
        n_actions: 2,
        gamma: 0.5,
        reward: RewardKind::Scalar,
        max_successors: 2,
    };
    let mdp = gen::random_instance(&cfg, &mut rng).unwrap();
    let policy = Policy::Randomized(vec![vec![0.5, 0.5]; 2]);
    let horizon = 3;
    let exact = enumerate_histories(&mdp, &policy, horizon, 10_000).unwrap();

    let n = 50_000usize;
    let mut counts = vec![0usize; exact.len()];
    for _ in 0..n {
        let h = sample_history_with(&mdp, &policy, horizon, &mut rng).unwrap();
        let idx = exact.iter().position(|(eh, _)| *eh == h).unwrap();
        counts[idx] += 1;
    }
    for ((_, p), &c) in exact.iter().zip(&counts) {
        let freq = c as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!(
            (freq - p).abs() <= 4.0 * se + 1e-9,
            "freq {freq} vs prob {p}"
        );
    }
    let total: f64 = exact.iter().map(|(_, p)| p).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn monte_carlo_duel_approaches_exact_dice_odds() {
    let (mdp, dice) = fixtures::intransitive_dice();
    let pref = utility_preference(&mdp).unwrap();
    let exact = duel_exact(
        &mdp,
        &dice[0],
        &dice[1],
        &pref,
        1,
        IncomparableHandling::Neither,
        10_000,
    )
    .unwrap();
    assert!((exact.p - 5.0 / 9.0).abs() <= 1e-12);

    let mc = duel_monte_carlo(
        &mdp,
        &dice[0],
        &dice[1],
        &pref,
        1,
        100_000,
        11,
        IncomparableHandling::Neither,
    )
    .unwrap();
    assert!((mc.p - exact.p).abs() <= 0.01, "mc {} vs exact {}", mc.p, exact.p);
}

/// Brute-force Lorenz comparator: sort ascending, prefix sums, then the plain
/// componentwise test.
fn lorenz_bruteforce(u: &[f64], v: &[f64]) -> bool {
    let prefix = |x: &[f64]| {
        let mut s: Vec<f64> = x.to_vec();
        s.sort_by(f64::total_cmp);
        for i in 1..s.len() {
            s[i] += s[i - 1];
        }
        s
    };
    let (lu, lv) = (prefix(u), prefix(v));
    lu.iter().zip(&lv).all(|(a, b)| a >= b) && lu.iter().zip(&lv).any(|(a, b)| a > b)
}

#[test]
fn lorenz_dominance_matches_bruteforce() {
    let mut rng = gen::rng(21);
    for _ in 0..200 {
        let d = rng.gen_range(2..=5);
        let u: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..3.0)).collect();
        // Half the pairs are perturbations of u so dominance actually occurs.
        let v: Vec<f64> = if rng.gen_bool(0.5) {
            (0..d).map(|_| rng.gen_range(0.0..3.0)).collect()
        } else {
            u.iter().map(|x| x - rng.gen_range(0.0..0.5)).collect()
        };
        assert_eq!(
            lorenz_dominates(&u, &v).unwrap(),
            lorenz_bruteforce(&u, &v),
            "u {u:?} v {v:?}"
        );
    }
}

/// Gaussian elimination local to the test, so the vertex oracle shares no
/// code with the solver under test.
fn local_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in 0..n {
            if row != col {
                let f = a[row][col] / a[col][col];
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

#[test]
fn lp_solver_matches_vertex_enumeration() {
    let mut rng = gen::rng(33);
    for _ in 0..30 {
        let n = rng.gen_range(2..=3);
        let m = rng.gen_range(2..=4);
        let objective: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..2.0)).collect();
        let mut lp = LinearProgram::new(true, objective.clone());
        // Random <= constraints plus a bounding box keep the region compact.
        let mut rows: Vec<(Vec<f64>, f64)> = (0..m)
            .map(|_| {
                let coeffs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..2.0)).collect();
                (coeffs, rng.gen_range(0.5..4.0))
            })
            .collect();
        rows.push((vec![1.0; n], rng.gen_range(2.0..6.0)));
        for (coeffs, rhs) in &rows {
            lp.constrain(coeffs.clone(), Sense::Le, *rhs);
        }
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);

        // Vertex oracle: every n-subset of constraint/axis hyperplanes.
        let mut planes: Vec<(Vec<f64>, f64)> = rows.clone();
        for i in 0..n {
            let mut axis = vec![0.0; n];
            axis[i] = 1.0;
            planes.push((axis, 0.0));
        }
        let mut best = f64::NEG_INFINITY;
        let total = planes.len();
        let mut pick = vec![0usize; n];
        fn visit(
            planes: &[(Vec<f64>, f64)],
            rows: &[(Vec<f64>, f64)],
            objective: &[f64],
            pick: &mut Vec<usize>,
            depth: usize,
            start: usize,
            total: usize,
            best: &mut f64,
        ) {
            let n = objective.len();
            if depth == n {
                let a: Vec<Vec<f64>> = pick.iter().map(|&i| planes[i].0.clone()).collect();
                let b: Vec<f64> = pick.iter().map(|&i| planes[i].1).collect();
                if let Some(x) = local_solve(a, b) {
                    let feasible = x.iter().all(|&v| v >= -1e-8)
                        && rows
                            .iter()
                            .all(|(c, rhs)| dot(c, &x) <= rhs + 1e-8);
                    if feasible {
                        *best = best.max(dot(objective, &x));
                    }
                }
                return;
            }
            for i in start..total {
                pick[depth] = i;
                visit(planes, rows, objective, pick, depth + 1, i + 1, total, best);
            }
        }
        visit(&planes, &rows, &objective, &mut pick, 0, 0, total, &mut best);
        assert!(
            (sol.objective - best).abs() <= 1e-6,
            "simplex {} vs vertex oracle {}",
            sol.objective,
            best
        );
    }
}

#[test]
fn occupancy_matches_hand_solved_alternator() {
    // Two states alternating deterministically from mu = (3/4, 1/4) with
    // gamma 0.5: geometric series give x(s0) = 7/6 and x(s1) = 5/6.
    let mdp = MdpInstance::from_dense(
        vec![
            vec![vec![0.0, 1.0]],
            vec![vec![1.0, 0.0]],
        ],
        0.5,
        RewardSpec::Scalar(vec![1.0, 0.0]),
        vec![0.75, 0.25],
    )
    .unwrap();
    let policy = Policy::Deterministic(vec![0, 0]);
    let occ = policy_to_occupancy(&mdp, &policy).unwrap();
    assert!((occ.get(0, 0) - 7.0 / 6.0).abs() < 1e-9);
    assert!((occ.get(1, 0) - 5.0 / 6.0).abs() < 1e-9);
    occ.validate(&mdp).unwrap();
    assert_eq!(
        occupancy_to_policy(&occ, 2),
        Policy::Randomized(vec![vec![1.0], vec![1.0]])
    );
}

#[test]
fn history_expectation_matches_materialized_enumeration() {
    let mut rng = gen::rng(55);
    for _ in 0..10 {
        let cfg = InstanceConfig {
            n_states: 3,
            n_actions: 2,
            gamma: rng.gen_range(0.2..0.8),
            reward: RewardKind::Scalar,
            max_successors: 2,
        };
        let mdp = gen::random_instance(&cfg, &mut rng).unwrap();
        let policy = gen::random_deterministic_policy(&mdp, &mut rng);
        let horizon = 3;
        let walked = history_expectation(&mdp, &policy, horizon, 10_000, |h: &History| {
            history_value(&mdp, h).unwrap()
        })
        .unwrap();
        let materialized: f64 = enumerate_histories(&mdp, &policy, horizon, 10_000)
            .unwrap()
            .iter()
            .map(|(h, p)| p * history_value(&mdp, h).unwrap())
            .sum();
        assert!((walked - materialized).abs() <= 1e-12);
    }
}
