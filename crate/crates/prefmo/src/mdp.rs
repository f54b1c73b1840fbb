//! Finite discounted MDPs: instance representation, scalar policy evaluation,
//! value iteration, and history machinery (values, sampling, exact enumeration).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};

pub const PROB_TOL: f64 = 1e-12;
pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_HISTORY_CAP: usize = 1_000_000;
pub const DEFAULT_POLICY_CAP: usize = 100_000;

/// Reward specification: scalar numeric, vector-valued with `d` objectives, or
/// symbolic labels `x_1..x_d` whose numeric values are unknown.
#[derive(Debug, Clone, PartialEq)]
pub enum RewardSpec {
    /// `values[s * n_actions + a]`
    Scalar(Vec<f64>),
    /// `values[s * n_actions + a]` is a `dim`-vector.
    Vector { dim: usize, values: Vec<Vec<f64>> },
    /// `labels[s * n_actions + a]` is a 0-based label index in `0..num_labels`.
    Symbolic {
        num_labels: usize,
        labels: Vec<usize>,
    },
}

impl RewardSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            RewardSpec::Scalar(_) => "scalar",
            RewardSpec::Vector { .. } => "vector",
            RewardSpec::Symbolic { .. } => "symbolic",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Policy {
    /// `actions[s]` is the chosen action.
    Deterministic(Vec<usize>),
    /// `probs[s][a]`, each row a distribution.
    Randomized(Vec<Vec<f64>>),
    /// Distribution over deterministic stationary policies.
    Mixed(Vec<(Vec<usize>, f64)>),
}

/// Alternating state-action sequence `(s_0, a_1, s_1, ..., s_t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct History {
    pub states: Vec<usize>,
    pub actions: Vec<usize>,
}

impl History {
    pub fn new(states: Vec<usize>, actions: Vec<usize>) -> Result<Self> {
        if states.is_empty() || states.len() != actions.len() + 1 {
            return Err(Error::validation(
                "history must have t+1 states and t actions with t >= 0",
            ));
        }
        Ok(History { states, actions })
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn last_state(&self) -> usize {
        *self.states.last().unwrap()
    }
}

#[derive(Debug, Clone)]
pub struct MdpInstance {
    n_states: usize,
    n_actions: usize,
    /// `succ[s][a]` is a sparse list of `(s', prob)` with prob > 0.
    succ: Vec<Vec<Vec<(usize, f64)>>>,
    discount: f64,
    reward: RewardSpec,
    initial_distribution: Vec<f64>,
}

impl MdpInstance {
    /// Builds and validates an instance from a dense transition table
    /// `transition[s][a][s']`.
    pub fn from_dense(
        transition: Vec<Vec<Vec<f64>>>,
        discount: f64,
        reward: RewardSpec,
        initial_distribution: Vec<f64>,
    ) -> Result<Self> {
        let n_states = transition.len();
        if n_states == 0 {
            return Err(Error::validation("at least one state required"));
        }
        let n_actions = transition[0].len();
        if n_actions == 0 {
            return Err(Error::validation("at least one action required"));
        }
        let mut succ = vec![vec![Vec::new(); n_actions]; n_states];
        for (s, per_action) in transition.iter().enumerate() {
            if per_action.len() != n_actions {
                return Err(Error::validation(format!(
                    "state {s} has {} action rows, expected {n_actions}",
                    per_action.len()
                )));
            }
            for (a, row) in per_action.iter().enumerate() {
                if row.len() != n_states {
                    return Err(Error::validation(format!(
                        "transition row (s={s}, a={a}) has wrong length"
                    )));
                }
                for (sp, &p) in row.iter().enumerate() {
                    if p < 0.0 {
                        return Err(Error::validation(format!(
                            "negative transition probability at (s={s}, a={a}, s'={sp})"
                        )));
                    }
                    if p > 0.0 {
                        succ[s][a].push((sp, p));
                    }
                }
            }
        }
        Self::from_sparse(n_states, n_actions, succ, discount, reward, initial_distribution)
    }

    /// Builds and validates an instance from sparse successor lists.
    pub fn from_sparse(
        n_states: usize,
        n_actions: usize,
        succ: Vec<Vec<Vec<(usize, f64)>>>,
        discount: f64,
        reward: RewardSpec,
        initial_distribution: Vec<f64>,
    ) -> Result<Self> {
        if !(0.0..1.0).contains(&discount) {
            return Err(Error::validation(format!(
                "discount must be in [0, 1), got {discount}"
            )));
        }
        for (s, per_action) in succ.iter().enumerate() {
            for (a, row) in per_action.iter().enumerate() {
                let mut sum = 0.0;
                for &(sp, p) in row {
                    if sp >= n_states {
                        return Err(Error::validation(format!(
                            "transition target {sp} out of range at (s={s}, a={a})"
                        )));
                    }
                    if !(p > 0.0) {
                        return Err(Error::validation(format!(
                            "non-positive sparse transition probability at (s={s}, a={a})"
                        )));
                    }
                    sum += p;
                }
                if (sum - 1.0).abs() > PROB_TOL {
                    return Err(Error::validation(format!(
                        "transition probabilities at (s={s}, a={a}) sum to {sum}, expected 1"
                    )));
                }
            }
        }
        if initial_distribution.len() != n_states {
            return Err(Error::validation(
                "initial distribution length must equal number of states",
            ));
        }
        let mu_sum: f64 = initial_distribution.iter().sum();
        if (mu_sum - 1.0).abs() > PROB_TOL {
            return Err(Error::validation(format!(
                "initial distribution sums to {mu_sum}, expected 1"
            )));
        }
        if initial_distribution.iter().any(|&p| !(p > 0.0)) {
            return Err(Error::validation(
                "every initial-distribution entry must be strictly positive",
            ));
        }
        let num_pairs = n_states * n_actions;
        match &reward {
            RewardSpec::Scalar(values) => {
                if values.len() != num_pairs {
                    return Err(Error::validation("scalar reward table has wrong size"));
                }
            }
            RewardSpec::Vector { dim, values } => {
                if values.len() != num_pairs {
                    return Err(Error::validation("vector reward table has wrong size"));
                }
                if values.iter().any(|v| v.len() != *dim) {
                    return Err(Error::DimensionMismatch {
                        expected: *dim,
                        got: values.iter().map(|v| v.len()).find(|&l| l != *dim).unwrap_or(0),
                    });
                }
            }
            RewardSpec::Symbolic { num_labels, labels } => {
                if labels.len() != num_pairs {
                    return Err(Error::validation("symbolic reward table has wrong size"));
                }
                let mut used = vec![false; *num_labels];
                for &l in labels {
                    if l >= *num_labels {
                        return Err(Error::validation(format!(
                            "symbolic label index {l} out of range 0..{num_labels}"
                        )));
                    }
                    used[l] = true;
                }
                if used.iter().any(|&u| !u) {
                    return Err(Error::validation(
                        "every symbolic label must be used by at least one (s, a) pair",
                    ));
                }
            }
        }
        Ok(MdpInstance {
            n_states,
            n_actions,
            succ,
            discount,
            reward,
            initial_distribution,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn reward(&self) -> &RewardSpec {
        &self.reward
    }

    pub fn initial_distribution(&self) -> &[f64] {
        &self.initial_distribution
    }

    pub fn successors(&self, s: usize, a: usize) -> &[(usize, f64)] {
        &self.succ[s][a]
    }

    pub fn transition_prob(&self, s: usize, a: usize, sp: usize) -> f64 {
        self.succ[s][a]
            .iter()
            .find(|&&(t, _)| t == sp)
            .map(|&(_, p)| p)
            .unwrap_or(0.0)
    }

    /// Same instance with the reward table replaced (transition structure reused).
    pub fn with_reward(&self, reward: RewardSpec) -> Result<Self> {
        Self::from_sparse(
            self.n_states,
            self.n_actions,
            self.succ.clone(),
            self.discount,
            reward,
            self.initial_distribution.clone(),
        )
    }

    pub fn scalar_reward(&self, s: usize, a: usize) -> Result<f64> {
        match &self.reward {
            RewardSpec::Scalar(values) => Ok(values[s * self.n_actions + a]),
            other => Err(Error::validation(format!(
                "scalar reward required, instance has {} reward",
                other.kind()
            ))),
        }
    }

    pub fn vector_reward(&self, s: usize, a: usize) -> Result<&[f64]> {
        match &self.reward {
            RewardSpec::Vector { values, .. } => Ok(&values[s * self.n_actions + a]),
            other => Err(Error::validation(format!(
                "vector reward required, instance has {} reward",
                other.kind()
            ))),
        }
    }

    pub fn symbolic_label(&self, s: usize, a: usize) -> Result<usize> {
        match &self.reward {
            RewardSpec::Symbolic { labels, .. } => Ok(labels[s * self.n_actions + a]),
            other => Err(Error::validation(format!(
                "symbolic reward required, instance has {} reward",
                other.kind()
            ))),
        }
    }

    pub fn max_abs_scalar_reward(&self) -> Result<f64> {
        match &self.reward {
            RewardSpec::Scalar(values) => {
                Ok(values.iter().map(|r| r.abs()).fold(0.0, f64::max))
            }
            other => Err(Error::validation(format!(
                "scalar reward required, instance has {} reward",
                other.kind()
            ))),
        }
    }

    pub fn validate_policy(&self, policy: &Policy) -> Result<()> {
        match policy {
            Policy::Deterministic(actions) => {
                if actions.len() != self.n_states {
                    return Err(Error::validation("policy length must equal |S|"));
                }
                if actions.iter().any(|&a| a >= self.n_actions) {
                    return Err(Error::validation("policy action index out of range"));
                }
            }
            Policy::Randomized(rows) => {
                if rows.len() != self.n_states {
                    return Err(Error::validation("policy must have one row per state"));
                }
                for (s, row) in rows.iter().enumerate() {
                    if row.len() != self.n_actions {
                        return Err(Error::validation(format!(
                            "randomized policy row {s} has wrong length"
                        )));
                    }
                    if row.iter().any(|&p| p < 0.0) {
                        return Err(Error::validation(format!(
                            "negative action probability in state {s}"
                        )));
                    }
                    let sum: f64 = row.iter().sum();
                    if (sum - 1.0).abs() > PROB_TOL {
                        return Err(Error::validation(format!(
                            "randomized policy row {s} sums to {sum}, expected 1"
                        )));
                    }
                }
            }
            Policy::Mixed(components) => {
                if components.is_empty() {
                    return Err(Error::validation("mixed policy must be nonempty"));
                }
                let sum: f64 = components.iter().map(|(_, w)| w).sum();
                if (sum - 1.0).abs() > PROB_TOL {
                    return Err(Error::validation(format!(
                        "mixed policy weights sum to {sum}, expected 1"
                    )));
                }
                for (actions, w) in components {
                    if *w < 0.0 {
                        return Err(Error::validation("negative mixed-policy weight"));
                    }
                    self.validate_policy(&Policy::Deterministic(actions.clone()))?;
                }
            }
        }
        Ok(())
    }

    pub fn validate_history(&self, h: &History) -> Result<()> {
        if h.states.len() != h.actions.len() + 1 {
            return Err(Error::validation("malformed history"));
        }
        for (i, &s) in h.states.iter().enumerate() {
            if s >= self.n_states {
                return Err(Error::validation(format!("history state {s} out of range")));
            }
            if i < h.actions.len() {
                let a = h.actions[i];
                if a >= self.n_actions {
                    return Err(Error::validation(format!(
                        "history action {a} out of range"
                    )));
                }
                let sp = h.states[i + 1];
                if self.transition_prob(s, a, sp) <= 0.0 {
                    return Err(Error::validation(format!(
                        "history transition (s={s}, a={a}, s'={sp}) has zero probability"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Smallest horizon H with `gamma^H < bound`, i.e. the discounted tail
    /// beyond H is below `bound` relative to the value scale R_max/(1-gamma).
    pub fn truncation_horizon(&self, bound: f64) -> usize {
        if self.discount == 0.0 {
            return 1;
        }
        let h = (bound.ln() / self.discount.ln()).ceil();
        (h.max(1.0)) as usize
    }
}

/// Action probabilities of a stationary policy in a state. Mixed policies are
/// rejected: evaluate their deterministic components instead.
fn action_probs(_mdp: &MdpInstance, policy: &Policy, s: usize) -> Result<Vec<(usize, f64)>> {
    match policy {
        Policy::Deterministic(actions) => Ok(vec![(actions[s], 1.0)]),
        Policy::Randomized(rows) => Ok(rows[s]
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(a, &p)| (a, p))
            .collect()),
        Policy::Mixed(_) => Err(Error::validation(
            "mixed policies are not stationary; evaluate their components",
        )),
    }
}

/// Iterative policy evaluation from v_0 = 0. Stops when successive iterates
/// differ by at most `tol` in sup norm, which bounds the Bellman residual of
/// the returned iterate by `gamma * tol`.
pub fn evaluate_policy(mdp: &MdpInstance, policy: &Policy, tol: f64) -> Result<Vec<f64>> {
    if !(tol > 0.0) {
        return Err(Error::validation("tol must be positive"));
    }
    mdp.validate_policy(policy)?;
    if matches!(policy, Policy::Mixed(_)) {
        return Err(Error::validation(
            "mixed policies have no stationary value function; evaluate components",
        ));
    }
    let n = mdp.n_states();
    // Precompute R_pi and the sparse row kernel P_pi.
    let mut r_pi = vec![0.0; n];
    let mut p_pi: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for s in 0..n {
        for (a, pa) in action_probs(mdp, policy, s)? {
            r_pi[s] += pa * mdp.scalar_reward(s, a)?;
            for &(sp, pt) in mdp.successors(s, a) {
                p_pi[s].push((sp, pa * pt));
            }
        }
    }
    let gamma = mdp.discount();
    let mut v = vec![0.0; n];
    let max_iters = max_eval_iters(gamma, tol, mdp.max_abs_scalar_reward()?);
    for _ in 0..max_iters {
        let mut next = vec![0.0; n];
        let mut delta: f64 = 0.0;
        for s in 0..n {
            let mut x = r_pi[s];
            for &(sp, p) in &p_pi[s] {
                x += gamma * p * v[sp];
            }
            delta = delta.max((x - v[s]).abs());
            next[s] = x;
        }
        v = next;
        if delta <= tol {
            return Ok(v);
        }
    }
    Err(Error::Numerical(
        "policy evaluation failed to converge".into(),
    ))
}

fn max_eval_iters(gamma: f64, tol: f64, r_max: f64) -> usize {
    if gamma == 0.0 {
        return 2;
    }
    let scale = (r_max.max(1.0)) / (1.0 - gamma);
    let bound = (tol / (2.0 * scale)).max(f64::MIN_POSITIVE);
    ((bound.ln() / gamma.ln()).ceil() as usize).max(2) + 16
}

/// Value iteration on the Bellman optimality operator; greedy argmax ties are
/// broken by lowest action index.
pub fn value_iteration(mdp: &MdpInstance, tol: f64) -> Result<(Vec<f64>, Policy)> {
    if !(tol > 0.0) {
        return Err(Error::validation("tol must be positive"));
    }
    let n = mdp.n_states();
    let gamma = mdp.discount();
    let mut v = vec![0.0; n];
    let max_iters = max_eval_iters(gamma, tol, mdp.max_abs_scalar_reward()?);
    let mut converged = false;
    for _ in 0..max_iters {
        let mut next = vec![0.0; n];
        let mut delta: f64 = 0.0;
        for s in 0..n {
            let mut best = f64::NEG_INFINITY;
            for a in 0..mdp.n_actions() {
                let mut q = mdp.scalar_reward(s, a)?;
                for &(sp, p) in mdp.successors(s, a) {
                    q += gamma * p * v[sp];
                }
                if q > best {
                    best = q;
                }
            }
            delta = delta.max((best - v[s]).abs());
            next[s] = best;
        }
        v = next;
        if delta <= tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical("value iteration failed to converge".into()));
    }
    let mut greedy = vec![0usize; n];
    for s in 0..n {
        let mut best = f64::NEG_INFINITY;
        let mut best_a = 0;
        for a in 0..mdp.n_actions() {
            let mut q = mdp.scalar_reward(s, a)?;
            for &(sp, p) in mdp.successors(s, a) {
                q += gamma * p * v[sp];
            }
            if q > best + 0.0 {
                best = q;
                best_a = a;
            }
        }
        greedy[s] = best_a;
    }
    Ok((v, Policy::Deterministic(greedy)))
}

/// Discounted sum of rewards along a history: sum_i gamma^(i-1) R(s_{i-1}, a_i).
pub fn history_value(mdp: &MdpInstance, h: &History) -> Result<f64> {
    mdp.validate_history(h)?;
    let mut total = 0.0;
    let mut disc = 1.0;
    for i in 0..h.len() {
        total += disc * mdp.scalar_reward(h.states[i], h.actions[i])?;
        disc *= mdp.discount();
    }
    Ok(total)
}

fn sample_discrete<R: Rng>(rng: &mut R, items: &[(usize, f64)]) -> usize {
    let total: f64 = items.iter().map(|&(_, p)| p).sum();
    let mut u = rng.gen::<f64>() * total;
    for &(i, p) in items {
        u -= p;
        if u <= 0.0 {
            return i;
        }
    }
    items.last().unwrap().0
}

/// Seeded trajectory sampling from the initial distribution.
pub fn sample_history(
    mdp: &MdpInstance,
    policy: &Policy,
    horizon: usize,
    seed: u64,
) -> Result<History> {
    if horizon == 0 {
        return Err(Error::validation("horizon must be positive"));
    }
    mdp.validate_policy(policy)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    sample_history_with(mdp, policy, horizon, &mut rng)
}

/// Same as [`sample_history`] but drawing from a caller-owned RNG stream.
pub fn sample_history_with<R: Rng>(
    mdp: &MdpInstance,
    policy: &Policy,
    horizon: usize,
    rng: &mut R,
) -> Result<History> {
    // A mixed policy first draws one deterministic component, then follows it.
    let stationary;
    let effective: &Policy = match policy {
        Policy::Mixed(components) => {
            let weighted: Vec<(usize, f64)> = components
                .iter()
                .enumerate()
                .map(|(i, (_, w))| (i, *w))
                .collect();
            let idx = sample_discrete(rng, &weighted);
            stationary = Policy::Deterministic(components[idx].0.clone());
            &stationary
        }
        other => other,
    };
    let mu: Vec<(usize, f64)> = mdp
        .initial_distribution()
        .iter()
        .enumerate()
        .map(|(s, &p)| (s, p))
        .collect();
    let mut s = sample_discrete(rng, &mu);
    let mut states = vec![s];
    let mut actions = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let probs = action_probs(mdp, effective, s)?;
        let a = sample_discrete(rng, &probs);
        let sp = sample_discrete(rng, mdp.successors(s, a));
        actions.push(a);
        states.push(sp);
        s = sp;
    }
    Ok(History { states, actions })
}

/// Exact enumeration of all positive-probability horizon-length histories under
/// a stationary policy. Errors when more than `cap` histories would be produced.
pub fn enumerate_histories(
    mdp: &MdpInstance,
    policy: &Policy,
    horizon: usize,
    cap: usize,
) -> Result<Vec<(History, f64)>> {
    mdp.validate_policy(policy)?;
    if matches!(policy, Policy::Mixed(_)) {
        return Err(Error::validation(
            "history enumeration requires a stationary policy",
        ));
    }
    let mut out = Vec::new();
    let mut states = Vec::with_capacity(horizon + 1);
    let mut actions = Vec::with_capacity(horizon);
    for (s0, &p0) in mdp.initial_distribution().iter().enumerate() {
        states.push(s0);
        walk_histories(mdp, policy, horizon, p0, &mut states, &mut actions, cap, &mut out)?;
        states.pop();
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn walk_histories(
    mdp: &MdpInstance,
    policy: &Policy,
    remaining: usize,
    prob: f64,
    states: &mut Vec<usize>,
    actions: &mut Vec<usize>,
    cap: usize,
    out: &mut Vec<(History, f64)>,
) -> Result<()> {
    if remaining == 0 {
        if out.len() >= cap {
            return Err(Error::CapExceeded {
                what: "history enumeration".into(),
                needed: out.len() + 1,
                cap,
            });
        }
        out.push((
            History {
                states: states.clone(),
                actions: actions.clone(),
            },
            prob,
        ));
        return Ok(());
    }
    let s = *states.last().unwrap();
    for (a, pa) in action_probs(mdp, policy, s)? {
        for &(sp, pt) in mdp.successors(s, a) {
            actions.push(a);
            states.push(sp);
            walk_histories(mdp, policy, remaining - 1, prob * pa * pt, states, actions, cap, out)?;
            states.pop();
            actions.pop();
        }
    }
    Ok(())
}

/// Expected value of `f` over the exact horizon-length history distribution,
/// without materializing histories. `f` receives each terminal history.
pub fn history_expectation<F>(
    mdp: &MdpInstance,
    policy: &Policy,
    horizon: usize,
    cap: usize,
    mut f: F,
) -> Result<f64>
where
    F: FnMut(&History) -> f64,
{
    mdp.validate_policy(policy)?;
    let mut total = 0.0;
    let mut leaves = 0usize;
    let mut states = Vec::with_capacity(horizon + 1);
    let mut actions = Vec::with_capacity(horizon);
    for (s0, &p0) in mdp.initial_distribution().iter().enumerate() {
        states.push(s0);
        walk_expectation(
            mdp, policy, horizon, p0, &mut states, &mut actions, cap, &mut f, &mut total,
            &mut leaves,
        )?;
        states.pop();
    }
    Ok(total)
}

#[allow(clippy::too_many_arguments)]
fn walk_expectation<F>(
    mdp: &MdpInstance,
    policy: &Policy,
    remaining: usize,
    prob: f64,
    states: &mut Vec<usize>,
    actions: &mut Vec<usize>,
    cap: usize,
    f: &mut F,
    total: &mut f64,
    leaves: &mut usize,
) -> Result<()>
where
    F: FnMut(&History) -> f64,
{
    if remaining == 0 {
        *leaves += 1;
        if *leaves > cap {
            return Err(Error::CapExceeded {
                what: "history expectation walk".into(),
                needed: *leaves,
                cap,
            });
        }
        let h = History {
            states: states.clone(),
            actions: actions.clone(),
        };
        *total += prob * f(&h);
        return Ok(());
    }
    let s = *states.last().unwrap();
    for (a, pa) in action_probs(mdp, policy, s)? {
        for &(sp, pt) in mdp.successors(s, a) {
            actions.push(a);
            states.push(sp);
            walk_expectation(
                mdp, policy, remaining - 1, prob * pa * pt, states, actions, cap, f, total, leaves,
            )?;
            states.pop();
            actions.pop();
        }
    }
    Ok(())
}

/// All `|A|^|S|` deterministic stationary policies in lexicographic order over
/// action-index tuples.
pub fn enumerate_deterministic_policies(
    mdp: &MdpInstance,
    cap: usize,
) -> Result<Vec<Vec<usize>>> {
    let n = mdp.n_states();
    let a = mdp.n_actions();
    let mut count: usize = 1;
    for _ in 0..n {
        count = count.checked_mul(a).ok_or(Error::CapExceeded {
            what: "deterministic policy enumeration".into(),
            needed: usize::MAX,
            cap,
        })?;
        if count > cap {
            return Err(Error::CapExceeded {
                what: "deterministic policy enumeration".into(),
                needed: count,
                cap,
            });
        }
    }
    let mut out = Vec::with_capacity(count);
    let mut current = vec![0usize; n];
    loop {
        out.push(current.clone());
        // Lexicographic increment with the last state as least significant digit.
        let mut i = n;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            current[i] += 1;
            if current[i] < a {
                break;
            }
            current[i] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_state(r: f64, gamma: f64) -> MdpInstance {
        MdpInstance::from_dense(
            vec![vec![vec![1.0]]],
            gamma,
            RewardSpec::Scalar(vec![r]),
            vec![1.0],
        )
        .unwrap()
    }

    #[test]
    fn geometric_series_value() {
        let mdp = single_state(1.0, 0.5);
        let v = evaluate_policy(&mdp, &Policy::Deterministic(vec![0]), 1e-12).unwrap();
        assert!((v[0] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn zero_reward_zero_value() {
        let mdp = single_state(0.0, 0.9);
        let v = evaluate_policy(&mdp, &Policy::Deterministic(vec![0]), 1e-12).unwrap();
        assert_eq!(v[0], 0.0);
    }

    #[test]
    fn rejects_symbolic_reward_evaluation() {
        let mdp = MdpInstance::from_dense(
            vec![vec![vec![1.0]]],
            0.5,
            RewardSpec::Symbolic {
                num_labels: 1,
                labels: vec![0],
            },
            vec![1.0],
        )
        .unwrap();
        assert!(evaluate_policy(&mdp, &Policy::Deterministic(vec![0]), 1e-9).is_err());
    }

    #[test]
    fn rejects_mixed_policy_evaluation() {
        let mdp = single_state(1.0, 0.5);
        let mixed = Policy::Mixed(vec![(vec![0], 1.0)]);
        assert!(evaluate_policy(&mdp, &mixed, 1e-9).is_err());
    }

    #[test]
    fn value_iteration_picks_dominant_action() {
        let mdp = MdpInstance::from_dense(
            vec![vec![vec![1.0], vec![1.0]]],
            0.5,
            RewardSpec::Scalar(vec![0.0, 1.0]),
            vec![1.0],
        )
        .unwrap();
        let (v, pi) = value_iteration(&mdp, 1e-12).unwrap();
        assert!((v[0] - 2.0).abs() < 1e-9);
        assert_eq!(pi, Policy::Deterministic(vec![1]));
    }

    #[test]
    fn myopic_case_gamma_zero() {
        let mdp = MdpInstance::from_dense(
            vec![
                vec![vec![1.0, 0.0], vec![0.0, 1.0]],
                vec![vec![1.0, 0.0], vec![0.5, 0.5]],
            ],
            0.0,
            RewardSpec::Scalar(vec![3.0, 1.0, -2.0, 7.0]),
            vec![0.5, 0.5],
        )
        .unwrap();
        let (v, _) = value_iteration(&mdp, 1e-12).unwrap();
        assert!((v[0] - 3.0).abs() < 1e-12);
        assert!((v[1] - 7.0).abs() < 1e-12);
    }

    #[test]
    fn history_value_discounted_sum() {
        let mdp = single_state(1.0, 0.5);
        let h = History::new(vec![0, 0, 0], vec![0, 0]).unwrap();
        assert!((history_value(&mdp, &h).unwrap() - 1.5).abs() < 1e-15);
        let empty = History::new(vec![0], vec![]).unwrap();
        assert_eq!(history_value(&mdp, &empty).unwrap(), 0.0);
    }

    #[test]
    fn history_validation_rejects_impossible_transition() {
        let mdp = MdpInstance::from_dense(
            vec![
                vec![vec![1.0, 0.0]],
                vec![vec![0.0, 1.0]],
            ],
            0.5,
            RewardSpec::Scalar(vec![0.0, 0.0]),
            vec![0.5, 0.5],
        )
        .unwrap();
        let bad = History::new(vec![0, 1], vec![0]).unwrap();
        assert!(history_value(&mdp, &bad).is_err());
    }

    #[test]
    fn sample_history_deterministic_chain() {
        let mdp = MdpInstance::from_dense(
            vec![vec![vec![0.0, 1.0]], vec![vec![0.999999, 1e-6]]],
            0.5,
            RewardSpec::Scalar(vec![1.0, 0.0]),
            vec![1.0 - 1e-9, 1e-9],
        )
        .unwrap();
        let h1 = sample_history(&mdp, &Policy::Deterministic(vec![0, 0]), 3, 42).unwrap();
        let h2 = sample_history(&mdp, &Policy::Deterministic(vec![0, 0]), 3, 42).unwrap();
        assert_eq!(h1, h2);
    }

    #[test]
    fn enumerate_coin_chain() {
        let mdp = MdpInstance::from_dense(
            vec![
                vec![vec![0.5, 0.5]],
                vec![vec![0.5, 0.5]],
            ],
            0.5,
            RewardSpec::Scalar(vec![1.0, 0.0]),
            vec![1.0 - 1e-9, 1e-9],
        )
        .unwrap();
        // Start state is (almost surely) 0; condition on it by filtering.
        let hs = enumerate_histories(&mdp, &Policy::Deterministic(vec![0, 0]), 2, 1000).unwrap();
        let from_zero: Vec<_> = hs.iter().filter(|(h, _)| h.states[0] == 0).collect();
        assert_eq!(from_zero.len(), 4);
        for (_, p) in &from_zero {
            assert!((p / (1.0 - 1e-9) - 0.25).abs() < 1e-9);
        }
        let total: f64 = hs.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn enumeration_cap_errors() {
        let mdp = MdpInstance::from_dense(
            vec![
                vec![vec![0.5, 0.5]],
                vec![vec![0.5, 0.5]],
            ],
            0.5,
            RewardSpec::Scalar(vec![1.0, 0.0]),
            vec![0.5, 0.5],
        )
        .unwrap();
        let err = enumerate_histories(&mdp, &Policy::Deterministic(vec![0, 0]), 10, 8)
            .unwrap_err();
        assert!(matches!(err, Error::CapExceeded { .. }));
    }

    #[test]
    fn policy_enumeration_counts() {
        let mk = |ns: usize, na: usize| {
            let row = vec![1.0 / ns as f64; ns];
            MdpInstance::from_dense(
                vec![vec![row.clone(); na]; ns],
                0.5,
                RewardSpec::Scalar(vec![0.0; ns * na]),
                vec![1.0 / ns as f64; ns],
            )
            .unwrap()
        };
        assert_eq!(enumerate_deterministic_policies(&mk(2, 2), 100).unwrap().len(), 4);
        assert_eq!(enumerate_deterministic_policies(&mk(1, 3), 100).unwrap().len(), 3);
        let ps = enumerate_deterministic_policies(&mk(3, 2), 100).unwrap();
        assert_eq!(ps.len(), 8);
        let mut dedup = ps.clone();
        dedup.dedup();
        assert_eq!(dedup.len(), 8);
        assert!(enumerate_deterministic_policies(&mk(3, 2), 7).is_err());
    }
}
