//! Command-line surface over the prefmo toolkit. Every command reads JSON
//! instance documents, writes a canonical JSON result document to stdout (or
//! `--out`), and reports wall time on stderr so outputs stay byte-stable.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{Map, Value};

use prefmo::elicitation::{elicit_loop, SimulatedOracle};
use prefmo::error::{Error, Result};
use prefmo::io::{
    self, instance_document, mat_value, vec_value, LoadedDocument, PreferenceSpec, ResultDocument,
};
use prefmo::mdp::{evaluate_policy, value_iteration, MdpInstance, Policy};
use prefmo::momdp::{epsilon_cover_indices, pareto_frontier, verify_cover};
use prefmo::pbmdp::{
    borda_winner, condorcet_winner, copeland_winner, detect_cycles, duel_exact, duel_monte_carlo,
    game_payoffs, optimal_mixed_policy, pareto_preference, probabilistic_dominance,
    utility_preference, DuelOutcome, DuelResult, HistoryPreference, IncomparableHandling,
    Tournament,
};
use prefmo::regret::{chebyshev_optimal, minimax_regret};
use prefmo::selftest::{lemma1_suite, lemma2_suite, lemma3_suite, run_selftest};
use prefmo::transforms::{ordered_history_transform, ordered_reward_transform, RewardOrder};

#[derive(Parser)]
#[command(name = "prefmo", about = "Finite discounted MDP toolkit", version)]
struct Cli {
    /// Convergence tolerance for iterative solvers.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Enumeration cap (histories, policies).
    #[arg(long, global = true, default_value_t = 100_000)]
    cap: usize,
    /// Write the result document here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Reject unknown document fields instead of warning.
    #[arg(long, global = true, default_value_t = false)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Exact,
    Mc,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
enum Incomparable {
    #[default]
    Neither,
    Both,
}

impl From<Incomparable> for IncomparableHandling {
    fn from(v: Incomparable) -> Self {
        match v {
            Incomparable::Neither => IncomparableHandling::Neither,
            Incomparable::Both => IncomparableHandling::BothSides,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TransformMode {
    OrderedRewards,
    OrderedHistories,
}

#[derive(clap::Args)]
struct DuelArgs {
    instance: PathBuf,
    /// JSON array of policy documents.
    #[arg(long)]
    policies: PathBuf,
    /// Duel horizon; defaults to the instance truncation horizon.
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long, value_enum, default_value_t = Method::Exact)]
    method: Method,
    /// Monte-Carlo sample count.
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    /// How incomparable history pairs are tallied.
    #[arg(long, value_enum, default_value_t = Incomparable::Neither)]
    incomparable: Incomparable,
}

#[derive(Subcommand)]
enum Command {
    /// Value iteration on a scalar-reward instance.
    Solve { instance: PathBuf },
    /// Evaluate a stationary policy on a scalar-reward instance.
    Evaluate {
        instance: PathBuf,
        #[arg(long)]
        policy: PathBuf,
    },
    /// Pareto frontier over deterministic policies (vector reward).
    Frontier { instance: PathBuf },
    /// Multiplicative epsilon-cover of the Pareto frontier.
    Cover {
        instance: PathBuf,
        #[arg(long)]
        epsilon: f64,
    },
    /// Pairwise duel between the first two supplied policies.
    Duel {
        #[command(flatten)]
        args: DuelArgs,
        #[arg(long, default_value_t = 0)]
        first: usize,
        #[arg(long, default_value_t = 1)]
        second: usize,
    },
    /// Full round-robin tournament over the supplied policies.
    Tournament {
        #[command(flatten)]
        args: DuelArgs,
    },
    /// Condorcet winner of the tournament, if one exists.
    Condorcet {
        #[command(flatten)]
        args: DuelArgs,
    },
    /// Copeland winner (wins minus losses).
    Copeland {
        #[command(flatten)]
        args: DuelArgs,
    },
    /// Borda winner (sum of duel probabilities).
    Borda {
        #[command(flatten)]
        args: DuelArgs,
    },
    /// Optimal mixed policy of the duel game.
    Mixed {
        #[command(flatten)]
        args: DuelArgs,
    },
    /// Rewrite a symbolic-reward instance into vector-reward form.
    Transform {
        instance: PathBuf,
        #[arg(long, value_enum)]
        mode: TransformMode,
    },
    /// Run one of the numbered identity suites on random instances.
    Verify {
        #[arg(long)]
        lemma: u8,
        #[arg(long, default_value_t = 100)]
        trials: u64,
    },
    /// Chebyshev-optimal randomized policy via the occupancy LP.
    Chebyshev { instance: PathBuf },
    /// Minimax regret over the weight simplex (hypercube value reported too).
    Regret { instance: PathBuf },
    /// Interactive elicitation against a simulated oracle document.
    Elicit {
        instance: PathBuf,
        #[arg(long)]
        oracle: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 100)]
        max_queries: usize,
    },
    /// Run the built-in acceptance suite.
    Selftest,
}

fn main() {
    let cli = Cli::parse();
    let start = Instant::now();
    let code = match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    eprintln!("wall_time_ms {}", start.elapsed().as_millis());
    std::process::exit(code);
}

fn load(cli: &Cli, path: &Path) -> Result<(LoadedDocument, String)> {
    let bytes = fs::read(path)?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| Error::validation("instance file is not UTF-8"))?;
    let doc = io::parse_instance(&text, cli.strict)?;
    Ok((doc, io::sha256_hex(&bytes)))
}

fn load_policies(path: &Path) -> Result<Vec<Policy>> {
    let text = fs::read_to_string(path)?;
    let root: Value = serde_json::from_str(&text).map_err(|e| Error::Schema {
        path: "$".into(),
        message: format!("invalid JSON: {e}"),
    })?;
    let items = root.as_array().ok_or_else(|| Error::Schema {
        path: "$".into(),
        message: "expected an array of policy documents".into(),
    })?;
    items.iter().map(io::parse_policy).collect()
}

fn policy_value(policy: &Policy) -> Value {
    let mut o = Map::new();
    match policy {
        Policy::Deterministic(actions) => {
            o.insert("kind".into(), Value::from("deterministic"));
            o.insert(
                "actions".into(),
                Value::Array(actions.iter().map(|&a| Value::from(a)).collect()),
            );
        }
        Policy::Randomized(rows) => {
            o.insert("kind".into(), Value::from("randomized"));
            o.insert("probs".into(), mat_value(rows));
        }
        Policy::Mixed(components) => {
            o.insert("kind".into(), Value::from("mixed"));
            o.insert(
                "components".into(),
                Value::Array(
                    components
                        .iter()
                        .map(|(actions, w)| {
                            let mut c = Map::new();
                            c.insert(
                                "actions".into(),
                                Value::Array(actions.iter().map(|&a| Value::from(a)).collect()),
                            );
                            c.insert("weight".into(), Value::from(*w));
                            Value::Object(c)
                        })
                        .collect(),
                ),
            );
        }
    }
    Value::Object(o)
}

fn duel_value(d: &DuelResult) -> Value {
    let mut o = Map::new();
    o.insert("p".into(), Value::from(d.p));
    o.insert("q".into(), Value::from(d.q));
    o.insert("horizon".into(), Value::from(d.horizon));
    o.insert(
        "outcome".into(),
        Value::from(match probabilistic_dominance(d) {
            DuelOutcome::First => "first",
            DuelOutcome::Second => "second",
            DuelOutcome::Tie => "tie",
        }),
    );
    Value::Object(o)
}

fn preference_for(mdp: &MdpInstance) -> Result<HistoryPreference> {
    match mdp.reward() {
        prefmo::mdp::RewardSpec::Scalar(_) => utility_preference(mdp),
        prefmo::mdp::RewardSpec::Vector { .. } => pareto_preference(mdp),
        prefmo::mdp::RewardSpec::Symbolic { .. } => Err(Error::validation(
            "duels need a scalar or vector reward; transform symbolic instances first",
        )),
    }
}

struct TournamentRun {
    tournament: Tournament,
    digest: String,
    n: usize,
}

fn build_tournament(cli: &Cli, args: &DuelArgs) -> Result<TournamentRun> {
    let (doc, digest) = load(cli, &args.instance)?;
    let mdp = doc.mdp;
    let policies = load_policies(&args.policies)?;
    if policies.is_empty() {
        return Err(Error::validation("at least one policy required"));
    }
    let pref = preference_for(&mdp)?;
    let horizon = args.horizon.unwrap_or_else(|| mdp.truncation_horizon(1e-6));
    let incomparable: IncomparableHandling = args.incomparable.into();
    let n = policies.len();
    let seed = cli.seed;
    let samples = args.n;
    let cap = cli.cap;
    let method = args.method;
    let tournament = Tournament::from_duel_fn(n, |i, j| match method {
        Method::Exact => duel_exact(
            &mdp,
            &policies[i],
            &policies[j],
            &pref,
            horizon,
            incomparable,
            cap,
        ),
        Method::Mc => duel_monte_carlo(
            &mdp,
            &policies[i],
            &policies[j],
            &pref,
            horizon,
            samples,
            seed.wrapping_add((i * n + j) as u64),
            incomparable,
        ),
    })?;
    Ok(TournamentRun {
        tournament,
        digest,
        n,
    })
}

fn emit(cli: &Cli, doc: ResultDocument) -> Result<()> {
    doc.emit(cli.out.as_deref())?;
    Ok(())
}

fn outputs(entries: Vec<(&str, Value)>) -> Value {
    let mut o = Map::new();
    for (k, v) in entries {
        o.insert(k.to_string(), v);
    }
    Value::Object(o)
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Solve { instance } => {
            let (doc, digest) = load(cli, instance)?;
            let (v, policy) = value_iteration(&doc.mdp, cli.tol)?;
            let out = outputs(vec![
                ("values", vec_value(&v)),
                ("policy", policy_value(&policy)),
            ]);
            emit(
                cli,
                ResultDocument::new("solve", cli.tol, out).with_digest(digest),
            )
        }
        Command::Evaluate { instance, policy } => {
            let (doc, digest) = load(cli, instance)?;
            let pi = io::load_policy(policy)?;
            let v = evaluate_policy(&doc.mdp, &pi, cli.tol)?;
            let aggregate = prefmo::linalg::dot(doc.mdp.initial_distribution(), &v);
            let out = outputs(vec![
                ("values", vec_value(&v)),
                ("aggregate", Value::from(aggregate)),
            ]);
            emit(
                cli,
                ResultDocument::new("evaluate", cli.tol, out).with_digest(digest),
            )
        }
        Command::Frontier { instance } => {
            let (doc, digest) = load(cli, instance)?;
            let frontier = pareto_frontier(&doc.mdp, cli.tol, cli.cap)?;
            let entries: Vec<Value> = frontier
                .entries
                .iter()
                .map(|e| {
                    outputs(vec![
                        (
                            "policy",
                            Value::Array(e.policy.iter().map(|&a| Value::from(a)).collect()),
                        ),
                        ("value", vec_value(&e.value)),
                    ])
                })
                .collect();
            let out = outputs(vec![("frontier", Value::Array(entries))]);
            emit(
                cli,
                ResultDocument::new("frontier", cli.tol, out).with_digest(digest),
            )
        }
        Command::Cover { instance, epsilon } => {
            let (doc, digest) = load(cli, instance)?;
            let frontier = pareto_frontier(&doc.mdp, cli.tol, cli.cap)?;
            let points: Vec<Vec<f64>> =
                frontier.entries.iter().map(|e| e.value.clone()).collect();
            let cover = epsilon_cover_indices(&points, *epsilon)?;
            let covered: Vec<Vec<f64>> = cover.iter().map(|&i| points[i].clone()).collect();
            let valid = verify_cover(&covered, &points, *epsilon);
            let entries: Vec<Value> = cover
                .iter()
                .map(|&i| {
                    outputs(vec![
                        ("index", Value::from(i)),
                        (
                            "policy",
                            Value::Array(
                                frontier.entries[i]
                                    .policy
                                    .iter()
                                    .map(|&a| Value::from(a))
                                    .collect(),
                            ),
                        ),
                        ("value", vec_value(&frontier.entries[i].value)),
                    ])
                })
                .collect();
            let out = outputs(vec![
                ("epsilon", Value::from(*epsilon)),
                ("frontier_size", Value::from(points.len())),
                ("cover", Value::Array(entries)),
                ("verified", Value::from(valid)),
            ]);
            emit(
                cli,
                ResultDocument::new("cover", cli.tol, out).with_digest(digest),
            )
        }
        Command::Duel {
            args,
            first,
            second,
        } => {
            let run = build_tournament(cli, args)?;
            if *first >= run.n || *second >= run.n {
                return Err(Error::validation("duel indices out of range"));
            }
            let d = run.tournament.duels[*first][*second];
            eprintln!("p = {:.6}, q = {:.6}", d.p, d.q);
            let out = outputs(vec![
                ("first", Value::from(*first)),
                ("second", Value::from(*second)),
                ("duel", duel_value(&d)),
            ]);
            emit(
                cli,
                ResultDocument::new("duel", cli.tol, out)
                    .with_digest(run.digest)
                    .with_seed(cli.seed),
            )
        }
        Command::Tournament { args } => {
            let run = build_tournament(cli, args)?;
            let matrix: Vec<Value> = run
                .tournament
                .duels
                .iter()
                .map(|row| Value::Array(row.iter().map(duel_value).collect()))
                .collect();
            let cycles: Vec<Value> = detect_cycles(&run.tournament)
                .iter()
                .map(|&(i, j, k)| {
                    Value::Array(vec![Value::from(i), Value::from(j), Value::from(k)])
                })
                .collect();
            let out = outputs(vec![
                ("duels", Value::Array(matrix)),
                ("cycles", Value::Array(cycles)),
            ]);
            emit(
                cli,
                ResultDocument::new("tournament", cli.tol, out)
                    .with_digest(run.digest)
                    .with_seed(cli.seed),
            )
        }
        Command::Condorcet { args } => {
            let run = build_tournament(cli, args)?;
            let winner = condorcet_winner(&run.tournament);
            let out = outputs(vec![(
                "winner",
                winner.map(Value::from).unwrap_or(Value::Null),
            )]);
            emit(
                cli,
                ResultDocument::new("condorcet", cli.tol, out)
                    .with_digest(run.digest)
                    .with_seed(cli.seed),
            )
        }
        Command::Copeland { args } => {
            let run = build_tournament(cli, args)?;
            let out = outputs(vec![(
                "winner",
                Value::from(copeland_winner(&run.tournament)),
            )]);
            emit(
                cli,
                ResultDocument::new("copeland", cli.tol, out)
                    .with_digest(run.digest)
                    .with_seed(cli.seed),
            )
        }
        Command::Borda { args } => {
            let run = build_tournament(cli, args)?;
            let out = outputs(vec![("winner", Value::from(borda_winner(&run.tournament)))]);
            emit(
                cli,
                ResultDocument::new("borda", cli.tol, out)
                    .with_digest(run.digest)
                    .with_seed(cli.seed),
            )
        }
        Command::Mixed { args } => {
            let run = build_tournament(cli, args)?;
            let (weights, value) = optimal_mixed_policy(&run.tournament)?;
            let payoffs = game_payoffs(&run.tournament, &weights);
            let out = outputs(vec![
                ("weights", vec_value(&weights)),
                ("game_value", Value::from(value)),
                ("payoffs", vec_value(&payoffs)),
            ]);
            emit(
                cli,
                ResultDocument::new("mixed", cli.tol, out)
                    .with_digest(run.digest)
                    .with_seed(cli.seed),
            )
        }
        Command::Transform { instance, mode } => {
            let (doc, digest) = load(cli, instance)?;
            let (transformed, extra) = match mode {
                TransformMode::OrderedRewards => {
                    let d = match doc.mdp.reward() {
                        prefmo::mdp::RewardSpec::Symbolic { num_labels, .. } => *num_labels,
                        _ => {
                            return Err(Error::validation(
                                "transform requires a symbolic reward",
                            ))
                        }
                    };
                    let order = match &doc.preference {
                        Some(PreferenceSpec::OrderedRewards(perm)) => {
                            RewardOrder::new(perm.clone())?
                        }
                        Some(PreferenceSpec::OrderedHistories(_)) => {
                            return Err(Error::validation(
                                "instance carries ordered histories; use --mode ordered-histories",
                            ))
                        }
                        None => RewardOrder::identity(d),
                    };
                    (ordered_reward_transform(&doc.mdp, &order)?, Value::Null)
                }
                TransformMode::OrderedHistories => {
                    let ordered = match &doc.preference {
                        Some(PreferenceSpec::OrderedHistories(hs)) => {
                            prefmo::transforms::OrderedHistories::new(hs.clone())
                        }
                        _ => {
                            return Err(Error::validation(
                                "instance document must carry an ordered_histories preference block",
                            ))
                        }
                    };
                    let (mdp, basis) = ordered_history_transform(&doc.mdp, &ordered)?;
                    (mdp, Value::from(basis.condition))
                }
            };
            let transformed_doc = LoadedDocument {
                mdp: transformed,
                preference: None,
                state_names: doc.state_names.clone(),
                action_names: doc.action_names.clone(),
            };
            let out = outputs(vec![
                ("instance", instance_document(&transformed_doc)),
                ("basis_condition", extra),
            ]);
            emit(
                cli,
                ResultDocument::new("transform", cli.tol, out).with_digest(digest),
            )
        }
        Command::Verify { lemma, trials } => {
            let (residual, bound, failures) = match lemma {
                1 => {
                    let r = lemma1_suite(*trials, cli.seed)?;
                    (Some(r), 1e-8, usize::from(r > 1e-8))
                }
                2 => {
                    let r = lemma2_suite(*trials as usize, cli.seed)?;
                    (Some(r), 1e-6, usize::from(r > 1e-6))
                }
                3 => {
                    let f = lemma3_suite(*trials, cli.seed)?;
                    (None, 1e-8, f)
                }
                other => {
                    return Err(Error::validation(format!(
                        "unknown lemma {other}; expected 1, 2 or 3"
                    )))
                }
            };
            if let Some(r) = residual {
                eprintln!("max residual {r:.3e} over {trials} trials (bound {bound:.0e})");
            } else {
                eprintln!("{failures} equivalence failures over {trials} trials");
            }
            let out = outputs(vec![
                ("lemma", Value::from(*lemma)),
                ("trials", Value::from(*trials)),
                (
                    "max_residual",
                    residual.map(Value::from).unwrap_or(Value::Null),
                ),
                ("failures", Value::from(failures)),
                ("passed", Value::from(failures == 0)),
            ]);
            emit(
                cli,
                ResultDocument::new("verify", cli.tol, out).with_seed(cli.seed),
            )
        }
        Command::Chebyshev { instance } => {
            let (doc, digest) = load(cli, instance)?;
            let sol = chebyshev_optimal(&doc.mdp, cli.tol)?;
            let out = outputs(vec![
                ("regret", Value::from(sol.regret)),
                ("ideal", vec_value(&sol.ideal.point)),
                ("policy", policy_value(&sol.policy)),
                ("occupancy", vec_value(&sol.occupancy.values)),
                (
                    "active_components",
                    Value::Array(
                        sol.active_components
                            .iter()
                            .map(|&i| Value::from(i))
                            .collect(),
                    ),
                ),
            ]);
            emit(
                cli,
                ResultDocument::new("chebyshev", cli.tol, out).with_digest(digest),
            )
        }
        Command::Regret { instance } => {
            let (doc, digest) = load(cli, instance)?;
            let report = minimax_regret(&doc.mdp, cli.tol, cli.cap)?;
            let out = outputs(vec![
                ("value", Value::from(report.value)),
                (
                    "hypercube_value",
                    report
                        .hypercube_value
                        .map(Value::from)
                        .unwrap_or(Value::Null),
                ),
                ("policy", policy_value(&report.solution.policy)),
                ("ideal", vec_value(&report.solution.ideal.point)),
            ]);
            emit(
                cli,
                ResultDocument::new("regret", cli.tol, out).with_digest(digest),
            )
        }
        Command::Elicit {
            instance,
            oracle,
            epsilon,
            max_queries,
        } => {
            let (doc, digest) = load(cli, instance)?;
            let x_star = io::load_oracle(oracle)?;
            let oracle = SimulatedOracle::new(x_star)?;
            let frontier = pareto_frontier(&doc.mdp, cli.tol, cli.cap)?;
            let outcome = elicit_loop(&frontier, *epsilon, &oracle, *max_queries)?;
            let queries: Vec<Value> = outcome
                .queries
                .iter()
                .map(|q| {
                    outputs(vec![
                        ("first_value", vec_value(&q.first.value)),
                        ("second_value", vec_value(&q.second.value)),
                        ("first_preferred", Value::from(q.answer_first_preferred)),
                    ])
                })
                .collect();
            let out = outputs(vec![
                (
                    "recommended_policy",
                    Value::Array(
                        outcome
                            .recommended
                            .policy
                            .iter()
                            .map(|&a| Value::from(a))
                            .collect(),
                    ),
                ),
                ("recommended_value", vec_value(&outcome.recommended.value)),
                ("cover_size", Value::from(outcome.cover_size)),
                ("queries", Value::Array(queries)),
            ]);
            emit(
                cli,
                ResultDocument::new("elicit", cli.tol, out).with_digest(digest),
            )
        }
        Command::Selftest => {
            let report = run_selftest(cli.seed)?;
            for line in report.summary_lines() {
                eprintln!("{line}");
            }
            report.document.emit(cli.out.as_deref())?;
            if report.all_passed() {
                Ok(())
            } else {
                Err(Error::Numerical("acceptance criteria failed".into()))
            }
        }
    }
}
