//! Parallel vs sequential comparison of the data-parallel cores: frontier
//! enumeration, tournament filling and batched identity verification.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use prefmo::exec;
use prefmo::gen::{self, InstanceConfig, RewardKind};
use prefmo::mdp::{enumerate_deterministic_policies, Policy};
use prefmo::momdp::vector_evaluate;
use prefmo::pbmdp::{duel_exact, utility_preference, IncomparableHandling, Tournament};
use prefmo::transforms::{verify_lemma1, RewardOrder};

fn frontier_instance() -> prefmo::mdp::MdpInstance {
    let mut rng = gen::rng(42);
    gen::random_instance(
        &InstanceConfig {
            n_states: 5,
            n_actions: 3,
            gamma: 0.8,
            reward: RewardKind::Vector(3),
            max_successors: 3,
        },
        &mut rng,
    )
    .unwrap()
}

fn bench_policy_sweep(c: &mut Criterion) {
    let mdp = frontier_instance();
    let policies = enumerate_deterministic_policies(&mdp, 1_000).unwrap();
    let mut group = c.benchmark_group("policy-sweep");
    group.bench_with_input(BenchmarkId::new("parallel", policies.len()), &policies, |b, ps| {
        b.iter(|| {
            exec::try_map(ps.clone(), |actions| {
                vector_evaluate(&mdp, &Policy::Deterministic(actions), 1e-9)
            })
            .unwrap()
        })
    });
    group.bench_with_input(BenchmarkId::new("sequential", policies.len()), &policies, |b, ps| {
        b.iter(|| {
            ps.iter()
                .map(|actions| {
                    vector_evaluate(&mdp, &Policy::Deterministic(actions.clone()), 1e-9)
                })
                .collect::<Result<Vec<_>, _>>()
                .unwrap()
        })
    });
    group.finish();
}

fn bench_tournament(c: &mut Criterion) {
    let mut rng = gen::rng(7);
    let mdp = gen::random_instance(
        &InstanceConfig {
            n_states: 3,
            n_actions: 3,
            gamma: 0.5,
            reward: RewardKind::Scalar,
            max_successors: 2,
        },
        &mut rng,
    )
    .unwrap();
    let policies: Vec<Policy> = (0..6)
        .map(|_| gen::random_deterministic_policy(&mdp, &mut rng))
        .collect();
    let pref = utility_preference(&mdp).unwrap();
    let horizon = 5;
    let duel = |i: usize, j: usize| {
        duel_exact(
            &mdp,
            &policies[i],
            &policies[j],
            &pref,
            horizon,
            IncomparableHandling::Neither,
            1 << 20,
        )
    };
    let mut group = c.benchmark_group("tournament");
    group.sample_size(10);
    group.bench_function("parallel-fill", |b| {
        b.iter(|| Tournament::from_duel_fn(policies.len(), duel).unwrap())
    });
    group.bench_function("sequential-fill", |b| {
        b.iter(|| {
            let mut out = Vec::new();
            for i in 0..policies.len() {
                for j in i..policies.len() {
                    out.push(duel(i, j).unwrap());
                }
            }
            out
        })
    });
    group.finish();
}

fn bench_lemma_batch(c: &mut Criterion) {
    let trials: Vec<u64> = (0..32).collect();
    let run = |s: &u64| {
        let mut rng = gen::rng(*s);
        let mdp = gen::random_instance(
            &InstanceConfig {
                n_states: 6,
                n_actions: 3,
                gamma: 0.9,
                reward: RewardKind::Symbolic(4),
                max_successors: 3,
            },
            &mut rng,
        )
        .unwrap();
        let x = gen::random_increasing_values(4, &mut rng);
        let pi = gen::random_deterministic_policy(&mdp, &mut rng);
        verify_lemma1(&mdp, &RewardOrder::identity(4), &x, &pi, 1e-10).unwrap()
    };
    let mut group = c.benchmark_group("lemma-batch");
    group.bench_function("parallel", |b| {
        b.iter(|| exec::map(trials.clone(), |s| run(&s)))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| trials.iter().map(run).collect::<Vec<_>>())
    });
    group.finish();
}

criterion_group!(benches, bench_policy_sweep, bench_tournament, bench_lemma_batch);
criterion_main!(benches);
