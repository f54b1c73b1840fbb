//! Hand-built instances reused by tests, the self-test suite and the docs.

use crate::mdp::{MdpInstance, Policy, RewardSpec};

/// One state, nine actions carrying the three intransitive dice faces
/// {2,4,9}, {1,6,8}, {3,5,7} as scalar rewards. The three contestants are
/// randomized policies uniform over their own die's actions; at horizon 1
/// every cyclic duel is won with probability 5/9.
pub fn intransitive_dice() -> (MdpInstance, Vec<Policy>) {
    let rewards = vec![2.0, 4.0, 9.0, 1.0, 6.0, 8.0, 3.0, 5.0, 7.0];
    let mdp = MdpInstance::from_dense(
        vec![vec![vec![1.0]; 9]],
        0.5,
        RewardSpec::Scalar(rewards),
        vec![1.0],
    )
    .unwrap();
    let third = 1.0 / 3.0;
    let mk = |idx: [usize; 3]| {
        let mut row = vec![0.0; 9];
        for i in idx {
            row[i] = third;
        }
        Policy::Randomized(vec![row])
    };
    (mdp, vec![mk([0, 1, 2]), mk([3, 4, 5]), mk([6, 7, 8])])
}

/// Two equally likely start states with gamma = 0 and rewards (1,0) / (0,1):
/// history values are extreme vectors while the aggregate is (0.5, 0.5), so a
/// max-component scalarization diverges between the history and value levels.
pub fn level_divergence() -> MdpInstance {
    MdpInstance::from_dense(
        vec![vec![vec![0.5, 0.5]], vec![vec![0.5, 0.5]]],
        0.0,
        RewardSpec::Vector {
            dim: 2,
            values: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        },
        vec![0.5, 0.5],
    )
    .unwrap()
}

/// Two-label symbolic instance where one action statewise dominates the other
/// after the ordered-reward transform. With increasing label values the
/// dominance-soundness check passes; with decreasing values it must fail.
pub fn soundness_counterexample() -> MdpInstance {
    MdpInstance::from_dense(
        vec![vec![vec![1.0], vec![1.0]]],
        0.5,
        RewardSpec::Symbolic {
            num_labels: 2,
            labels: vec![0, 1],
        },
        vec![1.0],
    )
    .unwrap()
}
