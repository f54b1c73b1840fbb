//! Toolkit for finite discounted MDPs whose rewards may be numeric scalars,
//! objective vectors, or purely ordinal symbols. Covers vector-reward solving
//! (Pareto frontiers, epsilon-covers, scalarization), preference-based
//! comparison (probabilistic dominance, tournaments, mixed policies), the
//! transformations connecting ordinal rewards to multiobjective form,
//! Chebyshev/minimax-regret optimization over occupancy measures, and
//! simulated preference elicitation.

pub mod elicitation;
pub mod error;
pub mod exec;
pub mod fixtures;
pub mod gen;
pub mod io;
pub mod linalg;
pub mod lp;
pub mod mdp;
pub mod momdp;
pub mod pbmdp;
pub mod regret;
pub mod selftest;
pub mod transforms;

pub use error::{Error, Result};
