//! Exact solver and verifier for fair data-exchange games.
//!
//! Agents collect data at per-unit cost and exchange it pairwise under the
//! fair-exchange rule: each pair trades `min(x_i, x_j)` units. This crate
//! computes the extremal pure Nash equilibria of the induced game (continuous,
//! graph-restricted, and discrete variants), certifies them against
//! independent brute-force oracles, and audits the associated direct
//! mechanism for truthfulness and Pareto optimality.
//!
//! All arithmetic is exact rational; there is no floating point anywhere in
//! the solve or verification paths.

pub mod cli;
pub mod error;
pub mod format;
pub mod gen;
pub mod levels;
pub mod mechanism;
pub mod model;
pub mod rational;
pub mod registry;
pub mod solver;
pub mod transform;
pub mod verifier;

pub use error::FairexError;
pub use model::{
    AgentSpec, BenefitFunction, CollectionProfile, Instance, Mode, RankPair, TotalProfile,
};
pub use rational::Rational;
pub use solver::{solve_discrete, solve_graph, solve_max, solve_min, EquilibriumResult};
