//! Equilibrium constructions: the peeling solvers for the continuous,
//! graph-restricted, and discrete games.

mod continuous;
mod discrete;
mod graph;

pub use continuous::{max_totals_from_levels, solve_max, solve_min, MaxLevelSource};
pub use discrete::solve_discrete;
pub use graph::{graph_profile_from_levels, solve_graph};

use crate::model::{CollectionProfile, Instance, RankPair, TotalProfile};
use crate::rational::Rational;

/// Per-agent solver trace: final rank, the level (or threshold) the agent was
/// selected at, and whether the running floor bound instead.
#[derive(Debug, Clone)]
pub struct AgentDiagnostics {
    pub rank: RankPair,
    pub active_level: Rational,
    pub floor_bound: bool,
}

/// A solver output: collection profile, induced totals, the deletion order
/// the algorithm fixed agents in, and per-agent diagnostics.
#[derive(Debug, Clone)]
pub struct EquilibriumResult {
    pub x: CollectionProfile,
    pub t: TotalProfile,
    pub selection_order: Vec<usize>,
    pub diagnostics: Vec<AgentDiagnostics>,
}

/// Ranks of every agent at once. Complete instances use one sort instead of
/// the quadratic pairwise count.
pub(crate) fn ranks_all(inst: &Instance, x: &CollectionProfile) -> Vec<RankPair> {
    let n = inst.n();
    if !inst.is_complete() {
        return (0..n).map(|i| crate::model::ranks(inst, x, i)).collect();
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x.get(a).cmp(x.get(b)).then(a.cmp(&b)));
    let mut out = vec![RankPair { weak: 0, strict: 0 }; n];
    let mut lo = 0;
    while lo < n {
        let mut hi = lo;
        while hi + 1 < n && x.get(order[hi + 1]) == x.get(order[lo]) {
            hi += 1;
        }
        for &agent in &order[lo..=hi] {
            out[agent] = RankPair {
                weak: n - lo,
                strict: n - hi,
            };
        }
        lo = hi + 1;
    }
    out
}
