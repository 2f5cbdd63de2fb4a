//! Maximal and minimal equilibria of the continuous complete-graph game.
//!
//! Both constructions peel one agent per iteration. The maximal solver asks
//! how high the group can go together, fixes the bottleneck agent at its
//! K-data-level (K = remaining count) under a nondecreasing floor, and
//! repeats; the minimal solver mirrors it from above with min-K-levels and a
//! nonincreasing ceiling.

use num_traits::Zero;

use crate::error::{FairexError, Result};
use crate::levels::AgentLevels;
use crate::model::{Instance, Mode, TotalProfile};
use crate::rational::{cmp_fast, Rational};
use crate::solver::{ranks_all, AgentDiagnostics, EquilibriumResult};
use crate::transform::phi_inverse;

/// Source of maximal K-data-levels `s_i^K`, either computed from benefit
/// curves or taken verbatim from mechanism reports.
pub trait MaxLevelSource {
    fn n_agents(&self) -> usize;
    fn level(&self, agent: usize, k: usize) -> &Rational;
}

pub(crate) struct ComputedLevels(pub Vec<AgentLevels>);

impl MaxLevelSource for ComputedLevels {
    fn n_agents(&self) -> usize {
        self.0.len()
    }
    fn level(&self, agent: usize, k: usize) -> &Rational {
        self.0[agent].max_level(k)
    }
}

pub(crate) struct PeelRun {
    pub totals: Vec<Rational>,
    pub order: Vec<usize>,
    pub active: Vec<Rational>,
    pub floor_bound: Vec<bool>,
}

/// Maximal-equilibrium peel over an arbitrary level source.
///
/// Iteration τ uses rank parameter K = n - τ + 1, selects the remaining agent
/// with the smallest `s^K` (lowest index on ties), and assigns
/// `T = max(s^K, prev)`.
pub(crate) fn max_totals<L: MaxLevelSource + ?Sized>(levels: &L) -> PeelRun {
    let n = levels.n_agents();
    let mut live: Vec<usize> = (0..n).collect();
    let mut prev = Rational::zero();
    let mut totals = vec![Rational::zero(); n];
    let mut active = vec![Rational::zero(); n];
    let mut floor_bound = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for tau in 1..=n {
        let k = n - tau + 1;
        let mut best = 0;
        for pos in 1..live.len() {
            if cmp_fast(levels.level(live[pos], k), levels.level(live[best], k)).is_lt() {
                best = pos;
            }
        }
        let j = live.remove(best);
        let s = levels.level(j, k).clone();
        if s >= prev {
            prev = s.clone();
        } else {
            floor_bound[j] = true;
        }
        totals[j] = prev.clone();
        active[j] = s;
        order.push(j);
    }
    PeelRun {
        totals,
        order,
        active,
        floor_bound,
    }
}

/// Minimal-equilibrium peel: iteration K = 1..n selects the remaining agent
/// with the largest min-K-level (lowest index on ties) and assigns
/// `T = min(s̃^K, prev)`, with the ceiling starting unbounded.
fn min_totals(levels: &[AgentLevels]) -> PeelRun {
    let n = levels.len();
    let mut live: Vec<usize> = (0..n).collect();
    let mut prev: Option<Rational> = None;
    let mut totals = vec![Rational::zero(); n];
    let mut active = vec![Rational::zero(); n];
    let mut floor_bound = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for k in 1..=n {
        let mut best = 0;
        for pos in 1..live.len() {
            if cmp_fast(levels[live[pos]].min_level(k), levels[live[best]].min_level(k)).is_gt() {
                best = pos;
            }
        }
        let j = live.remove(best);
        let s = levels[j].min_level(k).clone();
        let assigned = match &prev {
            Some(p) if p < &s => {
                floor_bound[j] = true;
                p.clone()
            }
            _ => s.clone(),
        };
        prev = Some(assigned.clone());
        totals[j] = assigned;
        active[j] = s;
        order.push(j);
    }
    PeelRun {
        totals,
        order,
        active,
        floor_bound,
    }
}

fn require_continuous_complete(inst: &Instance, hint: &'static str) -> Result<()> {
    if inst.mode() != Mode::Continuous {
        return Err(FairexError::WrongMode {
            expected: "continuous",
            got: inst.mode().as_str(),
            hint,
        });
    }
    if !inst.is_complete() {
        return Err(FairexError::NotCompleteGraph);
    }
    Ok(())
}

fn result_from_run(inst: &Instance, run: PeelRun) -> Result<EquilibriumResult> {
    let t = TotalProfile::new(run.totals)?;
    let x = phi_inverse(&t)?;
    let ranks = ranks_all(inst, &x);
    let diagnostics = (0..inst.n())
        .map(|i| AgentDiagnostics {
            rank: ranks[i],
            active_level: run.active[i].clone(),
            floor_bound: run.floor_bound[i],
        })
        .collect();
    Ok(EquilibriumResult {
        x,
        t,
        selection_order: run.order,
        diagnostics,
    })
}

/// Maximal total-data equilibrium of a continuous complete-graph instance.
pub fn solve_max(inst: &Instance) -> Result<EquilibriumResult> {
    require_continuous_complete(inst, "use the discrete solver")?;
    let levels = ComputedLevels(inst.agents().iter().map(AgentLevels::new).collect());
    result_from_run(inst, max_totals(&levels))
}

/// Minimal total-data equilibrium of a continuous complete-graph instance.
pub fn solve_min(inst: &Instance) -> Result<EquilibriumResult> {
    require_continuous_complete(inst, "use the discrete solver")?;
    let levels: Vec<AgentLevels> = inst.agents().iter().map(AgentLevels::new).collect();
    result_from_run(inst, min_totals(&levels))
}

/// Runs the maximal peel on externally supplied level vectors (indexed
/// K = 1..=n per agent) and returns the total-data vector. This is the
/// mechanism's entry point; true benefit curves are not consulted.
pub fn max_totals_from_levels(level_vectors: &[Vec<Rational>]) -> Result<TotalProfile> {
    struct Reported<'a>(&'a [Vec<Rational>]);
    impl MaxLevelSource for Reported<'_> {
        fn n_agents(&self) -> usize {
            self.0.len()
        }
        fn level(&self, agent: usize, k: usize) -> &Rational {
            &self.0[agent][k - 1]
        }
    }
    let n = level_vectors.len();
    if level_vectors.iter().any(|v| v.len() < n) {
        return Err(FairexError::DimensionMismatch {
            expected: n,
            got: level_vectors.iter().map(|v| v.len()).min().unwrap_or(0),
        });
    }
    TotalProfile::new(max_totals(&Reported(level_vectors)).totals)
}
