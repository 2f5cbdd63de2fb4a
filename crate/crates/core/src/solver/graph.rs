//! Graph-restricted equilibrium via residual-threshold peeling.
//!
//! Works in collection space: each round computes, for every live vertex,
//! the collection level `ρ_i = r_i^{d_i(H)+1} / (d_i(H)+1)` it would pick if
//! all remaining neighbors stayed weakly above, fixes the vertex with the
//! smallest `ρ` at `max(prev, ρ)`, subtracts its collection from the residual
//! levels of live neighbors, and deletes it from the shrinking graph.

use num_traits::Zero;

use crate::error::{FairexError, Result};
use crate::levels::AgentLevels;
use crate::model::{CollectionProfile, Instance, Mode};
use crate::rational::Rational;
use crate::solver::continuous::{ComputedLevels, MaxLevelSource};
use crate::solver::{ranks_all, AgentDiagnostics, EquilibriumResult};

struct GraphPeel {
    x: Vec<Rational>,
    order: Vec<usize>,
    active: Vec<Rational>,
    floor_bound: Vec<bool>,
}

fn graph_peel<L: MaxLevelSource + ?Sized>(inst: &Instance, levels: &L) -> GraphPeel {
    let n = inst.n();
    let mut live = vec![true; n];
    let mut deg: Vec<usize> = (0..n).map(|i| inst.degree(i)).collect();
    // Residual level = s^K minus the mass already fixed by deleted neighbors.
    let mut fixed_inflow = vec![Rational::zero(); n];
    let mut prev = Rational::zero();
    let mut x = vec![Rational::zero(); n];
    let mut active = vec![Rational::zero(); n];
    let mut floor_bound = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let mut best: Option<(usize, Rational)> = None;
        for i in 0..n {
            if !live[i] {
                continue;
            }
            let k = deg[i] + 1;
            let rho = (levels.level(i, k) - &fixed_inflow[i])
                / Rational::from_integer((k as i64).into());
            match &best {
                Some((_, r)) if rho >= *r => {}
                _ => best = Some((i, rho)),
            }
        }
        let (i, rho) = best.unwrap();
        if rho > prev {
            prev = rho.clone();
        } else {
            floor_bound[i] = true;
        }
        x[i] = prev.clone();
        active[i] = rho;
        live[i] = false;
        inst.for_each_neighbor(i, |j| {
            if live[j] {
                fixed_inflow[j] += &x[i];
                deg[j] -= 1;
            }
        });
        order.push(i);
    }
    GraphPeel {
        x,
        order,
        active,
        floor_bound,
    }
}

fn result_from_peel(inst: &Instance, peel: GraphPeel) -> Result<EquilibriumResult> {
    let x = CollectionProfile::new(peel.x)?;
    let t = crate::model::total_data(inst, &x)?;
    let ranks = ranks_all(inst, &x);
    let diagnostics = (0..inst.n())
        .map(|i| AgentDiagnostics {
            rank: ranks[i],
            active_level: peel.active[i].clone(),
            floor_bound: peel.floor_bound[i],
        })
        .collect();
    Ok(EquilibriumResult {
        x,
        t,
        selection_order: peel.order,
        diagnostics,
    })
}

/// Equilibrium of the continuous graph-restricted game. Complete instances
/// are allowed and reproduce the maximal-equilibrium solver exactly.
pub fn solve_graph(inst: &Instance) -> Result<EquilibriumResult> {
    if inst.mode() != Mode::Continuous {
        return Err(FairexError::WrongMode {
            expected: "continuous",
            got: inst.mode().as_str(),
            hint: "use the discrete solver",
        });
    }
    let levels = ComputedLevels(inst.agents().iter().map(AgentLevels::new).collect());
    result_from_peel(inst, graph_peel(inst, &levels))
}

/// Graph peel on reported level vectors (each indexed K = 1.. with at least
/// degree + 1 entries); the mechanism's graph-case entry point.
pub fn graph_profile_from_levels(
    inst: &Instance,
    level_vectors: &[Vec<Rational>],
) -> Result<CollectionProfile> {
    struct Reported<'a>(&'a [Vec<Rational>]);
    impl MaxLevelSource for Reported<'_> {
        fn n_agents(&self) -> usize {
            self.0.len()
        }
        fn level(&self, agent: usize, k: usize) -> &Rational {
            &self.0[agent][k - 1]
        }
    }
    if level_vectors.len() != inst.n() {
        return Err(FairexError::DimensionMismatch {
            expected: inst.n(),
            got: level_vectors.len(),
        });
    }
    for (i, v) in level_vectors.iter().enumerate() {
        if v.len() < inst.degree(i) + 1 {
            return Err(FairexError::DimensionMismatch {
                expected: inst.degree(i) + 1,
                got: v.len(),
            });
        }
    }
    let peel = graph_peel(inst, &Reported(level_vectors));
    CollectionProfile::new(peel.x)
}
