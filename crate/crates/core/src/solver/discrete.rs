//! Exact integer equilibrium via the round-and-verify peel.
//!
//! Each round computes every remaining agent's fractional target
//! `x̃_j = (s_j^{|R|} - Σ_fixed x_k) / |R|`, takes the tie group S sharing the
//! smallest floor `m = max(⌊x̃_j⌋, prev)`, and tries to place the whole group
//! at `m + 1` with all other remaining agents pessimistically completed at
//! `m + 1`. If no group member would profitably step down to `m`, the group
//! is fixed at `m + 1`; otherwise the lowest-indexed would-be deviator is
//! fixed at `m` and the round repeats.

use num_traits::Zero;

use crate::error::{FairexError, Result};
use crate::levels::AgentLevels;
use crate::model::{utility, CollectionProfile, Instance, Mode};
use crate::rational::Rational;
use crate::solver::{ranks_all, AgentDiagnostics, EquilibriumResult};

/// Integer Nash equilibrium of a discrete complete-graph instance.
pub fn solve_discrete(inst: &Instance) -> Result<EquilibriumResult> {
    if inst.mode() != Mode::Discrete {
        return Err(FairexError::WrongMode {
            expected: "discrete",
            got: inst.mode().as_str(),
            hint: "use the continuous solvers",
        });
    }
    if !inst.is_complete() {
        return Err(FairexError::NotCompleteGraph);
    }
    let n = inst.n();
    let levels: Vec<AgentLevels> = inst.agents().iter().map(AgentLevels::new).collect();
    let mut live: Vec<usize> = (0..n).collect();
    let mut x = vec![Rational::zero(); n];
    let mut fixed_sum = Rational::zero();
    let mut prev = Rational::zero();
    let mut order = Vec::with_capacity(n);
    let mut active = vec![Rational::zero(); n];
    let mut floor_bound = vec![false; n];

    while !live.is_empty() {
        let k = live.len();
        let kq = Rational::from_integer((k as i64).into());
        let mut floors: Vec<(usize, Rational, Rational, bool)> = Vec::with_capacity(k);
        for &j in &live {
            let target = (levels[j].max_level(k) - &fixed_sum) / &kq;
            let floor = target.floor();
            let bound = floor < prev;
            let mj = if bound { prev.clone() } else { floor };
            floors.push((j, mj, target, bound));
        }
        let m = floors.iter().map(|(_, mj, _, _)| mj.clone()).min().unwrap();
        let group: Vec<&(usize, Rational, Rational, bool)> =
            floors.iter().filter(|(_, mj, _, _)| *mj == m).collect();
        let m_plus = &m + Rational::from_integer(1.into());

        // Candidate profile: fixed agents keep their levels, every remaining
        // agent (inside or outside the group) sits at m + 1.
        let mut candidate = x.clone();
        for &j in &live {
            candidate[j] = m_plus.clone();
        }
        let candidate = CollectionProfile::new(candidate)?;

        let mut deviator: Option<usize> = None;
        for (j, _, _, _) in group.iter().map(|g| *g) {
            let at_high = utility(inst, &candidate, *j)?;
            let at_low = utility(inst, &candidate.with(*j, m.clone()), *j)?;
            if at_low > at_high {
                deviator = Some(*j);
                break;
            }
        }

        match deviator {
            Some(j) => {
                let (_, _, target, bound) = floors.iter().find(|(a, ..)| *a == j).unwrap();
                x[j] = m.clone();
                active[j] = target.clone();
                floor_bound[j] = *bound;
                fixed_sum += &m;
                prev = m;
                live.retain(|&a| a != j);
                order.push(j);
            }
            None => {
                for (j, _, target, bound) in group.iter().map(|g| *g) {
                    x[*j] = m_plus.clone();
                    active[*j] = target.clone();
                    floor_bound[*j] = *bound;
                    fixed_sum += &m_plus;
                    order.push(*j);
                }
                let group_ids: Vec<usize> = group.iter().map(|(j, ..)| *j).collect();
                live.retain(|a| !group_ids.contains(a));
                prev = m_plus;
            }
        }
    }

    let x = CollectionProfile::new(x)?;
    let t = crate::model::total_data(inst, &x)?;
    let ranks = ranks_all(inst, &x);
    let diagnostics = (0..n)
        .map(|i| AgentDiagnostics {
            rank: ranks[i],
            active_level: active[i].clone(),
            floor_bound: floor_bound[i],
        })
        .collect();
    Ok(EquilibriumResult {
        x,
        t,
        selection_order: order,
        diagnostics,
    })
}
