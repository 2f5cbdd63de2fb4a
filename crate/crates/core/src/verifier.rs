//! Independent certification layer: every solver output is validated here.
//!
//! `check_local_conditions` certifies a continuous profile through the two
//! one-sided threshold inequalities; `deviation_oracle` refutes equilibria by
//! enumeration; `extremality_probe` hunts for other equilibria via exact
//! best-response sweeps; `pareto_scan` searches for dominating profiles.
//!
//! A profile is accepted as an equilibrium when no unilateral deviation
//! *strictly* improves utility (weak equilibria with indifferent agents are
//! equilibria). The matching threshold form is `s̃^strict <= t <= s^weak`:
//! the upward side uses the min-level because an agent sitting on a segment
//! of slope exactly c/K gains nothing from moving, and the enumeration oracle
//! must agree with the condition check on exactly such profiles.

use std::collections::BTreeSet;

use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{FairexError, Result};
use crate::levels::AgentLevels;
use crate::model::{
    total_data, utility, CollectionProfile, Instance, Mode, RankPair, TotalProfile,
};
use crate::rational::Rational;
use crate::solver::ranks_all;

/// Guard for full-profile enumerations.
pub const SCAN_GUARD: u128 = 10_000_000;

const PROBE_GRID: (i64, i64) = (1, 8);

/// One agent's slack against the two local equilibrium conditions.
#[derive(Debug, Clone)]
pub struct AgentConditionReport {
    pub agent: usize,
    pub rank: RankPair,
    pub total: Rational,
    /// Upward threshold `s̃^strict`; `total` must reach it.
    pub lower_level: Rational,
    /// Downward threshold `s^weak`; `total` must not exceed it.
    pub upper_level: Rational,
    pub lower_slack: Rational,
    pub upper_slack: Rational,
    pub ok: bool,
}

#[derive(Debug, Clone)]
pub struct ConditionReport {
    pub agents: Vec<AgentConditionReport>,
    pub pass: bool,
}

impl ConditionReport {
    pub fn violations(&self) -> impl Iterator<Item = &AgentConditionReport> {
        self.agents.iter().filter(|a| !a.ok)
    }
}

/// Checks the per-agent threshold conditions `s̃^strict <= t_i <= s^weak`
/// (neighbor-based ranks on graphs); a pass certifies a pure equilibrium.
pub fn check_local_conditions(inst: &Instance, x: &CollectionProfile) -> Result<ConditionReport> {
    if inst.mode() != Mode::Continuous {
        return Err(FairexError::WrongMode {
            expected: "continuous",
            got: inst.mode().as_str(),
            hint: "use the deviation oracle for discrete profiles",
        });
    }
    if x.len() != inst.n() {
        return Err(FairexError::DimensionMismatch {
            expected: inst.n(),
            got: x.len(),
        });
    }
    let totals = total_data(inst, x)?;
    let ranks = ranks_all(inst, x);
    let mut agents = Vec::with_capacity(inst.n());
    let mut pass = true;
    for i in 0..inst.n() {
        let levels = AgentLevels::new(inst.agent(i));
        let lower = levels.min_level(ranks[i].strict).clone();
        let upper = levels.max_level(ranks[i].weak).clone();
        let total = totals.get(i).clone();
        let lower_slack = &total - &lower;
        let upper_slack = &upper - &total;
        let ok = !lower_slack.is_negative() && !upper_slack.is_negative();
        pass &= ok;
        agents.push(AgentConditionReport {
            agent: i,
            rank: ranks[i],
            total,
            lower_level: lower,
            upper_level: upper,
            lower_slack,
            upper_slack,
            ok,
        });
    }
    Ok(ConditionReport { agents, pass })
}

/// Certificate that a profile is not an equilibrium: a strictly improving
/// unilateral move.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviationWitness {
    pub agent: usize,
    pub from: Rational,
    pub to: Rational,
    pub gain: Rational,
}

/// Inflow geometry of one agent against fixed opponents: sorted neighbor
/// collections plus prefix sums, giving `t_i(x')` in O(log n).
pub(crate) struct OwnCurve {
    vals: Vec<Rational>,
    prefix: Vec<Rational>,
}

impl OwnCurve {
    pub fn new(inst: &Instance, x: &CollectionProfile, i: usize) -> Self {
        let mut vals = Vec::with_capacity(inst.degree(i));
        inst.for_each_neighbor(i, |j| vals.push(x.get(j).clone()));
        vals.sort();
        let mut prefix = Vec::with_capacity(vals.len() + 1);
        prefix.push(Rational::zero());
        for v in &vals {
            prefix.push(prefix.last().unwrap() + v);
        }
        OwnCurve { vals, prefix }
    }

    pub fn total_at(&self, own: &Rational) -> Rational {
        let idx = self.vals.partition_point(|v| v <= own);
        let above = self.vals.len() - idx;
        &self.prefix[idx] + own * Rational::from_integer((above as i64 + 1).into())
    }
}

fn utility_at(inst: &Instance, curve: &OwnCurve, i: usize, own: &Rational) -> Result<Rational> {
    let a = inst.agent(i);
    Ok(a.benefit.eval(&curve.total_at(own))? - &a.cost * own)
}

/// Largest exact best response of agent `i` against the rest of `x`.
///
/// Walks the multiplier regions from below; inside a region with `above`
/// opponents strictly higher the marginal move multiplies by
/// `mu = above + 1`, so the ascent stops where `t` reaches `s^mu`.
pub fn best_response(inst: &Instance, x: &CollectionProfile, i: usize) -> Rational {
    let levels = AgentLevels::new(inst.agent(i));
    best_response_with(&levels, &OwnCurve::new(inst, x, i))
}

pub(crate) fn best_response_with(levels: &AgentLevels, curve: &OwnCurve) -> Rational {
    let m = curve.vals.len();
    let mut lo = Rational::zero();
    let mut idx = 0;
    loop {
        // Region [lo, hi) where the set of opponents weakly below is fixed.
        while idx < m && curve.vals[idx] <= lo {
            idx += 1;
        }
        let mu = m - idx + 1;
        let base = &curve.prefix[idx];
        let target = (levels.max_level(mu) - base) / Rational::from_integer((mu as i64).into());
        match (idx < m).then(|| curve.vals[idx].clone()) {
            Some(hi) if target >= hi => {
                lo = hi;
            }
            _ => return target.max(lo),
        }
    }
}

/// Exact integer best response over `0..=bound`, largest maximizer on ties.
pub fn best_response_discrete(
    inst: &Instance,
    x: &CollectionProfile,
    i: usize,
    bound: i64,
) -> Result<Rational> {
    let curve = OwnCurve::new(inst, x, i);
    let mut best_x = Rational::zero();
    let mut best_u = utility_at(inst, &curve, i, &best_x)?;
    for v in 1..=bound {
        let cand = Rational::from_integer(v.into());
        let u = utility_at(inst, &curve, i, &cand)?;
        if u >= best_u {
            best_u = u;
            best_x = cand;
        }
    }
    Ok(best_x)
}

fn level_cap(inst: &Instance, i: usize, levels: &AgentLevels) -> Rational {
    levels.max_level(inst.degree(i) + 1).clone()
}

/// Deviation search bound: past twice (max level + max current collection)
/// any further collection strictly loses.
pub(crate) fn deviation_bound(
    inst: &Instance,
    x: &CollectionProfile,
    levels: &[AgentLevels],
) -> Rational {
    let max_level = (0..inst.n())
        .map(|i| level_cap(inst, i, &levels[i]))
        .max()
        .unwrap_or_else(Rational::zero);
    let max_x = x.values().iter().max().cloned().unwrap_or_else(Rational::zero);
    (max_level + max_x) * Rational::from_integer(2.into())
}

/// Shared candidate base: the δ-grid up to the bound, every agent's current
/// collection, and every K-data-level.
fn base_candidates(
    inst: &Instance,
    x: &CollectionProfile,
    grid: &Rational,
    levels: &[AgentLevels],
    bound: &Rational,
) -> Vec<Rational> {
    let mut set: BTreeSet<Rational> = BTreeSet::new();
    let mut v = Rational::zero();
    while &v <= bound {
        set.insert(v.clone());
        v += grid;
    }
    for xv in x.values() {
        set.insert(xv.clone());
    }
    for (i, lv) in levels.iter().enumerate() {
        for k in 1..=inst.degree(i) + 1 {
            set.insert(lv.max_level(k).clone());
            set.insert(lv.min_level(k).clone());
        }
    }
    set.into_iter().collect()
}

/// Exact kink preimages of agent `i`'s own-deviation utility: within each
/// multiplier region, the x-values where `t` crosses a benefit breakpoint.
/// Together with the opponent values these are all extrema candidates of the
/// piecewise-linear utility, making the enumeration an exact refuter.
fn own_kink_candidates(inst: &Instance, curve: &OwnCurve, i: usize) -> Vec<Rational> {
    let mut out = Vec::new();
    let m = curve.vals.len();
    let breakpoints: Vec<Rational> = inst
        .agent(i)
        .benefit
        .segments()
        .iter()
        .map(|(t, _)| t.clone())
        .collect();
    let mut lo = Rational::zero();
    let mut idx = 0;
    loop {
        while idx < m && curve.vals[idx] <= lo {
            idx += 1;
        }
        let mu = Rational::from_integer(((m - idx + 1) as i64).into());
        let base = &curve.prefix[idx];
        let hi = (idx < m).then(|| curve.vals[idx].clone());
        for bp in &breakpoints {
            if bp < base {
                continue;
            }
            let pre = (bp - base) / &mu;
            let in_region = pre >= lo && hi.as_ref().map_or(true, |h| &pre <= h);
            if in_region {
                out.push(pre);
            }
        }
        match hi {
            Some(h) => lo = h,
            None => break,
        }
    }
    out
}

fn best_witness_for_agent(
    inst: &Instance,
    x: &CollectionProfile,
    i: usize,
    candidates: &[Rational],
    extras: &[Rational],
) -> Result<Option<DeviationWitness>> {
    let curve = OwnCurve::new(inst, x, i);
    let here = utility_at(inst, &curve, i, x.get(i))?;
    let mut all: Vec<&Rational> = candidates.iter().chain(extras.iter()).collect();
    all.sort();
    all.dedup();
    let mut best: Option<DeviationWitness> = None;
    for cand in all {
        if cand == x.get(i) {
            continue;
        }
        let u = utility_at(inst, &curve, i, cand)?;
        if u > here {
            let gain = &u - &here;
            if best.as_ref().map_or(true, |b| gain > b.gain) {
                best = Some(DeviationWitness {
                    agent: i,
                    from: x.get(i).clone(),
                    to: cand.clone(),
                    gain,
                });
            }
        }
    }
    Ok(best)
}

/// Brute-force equilibrium refuter. Returns the strictly improving
/// unilateral deviation with the largest gain (lowest agent index on ties),
/// or `None` when the profile survives every enumerated move.
///
/// Continuous instances enumerate the kink-augmented rational grid; discrete
/// instances enumerate all integers up to the bound.
pub fn deviation_oracle(
    inst: &Instance,
    x: &CollectionProfile,
    grid: &Rational,
) -> Result<Option<DeviationWitness>> {
    deviation_oracle_jobs(inst, x, grid, 1)
}

pub fn deviation_oracle_jobs(
    inst: &Instance,
    x: &CollectionProfile,
    grid: &Rational,
    jobs: usize,
) -> Result<Option<DeviationWitness>> {
    if grid <= &Rational::zero() {
        return Err(FairexError::BadGridStep(grid.to_string()));
    }
    if x.len() != inst.n() {
        return Err(FairexError::DimensionMismatch {
            expected: inst.n(),
            got: x.len(),
        });
    }
    let levels: Vec<AgentLevels> = inst.agents().iter().map(AgentLevels::new).collect();
    let bound = deviation_bound(inst, x, &levels);
    let base = match inst.mode() {
        Mode::Continuous => base_candidates(inst, x, grid, &levels, &bound),
        Mode::Discrete => {
            let top = bound.ceil().to_integer().to_i64().unwrap_or(i64::MAX);
            (0..=top).map(|v| Rational::from_integer(v.into())).collect()
        }
    };
    let per_agent = |i: usize| -> Result<Option<DeviationWitness>> {
        let extras = match inst.mode() {
            Mode::Continuous => {
                let curve = OwnCurve::new(inst, x, i);
                let mut e = own_kink_candidates(inst, &curve, i);
                e.push(best_response_with(&levels[i], &curve));
                e.retain(|v| v <= &bound && v >= &Rational::zero());
                e
            }
            Mode::Discrete => Vec::new(),
        };
        best_witness_for_agent(inst, x, i, &base, &extras)
    };
    let per_agent_results: Vec<Result<Option<DeviationWitness>>> = if jobs <= 1 || inst.n() == 1 {
        (0..inst.n()).map(per_agent).collect()
    } else {
        // Partitioned enumeration: each agent scan is independent; the merge
        // below is order-insensitive, so the parallel result is identical.
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..inst.n())
                .map(|i| scope.spawn(move || per_agent(i)))
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        })
    };
    let mut best: Option<DeviationWitness> = None;
    for r in per_agent_results {
        if let Some(w) = r? {
            if best.as_ref().map_or(true, |b| w.gain > b.gain) {
                best = Some(w);
            }
        }
    }
    Ok(best)
}

/// A certified equilibrium located by the probe.
#[derive(Debug, Clone)]
pub struct ProbePoint {
    pub x: CollectionProfile,
    pub t: TotalProfile,
}

#[derive(Debug, Clone)]
pub struct ProbeReport {
    pub equilibria: Vec<ProbePoint>,
    pub non_converged: usize,
}

/// Seeded best-response iteration: from random starting profiles, sweep exact
/// best responses round-robin until a fixed point (cap 10·n sweeps), then
/// re-certify each distinct fixed point with the deviation oracle. Certified
/// equilibria are returned; runs that hit the sweep cap, and fixed points the
/// oracle rejects, are only counted.
pub fn extremality_probe(inst: &Instance, restarts: u32, seed: u64) -> Result<ProbeReport> {
    if inst.mode() != Mode::Continuous {
        return Err(FairexError::WrongMode {
            expected: "continuous",
            got: inst.mode().as_str(),
            hint: "probe the discrete game via the oracle",
        });
    }
    let levels: Vec<AgentLevels> = inst.agents().iter().map(AgentLevels::new).collect();
    let reach: Rational = (0..inst.n())
        .map(|i| level_cap(inst, i, &levels[i]))
        .max()
        .unwrap()
        * Rational::from_integer(2.into());
    let steps = (&reach / Rational::new(PROBE_GRID.0.into(), PROBE_GRID.1.into()))
        .floor()
        .to_integer()
        .to_i64()
        .unwrap_or(0)
        .max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = Rational::new(PROBE_GRID.0.into(), PROBE_GRID.1.into());
    let mut fixed_points: Vec<CollectionProfile> = Vec::new();
    let mut non_converged = 0;
    for _ in 0..restarts {
        let start: Vec<Rational> = (0..inst.n())
            .map(|_| &grid * Rational::from_integer(rng.gen_range(0..=steps).into()))
            .collect();
        let mut x = CollectionProfile::new(start)?;
        let mut converged = false;
        for _ in 0..10 * inst.n() {
            let mut changed = false;
            for i in 0..inst.n() {
                let br = best_response_with(&levels[i], &OwnCurve::new(inst, &x, i));
                if &br != x.get(i) {
                    x = x.with(i, br);
                    changed = true;
                }
            }
            if !changed {
                converged = true;
                break;
            }
        }
        if !converged {
            non_converged += 1;
        } else if !fixed_points.contains(&x) {
            fixed_points.push(x);
        }
    }
    let mut equilibria = Vec::new();
    for x in fixed_points {
        if deviation_oracle(inst, &x, &grid)?.is_some() {
            non_converged += 1;
            continue;
        }
        let t = total_data(inst, &x)?;
        equilibria.push(ProbePoint { x, t });
    }
    Ok(ProbeReport {
        equilibria,
        non_converged,
    })
}

/// Certificate that a reference profile is Pareto-dominated.
#[derive(Debug, Clone)]
pub struct DominanceWitness {
    pub profile: CollectionProfile,
    /// Per-agent utility deltas against the reference; all >= 0, one > 0.
    pub deltas: Vec<Rational>,
}

/// Full-profile dominance scan over the kink-augmented grid `[0, bound]^n`.
/// Returns the first profile (odometer order) that weakly improves every
/// agent and strictly improves at least one.
pub fn pareto_scan(
    inst: &Instance,
    x_ref: &CollectionProfile,
    grid: &Rational,
) -> Result<Option<DominanceWitness>> {
    pareto_scan_jobs(inst, x_ref, grid, 1)
}

pub fn pareto_scan_jobs(
    inst: &Instance,
    x_ref: &CollectionProfile,
    grid: &Rational,
    jobs: usize,
) -> Result<Option<DominanceWitness>> {
    if grid <= &Rational::zero() {
        return Err(FairexError::BadGridStep(grid.to_string()));
    }
    if x_ref.len() != inst.n() {
        return Err(FairexError::DimensionMismatch {
            expected: inst.n(),
            got: x_ref.len(),
        });
    }
    let levels: Vec<AgentLevels> = inst.agents().iter().map(AgentLevels::new).collect();
    // Dominance search is lossless on [0, max satiation]^n: clamping any
    // coordinate down to the largest satiation point changes no other agent's
    // total and strictly lowers the clamped agent's cost, so a dominating
    // profile exists within the box whenever one exists at all.
    let bound = (0..inst.n())
        .map(|i| levels[i].satiation().clone())
        .max()
        .unwrap_or_else(Rational::zero);
    let candidates = match inst.mode() {
        Mode::Continuous => {
            let mut c = base_candidates(inst, x_ref, grid, &levels, &bound);
            c.retain(|v| v <= &bound);
            c
        }
        Mode::Discrete => {
            let top = bound.ceil().to_integer().to_i64().unwrap_or(i64::MAX);
            (0..=top).map(|v| Rational::from_integer(v.into())).collect()
        }
    };
    let total = (candidates.len() as u128).checked_pow(inst.n() as u32);
    match total {
        Some(t) if t <= SCAN_GUARD => {}
        _ => {
            return Err(FairexError::GuardExceeded {
                needed: total.unwrap_or(u128::MAX),
                limit: SCAN_GUARD,
            })
        }
    }
    let ref_util: Vec<Rational> = (0..inst.n())
        .map(|i| utility(inst, x_ref, i))
        .collect::<Result<_>>()?;

    let scan_range = |first_lo: usize, first_hi: usize| -> Result<Option<(usize, DominanceWitness)>> {
        let n = inst.n();
        let mut idx = vec![0usize; n];
        for first in first_lo..first_hi {
            idx[0] = first;
            loop {
                let profile = CollectionProfile::new(
                    idx.iter().map(|&c| candidates[c].clone()).collect(),
                )?;
                let mut weakly_better = true;
                let mut strictly = false;
                let mut deltas = Vec::with_capacity(n);
                for i in 0..n {
                    let d = utility(inst, &profile, i)? - &ref_util[i];
                    if d.is_negative() {
                        weakly_better = false;
                        break;
                    }
                    if d.is_positive() {
                        strictly = true;
                    }
                    deltas.push(d);
                }
                if weakly_better && strictly {
                    let odo = idx.iter().fold(0usize, |acc, &c| acc * candidates.len() + c);
                    return Ok(Some((odo, DominanceWitness { profile, deltas })));
                }
                // Advance the odometer over coordinates 1..n.
                let mut pos = n;
                while pos > 1 {
                    pos -= 1;
                    idx[pos] += 1;
                    if idx[pos] < candidates.len() {
                        break;
                    }
                    idx[pos] = 0;
                }
                if pos <= 1 && (n == 1 || idx[1..].iter().all(|&c| c == 0)) {
                    break;
                }
            }
        }
        Ok(None)
    };

    if jobs <= 1 || candidates.len() < 2 * jobs {
        return Ok(scan_range(0, candidates.len())?.map(|(_, w)| w));
    }
    let chunk = candidates.len().div_ceil(jobs);
    let hits: Vec<Result<Option<(usize, DominanceWitness)>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..jobs)
            .map(|w| {
                let lo = w * chunk;
                let hi = ((w + 1) * chunk).min(candidates.len());
                let scan = &scan_range;
                scope.spawn(move || scan(lo, hi))
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut best: Option<(usize, DominanceWitness)> = None;
    for h in hits {
        if let Some((odo, w)) = h? {
            if best.as_ref().map_or(true, |(b, _)| odo < *b) {
                best = Some((odo, w));
            }
        }
    }
    Ok(best.map(|(_, w)| w))
}
