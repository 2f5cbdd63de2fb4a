//! Threshold quantities driving the solvers.
//!
//! The K-data-level `s_i^K` is the largest total at which agent `i` still
//! wants a marginal unit when each own unit yields K units of access; the
//! min-K-level `s̃_i^K` is the smallest total at which it stops wanting one.
//! For piecewise-linear curves both are breakpoints, found by comparing each
//! segment slope against `c/K`. The comparisons are precomputed once per
//! agent as integer K-thresholds so solver loops never divide.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::error::{FairexError, Result};
use crate::model::AgentSpec;
use crate::rational::Rational;

/// Per-agent level lookup with O(log segments) integer-only search.
#[derive(Debug, Clone)]
pub struct AgentLevels {
    /// Segment start breakpoints; `breakpoints[0] = 0`.
    breakpoints: Vec<Rational>,
    /// `max_k[r]` = largest K with `K * slope_r < c` (strict), saturated.
    max_k: Vec<u64>,
    /// `min_k[r]` = largest K with `K * slope_r <= c` (weak), saturated.
    min_k: Vec<u64>,
}

fn saturating_u64(v: &BigInt) -> u64 {
    if v.sign() == num_bigint::Sign::Minus {
        0
    } else {
        v.to_u64().unwrap_or(u64::MAX)
    }
}

impl AgentLevels {
    pub fn new(agent: &AgentSpec) -> Self {
        let segs = agent.benefit.segments();
        let mut breakpoints = Vec::with_capacity(segs.len());
        let mut max_k = Vec::with_capacity(segs.len());
        let mut min_k = Vec::with_capacity(segs.len());
        for (start, slope) in segs {
            breakpoints.push(start.clone());
            if slope.is_zero() {
                max_k.push(u64::MAX);
                min_k.push(u64::MAX);
            } else {
                let ratio = &agent.cost / slope;
                let ceil = ratio.ceil().to_integer();
                let floor = ratio.floor().to_integer();
                max_k.push(saturating_u64(&(ceil - BigInt::from(1))));
                min_k.push(saturating_u64(&floor));
            }
        }
        Self {
            breakpoints,
            max_k,
            min_k,
        }
    }

    /// `s^K`: breakpoint where the slope first drops strictly below `c/K`.
    /// `K = 0` returns 0 (the `c/0 = +inf` convention).
    pub fn max_level(&self, k: usize) -> &Rational {
        let k = k as u64;
        let r = self.max_k.partition_point(|&kbar| kbar < k);
        &self.breakpoints[r]
    }

    /// `s̃^K`: breakpoint where the slope first drops weakly below `c/K`.
    pub fn min_level(&self, k: usize) -> &Rational {
        let k = k as u64;
        let r = self.min_k.partition_point(|&kbar| kbar < k);
        &self.breakpoints[r]
    }

    /// Upper bound on every level: the satiation breakpoint.
    pub fn satiation(&self) -> &Rational {
        self.breakpoints.last().unwrap()
    }
}

/// Largest total at which the agent still wants a marginal unit at rank
/// parameter `k`; returns 0 for `k = 0` by convention.
pub fn k_level(agent: &AgentSpec, k: usize) -> Rational {
    AgentLevels::new(agent).max_level(k).clone()
}

/// Smallest total at which the right derivative falls to `c/k` or below;
/// returns 0 for `k = 0`.
pub fn min_k_level(agent: &AgentSpec, k: usize) -> Rational {
    AgentLevels::new(agent).min_level(k).clone()
}

/// Optimal-outside-collection closure `v(t) = max_{z>=0} (b(t+z) - c z)`.
///
/// By concavity the optimizer is `z* = max(0, s^1 - t)`.
pub fn outside_closure(agent: &AgentSpec, t: &Rational) -> Result<Rational> {
    if t < &Rational::zero() {
        return Err(FairexError::Domain(format!(
            "outside closure at negative t = {t}"
        )));
    }
    let s1 = k_level(agent, 1);
    let z = if s1 > *t { &s1 - t } else { Rational::zero() };
    Ok(agent.benefit.eval(&(t + &z))? - &agent.cost * &z)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelKind {
    Max,
    Min,
}

/// Per-agent table of levels for K in `1..=k_max` (`n` on complete graphs,
/// degree + 1 on restricted ones).
#[derive(Debug, Clone)]
pub struct LevelTable {
    pub owner: u32,
    pub kind: LevelKind,
    levels: Vec<Rational>,
}

impl LevelTable {
    pub fn compute(agent: &AgentSpec, kind: LevelKind, k_max: usize) -> Self {
        let lv = AgentLevels::new(agent);
        let levels = (1..=k_max)
            .map(|k| match kind {
                LevelKind::Max => lv.max_level(k).clone(),
                LevelKind::Min => lv.min_level(k).clone(),
            })
            .collect();
        Self {
            owner: agent.id,
            kind,
            levels,
        }
    }

    /// Level at rank parameter `k` (1-based); `k = 0` returns 0.
    pub fn get(&self, k: usize) -> Rational {
        if k == 0 {
            Rational::zero()
        } else {
            self.levels[k - 1].clone()
        }
    }

    pub fn levels(&self) -> &[Rational] {
        &self.levels
    }

    pub fn k_max(&self) -> usize {
        self.levels.len()
    }
}
