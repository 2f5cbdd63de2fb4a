//! The direct mechanism: agents report their K-data-level vectors, the
//! mechanism computes the maximal equilibrium of the *reported* game and
//! recommends (Model 3), threshold-enforces (Model 2), or fully enforces
//! (Model 1) the resulting collection profile. Truthfulness is audited by
//! grid search over monotone misreports.

use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{FairexError, Result};
use crate::levels::{outside_closure, AgentLevels};
use crate::model::{
    total_for_agent, utility, BenefitFunction, CollectionProfile, Instance, Mode, TotalProfile,
};
use crate::rational::Rational;
use crate::solver::{graph_profile_from_levels, max_totals_from_levels, solve_discrete};
use crate::transform::phi_inverse;
use crate::verifier::{best_response, best_response_discrete, deviation_bound, SCAN_GUARD};

/// One agent's reported level vector, `levels[k-1] = ŝ^K` for K = 1..
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub agent: u32,
    pub levels: Vec<Rational>,
}

impl Report {
    pub fn validate(&self) -> Result<()> {
        let mut prev = Rational::zero();
        for l in &self.levels {
            if l.is_negative() {
                return Err(FairexError::NonMonotoneReport {
                    agent: self.agent,
                    reason: format!("negative level {l}"),
                });
            }
            if *l < prev {
                return Err(FairexError::NonMonotoneReport {
                    agent: self.agent,
                    reason: format!("levels decrease ({prev} then {l})"),
                });
            }
            prev = l.clone();
        }
        Ok(())
    }
}

/// Number of levels agent `i` reports: n on complete graphs, degree + 1 on
/// restricted ones.
pub fn report_len(inst: &Instance, i: usize) -> usize {
    if inst.is_complete() {
        inst.n()
    } else {
        inst.degree(i) + 1
    }
}

/// The truthful report profile computed from the agents' own curves.
pub fn truthful_reports(inst: &Instance) -> Vec<Report> {
    inst.agents()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let lv = AgentLevels::new(a);
            Report {
                agent: a.id,
                levels: (1..=report_len(inst, i)).map(|k| lv.max_level(k).clone()).collect(),
            }
        })
        .collect()
}

fn report_vectors(inst: &Instance, reports: &[Report]) -> Result<Vec<Vec<Rational>>> {
    if reports.len() != inst.n() {
        return Err(FairexError::DimensionMismatch {
            expected: inst.n(),
            got: reports.len(),
        });
    }
    let mut vectors: Vec<Option<Vec<Rational>>> = vec![None; inst.n()];
    for r in reports {
        r.validate()?;
        let pos = inst
            .agents()
            .iter()
            .position(|a| a.id == r.agent)
            .ok_or_else(|| FairexError::InvalidInstance(format!("report from unknown agent {}", r.agent)))?;
        let need = report_len(inst, pos);
        if r.levels.len() < need {
            return Err(FairexError::DimensionMismatch {
                expected: need,
                got: r.levels.len(),
            });
        }
        if vectors[pos].replace(r.levels.clone()).is_some() {
            return Err(FairexError::InvalidInstance(format!(
                "duplicate report from agent {}",
                r.agent
            )));
        }
    }
    Ok(vectors.into_iter().map(|v| v.unwrap()).collect())
}

/// Runs the maximal-equilibrium construction on the reported levels (true
/// curves are not consulted) and returns the recommended collection profile.
///
/// Discrete instances rebuild each reporter's curve canonically from its
/// levels and run the discrete solver on it.
pub fn recommend(inst: &Instance, reports: &[Report]) -> Result<CollectionProfile> {
    let vectors = report_vectors(inst, reports)?;
    match inst.mode() {
        Mode::Continuous => {
            if inst.is_complete() {
                let t = max_totals_from_levels(&vectors)?;
                phi_inverse(&t)
            } else {
                graph_profile_from_levels(inst, &vectors)
            }
        }
        Mode::Discrete => {
            let agents = inst
                .agents()
                .iter()
                .zip(&vectors)
                .map(|(a, v)| {
                    Ok(crate::model::AgentSpec::new(
                        a.id,
                        a.cost.clone(),
                        BenefitFunction::from_levels(&a.cost, v)?,
                    )?)
                })
                .collect::<Result<Vec<_>>>()?;
            let synthetic = Instance::new(agents, None, Mode::Discrete)?;
            Ok(solve_discrete(&synthetic)?.x)
        }
    }
}

/// Enforcement regime of the exchange stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    /// Model 1: the recommendation is enforced exactly.
    Full,
    /// Model 2: the recommendation is a participation threshold and a cap.
    Threshold,
    /// Model 3: recommendation only; fair exchange applies to submissions.
    RecommendOnly,
}

impl Model {
    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Model::Full),
            2 => Ok(Model::Threshold),
            3 => Ok(Model::RecommendOnly),
            other => Err(FairexError::Parse(format!("model must be 1, 2, or 3, got {other}"))),
        }
    }

    pub fn number(&self) -> u8 {
        match self {
            Model::Full => 1,
            Model::Threshold => 2,
            Model::RecommendOnly => 3,
        }
    }
}

/// Realized outcome: what was recommended, what was submitted, and each
/// agent's true utility under the model's exchange rule.
#[derive(Debug, Clone)]
pub struct MechanismOutcome {
    pub model: Model,
    pub recommended: CollectionProfile,
    pub submitted: CollectionProfile,
    pub utilities: Vec<Rational>,
}

/// Applies the exchange-stage rules of the chosen model.
///
/// Model 2 excludes agents submitting below their recommendation from the
/// exchange entirely (no inflow, no outflow); participants are credited
/// exactly their recommendation, surplus submissions stay private, and the
/// optimal further outside top-up is folded in through the closure `v_i`.
pub fn realize(
    model: Model,
    inst: &Instance,
    recommended: &CollectionProfile,
    submitted: &CollectionProfile,
) -> Result<MechanismOutcome> {
    for p in [recommended, submitted] {
        if p.len() != inst.n() {
            return Err(FairexError::DimensionMismatch {
                expected: inst.n(),
                got: p.len(),
            });
        }
    }
    let submitted = match model {
        Model::Full => recommended.clone(),
        _ => submitted.clone(),
    };
    let utilities: Vec<Rational> = match model {
        Model::Full => (0..inst.n())
            .map(|i| utility(inst, recommended, i))
            .collect::<Result<_>>()?,
        Model::RecommendOnly => (0..inst.n())
            .map(|i| utility(inst, &submitted, i))
            .collect::<Result<_>>()?,
        Model::Threshold => {
            let participates: Vec<bool> = (0..inst.n())
                .map(|i| submitted.get(i) >= recommended.get(i))
                .collect();
            (0..inst.n())
                .map(|i| {
                    let agent = inst.agent(i);
                    let total = if participates[i] {
                        let mut t = submitted.get(i).clone();
                        inst.for_each_neighbor(i, |j| {
                            if participates[j] {
                                t += recommended.get(i).min(recommended.get(j));
                            }
                        });
                        t
                    } else {
                        submitted.get(i).clone()
                    };
                    Ok(outside_closure(agent, &total)? - &agent.cost * submitted.get(i))
                })
                .collect::<Result<_>>()?
        }
    };
    Ok(MechanismOutcome {
        model,
        recommended: recommended.clone(),
        submitted,
        utilities,
    })
}

/// A successful manipulation found by an audit.
#[derive(Debug, Clone)]
pub struct ExploitRecord {
    pub agent: usize,
    pub misreport: Vec<Rational>,
    pub truthful_utility: Rational,
    pub exploit_utility: Rational,
    pub gain: Rational,
    /// The deviator's exchange-stage submission (Model 3 only).
    pub submitted: Option<Rational>,
}

/// True payoff of agent `i` when the mechanism runs on the given reports and
/// everyone follows the protocol of the model.
fn protocol_utility(inst: &Instance, model: Model, reports: &[Report], i: usize) -> Result<Rational> {
    let rec = recommend(inst, reports)?;
    match model {
        Model::Full | Model::RecommendOnly => utility(inst, &rec, i),
        Model::Threshold => {
            let agent = inst.agent(i);
            let participating =
                outside_closure(agent, &total_for_agent(inst, &rec, i))? - &agent.cost * rec.get(i);
            // Opting out entirely: collect alone, optimally.
            let alone = outside_closure(agent, &Rational::zero())?;
            Ok(participating.max(alone))
        }
    }
}

/// Monotone (nondecreasing) vectors of the given length over a sorted
/// candidate list, visited in lexicographic index order.
struct MonotoneVectors<'a> {
    candidates: &'a [Rational],
    idx: Vec<usize>,
    done: bool,
}

impl<'a> MonotoneVectors<'a> {
    fn new(candidates: &'a [Rational], len: usize) -> Self {
        Self {
            candidates,
            idx: vec![0; len],
            done: candidates.is_empty() || len == 0,
        }
    }

    fn count(n_candidates: u128, len: u32) -> u128 {
        // C(n + len - 1, len), saturating.
        let mut acc: u128 = 1;
        for j in 0..len as u128 {
            acc = match acc.checked_mul(n_candidates + j) {
                Some(v) => v / (j + 1),
                None => return u128::MAX,
            };
        }
        acc
    }
}

impl Iterator for MonotoneVectors<'_> {
    type Item = Vec<Rational>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let out = self.idx.iter().map(|&c| self.candidates[c].clone()).collect();
        // Advance: bump the rightmost position that can grow, then level the
        // tail with it to keep the vector nondecreasing.
        let mut pos = self.idx.len();
        loop {
            if pos == 0 {
                self.done = true;
                break;
            }
            pos -= 1;
            if self.idx[pos] + 1 < self.candidates.len() {
                let v = self.idx[pos] + 1;
                for p in pos..self.idx.len() {
                    self.idx[p] = v;
                }
                break;
            }
        }
        Some(out)
    }
}

fn misreport_candidates(inst: &Instance, grid: &Rational) -> Vec<Rational> {
    let mut set: std::collections::BTreeSet<Rational> = std::collections::BTreeSet::new();
    let truthful = truthful_reports(inst);
    let bound = truthful
        .iter()
        .flat_map(|r| r.levels.iter())
        .max()
        .cloned()
        .unwrap_or_else(Rational::zero);
    let mut v = Rational::zero();
    while v <= bound {
        set.insert(v.clone());
        v += grid;
    }
    for r in &truthful {
        for l in &r.levels {
            set.insert(l.clone());
        }
    }
    set.into_iter().collect()
}

fn check_audit_guard(inst: &Instance, candidates: usize) -> Result<()> {
    let longest = (0..inst.n()).map(|i| report_len(inst, i)).max().unwrap_or(0);
    let per_agent = MonotoneVectors::count(candidates as u128, longest as u32);
    let needed = per_agent.saturating_mul(inst.n() as u128);
    if needed > SCAN_GUARD {
        return Err(FairexError::GuardExceeded {
            needed,
            limit: SCAN_GUARD,
        });
    }
    Ok(())
}

/// Searches the kink-augmented misreport grid for a report that strictly
/// beats truth-telling under Models 1 or 2; `None` means the audit is clean.
/// The best exploit (largest gain, first in enumeration order on ties) is
/// returned otherwise.
pub fn audit_truthfulness(
    inst: &Instance,
    model: Model,
    grid: &Rational,
) -> Result<Option<ExploitRecord>> {
    if model == Model::RecommendOnly {
        return Err(FairexError::Parse(
            "model 3 has no truthfulness guarantee; run the exploit search".into(),
        ));
    }
    if grid <= &Rational::zero() {
        return Err(FairexError::BadGridStep(grid.to_string()));
    }
    if model == Model::Threshold && inst.mode() == Mode::Discrete {
        return Err(FairexError::WrongMode {
            expected: "continuous",
            got: "discrete",
            hint: "threshold-model audits require continuous outside collection",
        });
    }
    let candidates = misreport_candidates(inst, grid);
    check_audit_guard(inst, candidates.len())?;
    let truthful = truthful_reports(inst);
    let mut best: Option<ExploitRecord> = None;
    for i in 0..inst.n() {
        let baseline = protocol_utility(inst, model, &truthful, i)?;
        for mis in MonotoneVectors::new(&candidates, truthful[i].levels.len()) {
            let mut reports = truthful.clone();
            reports[i].levels = mis.clone();
            let u = protocol_utility(inst, model, &reports, i)?;
            if u > baseline {
                let gain = &u - &baseline;
                if best.as_ref().map_or(true, |b| gain > b.gain) {
                    best = Some(ExploitRecord {
                        agent: i,
                        misreport: mis,
                        truthful_utility: baseline.clone(),
                        exploit_utility: u,
                        gain,
                        submitted: None,
                    });
                }
            }
        }
    }
    Ok(best)
}

/// Model 3 two-stage exploit search: the deviator misreports, everyone else
/// submits the recommendation, and the deviator submits its true best
/// response. Returns the best strict exploit found.
pub fn model3_exploit_search(inst: &Instance, grid: &Rational) -> Result<Option<ExploitRecord>> {
    if grid <= &Rational::zero() {
        return Err(FairexError::BadGridStep(grid.to_string()));
    }
    let candidates = misreport_candidates(inst, grid);
    check_audit_guard(inst, candidates.len())?;
    let truthful = truthful_reports(inst);
    let mut best: Option<ExploitRecord> = None;
    for i in 0..inst.n() {
        let baseline = protocol_utility(inst, Model::RecommendOnly, &truthful, i)?;
        for mis in MonotoneVectors::new(&candidates, truthful[i].levels.len()) {
            let mut reports = truthful.clone();
            reports[i].levels = mis.clone();
            let rec = recommend(inst, &reports)?;
            let br = match inst.mode() {
                Mode::Continuous => best_response(inst, &rec, i),
                Mode::Discrete => {
                    let levels: Vec<AgentLevels> =
                        inst.agents().iter().map(AgentLevels::new).collect();
                    let top = deviation_bound(inst, &rec, &levels)
                        .ceil()
                        .to_integer()
                        .to_i64()
                        .unwrap_or(i64::MAX);
                    best_response_discrete(inst, &rec, i, top)?
                }
            };
            let u = utility(inst, &rec.with(i, br.clone()), i)?;
            if u > baseline {
                let gain = &u - &baseline;
                if best.as_ref().map_or(true, |b| gain > b.gain) {
                    best = Some(ExploitRecord {
                        agent: i,
                        misreport: mis,
                        truthful_utility: baseline.clone(),
                        exploit_utility: u,
                        gain,
                        submitted: Some(br),
                    });
                }
            }
        }
    }
    Ok(best)
}

/// Recommended totals under the reported levels (complete graph), exposed for
/// report inspection.
pub fn recommended_totals(inst: &Instance, reports: &[Report]) -> Result<TotalProfile> {
    let vectors = report_vectors(inst, reports)?;
    if inst.is_complete() && inst.mode() == Mode::Continuous {
        max_totals_from_levels(&vectors)
    } else {
        let x = recommend(inst, reports)?;
        crate::model::total_data(inst, &x)
    }
}
