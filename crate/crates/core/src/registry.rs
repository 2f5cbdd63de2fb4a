//! Pinned, named instances with certified expectations.
//!
//! Every entry bundles an instance with checkable claims; nothing stored here
//! is trusted — `Expectation::verify` recomputes each claim from scratch
//! through the solvers, verifier, and mechanism on every run.
//!
//! Step-shaped utilities are modeled by concave surrogates whose cap value
//! equals the step height at the threshold, which reproduces all pinned
//! payoff numbers exactly. Small-ε constructions instantiate ε = 1/1000.

use crate::error::{FairexError, Result};
use crate::mechanism::{self, Model};
use crate::model::{
    utility, AgentSpec, BenefitFunction, CollectionProfile, Instance, Mode,
};
use crate::rational::{rat, rint, Rational};
use crate::verifier::{
    best_response, best_response_discrete, check_local_conditions, deviation_oracle,
};

/// A checkable claim about a named instance.
#[derive(Debug, Clone)]
pub enum Expectation {
    /// `solve_max` returns exactly this collection profile.
    MaxEquilibrium { x: Vec<Rational> },
    /// `solve_discrete` returns exactly this collection profile.
    DiscreteEquilibrium { x: Vec<Rational> },
    /// The profile survives the deviation oracle (and the local-condition
    /// check when continuous).
    CertifiedEquilibrium { x: Vec<Rational> },
    /// The oracle refutes the profile with this exact best deviation.
    NotEquilibrium {
        x: Vec<Rational>,
        witness_agent: usize,
        witness_to: Rational,
        witness_gain: Rational,
    },
    /// Exact best response of one agent to a fixed profile.
    BestResponse {
        agent: usize,
        profile: Vec<Rational>,
        expected: Rational,
    },
    /// Mechanism recommendation under given reports (`None` = truthful).
    Recommendation {
        reports: Vec<Option<Vec<Rational>>>,
        x: Vec<Rational>,
    },
    /// Model-1 utility of an agent under truthful reports.
    TruthfulUtility { agent: usize, utility: Rational },
    /// Truthfulness audit comes back clean at this grid.
    AuditClean { model: u8, grid: Rational },
    /// The Model-3 two-stage search finds exactly this exploit.
    Model3Exploit {
        agent: usize,
        exploit_utility: Rational,
        gain: Rational,
    },
    /// Two certified profiles whose utility vectors are incomparable.
    IncomparableUtilities {
        a: Vec<Rational>,
        b: Vec<Rational>,
    },
}

fn fail(name: &str, msg: String) -> FairexError {
    FairexError::Domain(format!("expectation `{name}` failed: {msg}"))
}

impl Expectation {
    pub fn verify(&self, inst: &Instance) -> Result<()> {
        match self {
            Expectation::MaxEquilibrium { x } => {
                let r = crate::solver::solve_max(inst)?;
                if r.x.values() != x.as_slice() {
                    return Err(fail("max-equilibrium", format!("got {:?}", r.x.values())));
                }
                Ok(())
            }
            Expectation::DiscreteEquilibrium { x } => {
                let r = crate::solver::solve_discrete(inst)?;
                if r.x.values() != x.as_slice() {
                    return Err(fail("discrete-equilibrium", format!("got {:?}", r.x.values())));
                }
                Ok(())
            }
            Expectation::CertifiedEquilibrium { x } => {
                let p = CollectionProfile::for_instance(inst, x.clone())?;
                let grid = oracle_grid(inst);
                if let Some(w) = deviation_oracle(inst, &p, &grid)? {
                    return Err(fail("certified-equilibrium", format!("witness {w:?}")));
                }
                if inst.mode() == Mode::Continuous && !check_local_conditions(inst, &p)?.pass {
                    return Err(fail("certified-equilibrium", "local conditions fail".into()));
                }
                Ok(())
            }
            Expectation::NotEquilibrium {
                x,
                witness_agent,
                witness_to,
                witness_gain,
            } => {
                let p = CollectionProfile::for_instance(inst, x.clone())?;
                let grid = oracle_grid(inst);
                match deviation_oracle(inst, &p, &grid)? {
                    Some(w) if w.agent == *witness_agent && &w.to == witness_to && &w.gain == witness_gain => Ok(()),
                    other => Err(fail("not-equilibrium", format!("got {other:?}"))),
                }
            }
            Expectation::BestResponse {
                agent,
                profile,
                expected,
            } => {
                let p = CollectionProfile::for_instance(inst, profile.clone())?;
                let br = match inst.mode() {
                    Mode::Continuous => best_response(inst, &p, *agent),
                    Mode::Discrete => best_response_discrete(inst, &p, *agent, 200)?,
                };
                if &br != expected {
                    return Err(fail("best-response", format!("got {br}, want {expected}")));
                }
                Ok(())
            }
            Expectation::Recommendation { reports, x } => {
                let mut rs = mechanism::truthful_reports(inst);
                for (i, override_levels) in reports.iter().enumerate() {
                    if let Some(levels) = override_levels {
                        rs[i].levels = levels.clone();
                    }
                }
                let rec = mechanism::recommend(inst, &rs)?;
                if rec.values() != x.as_slice() {
                    return Err(fail("recommendation", format!("got {:?}", rec.values())));
                }
                Ok(())
            }
            Expectation::TruthfulUtility { agent, utility: want } => {
                let rs = mechanism::truthful_reports(inst);
                let rec = mechanism::recommend(inst, &rs)?;
                let out = mechanism::realize(Model::Full, inst, &rec, &rec)?;
                if &out.utilities[*agent] != want {
                    return Err(fail(
                        "truthful-utility",
                        format!("got {}", out.utilities[*agent]),
                    ));
                }
                Ok(())
            }
            Expectation::AuditClean { model, grid } => {
                match mechanism::audit_truthfulness(inst, Model::from_number(*model)?, grid)? {
                    None => Ok(()),
                    Some(e) => Err(fail("audit-clean", format!("exploit {e:?}"))),
                }
            }
            Expectation::Model3Exploit {
                agent,
                exploit_utility,
                gain,
            } => match mechanism::model3_exploit_search(inst, &rat(1, 2))? {
                Some(e) if e.agent == *agent && &e.exploit_utility == exploit_utility && &e.gain == gain => {
                    Ok(())
                }
                other => Err(fail("model3-exploit", format!("got {other:?}"))),
            },
            Expectation::IncomparableUtilities { a, b } => {
                let pa = CollectionProfile::for_instance(inst, a.clone())?;
                let pb = CollectionProfile::for_instance(inst, b.clone())?;
                let ua: Vec<Rational> = (0..inst.n())
                    .map(|i| utility(inst, &pa, i))
                    .collect::<Result<_>>()?;
                let ub: Vec<Rational> = (0..inst.n())
                    .map(|i| utility(inst, &pb, i))
                    .collect::<Result<_>>()?;
                let a_wins = ua.iter().zip(&ub).any(|(x, y)| x > y);
                let b_wins = ua.iter().zip(&ub).any(|(x, y)| x < y);
                if a_wins && b_wins {
                    Ok(())
                } else {
                    Err(fail(
                        "incomparable-utilities",
                        format!("vectors are comparable: {ua:?} vs {ub:?}"),
                    ))
                }
            }
        }
    }
}

fn oracle_grid(inst: &Instance) -> Rational {
    match inst.mode() {
        Mode::Continuous => rat(1, 8),
        Mode::Discrete => rint(1),
    }
}

/// A pinned instance, its provenance note, profiles worth exporting, and the
/// claims that re-verify on every run.
#[derive(Debug, Clone)]
pub struct NamedExample {
    pub name: &'static str,
    pub note: &'static str,
    pub instance: Instance,
    pub pinned_profiles: Vec<(String, Vec<Rational>)>,
    pub expectations: Vec<Expectation>,
}

pub const EXAMPLE_NAMES: &[&str] = &[
    "model3_counterexample",
    "collection_space_not_supermodular",
    "discrete_nonmonotone_br",
    "discrete_incomparable",
    "graph_incomparable_derived",
];

pub fn example_names() -> &'static [&'static str] {
    EXAMPLE_NAMES
}

fn cap_agent(id: u32, cost: Rational, slope: Rational, cap_at: Rational) -> AgentSpec {
    AgentSpec::new(
        id,
        cost,
        BenefitFunction::new(vec![(rint(0), slope), (cap_at, rint(0))]).unwrap(),
    )
    .unwrap()
}

fn eps() -> Rational {
    rat(1, 1000)
}

fn model3_counterexample() -> NamedExample {
    let instance = Instance::new(
        vec![
            cap_agent(1, rint(1), rint(10), rint(10)),
            cap_agent(2, rint(1), rat(5, 2), rint(8)),
        ],
        None,
        Mode::Continuous,
    )
    .unwrap();
    NamedExample {
        name: "model3_counterexample",
        note: "Two agents with threshold-style demands (caps 10 and 8, unit costs). \
               Enforced models are truthful; recommendation-only is exploitable by \
               understating demand: the recommendation flips from (6,4) to (0,8) and \
               the deviator best-responds with 5 for utility 95 over the truthful 94.",
        instance,
        pinned_profiles: vec![
            ("truthful_recommendation".into(), vec![rint(6), rint(4)]),
            ("zero_misreport_recommendation".into(), vec![rint(0), rint(8)]),
        ],
        expectations: vec![
            Expectation::Recommendation {
                reports: vec![None, None],
                x: vec![rint(6), rint(4)],
            },
            Expectation::Recommendation {
                reports: vec![Some(vec![rint(0), rint(0)]), None],
                x: vec![rint(0), rint(8)],
            },
            Expectation::TruthfulUtility {
                agent: 0,
                utility: rint(94),
            },
            Expectation::AuditClean {
                model: 1,
                grid: rat(1, 2),
            },
            Expectation::AuditClean {
                model: 2,
                grid: rat(1, 2),
            },
            Expectation::Model3Exploit {
                agent: 0,
                exploit_utility: rint(95),
                gain: rint(1),
            },
            Expectation::MaxEquilibrium {
                x: vec![rint(6), rint(4)],
            },
            Expectation::CertifiedEquilibrium {
                x: vec![rint(6), rint(4)],
            },
        ],
    }
}

fn collection_space_not_supermodular() -> NamedExample {
    let slope = rint(1) + eps();
    let instance = Instance::new(
        vec![
            cap_agent(1, rint(1), slope.clone(), rint(10)),
            cap_agent(2, rint(1), slope, rint(10)),
        ],
        None,
        Mode::Continuous,
    )
    .unwrap();
    NamedExample {
        name: "collection_space_not_supermodular",
        note: "Agent 1 wants 10 total units. Its best response to a partner collecting 5 \
               is 5, but to a partner collecting 0 it is 10: best responses decrease when \
               the opponent collects more, so the game is not supermodular in collection \
               space.",
        instance,
        pinned_profiles: vec![
            ("br_to_five".into(), vec![rint(5), rint(5)]),
            ("br_to_zero".into(), vec![rint(10), rint(0)]),
        ],
        expectations: vec![
            Expectation::BestResponse {
                agent: 0,
                profile: vec![rint(0), rint(5)],
                expected: rint(5),
            },
            Expectation::BestResponse {
                agent: 0,
                profile: vec![rint(0), rint(0)],
                expected: rint(10),
            },
            Expectation::CertifiedEquilibrium {
                x: vec![rint(5), rint(5)],
            },
        ],
    }
}

fn discrete_nonmonotone_br() -> NamedExample {
    let zero = BenefitFunction::new(vec![(rint(0), rint(0))]).unwrap();
    let instance = Instance::new(
        vec![
            cap_agent(1, rint(1), rint(1) + eps(), rint(11)),
            AgentSpec::new(2, rint(1), zero.clone()).unwrap(),
            AgentSpec::new(3, rint(1), zero).unwrap(),
        ],
        None,
        Mode::Discrete,
    )
    .unwrap();
    NamedExample {
        name: "discrete_nonmonotone_br",
        note: "Integer strategies break monotone best responses: against opponents at \
               (0,6) agent 1 collects 6 (total 12, overshooting its threshold 11); when \
               the opponents rise to (1,7) it collects only 5 (total exactly 11).",
        instance,
        pinned_profiles: vec![
            ("low_opponents".into(), vec![rint(6), rint(0), rint(6)]),
            ("high_opponents".into(), vec![rint(5), rint(1), rint(7)]),
        ],
        expectations: vec![
            Expectation::BestResponse {
                agent: 0,
                profile: vec![rint(0), rint(0), rint(6)],
                expected: rint(6),
            },
            Expectation::BestResponse {
                agent: 0,
                profile: vec![rint(0), rint(1), rint(7)],
                expected: rint(5),
            },
        ],
    }
}

fn discrete_incomparable_instance() -> Instance {
    let e = eps();
    let low = BenefitFunction::new(vec![(rint(0), rat(1, 6)), (rint(6), rint(0))]).unwrap();
    let mid = BenefitFunction::new(vec![(rint(0), rint(1) + &e), (rint(22), rint(0))]).unwrap();
    // The tail slope ε runs to a breakpoint far past every reachable total.
    let hog = BenefitFunction::new(vec![
        (rint(0), rint(1) + &e),
        (rint(117), e),
        (rint(1000), rint(0)),
    ])
    .unwrap();
    Instance::new(
        vec![
            AgentSpec::new(1, rint(1), low.clone()).unwrap(),
            AgentSpec::new(2, rint(1), low).unwrap(),
            AgentSpec::new(3, rint(1), mid.clone()).unwrap(),
            AgentSpec::new(4, rint(1), mid.clone()).unwrap(),
            AgentSpec::new(5, rint(1), mid).unwrap(),
            AgentSpec::new(6, rint(1), hog).unwrap(),
        ],
        None,
        Mode::Discrete,
    )
    .unwrap()
}

fn discrete_incomparable() -> NamedExample {
    // Agent 6's stated level 100 is not its exact best response to
    // (0,0,6,6,6): collecting 99 hits the satiation kink 117 exactly and
    // saves a unit of cost at the price of only ε benefit, so the certified
    // profile pins 99 and the 100-variant carries a deviation witness.
    NamedExample {
        name: "discrete_incomparable",
        note: "Six integer agents with no Pareto-best equilibrium: (1,1,5,5,5,100) favors \
               the three mid agents, (0,0,6,6,6,99) favors the data hog; the two certified \
               equilibria are utility-incomparable. The profile (0,0,6,6,6,100) is not an \
               exact equilibrium: the hog strictly gains by dropping to 99.",
        instance: discrete_incomparable_instance(),
        pinned_profiles: vec![
            (
                "group_equilibrium".into(),
                vec![rint(1), rint(1), rint(5), rint(5), rint(5), rint(100)],
            ),
            (
                "hog_equilibrium_corrected".into(),
                vec![rint(0), rint(0), rint(6), rint(6), rint(6), rint(99)],
            ),
            (
                "hog_profile_printed".into(),
                vec![rint(0), rint(0), rint(6), rint(6), rint(6), rint(100)],
            ),
        ],
        expectations: vec![
            Expectation::DiscreteEquilibrium {
                x: vec![rint(1), rint(1), rint(5), rint(5), rint(5), rint(100)],
            },
            Expectation::CertifiedEquilibrium {
                x: vec![rint(1), rint(1), rint(5), rint(5), rint(5), rint(100)],
            },
            Expectation::CertifiedEquilibrium {
                x: vec![rint(0), rint(0), rint(6), rint(6), rint(6), rint(99)],
            },
            Expectation::NotEquilibrium {
                x: vec![rint(0), rint(0), rint(6), rint(6), rint(6), rint(100)],
                witness_agent: 5,
                witness_to: rint(99),
                witness_gain: rat(999, 1000),
            },
            Expectation::IncomparableUtilities {
                a: vec![rint(1), rint(1), rint(5), rint(5), rint(5), rint(100)],
                b: vec![rint(0), rint(0), rint(6), rint(6), rint(6), rint(99)],
            },
        ],
    }
}

fn graph_incomparable_derived() -> NamedExample {
    // Derived stand-in for the paper's figure-only graph example: a path
    // 1-2-3-4 with an extra leaf 5 on agent 3. Agent 3 has a unit-slope
    // indifference band [8,12) and agent 5 a half-slope band past 6; sliding
    // along those bands trades utility between agents 2 and 3, giving two
    // certified equilibria with incomparable utility vectors.
    let instance = Instance::new(
        vec![
            cap_agent(1, rint(1), rint(2), rint(15)),
            cap_agent(2, rint(1), rint(2), rint(20)),
            AgentSpec::new(
                3,
                rint(1),
                BenefitFunction::new(vec![(rint(0), rint(2)), (rint(8), rint(1)), (rint(12), rint(0))])
                    .unwrap(),
            )
            .unwrap(),
            cap_agent(4, rint(1), rint(2), rint(4)),
            AgentSpec::new(
                5,
                rint(1),
                BenefitFunction::new(vec![(rint(0), rat(3, 4)), (rint(6), rat(1, 2)), (rint(100), rint(0))])
                    .unwrap(),
            )
            .unwrap(),
        ],
        Some(vec![(1, 2), (2, 3), (3, 4), (3, 5)]),
        Mode::Continuous,
    )
    .unwrap();
    let e_a = vec![rat(15, 2), rint(9), rat(7, 2), rint(2), rint(3)];
    let e_b = vec![rat(15, 2), rat(55, 6), rat(10, 3), rint(2), rat(10, 3)];
    NamedExample {
        name: "graph_incomparable_derived",
        note: "Five agents on a path 1-2-3-4 plus leaf 5 on agent 3. Two certified \
               equilibria exist in which agent 3 collects 7/2 or 10/3; agent 2 strictly \
               prefers the first and agent 3 the second, so no Pareto-best equilibrium \
               exists. Derived replacement for the figure-only example whose topology the \
               text does not state.",
        instance,
        pinned_profiles: vec![
            ("equilibrium_a".into(), e_a.clone()),
            ("equilibrium_b".into(), e_b.clone()),
        ],
        expectations: vec![
            Expectation::CertifiedEquilibrium { x: e_a.clone() },
            Expectation::CertifiedEquilibrium { x: e_b.clone() },
            Expectation::IncomparableUtilities { a: e_a, b: e_b },
        ],
    }
}

pub fn load_example(name: &str) -> Result<NamedExample> {
    match name {
        "model3_counterexample" => Ok(model3_counterexample()),
        "collection_space_not_supermodular" => Ok(collection_space_not_supermodular()),
        "discrete_nonmonotone_br" => Ok(discrete_nonmonotone_br()),
        "discrete_incomparable" => Ok(discrete_incomparable()),
        "graph_incomparable_derived" => Ok(graph_incomparable_derived()),
        other => Err(FairexError::UnknownExample(other.to_string())),
    }
}

/// True utility vectors at a pinned profile; used by reports.
pub fn utilities_at(inst: &Instance, x: &[Rational]) -> Result<Vec<Rational>> {
    let p = CollectionProfile::for_instance(inst, x.to_vec())?;
    (0..inst.n()).map(|i| utility(inst, &p, i)).collect()
}
