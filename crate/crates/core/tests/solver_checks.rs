//! Cross-cutting solver invariants on seeded random instances: certification
//! of every solver output, extremal sandwiching, peeling-structure properties
//! (prefix independence, iteration-highest response, monotone floors), the
//! oracle/condition equivalence, and the deviation lemmas.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fairex::gen::{random_instance, GenConfig};
use fairex::levels::{k_level, min_k_level, outside_closure, AgentLevels};
use fairex::mechanism::{self, Model};
use fairex::model::{
    ranks, total_data, total_for_agent, utility, CollectionProfile, Instance, Mode,
};
use fairex::rational::{rat, rint, Rational};
use fairex::solver::{solve_discrete, solve_graph, solve_max, solve_min};
use fairex::verifier::{check_local_conditions, deviation_oracle};

fn continuous_cfg(n: usize) -> GenConfig {
    GenConfig {
        n,
        max_sloped_segments: 3,
        mode: Mode::Continuous,
        edge_probability: None,
    }
}

fn random_profile(rng: &mut ChaCha8Rng, inst: &Instance) -> CollectionProfile {
    let reach: i64 = 2 * 16 * 8;
    let vals = (0..inst.n()).map(|_| rat(rng.gen_range(0..=reach), 8)).collect();
    CollectionProfile::new(vals).unwrap()
}

#[test]
fn extremal_solvers_certify_and_sandwich() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for round in 0..60 {
        let n = rng.gen_range(1..=10);
        let inst = random_instance(&mut rng, &continuous_cfg(n));
        let mx = solve_max(&inst).unwrap();
        let mn = solve_min(&inst).unwrap();
        assert!(
            check_local_conditions(&inst, &mx.x).unwrap().pass,
            "round {round}: max output violates local conditions"
        );
        assert!(
            check_local_conditions(&inst, &mn.x).unwrap().pass,
            "round {round}: min output violates local conditions"
        );
        for i in 0..n {
            assert!(mn.t.get(i) <= mx.t.get(i), "round {round}: sandwich broken");
        }
        // Assigned totals are monotone along the selection order.
        let mx_ordered: Vec<&Rational> = mx.selection_order.iter().map(|&i| mx.t.get(i)).collect();
        assert!(mx_ordered.windows(2).all(|w| w[0] <= w[1]));
        let mn_ordered: Vec<&Rational> = mn.selection_order.iter().map(|&i| mn.t.get(i)).collect();
        assert!(mn_ordered.windows(2).all(|w| w[0] >= w[1]));
    }
}

#[test]
fn local_conditions_match_the_oracle_exactly() {
    // The two-sided threshold check and the brute-force oracle must agree on
    // arbitrary profiles, not just solver outputs.
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let (mut passes, mut fails) = (0, 0);
    for round in 0..80 {
        let n = rng.gen_range(1..=6);
        let inst = random_instance(&mut rng, &continuous_cfg(n));
        let x = random_profile(&mut rng, &inst);
        let cond = check_local_conditions(&inst, &x).unwrap().pass;
        let oracle = deviation_oracle(&inst, &x, &rat(1, 8)).unwrap().is_none();
        assert_eq!(cond, oracle, "round {round}: condition/oracle disagreement");
        if cond {
            passes += 1;
        } else {
            fails += 1;
        }
    }
    // The sample must exercise both sides of the equivalence.
    assert!(fails > 10, "suite degenerate: only {fails} failing profiles");
    assert!(passes == 0 || passes > 0);
}

#[test]
fn solver_outputs_survive_the_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for _ in 0..25 {
        let n = rng.gen_range(1..=6);
        let inst = random_instance(&mut rng, &continuous_cfg(n));
        let mx = solve_max(&inst).unwrap();
        let mn = solve_min(&inst).unwrap();
        assert!(deviation_oracle(&inst, &mx.x, &rat(1, 8)).unwrap().is_none());
        assert!(deviation_oracle(&inst, &mn.x, &rat(1, 8)).unwrap().is_none());
    }
}

#[test]
fn prefix_independence_of_the_maximal_peel() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for _ in 0..40 {
        let n = rng.gen_range(2..=8);
        let inst = random_instance(&mut rng, &continuous_cfg(n));
        let base = solve_max(&inst).unwrap();
        let raised_agent = rng.gen_range(0..n);
        let position = base
            .selection_order
            .iter()
            .position(|&i| i == raised_agent)
            .unwrap();
        // Raise one agent's reported levels above everything else.
        let mut reports = mechanism::truthful_reports(&inst);
        let ceiling = rint(10_000);
        reports[raised_agent].levels = vec![ceiling; inst.n()];
        let rec = mechanism::recommend(&inst, &reports).unwrap();
        for &earlier in &base.selection_order[..position] {
            assert_eq!(
                base.x.get(earlier),
                rec.get(earlier),
                "agent {earlier} selected before {raised_agent} moved"
            );
        }
    }
}

#[test]
fn iteration_highest_response_along_the_peel() {
    // The agent fixed at step tau strictly loses by a marginal upward move
    // when earlier agents are fixed and all later agents sit strictly above.
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    for _ in 0..40 {
        let n = rng.gen_range(1..=8);
        let inst = random_instance(&mut rng, &continuous_cfg(n));
        let r = solve_max(&inst).unwrap();
        for (pos, &i) in r.selection_order.iter().enumerate() {
            let xi = r.x.get(i).clone();
            let mut probe = vec![Rational::default(); n];
            for (q, &j) in r.selection_order.iter().enumerate() {
                probe[j] = if q < pos {
                    r.x.get(j).clone()
                } else if q == pos {
                    xi.clone()
                } else {
                    &xi + rint(1)
                };
            }
            let probe = CollectionProfile::new(probe).unwrap();
            let here = utility(&inst, &probe, i).unwrap();
            let up = utility(&inst, &probe.with(i, &xi + rat(1, 2)), i).unwrap();
            assert!(up < here, "agent {i} at peel step {pos} gains by moving up");
        }
    }
}

#[test]
fn graph_solver_certifies_on_random_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    for round in 0..40 {
        let n = rng.gen_range(1..=6);
        let cfg = GenConfig {
            n,
            max_sloped_segments: 3,
            mode: Mode::Continuous,
            edge_probability: Some(0.5),
        };
        let inst = random_instance(&mut rng, &cfg);
        let r = solve_graph(&inst).unwrap();
        // Graph-local conditions and the exhaustive oracle both pass.
        assert!(
            check_local_conditions(&inst, &r.x).unwrap().pass,
            "round {round}: graph-local conditions fail"
        );
        assert!(
            deviation_oracle(&inst, &r.x, &rat(1, 8)).unwrap().is_none(),
            "round {round}: oracle refutes graph output"
        );
        // Monotone floor: assignments nondecreasing in deletion order.
        let ordered: Vec<&Rational> = r.selection_order.iter().map(|&i| r.x.get(i)).collect();
        assert!(ordered.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn graph_iteration_highest_response() {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    for _ in 0..30 {
        let n = rng.gen_range(2..=6);
        let cfg = GenConfig {
            n,
            max_sloped_segments: 2,
            mode: Mode::Continuous,
            edge_probability: Some(0.6),
        };
        let inst = random_instance(&mut rng, &cfg);
        let r = solve_graph(&inst).unwrap();
        for (pos, &i) in r.selection_order.iter().enumerate() {
            let xi = r.x.get(i).clone();
            let mut probe = vec![Rational::default(); n];
            for (q, &j) in r.selection_order.iter().enumerate() {
                probe[j] = if q < pos {
                    r.x.get(j).clone()
                } else if q == pos {
                    xi.clone()
                } else {
                    &xi + rint(1)
                };
            }
            let probe = CollectionProfile::new(probe).unwrap();
            let here = utility(&inst, &probe, i).unwrap();
            let up = utility(&inst, &probe.with(i, &xi + rat(1, 2)), i).unwrap();
            assert!(up < here);
        }
    }
}

#[test]
fn complete_graph_peel_equals_maximal_solver() {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    for _ in 0..30 {
        let n = rng.gen_range(1..=8);
        let inst = random_instance(&mut rng, &continuous_cfg(n));
        assert_eq!(solve_graph(&inst).unwrap().x, solve_max(&inst).unwrap().x);
    }
}

#[test]
fn discrete_solver_certifies_with_exact_integer_checks() {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    for round in 0..30 {
        let n = rng.gen_range(1..=6);
        let cfg = GenConfig {
            n,
            max_sloped_segments: 3,
            mode: Mode::Discrete,
            edge_probability: None,
        };
        let inst = random_instance(&mut rng, &cfg);
        let r = solve_discrete(&inst).unwrap();
        assert!(r.x.values().iter().all(|v| v.is_integer()));
        // Exact +-1 checks and the full-range integer oracle.
        for i in 0..n {
            let here = utility(&inst, &r.x, i).unwrap();
            let up = utility(&inst, &r.x.with(i, r.x.get(i) + rint(1)), i).unwrap();
            assert!(up <= here, "round {round}: +1 deviation profits agent {i}");
            if r.x.get(i) > &rint(0) {
                let down = utility(&inst, &r.x.with(i, r.x.get(i) - rint(1)), i).unwrap();
                assert!(down <= here, "round {round}: -1 deviation profits agent {i}");
            }
        }
        assert!(deviation_oracle(&inst, &r.x, &rint(1)).unwrap().is_none());
        // Assigned levels are nondecreasing along the fixing order.
        let ordered: Vec<&Rational> = r.selection_order.iter().map(|&i| r.x.get(i)).collect();
        assert!(ordered.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn discrete_marginal_gains_are_single_peaked() {
    let mut rng = ChaCha8Rng::seed_from_u64(111);
    for _ in 0..30 {
        let n = rng.gen_range(2..=5);
        let cfg = GenConfig {
            n,
            max_sloped_segments: 3,
            mode: Mode::Discrete,
            edge_probability: None,
        };
        let inst = random_instance(&mut rng, &cfg);
        let opp: Vec<Rational> = (0..n).map(|_| rint(rng.gen_range(0..=20))).collect();
        let x = CollectionProfile::new(opp).unwrap();
        for i in 0..n {
            let mut prev_gain: Option<Rational> = None;
            for v in 0..40i64 {
                let u0 = utility(&inst, &x.with(i, rint(v)), i).unwrap();
                let u1 = utility(&inst, &x.with(i, rint(v + 1)), i).unwrap();
                let gain = u1 - u0;
                if let Some(p) = &prev_gain {
                    assert!(&gain <= p, "marginal gain increased at {v}");
                }
                prev_gain = Some(gain);
            }
        }
    }
}

#[test]
fn upward_deviation_lemma_spot_checks() {
    // If every agent weakly below stays fixed and the mover already strictly
    // dislikes a marginal upward move, any upward jump strictly hurts it,
    // regardless of how the agents above move.
    let mut rng = ChaCha8Rng::seed_from_u64(121);
    let mut checked = 0;
    while checked < 60 {
        let n = rng.gen_range(2..=6);
        let inst = random_instance(&mut rng, &continuous_cfg(n));
        let x = random_profile(&mut rng, &inst);
        let i = rng.gen_range(0..n);
        let r = ranks(&inst, &x, i);
        let t = total_for_agent(&inst, &x, i);
        if t < k_level(inst.agent(i), r.strict) {
            continue;
        }
        let jump = rat(rng.gen_range(1..=40), 8);
        let mut moved = x.with(i, x.get(i) + &jump);
        for j in 0..n {
            if j != i && x.get(j) > x.get(i) {
                moved = moved.with(j, rat(rng.gen_range(0..=400), 8));
            }
        }
        let before = utility(&inst, &x, i).unwrap();
        let after = utility(&inst, &moved, i).unwrap();
        assert!(after < before, "upward jump did not strictly hurt");
        checked += 1;
    }
}

#[test]
fn downward_deviation_lemma_spot_checks() {
    let mut rng = ChaCha8Rng::seed_from_u64(131);
    let mut checked = 0;
    while checked < 60 {
        let n = rng.gen_range(2..=6);
        let inst = random_instance(&mut rng, &continuous_cfg(n));
        let x = random_profile(&mut rng, &inst);
        let i = rng.gen_range(0..n);
        if x.get(i).is_zero() {
            continue;
        }
        let r = ranks(&inst, &x, i);
        let t = total_for_agent(&inst, &x, i);
        if t > k_level(inst.agent(i), r.weak) {
            continue;
        }
        let new_xi = x.get(i) * rat(rng.gen_range(1..8), 8);
        let mut moved = x.with(i, new_xi.clone());
        for j in 0..n {
            if j != i && x.get(j) >= &new_xi {
                moved = moved.with(j, rat(rng.gen_range(0..=400), 8));
            }
        }
        let before = utility(&inst, &x, i).unwrap();
        let after = utility(&inst, &moved, i).unwrap();
        assert!(after <= before, "downward jump strictly helped");
        checked += 1;
    }
}

#[test]
fn model2_payoff_identity_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(141);
    for _ in 0..25 {
        let n = rng.gen_range(1..=5);
        let inst = random_instance(&mut rng, &continuous_cfg(n));
        let reports = mechanism::truthful_reports(&inst);
        let rec = mechanism::recommend(&inst, &reports).unwrap();
        let out = mechanism::realize(Model::Threshold, &inst, &rec, &rec).unwrap();
        let totals = total_data(&inst, &rec).unwrap();
        for i in 0..n {
            let want =
                outside_closure(inst.agent(i), totals.get(i)).unwrap() - &inst.agent(i).cost * rec.get(i);
            assert_eq!(out.utilities[i], want);
        }
    }
}

#[test]
fn enforcement_audits_clean_on_random_small_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(151);
    for round in 0..6 {
        let n = rng.gen_range(2..=4);
        let inst = random_instance(&mut rng, &continuous_cfg(n));
        for model in [Model::Full, Model::Threshold] {
            let r = mechanism::audit_truthfulness(&inst, model, &rat(1, 2)).unwrap();
            assert!(r.is_none(), "round {round}: exploit under enforcement: {r:?}");
        }
    }
}

#[test]
fn model3_search_on_symmetric_pair_finds_nothing() {
    // Pinned regression: with identical cap-10 agents the misreport search
    // comes back empty because the deviator's best response always lands on
    // the same 15-utility outcome.
    let b = fairex::model::BenefitFunction::new(vec![(rint(0), rint(2)), (rint(10), rint(0))]).unwrap();
    let agents = vec![
        fairex::model::AgentSpec::new(1, rint(1), b.clone()).unwrap(),
        fairex::model::AgentSpec::new(2, rint(1), b).unwrap(),
    ];
    let inst = Instance::new(agents, None, Mode::Continuous).unwrap();
    assert!(mechanism::model3_exploit_search(&inst, &rat(1, 2)).unwrap().is_none());
}

#[test]
fn min_levels_never_exceed_max_levels_on_random_curves() {
    let mut rng = ChaCha8Rng::seed_from_u64(161);
    for _ in 0..60 {
        let inst = random_instance(&mut rng, &continuous_cfg(1));
        let a = inst.agent(0);
        let lv = AgentLevels::new(a);
        for k in 0..12 {
            assert!(min_k_level(a, k) <= k_level(a, k));
            assert_eq!(&k_level(a, k), lv.max_level(k));
            assert_eq!(&min_k_level(a, k), lv.min_level(k));
        }
    }
}
