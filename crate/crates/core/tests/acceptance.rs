//! Acceptance suite. Each test prints one pass/fail line; run with
//! `cargo test --test acceptance -- --nocapture` to see them all.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fairex::gen::{bench_instance, random_instance, GenConfig};
use fairex::mechanism::{self, Model};
use fairex::model::{utility, CollectionProfile, Mode};
use fairex::rational::{rat, rint, Rational};
use fairex::registry;
use fairex::solver::{solve_discrete, solve_graph, solve_max, solve_min};
use fairex::transform::{phi_forward, phi_inverse};
use fairex::verifier::{
    check_local_conditions, deviation_oracle, extremality_probe, pareto_scan,
};

fn pass(n: u32, what: &str) {
    println!("acceptance criterion {n}: PASS - {what}");
}

fn continuous_cfg(n: usize) -> GenConfig {
    GenConfig {
        n,
        max_sloped_segments: 3,
        mode: Mode::Continuous,
        edge_probability: None,
    }
}

#[test]
fn criterion_01_model3_counterexample_exact() {
    let started = Instant::now();
    let ex = registry::load_example("model3_counterexample").unwrap();
    let inst = &ex.instance;

    let truthful = mechanism::truthful_reports(inst);
    let rec = mechanism::recommend(inst, &truthful).unwrap();
    assert_eq!(rec.values(), &[rint(6), rint(4)], "criterion 1: truthful recommendation");

    let mut zeroed = truthful.clone();
    zeroed[0].levels = vec![rint(0), rint(0)];
    let rec0 = mechanism::recommend(inst, &zeroed).unwrap();
    assert_eq!(rec0.values(), &[rint(0), rint(8)], "criterion 1: misreport recommendation");

    let out = mechanism::realize(Model::Full, inst, &rec, &rec).unwrap();
    assert_eq!(out.utilities[0], rint(94), "criterion 1: truthful model-1 utility");

    let half = rat(1, 2);
    assert!(
        mechanism::audit_truthfulness(inst, Model::Full, &half).unwrap().is_none(),
        "criterion 1: model-1 audit must be clean"
    );
    assert!(
        mechanism::audit_truthfulness(inst, Model::Threshold, &half).unwrap().is_none(),
        "criterion 1: model-2 audit must be clean"
    );

    let exploit = mechanism::model3_exploit_search(inst, &half).unwrap().unwrap();
    assert_eq!(exploit.exploit_utility, rint(95), "criterion 1: exploit utility");
    assert_eq!(exploit.gain, rint(1), "criterion 1: exploit gain");

    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(1), "criterion 1: took {elapsed:?}, budget 1 s");
    pass(1, &format!("model-3 counterexample exact in {elapsed:?}"));
}

#[test]
fn criterion_02_discrete_example_certified() {
    let started = Instant::now();
    let ex = registry::load_example("discrete_incomparable").unwrap();
    let inst = &ex.instance;
    let one = rint(1);

    let solved = solve_discrete(inst).unwrap();
    assert_eq!(
        solved.x.values(),
        &[rint(1), rint(1), rint(5), rint(5), rint(5), rint(100)],
        "criterion 2: discrete solver output"
    );
    assert!(
        deviation_oracle(inst, &solved.x, &one).unwrap().is_none(),
        "criterion 2: solver output must be an exact equilibrium"
    );

    let corrected = CollectionProfile::for_instance(
        inst,
        vec![rint(0), rint(0), rint(6), rint(6), rint(6), rint(99)],
    )
    .unwrap();
    assert!(
        deviation_oracle(inst, &corrected, &one).unwrap().is_none(),
        "criterion 2: corrected profile must be an exact equilibrium"
    );

    let printed = CollectionProfile::for_instance(
        inst,
        vec![rint(0), rint(0), rint(6), rint(6), rint(6), rint(100)],
    )
    .unwrap();
    let w = deviation_oracle(inst, &printed, &one)
        .unwrap()
        .expect("criterion 2: printed profile must carry a deviation witness");
    assert_eq!(w.agent, 5, "criterion 2: witness agent");
    assert_eq!(w.from, rint(100), "criterion 2: witness from");
    assert_eq!(w.to, rint(99), "criterion 2: witness to");

    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(5), "criterion 2: took {elapsed:?}, budget 5 s");
    pass(2, &format!("discrete example certified in {elapsed:?}"));
}

#[test]
fn criterion_03_nonmonotone_best_response() {
    let ex = registry::load_example("collection_space_not_supermodular").unwrap();
    let inst = &ex.instance;
    // Oracle-style argmax over the quarter grid augmented with the kinks.
    let oracle_br = |partner: i64| -> Rational {
        let x = CollectionProfile::for_instance(inst, vec![rint(0), rint(partner)]).unwrap();
        let mut candidates: Vec<Rational> = (0..=120).map(|k| rat(k, 4)).collect();
        candidates.push(rint(10));
        candidates.push(rint(partner));
        let mut best = rint(0);
        let mut best_u = utility(inst, &x.with(0, rint(0)), 0).unwrap();
        for c in candidates {
            let u = utility(inst, &x.with(0, c.clone()), 0).unwrap();
            if u > best_u {
                best_u = u;
                best = c;
            }
        }
        best
    };
    assert_eq!(oracle_br(5), rint(5), "criterion 3: BR(5)");
    assert_eq!(oracle_br(0), rint(10), "criterion 3: BR(0)");
    pass(3, "best response drops from 10 to 5 when the partner collects 5");
}

#[test]
fn criterion_04_ne_certification_suite() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0004);
    let eighth = rat(1, 8);
    for round in 0..200 {
        let n = rng.gen_range(1..=8);
        let inst = random_instance(&mut rng, &continuous_cfg(n));
        for (name, result) in [("max", solve_max(&inst)), ("min", solve_min(&inst))] {
            let r = result.unwrap();
            assert!(
                check_local_conditions(&inst, &r.x).unwrap().pass,
                "criterion 4: round {round}: {name} output fails local conditions"
            );
            assert!(
                deviation_oracle(&inst, &r.x, &eighth).unwrap().is_none(),
                "criterion 4: round {round}: {name} output refuted by the oracle"
            );
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(60), "criterion 4: took {elapsed:?}, budget 60 s");
    pass(4, &format!("200 instances, max+min certified twice over, {elapsed:?}"));
}

#[test]
fn criterion_05_lattice_extremality_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0004);
    for round in 0..200u64 {
        let n = rng.gen_range(1..=8);
        let inst = random_instance(&mut rng, &continuous_cfg(n));
        let mx = solve_max(&inst).unwrap();
        let mn = solve_min(&inst).unwrap();
        let probe = extremality_probe(&inst, 16, 0xC5 + round).unwrap();
        for p in &probe.equilibria {
            for i in 0..n {
                assert!(
                    p.t.get(i) >= mn.t.get(i) && p.t.get(i) <= mx.t.get(i),
                    "criterion 5: round {round}: equilibrium escapes [T^min, T^max]"
                );
            }
        }
    }
    pass(5, "probe equilibria stay inside the extremal sandwich on all 200 instances");
}

#[test]
fn criterion_06_global_pareto_suite() {
    let quarter = rat(1, 4);
    // Continuous complete-graph instances against the maximal equilibrium.
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0006);
    for round in 0..50 {
        let n = rng.gen_range(1..=3);
        let inst = random_instance(&mut rng, &continuous_cfg(n));
        let r = solve_max(&inst).unwrap();
        assert!(
            pareto_scan(&inst, &r.x, &quarter).unwrap().is_none(),
            "criterion 6: round {round}: maximal equilibrium dominated"
        );
    }
    // Graph-restricted instances against the graph equilibrium.
    for round in 0..50 {
        let n = rng.gen_range(1..=3);
        let cfg = GenConfig {
            n,
            max_sloped_segments: 3,
            mode: Mode::Continuous,
            edge_probability: Some(0.5),
        };
        let inst = random_instance(&mut rng, &cfg);
        let r = solve_graph(&inst).unwrap();
        assert!(
            pareto_scan(&inst, &r.x, &quarter).unwrap().is_none(),
            "criterion 6: graph round {round}: output dominated"
        );
    }
    // Discrete instances with integer scans bounded by 20.
    let mut accepted = 0;
    let mut round = 0;
    while accepted < 50 {
        round += 1;
        let n = rng.gen_range(1..=3);
        let cfg = GenConfig {
            n,
            max_sloped_segments: 2,
            mode: Mode::Discrete,
            edge_probability: None,
        };
        let inst = random_instance(&mut rng, &cfg);
        let max_satiation = inst
            .agents()
            .iter()
            .map(|a| a.benefit.satiation().clone())
            .max()
            .unwrap();
        if max_satiation > rint(20) {
            continue;
        }
        accepted += 1;
        let r = solve_discrete(&inst).unwrap();
        assert!(
            pareto_scan(&inst, &r.x, &rint(1)).unwrap().is_none(),
            "criterion 6: discrete round {round}: output dominated"
        );
    }
    pass(6, "150 scans (continuous, graph, discrete), zero dominance witnesses");
}

#[test]
fn criterion_07_transform_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0007);
    let denominators = [1i64, 2, 4, 8];
    for round in 0..1000 {
        let n = rng.gen_range(1..=12);
        let vals: Vec<Rational> = (0..n)
            .map(|_| rat(rng.gen_range(0..=256), denominators[rng.gen_range(0..4)]))
            .collect();
        let x = CollectionProfile::new(vals).unwrap();
        let back = phi_inverse(&phi_forward(&x)).unwrap();
        assert_eq!(back, x, "criterion 7: round {round}: round-trip mismatch");
    }
    pass(7, "1000 random profiles round-trip exactly");
}

#[test]
fn criterion_08_graph_solver_consistency() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0008);
    for round in 0..100 {
        let n = rng.gen_range(1..=8);
        let inst = random_instance(&mut rng, &continuous_cfg(n));
        let g = solve_graph(&inst).unwrap();
        let m = solve_max(&inst).unwrap();
        assert_eq!(g.x, m.x, "criterion 8: round {round}: outputs differ");
        assert_eq!(g.t, m.t, "criterion 8: round {round}: totals differ");
    }
    pass(8, "graph peel equals the maximal solver on 100 complete instances");
}

#[test]
fn criterion_09_truthfulness_suite() {
    let half = rat(1, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0009);
    for round in 0..50 {
        let n = rng.gen_range(1..=3);
        let inst = random_instance(&mut rng, &continuous_cfg(n));
        for model in [Model::Full, Model::Threshold] {
            let r = mechanism::audit_truthfulness(&inst, model, &half).unwrap();
            assert!(
                r.is_none(),
                "criterion 9: round {round}: exploit under enforcement model {}: {r:?}",
                model.number()
            );
        }
    }

    // The pinned model-3 counterexample must reproduce through the CLI with
    // the witness exit code.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model3.json");
    let bin = env!("CARGO_BIN_EXE_fairex");
    let export = std::process::Command::new(bin)
        .args([
            "example",
            "model3_counterexample",
            "--export",
            path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(export.status.success(), "criterion 9: example export failed");
    let audit = std::process::Command::new(bin)
        .args(["audit", "--model", "3", "--instance", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(
        audit.status.code(),
        Some(2),
        "criterion 9: model-3 audit must exit 2 (witness found)"
    );
    let text = String::from_utf8(audit.stdout).unwrap();
    assert!(text.contains("\"gain\": \"1\""), "criterion 9: exploit gain must be 1");
    pass(9, "models 1-2 clean on 50 instances; model-3 exploit reproduced with exit 2");
}

#[test]
fn criterion_10_quadratic_scaling() {
    let mut times = Vec::new();
    for (i, n) in [2_500usize, 5_000, 10_000].into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0010 + i as u64);
        let inst = bench_instance(&mut rng, n);
        let started = Instant::now();
        let r = solve_max(&inst).unwrap();
        let elapsed = started.elapsed();
        assert_eq!(r.x.len(), n);
        // Spot-check the output is well-formed: totals nondecreasing along
        // the selection order and x nonnegative by construction.
        let t_first = r.t.get(r.selection_order[0]).clone();
        let t_last = r.t.get(*r.selection_order.last().unwrap()).clone();
        assert!(t_first <= t_last);
        times.push((n, elapsed));
    }
    let t10k = times[2].1;
    assert!(
        t10k < Duration::from_secs(10),
        "criterion 10: n=10000 took {t10k:?}, budget 10 s"
    );
    for w in times.windows(2) {
        let (n0, t0) = &w[0];
        let (n1, t1) = &w[1];
        let ratio = t1.as_secs_f64() / t0.as_secs_f64().max(1e-9);
        assert!(
            ratio <= 5.0,
            "criterion 10: {n0} -> {n1} grew by {ratio:.2}x (> 5x)"
        );
    }
    let detail: Vec<String> = times
        .iter()
        .map(|(n, t)| format!("n={n}: {:.2}s", t.as_secs_f64()))
        .collect();
    pass(10, &detail.join(", "));
}
