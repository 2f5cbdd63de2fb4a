//! Seeded random instance generation for test suites and benchmarks.
//!
//! Costs and nonzero slopes are quarters in [1/4, 8]; breakpoint gaps are
//! quarters in [1/4, 4]. Everything derives deterministically from the
//! supplied RNG.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::model::{AgentSpec, BenefitFunction, Instance, Mode};
use crate::rational::{rat, Rational};

#[derive(Debug, Clone)]
pub struct GenConfig {
    pub n: usize,
    /// Number of sloped segments per benefit curve (the final zero segment is
    /// added on top), chosen uniformly in `1..=max_sloped_segments`.
    pub max_sloped_segments: usize,
    pub mode: Mode,
    /// Edge probability; `None` builds complete-graph instances.
    pub edge_probability: Option<f64>,
}

fn quarter(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> Rational {
    rat(rng.gen_range(lo..=hi), 4)
}

fn random_benefit(rng: &mut ChaCha8Rng, max_sloped: usize) -> BenefitFunction {
    let count = rng.gen_range(1..=max_sloped.max(1));
    // Strictly decreasing positive slopes from the quarter palette.
    let mut slopes: Vec<i64> = Vec::new();
    while slopes.len() < count {
        let s = rng.gen_range(1..=32);
        if !slopes.contains(&s) {
            slopes.push(s);
        }
    }
    slopes.sort_unstable_by(|a, b| b.cmp(a));
    let mut segments = Vec::with_capacity(count + 1);
    let mut start = Rational::from_integer(0.into());
    for s in slopes {
        segments.push((start.clone(), rat(s, 4)));
        start += quarter(rng, 1, 16);
    }
    segments.push((start, Rational::from_integer(0.into())));
    BenefitFunction::new(segments).expect("generated curve is canonical")
}

/// One random instance under the configuration.
pub fn random_instance(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Instance {
    let agents: Vec<AgentSpec> = (0..cfg.n)
        .map(|i| {
            AgentSpec::new(
                i as u32 + 1,
                quarter(rng, 1, 32),
                random_benefit(rng, cfg.max_sloped_segments),
            )
            .expect("generated cost is positive")
        })
        .collect();
    let edges = cfg.edge_probability.map(|p| {
        let mut es = Vec::new();
        for i in 0..cfg.n as u32 {
            for j in i + 1..cfg.n as u32 {
                if rng.gen_bool(p) {
                    es.push((i + 1, j + 1));
                }
            }
        }
        es
    });
    Instance::new(agents, edges, cfg.mode).expect("generated instance is valid")
}

/// Synthetic instance for the quadratic-time benchmark: n agents with random
/// three-segment benefit curves (two sloped pieces plus the flat tail).
pub fn bench_instance(rng: &mut ChaCha8Rng, n: usize) -> Instance {
    let agents: Vec<AgentSpec> = (0..n)
        .map(|i| {
            let hi = rng.gen_range(5..=32);
            let lo = rng.gen_range(1..hi);
            let b1 = quarter(rng, 1, 64);
            let b2 = &b1 + quarter(rng, 1, 64);
            let segments = vec![
                (Rational::from_integer(0.into()), rat(hi, 4)),
                (b1, rat(lo, 4)),
                (b2, Rational::from_integer(0.into())),
            ];
            AgentSpec::new(
                i as u32 + 1,
                quarter(rng, 1, 32),
                BenefitFunction::new(segments).expect("bench curve is canonical"),
            )
            .expect("bench cost is positive")
        })
        .collect();
    Instance::new(agents, None, Mode::Continuous).expect("bench instance is valid")
}
