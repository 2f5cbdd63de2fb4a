//! Domain types for the fair data-exchange game: benefit curves, agents,
//! instances, strategy profiles, and the primitive evaluations on them.

use num_traits::Zero;

use crate::error::{FairexError, Result};
use crate::rational::Rational;

/// Monotone concave piecewise-linear value-of-data curve with `b(0) = 0`.
///
/// Stored as segments `(start, slope)`: slope `m_r` applies on
/// `[start_r, start_{r+1})` and the final slope is exactly zero, so the curve
/// is constant past its last breakpoint (marginal value of data vanishes).
/// Canonical form: starts strictly increasing from 0, slopes strictly
/// decreasing; adjacent equal slopes are merged at construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenefitFunction {
    segments: Vec<(Rational, Rational)>,
    /// Curve value at each segment start; `values[r] = b(start_r)`.
    values: Vec<Rational>,
}

impl BenefitFunction {
    pub fn new(segments: Vec<(Rational, Rational)>) -> Result<Self> {
        if segments.is_empty() {
            return Err(FairexError::InvalidBenefit("no segments".into()));
        }
        if !segments[0].0.is_zero() {
            return Err(FairexError::InvalidBenefit(format!(
                "first breakpoint must be 0, got {}",
                segments[0].0
            )));
        }
        for w in segments.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(FairexError::InvalidBenefit(format!(
                    "breakpoints must be strictly increasing ({} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        if segments.iter().any(|(_, m)| m < &Rational::zero()) {
            return Err(FairexError::InvalidBenefit("negative slope".into()));
        }
        // Merge adjacent equal slopes into one segment.
        let mut merged: Vec<(Rational, Rational)> = Vec::with_capacity(segments.len());
        for (t, m) in segments {
            match merged.last() {
                Some((_, last)) if *last == m => {}
                _ => merged.push((t, m)),
            }
        }
        for w in merged.windows(2) {
            if w[1].1 >= w[0].1 {
                return Err(FairexError::InvalidBenefit(format!(
                    "slopes must be strictly decreasing, got {} then {}",
                    w[0].1, w[1].1
                )));
            }
        }
        if !merged.last().unwrap().1.is_zero() {
            return Err(FairexError::InvalidBenefit(
                "final slope must be exactly 0".into(),
            ));
        }
        let mut values = Vec::with_capacity(merged.len());
        let mut acc = Rational::zero();
        values.push(acc.clone());
        for w in merged.windows(2) {
            acc += &w[0].1 * (&w[1].0 - &w[0].0);
            values.push(acc.clone());
        }
        Ok(Self {
            segments: merged,
            values,
        })
    }

    /// Canonical curve whose K-data-levels are exactly `levels[K-1]`:
    /// slope `cost/(K+1)` on `[levels[K-1], levels[K])`, zero past the end.
    /// Used when an agent is described by a reported level vector.
    pub fn from_levels(cost: &Rational, levels: &[Rational]) -> Result<Self> {
        if cost <= &Rational::zero() {
            return Err(FairexError::InvalidBenefit("cost must be positive".into()));
        }
        if levels.is_empty() {
            return Err(FairexError::InvalidBenefit("empty level vector".into()));
        }
        let mut prev = Rational::zero();
        for l in levels {
            if l < &prev {
                return Err(FairexError::InvalidBenefit(
                    "level vector must be nondecreasing and nonnegative".into(),
                ));
            }
            prev = l.clone();
        }
        let mut segments = Vec::with_capacity(levels.len() + 1);
        let mut start = Rational::zero();
        for (k, next) in levels.iter().enumerate() {
            if *next > start {
                segments.push((start.clone(), cost / Rational::from_integer((k as i64 + 1).into())));
                start = next.clone();
            }
        }
        segments.push((start, Rational::zero()));
        Self::new(segments)
    }

    pub fn segments(&self) -> &[(Rational, Rational)] {
        &self.segments
    }

    /// Breakpoint past which the curve is constant.
    pub fn satiation(&self) -> &Rational {
        &self.segments.last().unwrap().0
    }

    /// Index of the segment containing `t` (taking the right-hand segment at
    /// breakpoints).
    fn segment_index(&self, t: &Rational) -> usize {
        self.segments.partition_point(|(start, _)| start <= t) - 1
    }

    /// Evaluates `b(t)` by piecewise-linear interpolation.
    pub fn eval(&self, t: &Rational) -> Result<Rational> {
        if t < &Rational::zero() {
            return Err(FairexError::Domain(format!("benefit at negative t = {t}")));
        }
        let r = self.segment_index(t);
        Ok(&self.values[r] + &self.segments[r].1 * (t - &self.segments[r].0))
    }

    /// Right derivative `b'(t)`: the slope of the segment to the right of `t`.
    pub fn right_derivative(&self, t: &Rational) -> Result<Rational> {
        if t < &Rational::zero() {
            return Err(FairexError::Domain(format!(
                "derivative at negative t = {t}"
            )));
        }
        Ok(self.segments[self.segment_index(t)].1.clone())
    }
}

/// One participant: positive per-unit collection cost plus a benefit curve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentSpec {
    pub id: u32,
    pub cost: Rational,
    pub benefit: BenefitFunction,
}

impl AgentSpec {
    pub fn new(id: u32, cost: Rational, benefit: BenefitFunction) -> Result<Self> {
        if cost <= Rational::zero() {
            return Err(FairexError::InvalidInstance(format!(
                "agent {id}: cost must be positive, got {cost}"
            )));
        }
        Ok(Self { id, cost, benefit })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Continuous,
    Discrete,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Continuous => "continuous",
            Mode::Discrete => "discrete",
        }
    }
}

/// Agent roster plus optional undirected exchange graph (absent means the
/// complete graph) and the strategy-space mode.
#[derive(Debug, Clone)]
pub struct Instance {
    agents: Vec<AgentSpec>,
    /// Normalized edge list (`i < j`, sorted, by agent index) when restricted.
    edges: Option<Vec<(usize, usize)>>,
    /// Sorted adjacency lists, present iff `edges` is.
    adjacency: Option<Vec<Vec<usize>>>,
    mode: Mode,
}

impl Instance {
    /// Builds an instance; `edges` are pairs of agent ids.
    pub fn new(agents: Vec<AgentSpec>, edges: Option<Vec<(u32, u32)>>, mode: Mode) -> Result<Self> {
        if agents.is_empty() {
            return Err(FairexError::InvalidInstance("no agents".into()));
        }
        let mut ids: Vec<u32> = agents.iter().map(|a| a.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(FairexError::InvalidInstance("duplicate agent id".into()));
        }
        let index_of = |id: u32| -> Result<usize> {
            agents
                .iter()
                .position(|a| a.id == id)
                .ok_or_else(|| FairexError::InvalidInstance(format!("edge endpoint {id} is not an agent id")))
        };
        let (edges, adjacency) = match edges {
            None => (None, None),
            Some(raw) => {
                let mut set = Vec::with_capacity(raw.len());
                for (a, b) in raw {
                    if a == b {
                        return Err(FairexError::InvalidInstance(format!("self-loop at {a}")));
                    }
                    let (i, j) = (index_of(a)?, index_of(b)?);
                    set.push((i.min(j), i.max(j)));
                }
                set.sort_unstable();
                if set.windows(2).any(|w| w[0] == w[1]) {
                    return Err(FairexError::InvalidInstance("duplicate edge".into()));
                }
                let mut adjacency = vec![Vec::new(); agents.len()];
                for &(i, j) in &set {
                    adjacency[i].push(j);
                    adjacency[j].push(i);
                }
                for list in &mut adjacency {
                    list.sort_unstable();
                }
                (Some(set), Some(adjacency))
            }
        };
        Ok(Self {
            agents,
            edges,
            adjacency,
            mode,
        })
    }

    pub fn n(&self) -> usize {
        self.agents.len()
    }

    pub fn agents(&self) -> &[AgentSpec] {
        &self.agents
    }

    pub fn agent(&self, i: usize) -> &AgentSpec {
        &self.agents[i]
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Edge list by agent index, when graph-restricted.
    pub fn edges(&self) -> Option<&[(usize, usize)]> {
        self.edges.as_deref()
    }

    /// True when every pair of agents may exchange (no graph, or a graph
    /// containing all pairs).
    pub fn is_complete(&self) -> bool {
        match &self.edges {
            None => true,
            Some(e) => e.len() == self.n() * (self.n() - 1) / 2,
        }
    }

    pub fn degree(&self, i: usize) -> usize {
        match &self.adjacency {
            None => self.n() - 1,
            Some(adj) => adj[i].len(),
        }
    }

    pub fn for_each_neighbor(&self, i: usize, mut f: impl FnMut(usize)) {
        match &self.adjacency {
            None => {
                for j in 0..self.n() {
                    if j != i {
                        f(j);
                    }
                }
            }
            Some(adj) => {
                for &j in &adj[i] {
                    f(j);
                }
            }
        }
    }
}

/// Per-agent collected amounts (the strategic choice), nonnegative and
/// integral in discrete mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollectionProfile(Vec<Rational>);

impl CollectionProfile {
    pub fn new(values: Vec<Rational>) -> Result<Self> {
        if values.iter().any(|v| v < &Rational::zero()) {
            return Err(FairexError::Domain("negative collection amount".into()));
        }
        Ok(Self(values))
    }

    /// Validates length, nonnegativity, and integrality for the instance.
    pub fn for_instance(inst: &Instance, values: Vec<Rational>) -> Result<Self> {
        if values.len() != inst.n() {
            return Err(FairexError::DimensionMismatch {
                expected: inst.n(),
                got: values.len(),
            });
        }
        if inst.mode() == Mode::Discrete && values.iter().any(|v| !v.is_integer()) {
            return Err(FairexError::Domain(
                "discrete-mode profile must be integral".into(),
            ));
        }
        Self::new(values)
    }

    pub fn values(&self) -> &[Rational] {
        &self.0
    }

    pub fn get(&self, i: usize) -> &Rational {
        &self.0[i]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Copy with coordinate `i` replaced; used for unilateral deviations.
    pub fn with(&self, i: usize, value: Rational) -> Self {
        let mut v = self.0.clone();
        v[i] = value;
        Self(v)
    }
}

/// Per-agent total accessible amounts: own collection plus all inbound
/// exchange.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TotalProfile(Vec<Rational>);

impl TotalProfile {
    pub fn new(values: Vec<Rational>) -> Result<Self> {
        if values.iter().any(|v| v < &Rational::zero()) {
            return Err(FairexError::Domain("negative total amount".into()));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[Rational] {
        &self.0
    }

    pub fn get(&self, i: usize) -> &Rational {
        &self.0[i]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Position of an agent within a profile.
///
/// `weak` counts agents collecting at least as much (self included) and
/// governs downward incentives; `strict` is one plus the number collecting
/// strictly more and governs upward incentives. Graph instances count
/// neighbors only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankPair {
    pub weak: usize,
    pub strict: usize,
}

/// Total accessible data of a single agent under fair exchange.
pub fn total_for_agent(inst: &Instance, x: &CollectionProfile, i: usize) -> Rational {
    let xi = x.get(i);
    let mut t = xi.clone();
    inst.for_each_neighbor(i, |j| {
        t += xi.min(x.get(j));
    });
    t
}

/// Fair-exchange totals `t_i = x_i + Σ_j min(x_i, x_j)` over neighbors.
///
/// Complete-graph instances use the sorted prefix form, which is exact and
/// avoids the quadratic pairwise scan.
pub fn total_data(inst: &Instance, x: &CollectionProfile) -> Result<TotalProfile> {
    if x.len() != inst.n() {
        return Err(FairexError::DimensionMismatch {
            expected: inst.n(),
            got: x.len(),
        });
    }
    if !inst.is_complete() {
        let totals = (0..inst.n()).map(|i| total_for_agent(inst, x, i)).collect();
        return TotalProfile::new(totals);
    }
    let n = inst.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x.get(a).cmp(x.get(b)).then(a.cmp(&b)));
    let mut totals = vec![Rational::zero(); n];
    let mut below = Rational::zero();
    for (rank, &agent) in order.iter().enumerate() {
        let xi = x.get(agent);
        // Agents weakly above (incl. self) each receive x_i; those below give
        // their own amounts.
        totals[agent] = &below + xi * Rational::from_integer(((n - rank) as i64).into());
        below += xi;
    }
    TotalProfile::new(totals)
}

/// Quasi-linear payoff `U_i = b_i(t_i(X)) - c_i x_i`.
pub fn utility(inst: &Instance, x: &CollectionProfile, i: usize) -> Result<Rational> {
    let t = total_for_agent(inst, x, i);
    let a = inst.agent(i);
    Ok(a.benefit.eval(&t)? - &a.cost * x.get(i))
}

/// Weak/strict rank of agent `i` in profile `x`.
pub fn ranks(inst: &Instance, x: &CollectionProfile, i: usize) -> RankPair {
    let xi = x.get(i);
    let mut weak = 1;
    let mut strict = 1;
    inst.for_each_neighbor(i, |j| {
        let xj = x.get(j);
        if xj >= xi {
            weak += 1;
        }
        if xj > xi {
            strict += 1;
        }
    });
    RankPair { weak, strict }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rint};

    pub(crate) fn slope_cap(slope: Rational, cap: Rational) -> BenefitFunction {
        BenefitFunction::new(vec![(rint(0), slope), (cap, rint(0))]).unwrap()
    }

    fn two_agent_b2() -> Instance {
        // Concave surrogates for the step utilities 100·1{t>=10} and
        // 20·1{t>=8}: slope chosen so the cap value equals the step height.
        let a1 = AgentSpec::new(1, rint(1), slope_cap(rint(10), rint(10))).unwrap();
        let a2 = AgentSpec::new(2, rint(1), slope_cap(rat(5, 2), rint(8))).unwrap();
        Instance::new(vec![a1, a2], None, Mode::Continuous).unwrap()
    }

    #[test]
    fn eval_benefit_interpolates_and_caps() {
        let b = slope_cap(rint(2), rint(10));
        assert_eq!(b.eval(&rint(4)).unwrap(), rint(8));
        assert_eq!(b.eval(&rint(15)).unwrap(), rint(20));
        let b = slope_cap(rint(10), rint(10));
        assert_eq!(b.eval(&rint(10)).unwrap(), rint(100));
        assert!(b.eval(&rint(-1)).is_err());
    }

    #[test]
    fn right_derivative_takes_right_segment_at_kinks() {
        let b = slope_cap(rint(2), rint(10));
        assert_eq!(b.right_derivative(&rint(10)).unwrap(), rint(0));
        assert_eq!(b.right_derivative(&rint(9)).unwrap(), rint(2));
        let b = BenefitFunction::new(vec![(rint(0), rint(2)), (rint(4), rat(3, 5)), (rint(9), rint(0))])
            .unwrap();
        assert_eq!(b.right_derivative(&rint(4)).unwrap(), rat(3, 5));
        // Finite-difference check of the same kink: (b(4+h) - b(4)) / h.
        let h = rat(1, 64);
        let fd = (b.eval(&(rint(4) + &h)).unwrap() - b.eval(&rint(4)).unwrap()) / &h;
        assert_eq!(fd, rat(3, 5));
        assert!(b.right_derivative(&rat(-1, 2)).is_err());
    }

    #[test]
    fn construction_merges_equal_slopes_and_rejects_bad_shapes() {
        let b = BenefitFunction::new(vec![
            (rint(0), rint(2)),
            (rint(5), rint(2)),
            (rint(10), rint(0)),
        ])
        .unwrap();
        assert_eq!(b.segments().len(), 2);
        assert_eq!(*b.satiation(), rint(10));

        // Must start at zero, breakpoints strictly increasing, final slope 0,
        // slopes concave.
        assert!(BenefitFunction::new(vec![(rint(1), rint(0))]).is_err());
        assert!(BenefitFunction::new(vec![(rint(0), rint(2)), (rint(0), rint(0))]).is_err());
        assert!(BenefitFunction::new(vec![(rint(0), rint(2))]).is_err());
        assert!(BenefitFunction::new(vec![
            (rint(0), rint(1)),
            (rint(5), rint(2)),
            (rint(10), rint(0)),
        ])
        .is_err());
        assert!(BenefitFunction::new(vec![(rint(0), rint(-1)), (rint(5), rint(0))]).is_err());
        // Degenerate everywhere-zero curve is allowed.
        let z = BenefitFunction::new(vec![(rint(0), rint(0))]).unwrap();
        assert_eq!(z.eval(&rint(7)).unwrap(), rint(0));
    }

    #[test]
    fn from_levels_reproduces_reported_levels() {
        let c = rint(1);
        let b = BenefitFunction::from_levels(&c, &[rint(10), rint(10)]).unwrap();
        assert_eq!(b.segments(), &[(rint(0), rint(1)), (rint(10), rint(0))]);
        let b = BenefitFunction::from_levels(&c, &[rint(4), rint(9)]).unwrap();
        assert_eq!(
            b.segments(),
            &[(rint(0), rint(1)), (rint(4), rat(1, 2)), (rint(9), rint(0))]
        );
        // All-zero report collapses to the zero curve.
        let b = BenefitFunction::from_levels(&c, &[rint(0), rint(0)]).unwrap();
        assert_eq!(b.segments(), &[(rint(0), rint(0))]);
        assert!(BenefitFunction::from_levels(&c, &[rint(5), rint(3)]).is_err());
    }

    #[test]
    fn totals_match_definition() {
        let inst = two_agent_b2();
        let x = CollectionProfile::for_instance(&inst, vec![rint(6), rint(4)]).unwrap();
        let t = total_data(&inst, &x).unwrap();
        assert_eq!(t.values(), &[rint(10), rint(8)]);

        let mk = |id| AgentSpec::new(id, rint(1), slope_cap(rint(2), rint(10))).unwrap();
        let inst3 = Instance::new(vec![mk(1), mk(2), mk(3)], None, Mode::Continuous).unwrap();
        let x = CollectionProfile::for_instance(&inst3, vec![rint(1), rint(2), rint(3)]).unwrap();
        let t = total_data(&inst3, &x).unwrap();
        assert_eq!(t.values(), &[rint(3), rint(5), rint(6)]);

        // Path graph 1-2-3.
        let path = Instance::new(
            vec![mk(1), mk(2), mk(3)],
            Some(vec![(1, 2), (2, 3)]),
            Mode::Continuous,
        )
        .unwrap();
        let x =
            CollectionProfile::for_instance(&path, vec![rat(20, 3), rat(10, 3), rat(20, 3)]).unwrap();
        let t = total_data(&path, &x).unwrap();
        assert_eq!(t.values(), &[rint(10), rint(10), rint(10)]);

        let short = CollectionProfile::new(vec![rint(1)]).unwrap();
        assert!(total_data(&inst3, &short).is_err());
    }

    #[test]
    fn utility_matches_worked_example() {
        let inst = two_agent_b2();
        let x = CollectionProfile::for_instance(&inst, vec![rint(6), rint(4)]).unwrap();
        assert_eq!(utility(&inst, &x, 0).unwrap(), rint(94));
        let zero = CollectionProfile::for_instance(&inst, vec![rint(0), rint(0)]).unwrap();
        assert_eq!(utility(&inst, &zero, 0).unwrap(), rint(0));
        assert_eq!(utility(&inst, &zero, 1).unwrap(), rint(0));
        let x = CollectionProfile::for_instance(&inst, vec![rint(5), rint(8)]).unwrap();
        assert_eq!(utility(&inst, &x, 0).unwrap(), rint(95));
    }

    #[test]
    fn ranks_count_ties_correctly() {
        let mk = |id| AgentSpec::new(id, rint(1), slope_cap(rint(2), rint(10))).unwrap();
        let inst = Instance::new(vec![mk(1), mk(2), mk(3)], None, Mode::Continuous).unwrap();
        let x = CollectionProfile::for_instance(&inst, vec![rint(3), rint(1), rint(3)]).unwrap();
        assert_eq!(ranks(&inst, &x, 0), RankPair { weak: 2, strict: 1 });
        assert_eq!(ranks(&inst, &x, 1), RankPair { weak: 3, strict: 3 });
        let even = CollectionProfile::for_instance(&inst, vec![rint(2), rint(2), rint(2)]).unwrap();
        for i in 0..3 {
            assert_eq!(ranks(&inst, &even, i), RankPair { weak: 3, strict: 1 });
        }
    }

    #[test]
    fn instance_validation_rejects_bad_graphs() {
        let mk = |id| AgentSpec::new(id, rint(1), slope_cap(rint(2), rint(10))).unwrap();
        let agents = vec![mk(1), mk(2), mk(3)];
        assert!(Instance::new(agents.clone(), Some(vec![(1, 1)]), Mode::Continuous).is_err());
        assert!(Instance::new(agents.clone(), Some(vec![(1, 2), (2, 1)]), Mode::Continuous).is_err());
        assert!(Instance::new(agents.clone(), Some(vec![(1, 9)]), Mode::Continuous).is_err());
        let g = Instance::new(agents, Some(vec![(1, 2), (2, 3)]), Mode::Continuous).unwrap();
        assert!(!g.is_complete());
        assert_eq!(g.degree(1), 2);
        assert!(AgentSpec::new(7, rint(0), slope_cap(rint(2), rint(10))).is_err());
    }

    #[test]
    fn discrete_profiles_must_be_integral() {
        let mk = |id| AgentSpec::new(id, rint(1), slope_cap(rint(2), rint(9))).unwrap();
        let inst = Instance::new(vec![mk(1), mk(2)], None, Mode::Discrete).unwrap();
        assert!(CollectionProfile::for_instance(&inst, vec![rat(1, 2), rint(1)]).is_err());
        assert!(CollectionProfile::for_instance(&inst, vec![rint(2), rint(1)]).is_ok());
        assert!(CollectionProfile::new(vec![rint(-1)]).is_err());
    }
}
