//! On-disk formats: the instance file, profile payloads, and the structured
//! run report the CLI emits.
//!
//! All numerics are exact: fractions travel as `"p/q"` strings, integers may
//! be bare JSON numbers, and floating-point literals are rejected rather than
//! silently rounded.

use std::collections::BTreeMap;
use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{FairexError, Result};
use crate::model::{AgentSpec, BenefitFunction, Instance, Mode};
use crate::rational::{format_rational, parse_rational, Rational};

/// A rational in transit: serialized canonically, parsed from `"p/q"`,
/// decimal strings, or exact JSON integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalText(pub Rational);

impl Serialize for RationalText {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(&self.0))
    }
}

impl<'de> Deserialize<'de> for RationalText {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = RationalText;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "a rational as \"p/q\" string or exact integer")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<RationalText, E> {
                parse_rational(v).map(RationalText).map_err(E::custom)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<RationalText, E> {
                Ok(RationalText(Rational::from_integer(v.into())))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<RationalText, E> {
                Ok(RationalText(Rational::from_integer(v.into())))
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<RationalText, E> {
                Err(E::custom(format!(
                    "float {v} would lose exactness; quote it as a fraction string"
                )))
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgentFile {
    pub id: u32,
    pub cost: RationalText,
    /// Breakpoint/slope pairs `[t, slope]`.
    pub benefit: Vec<[RationalText; 2]>,
}

/// The instance document. `edges` absent means the complete graph; `profiles`
/// optionally pins named collection profiles for verification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceFile {
    pub mode: String,
    pub agents: Vec<AgentFile>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub edges: Option<Vec<[u32; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub profiles: Option<BTreeMap<String, Vec<RationalText>>>,
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| FairexError::Parse(format!("instance file: {e}")))
    }

    pub fn to_instance(&self) -> Result<Instance> {
        let mode = match self.mode.as_str() {
            "continuous" => Mode::Continuous,
            "discrete" => Mode::Discrete,
            other => {
                return Err(FairexError::Parse(format!(
                    "mode must be \"continuous\" or \"discrete\", got \"{other}\""
                )))
            }
        };
        let agents = self
            .agents
            .iter()
            .map(|a| {
                let segments = a
                    .benefit
                    .iter()
                    .map(|[t, m]| (t.0.clone(), m.0.clone()))
                    .collect();
                AgentSpec::new(a.id, a.cost.0.clone(), BenefitFunction::new(segments)?)
            })
            .collect::<Result<Vec<_>>>()?;
        let edges = self.edges.as_ref().map(|es| es.iter().map(|[a, b]| (*a, *b)).collect());
        Instance::new(agents, edges, mode)
    }

    pub fn from_instance(inst: &Instance, profiles: &[(String, Vec<Rational>)]) -> Self {
        let agents = inst
            .agents()
            .iter()
            .map(|a| AgentFile {
                id: a.id,
                cost: RationalText(a.cost.clone()),
                benefit: a
                    .benefit
                    .segments()
                    .iter()
                    .map(|(t, m)| [RationalText(t.clone()), RationalText(m.clone())])
                    .collect(),
            })
            .collect();
        let edges = inst.edges().map(|es| {
            es.iter()
                .map(|&(i, j)| [inst.agent(i).id, inst.agent(j).id])
                .collect()
        });
        let profiles = if profiles.is_empty() {
            None
        } else {
            Some(
                profiles
                    .iter()
                    .map(|(name, vals)| {
                        (
                            name.clone(),
                            vals.iter().map(|v| RationalText(v.clone())).collect(),
                        )
                    })
                    .collect(),
            )
        };
        InstanceFile {
            mode: inst.mode().as_str().to_string(),
            agents,
            edges,
            profiles,
        }
    }
}

/// Parses a profile payload: a JSON array of rationals.
pub fn parse_profile_text(text: &str) -> Result<Vec<Rational>> {
    let vals: Vec<RationalText> =
        serde_json::from_str(text).map_err(|e| FairexError::Parse(format!("profile: {e}")))?;
    Ok(vals.into_iter().map(|v| v.0).collect())
}

pub fn rationals_to_text(vals: &[Rational]) -> Vec<String> {
    vals.iter().map(format_rational).collect()
}

// --- run report ------------------------------------------------------------

#[derive(Debug, Serialize)]
pub struct DiagnosticRow {
    pub agent: u32,
    pub weak_rank: usize,
    pub strict_rank: usize,
    pub active_level: String,
    pub floor_bound: bool,
}

#[derive(Debug, Serialize)]
pub struct SolveReport {
    pub x: Vec<String>,
    pub t: Vec<String>,
    /// Agent ids in the order the algorithm fixed them.
    pub selection_order: Vec<u32>,
    pub diagnostics: Vec<DiagnosticRow>,
}

#[derive(Debug, Serialize)]
pub struct ConditionRow {
    pub agent: u32,
    pub weak_rank: usize,
    pub strict_rank: usize,
    pub total: String,
    pub lower_level: String,
    pub upper_level: String,
    pub lower_slack: String,
    pub upper_slack: String,
    pub ok: bool,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub pass: bool,
    pub conditions: Vec<ConditionRow>,
}

#[derive(Debug, Serialize)]
pub struct WitnessRow {
    pub agent: u32,
    pub from: String,
    pub to: String,
    pub gain: String,
}

#[derive(Debug, Serialize)]
pub struct OracleReport {
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessRow>,
}

#[derive(Debug, Serialize)]
pub struct ProbePointRow {
    pub x: Vec<String>,
    pub t: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct ProbeRow {
    pub restarts: u32,
    pub seed: u64,
    pub equilibria: Vec<ProbePointRow>,
    pub non_converged: usize,
}

#[derive(Debug, Serialize)]
pub struct DominanceRow {
    pub profile: Vec<String>,
    pub utility_deltas: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct ParetoReport {
    pub undominated: bool,
    pub reference: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<DominanceRow>,
}

#[derive(Debug, Serialize)]
pub struct ExploitRow {
    pub agent: u32,
    pub misreport: Vec<String>,
    pub truthful_utility: String,
    pub exploit_utility: String,
    pub gain: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub submitted: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct AuditReportRow {
    pub model: u8,
    pub clean: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exploit: Option<ExploitRow>,
}

#[derive(Debug, Serialize)]
pub struct ExampleReport {
    pub name: String,
    pub note: String,
    pub instance: InstanceFile,
    pub expectations_verified: usize,
    pub profile_utilities: BTreeMap<String, Vec<String>>,
}

/// The machine-readable command report. Field order is fixed by declaration,
/// so byte-identical runs produce byte-identical reports; wall-clock timing
/// goes to stderr instead of the report to keep that guarantee.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub options: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pareto: Option<ParetoReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub audit: Option<AuditReportRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub example: Option<ExampleReport>,
    /// Registry listing (the `example` subcommand without a name).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub available: Option<Vec<String>>,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        RunReport {
            command: command.to_string(),
            options: BTreeMap::new(),
            solve: None,
            verify: None,
            oracle: None,
            probe: None,
            pareto: None,
            audit: None,
            example: None,
            available: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }
}
