//! Command-line front end: instance parsing, solver invocation, verification
//! and audit commands, with machine- and human-readable reports.
//!
//! Exit codes: 0 on pass/solve, 2 when a certified violation or witness is
//! found, 1 on usage or parse errors. Reports are byte-deterministic;
//! wall-clock timing is written to stderr only.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{FairexError, Result};
use crate::format::{
    parse_profile_text, rationals_to_text, AuditReportRow, ConditionRow, DiagnosticRow,
    DominanceRow, ExampleReport, ExploitRow, InstanceFile, OracleReport, ParetoReport,
    ProbePointRow, ProbeRow, RunReport, SolveReport, VerifyReport, WitnessRow,
};
use crate::mechanism::{self, Model};
use crate::model::{CollectionProfile, Instance, Mode};
use crate::rational::{format_rational, parse_rational, Rational};
use crate::registry;
use crate::solver::{solve_discrete, solve_graph, solve_max, solve_min, EquilibriumResult};
use crate::verifier;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Table,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Instance file (JSON).
    #[arg(long)]
    instance: String,
    /// Output format.
    #[arg(long, value_enum, default_value = "json")]
    format: OutputFormat,
}

#[derive(Debug, Args)]
struct ProfileArg {
    /// Collection profile: inline JSON array, a pinned profile name from the
    /// instance file, or a path to a JSON array file.
    #[arg(long)]
    profile: Option<String>,
}

#[derive(Debug, Args)]
struct GridArg {
    /// Enumeration grid step (exact fraction, e.g. "1/8").
    #[arg(long)]
    grid: Option<String>,
}

#[derive(Debug, Args)]
struct JobsArg {
    /// Worker threads for enumeration (deterministic at any count).
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Debug, Parser)]
#[command(
    name = "fairex",
    version,
    about = "Exact solver and verifier for fair data-exchange games"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Maximal equilibrium of a continuous complete-graph instance.
    SolveMax(CommonArgs),
    /// Minimal equilibrium of a continuous complete-graph instance.
    SolveMin(CommonArgs),
    /// Equilibrium of a graph-restricted continuous instance.
    SolveGraph(CommonArgs),
    /// Exact integer equilibrium of a discrete instance.
    SolveDiscrete(CommonArgs),
    /// Check the local equilibrium conditions of a profile.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        profile: ProfileArg,
    },
    /// Brute-force deviation oracle on a profile, or (without a profile) a
    /// seeded best-response probe for equilibria.
    Oracle {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        profile: ProfileArg,
        #[command(flatten)]
        grid: GridArg,
        /// Probe restarts when no profile is given.
        #[arg(long, default_value_t = 16)]
        restarts: u32,
        /// Probe RNG seed (env FAIREX_SEED overrides).
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        jobs: JobsArg,
    },
    /// Scan all grid profiles for one that Pareto-dominates the reference.
    ParetoScan {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        profile: ProfileArg,
        #[command(flatten)]
        grid: GridArg,
        #[command(flatten)]
        jobs: JobsArg,
    },
    /// Audit mechanism truthfulness (models 1, 2) or search for a model-3
    /// exploit.
    Audit {
        #[command(flatten)]
        common: CommonArgs,
        /// Enforcement model: 1, 2, or 3.
        #[arg(long)]
        model: u8,
        #[command(flatten)]
        grid: GridArg,
    },
    /// Show a pinned example (name omitted: list all), re-verifying its
    /// expectations.
    Example {
        /// Registry entry name.
        name: Option<String>,
        /// Output format.
        #[arg(long, value_enum, default_value = "json")]
        format: OutputFormat,
        /// Write the example's instance file to this path.
        #[arg(long)]
        export: Option<String>,
    },
}

pub fn run<W: Write, E: Write>(args: &[String], stdout: &mut W, stderr: &mut E) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{e}");
                return 1;
            }
            let _ = write!(stdout, "{e}");
            return 0;
        }
    };
    let started = Instant::now();
    let outcome = dispatch(&cli.command);
    match outcome {
        Ok((report, format, code)) => {
            emit(&report, format, stdout);
            let _ = writeln!(
                stderr,
                "{} finished in {:.3} ms",
                report.command,
                started.elapsed().as_secs_f64() * 1e3
            );
            code
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

fn dispatch(cmd: &Cmd) -> Result<(RunReport, OutputFormat, i32)> {
    match cmd {
        Cmd::SolveMax(c) => solve_cmd("solve-max", c, solve_max),
        Cmd::SolveMin(c) => solve_cmd("solve-min", c, solve_min),
        Cmd::SolveGraph(c) => solve_cmd("solve-graph", c, solve_graph),
        Cmd::SolveDiscrete(c) => solve_cmd("solve-discrete", c, solve_discrete),
        Cmd::Verify { common, profile } => verify_cmd(common, profile),
        Cmd::Oracle {
            common,
            profile,
            grid,
            restarts,
            seed,
            jobs,
        } => oracle_cmd(common, profile, grid, *restarts, *seed, jobs.jobs),
        Cmd::ParetoScan {
            common,
            profile,
            grid,
            jobs,
        } => pareto_cmd(common, profile, grid, jobs.jobs),
        Cmd::Audit {
            common,
            model,
            grid,
        } => audit_cmd(common, *model, grid),
        Cmd::Example {
            name,
            format,
            export,
        } => example_cmd(name.as_deref(), *format, export.as_deref()),
    }
}

fn load_instance(path: &str) -> Result<(Instance, InstanceFile)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| FairexError::Parse(format!("cannot read {path}: {e}")))?;
    let file = InstanceFile::parse(&text)?;
    Ok((file.to_instance()?, file))
}

fn resolve_profile(
    inst: &Instance,
    file: &InstanceFile,
    spec: &str,
) -> Result<CollectionProfile> {
    let values = if spec.trim_start().starts_with('[') {
        parse_profile_text(spec)?
    } else if let Some(p) = file.profiles.as_ref().and_then(|m| m.get(spec)) {
        p.iter().map(|v| v.0.clone()).collect()
    } else {
        let text = std::fs::read_to_string(spec)
            .map_err(|e| FairexError::Parse(format!("profile `{spec}`: not a pinned name and not readable as a file ({e})")))?;
        parse_profile_text(&text)?
    };
    CollectionProfile::for_instance(inst, values)
}

fn grid_or(grid: &GridArg, default: (i64, i64)) -> Result<Rational> {
    match &grid.grid {
        Some(text) => parse_rational(text),
        None => Ok(crate::rational::rat(default.0, default.1)),
    }
}

fn effective_seed(flag: u64) -> u64 {
    match std::env::var("FAIREX_SEED") {
        Ok(v) => v.parse().unwrap_or(flag),
        Err(_) => flag,
    }
}

fn solve_report(inst: &Instance, r: &EquilibriumResult) -> SolveReport {
    SolveReport {
        x: rationals_to_text(r.x.values()),
        t: rationals_to_text(r.t.values()),
        selection_order: r.selection_order.iter().map(|&i| inst.agent(i).id).collect(),
        diagnostics: r
            .diagnostics
            .iter()
            .enumerate()
            .map(|(i, d)| DiagnosticRow {
                agent: inst.agent(i).id,
                weak_rank: d.rank.weak,
                strict_rank: d.rank.strict,
                active_level: format_rational(&d.active_level),
                floor_bound: d.floor_bound,
            })
            .collect(),
    }
}

fn base_options(c: &CommonArgs) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    m.insert("instance".into(), c.instance.clone());
    m
}

fn solve_cmd(
    name: &str,
    c: &CommonArgs,
    f: fn(&Instance) -> Result<EquilibriumResult>,
) -> Result<(RunReport, OutputFormat, i32)> {
    let (inst, _) = load_instance(&c.instance)?;
    let r = f(&inst)?;
    let mut report = RunReport::new(name);
    report.options = base_options(c);
    report.solve = Some(solve_report(&inst, &r));
    Ok((report, c.format, 0))
}

fn verify_cmd(c: &CommonArgs, p: &ProfileArg) -> Result<(RunReport, OutputFormat, i32)> {
    let (inst, file) = load_instance(&c.instance)?;
    let spec = p
        .profile
        .as_deref()
        .ok_or_else(|| FairexError::Parse("verify requires --profile".into()))?;
    let x = resolve_profile(&inst, &file, spec)?;
    let cond = verifier::check_local_conditions(&inst, &x)?;
    let mut report = RunReport::new("verify");
    report.options = base_options(c);
    report.options.insert("profile".into(), spec.to_string());
    report.verify = Some(VerifyReport {
        pass: cond.pass,
        conditions: cond
            .agents
            .iter()
            .map(|a| ConditionRow {
                agent: inst.agent(a.agent).id,
                weak_rank: a.rank.weak,
                strict_rank: a.rank.strict,
                total: format_rational(&a.total),
                lower_level: format_rational(&a.lower_level),
                upper_level: format_rational(&a.upper_level),
                lower_slack: format_rational(&a.lower_slack),
                upper_slack: format_rational(&a.upper_slack),
                ok: a.ok,
            })
            .collect(),
    });
    let code = if cond.pass { 0 } else { 2 };
    Ok((report, c.format, code))
}

fn oracle_cmd(
    c: &CommonArgs,
    p: &ProfileArg,
    g: &GridArg,
    restarts: u32,
    seed: u64,
    jobs: usize,
) -> Result<(RunReport, OutputFormat, i32)> {
    let (inst, file) = load_instance(&c.instance)?;
    let grid = grid_or(g, (1, 8))?;
    let mut report = RunReport::new("oracle");
    report.options = base_options(c);
    report.options.insert("grid".into(), format_rational(&grid));
    match &p.profile {
        Some(spec) => {
            let x = resolve_profile(&inst, &file, spec)?;
            report.options.insert("profile".into(), spec.clone());
            report.options.insert("jobs".into(), jobs.to_string());
            let w = verifier::deviation_oracle_jobs(&inst, &x, &grid, jobs)?;
            let code = if w.is_some() { 2 } else { 0 };
            report.oracle = Some(OracleReport {
                pass: w.is_none(),
                witness: w.map(|w| WitnessRow {
                    agent: inst.agent(w.agent).id,
                    from: format_rational(&w.from),
                    to: format_rational(&w.to),
                    gain: format_rational(&w.gain),
                }),
            });
            Ok((report, c.format, code))
        }
        None => {
            let seed = effective_seed(seed);
            report.options.insert("restarts".into(), restarts.to_string());
            report.options.insert("seed".into(), seed.to_string());
            let probe = verifier::extremality_probe(&inst, restarts, seed)?;
            report.probe = Some(ProbeRow {
                restarts,
                seed,
                equilibria: probe
                    .equilibria
                    .iter()
                    .map(|p| ProbePointRow {
                        x: rationals_to_text(p.x.values()),
                        t: rationals_to_text(p.t.values()),
                    })
                    .collect(),
                non_converged: probe.non_converged,
            });
            Ok((report, c.format, 0))
        }
    }
}

fn default_reference(inst: &Instance) -> Result<CollectionProfile> {
    let r = match inst.mode() {
        Mode::Discrete => solve_discrete(inst)?,
        Mode::Continuous if inst.is_complete() => solve_max(inst)?,
        Mode::Continuous => solve_graph(inst)?,
    };
    Ok(r.x)
}

fn pareto_cmd(
    c: &CommonArgs,
    p: &ProfileArg,
    g: &GridArg,
    jobs: usize,
) -> Result<(RunReport, OutputFormat, i32)> {
    let (inst, file) = load_instance(&c.instance)?;
    let grid = grid_or(g, (1, 4))?;
    let x_ref = match &p.profile {
        Some(spec) => resolve_profile(&inst, &file, spec)?,
        None => default_reference(&inst)?,
    };
    let w = verifier::pareto_scan_jobs(&inst, &x_ref, &grid, jobs)?;
    let mut report = RunReport::new("pareto-scan");
    report.options = base_options(c);
    report.options.insert("grid".into(), format_rational(&grid));
    report.options.insert("jobs".into(), jobs.to_string());
    if let Some(spec) = &p.profile {
        report.options.insert("profile".into(), spec.clone());
    }
    let code = if w.is_some() { 2 } else { 0 };
    report.pareto = Some(ParetoReport {
        undominated: w.is_none(),
        reference: rationals_to_text(x_ref.values()),
        witness: w.map(|w| DominanceRow {
            profile: rationals_to_text(w.profile.values()),
            utility_deltas: rationals_to_text(&w.deltas),
        }),
    });
    Ok((report, c.format, code))
}

fn audit_cmd(c: &CommonArgs, model: u8, g: &GridArg) -> Result<(RunReport, OutputFormat, i32)> {
    let (inst, _) = load_instance(&c.instance)?;
    let grid = grid_or(g, (1, 2))?;
    let m = Model::from_number(model)?;
    let exploit = match m {
        Model::RecommendOnly => mechanism::model3_exploit_search(&inst, &grid)?,
        _ => mechanism::audit_truthfulness(&inst, m, &grid)?,
    };
    let mut report = RunReport::new("audit");
    report.options = base_options(c);
    report.options.insert("model".into(), model.to_string());
    report.options.insert("grid".into(), format_rational(&grid));
    let code = if exploit.is_some() { 2 } else { 0 };
    report.audit = Some(AuditReportRow {
        model,
        clean: exploit.is_none(),
        exploit: exploit.map(|e| ExploitRow {
            agent: inst.agent(e.agent).id,
            misreport: rationals_to_text(&e.misreport),
            truthful_utility: format_rational(&e.truthful_utility),
            exploit_utility: format_rational(&e.exploit_utility),
            gain: format_rational(&e.gain),
            submitted: e.submitted.as_ref().map(format_rational),
        }),
    });
    Ok((report, c.format, code))
}

fn example_cmd(
    name: Option<&str>,
    format: OutputFormat,
    export: Option<&str>,
) -> Result<(RunReport, OutputFormat, i32)> {
    let mut report = RunReport::new("example");
    match name {
        None => {
            report.available = Some(
                registry::example_names()
                    .iter()
                    .map(|s| s.to_string())
                    .collect(),
            );
            Ok((report, format, 0))
        }
        Some(name) => {
            let ex = registry::load_example(name)?;
            for e in &ex.expectations {
                e.verify(&ex.instance)?;
            }
            report.options.insert("name".into(), name.to_string());
            let instance_file = InstanceFile::from_instance(&ex.instance, &ex.pinned_profiles);
            if let Some(path) = export {
                std::fs::write(path, serde_json::to_string_pretty(&instance_file).unwrap())
                    .map_err(|e| FairexError::Parse(format!("cannot write {path}: {e}")))?;
                report.options.insert("export".into(), path.to_string());
            }
            let mut profile_utilities = BTreeMap::new();
            for (pname, vals) in &ex.pinned_profiles {
                let u = registry::utilities_at(&ex.instance, vals)?;
                profile_utilities.insert(pname.clone(), rationals_to_text(&u));
            }
            report.example = Some(ExampleReport {
                name: ex.name.to_string(),
                note: ex.note.to_string(),
                instance: instance_file,
                expectations_verified: ex.expectations.len(),
                profile_utilities,
            });
            Ok((report, format, 0))
        }
    }
}

fn emit<W: Write>(report: &RunReport, format: OutputFormat, out: &mut W) {
    match format {
        OutputFormat::Json => {
            let _ = writeln!(out, "{}", report.to_json());
        }
        OutputFormat::Table => {
            let _ = write_table(report, out);
        }
    }
}

fn write_table<W: Write>(r: &RunReport, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "command: {}", r.command)?;
    for (k, v) in &r.options {
        writeln!(out, "  {k}: {v}")?;
    }
    if let Some(names) = &r.available {
        writeln!(out, "examples:")?;
        for n in names {
            writeln!(out, "  {n}")?;
        }
    }
    if let Some(s) = &r.solve {
        writeln!(out, "x: [{}]", s.x.join(", "))?;
        writeln!(out, "t: [{}]", s.t.join(", "))?;
        writeln!(
            out,
            "selection order: {}",
            s.selection_order
                .iter()
                .map(|a| a.to_string())
                .collect::<Vec<_>>()
                .join(" -> ")
        )?;
        writeln!(out, "{:>6} {:>5} {:>7} {:>12} {:>6}", "agent", "weak", "strict", "level", "floor")?;
        for d in &s.diagnostics {
            writeln!(
                out,
                "{:>6} {:>5} {:>7} {:>12} {:>6}",
                d.agent, d.weak_rank, d.strict_rank, d.active_level, d.floor_bound
            )?;
        }
    }
    if let Some(v) = &r.verify {
        writeln!(out, "verdict: {}", if v.pass { "pass" } else { "violation" })?;
        writeln!(
            out,
            "{:>6} {:>5} {:>7} {:>10} {:>12} {:>12} {:>4}",
            "agent", "weak", "strict", "total", "lower slack", "upper slack", "ok"
        )?;
        for c in &v.conditions {
            writeln!(
                out,
                "{:>6} {:>5} {:>7} {:>10} {:>12} {:>12} {:>4}",
                c.agent, c.weak_rank, c.strict_rank, c.total, c.lower_slack, c.upper_slack, c.ok
            )?;
        }
    }
    if let Some(o) = &r.oracle {
        writeln!(out, "verdict: {}", if o.pass { "pass" } else { "witness" })?;
        if let Some(w) = &o.witness {
            writeln!(out, "  agent {} moves {} -> {} gaining {}", w.agent, w.from, w.to, w.gain)?;
        }
    }
    if let Some(p) = &r.probe {
        writeln!(
            out,
            "probe: {} restarts, seed {}, {} non-converged",
            p.restarts, p.seed, p.non_converged
        )?;
        for (i, e) in p.equilibria.iter().enumerate() {
            writeln!(out, "  equilibrium {}: x=[{}] t=[{}]", i + 1, e.x.join(", "), e.t.join(", "))?;
        }
    }
    if let Some(p) = &r.pareto {
        writeln!(out, "reference: [{}]", p.reference.join(", "))?;
        writeln!(out, "verdict: {}", if p.undominated { "undominated" } else { "dominated" })?;
        if let Some(w) = &p.witness {
            writeln!(out, "  dominating profile: [{}]", w.profile.join(", "))?;
            writeln!(out, "  utility deltas: [{}]", w.utility_deltas.join(", "))?;
        }
    }
    if let Some(a) = &r.audit {
        writeln!(
            out,
            "model {}: {}",
            a.model,
            if a.clean { "clean" } else { "exploit found" }
        )?;
        if let Some(e) = &a.exploit {
            writeln!(out, "  agent {} misreports [{}]", e.agent, e.misreport.join(", "))?;
            writeln!(
                out,
                "  truthful {} -> exploit {} (gain {})",
                e.truthful_utility, e.exploit_utility, e.gain
            )?;
            if let Some(s) = &e.submitted {
                writeln!(out, "  exchange-stage submission: {s}")?;
            }
        }
    }
    if let Some(e) = &r.example {
        writeln!(out, "example: {}", e.name)?;
        writeln!(out, "note: {}", e.note)?;
        writeln!(out, "expectations verified: {}", e.expectations_verified)?;
        for (name, u) in &e.profile_utilities {
            writeln!(out, "  {name}: utilities [{}]", u.join(", "))?;
        }
    }
    Ok(())
}
