//! Command-line front end: reads cost tables, project tables, probability
//! constraints and capacity studies, applies a decision rule and prints a
//! summary, optionally writing a JSON report.

pub mod error;
pub mod formats;
pub mod report;

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use lwr_core::capacity::{emit_curves, minimax_regret_capacity, pointwise_extremes, reduce_study, CapacityStudy};
use lwr_core::finite::{find_preference_cycles, gaming_construct, iia_probe, minimax_select, rationalizability, Selection};
use lwr_core::montecarlo::{run_study, McConfig};
use lwr_core::projects::{essential_scenarios, project_iia_probe, select_projects, AdditiveProjectInstance, SubsetSelection};
use lwr_core::robust::{inner_max, robust_select_finite};
use lwr_core::{regret_transform, CostMatrix, RegretKind};
use serde_json::{json, Value};

pub use error::{CliError, CliResult, EXIT_INPUT, EXIT_OK, EXIT_SOLVER, EXIT_USAGE};
use formats::read_input;
use report::{fingerprint, Report};

#[derive(Debug, Parser)]
#[command(name = "lwr", version, about = "Minimax cost and minimax regret decision analysis")]
struct Cli {
    /// Write a JSON report to this file.
    #[arg(long, global = true, value_name = "OUT.json")]
    report: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Rule {
    MinimaxCost,
    MinimaxRegret,
    MinimaxMeanRegret,
    MinimaxMedianRegret,
}

impl Rule {
    fn kind(self) -> RegretKind {
        match self {
            Rule::MinimaxCost => RegretKind::Cost,
            Rule::MinimaxRegret => RegretKind::RegretMin,
            Rule::MinimaxMeanRegret => RegretKind::RegretMean,
            Rule::MinimaxMedianRegret => RegretKind::RegretMedian,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Rule::MinimaxCost => "minimax-cost",
            Rule::MinimaxRegret => "minimax-regret",
            Rule::MinimaxMeanRegret => "minimax-mean-regret",
            Rule::MinimaxMedianRegret => "minimax-median-regret",
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Apply a rule to a cost table.
    Analyze(AnalyzeArgs),
    /// Probe a rule for IIA violations, preference cycles, rationalizability or gaming.
    Probe(ProbeArgs),
    /// Robust rule over a probability polytope.
    Robust(RobustArgs),
    /// Choose a subset of projects with additive costs.
    Projects(ProjectsArgs),
    /// Minimax-regret capacity for a capacity study.
    Capacity(CapacityArgs),
    /// Compare minimax cost and minimax regret on random instances.
    Montecarlo(MonteCarloArgs),
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[arg(long, value_name = "F")]
    costs: PathBuf,
    #[arg(long, value_enum)]
    rule: Rule,
    /// Remove a decision before applying the rule (repeatable).
    #[arg(long, value_name = "N")]
    drop_decision: Vec<String>,
    /// Remove a scenario before applying the rule (repeatable).
    #[arg(long, value_name = "N")]
    drop_scenario: Vec<String>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("probe").required(true).args(["iia", "cycles", "rationalize", "game"])))]
struct ProbeArgs {
    #[arg(long, value_name = "F")]
    costs: PathBuf,
    #[arg(long, value_enum)]
    rule: Rule,
    #[arg(long)]
    iia: bool,
    #[arg(long)]
    cycles: bool,
    /// Decision to rationalize by expected cost.
    #[arg(long, value_name = "D")]
    rationalize: Option<String>,
    /// Decision to make a minimax-regret winner by injecting a new decision.
    #[arg(long, value_name = "D", requires = "pivot")]
    game: Option<String>,
    /// Scenario in which the gaming target is the strict unique minimizer.
    #[arg(long, value_name = "S", requires = "game")]
    pivot: Option<String>,
}

#[derive(Debug, Args)]
struct RobustArgs {
    #[arg(long, value_name = "F")]
    costs: PathBuf,
    #[arg(long, value_name = "G")]
    constraints: PathBuf,
    #[arg(long, value_enum)]
    rule: Rule,
}

#[derive(Debug, Args)]
struct ProjectsArgs {
    #[arg(long, value_name = "P.csv")]
    costs: PathBuf,
    /// Base costs per scenario, `scenario,W`.
    #[arg(long, value_name = "W.csv")]
    base: Option<PathBuf>,
    #[arg(long, value_enum)]
    rule: Rule,
    /// Remove a project before selecting (repeatable).
    #[arg(long, value_name = "N")]
    drop_project: Vec<String>,
    /// Re-select with each scenario removed.
    #[arg(long)]
    essential: bool,
    /// Re-select with each unchosen project removed.
    #[arg(long)]
    iia: bool,
}

#[derive(Debug, Args)]
struct CapacityArgs {
    #[arg(long, value_name = "M.json")]
    model: PathBuf,
    /// Write cost and regret curves to this CSV file.
    #[arg(long, value_name = "OUT.csv", requires = "grid_step")]
    curves: Option<PathBuf>,
    /// Curve grid spacing in MW.
    #[arg(long, value_name = "MW", requires = "curves")]
    grid_step: Option<f64>,
    /// Drop scenarios inside the hull of the others before solving.
    #[arg(long)]
    reduce: bool,
}

#[derive(Debug, Args)]
struct MonteCarloArgs {
    #[arg(long, value_name = "N")]
    samples: u64,
    #[arg(long, value_name = "S")]
    seed: u64,
}

/// Parses `argv` (program name first), runs the command and returns the exit
/// code. The summary goes to `out` and diagnostics to `err`.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(&cli) {
        Ok((summary, report)) => {
            if let Some(path) = &cli.report {
                if let Err(source) = std::fs::write(path, report.to_json()) {
                    let _ = writeln!(err, "error: {}", CliError::Io { path: path.clone(), source });
                    return EXIT_INPUT;
                }
            }
            let _ = out.write_all(summary.as_bytes());
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

type Outcome = CliResult<(String, Report)>;

fn execute(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Probe(a) => probe(a),
        Command::Robust(a) => robust(a),
        Command::Projects(a) => projects(a),
        Command::Capacity(a) => capacity(a),
        Command::Montecarlo(a) => montecarlo(a),
    }
}

fn load_costs(path: &Path) -> CliResult<(CostMatrix, String)> {
    let text = read_input(path)?;
    Ok((formats::cost_matrix_from_str(&text, path)?, text))
}

fn braces(labels: &[String]) -> String {
    format!("{{{}}}", labels.join(", "))
}

fn write_selection(out: &mut String, rule: Rule, sel: &Selection) {
    let _ = writeln!(out, "rule: {} ({})", rule.name(), rule.kind());
    let _ = writeln!(out, "chosen: {}", sel.chosen);
    let _ = writeln!(out, "value: {}", sel.value);
    let _ = writeln!(out, "argmin: {}", braces(&sel.argmin_set));
    let _ = writeln!(out, "active scenarios: {}", braces(&sel.active_scenarios));
    let _ = writeln!(out, "tie-break: {}", sel.tie_break);
}

fn fill_selection(report: &mut Report, sel: &Selection) {
    report.chosen = json!(sel.chosen);
    report.value = Some(sel.value);
    report.argmin_set = sel.argmin_set.clone();
    report.active_scenarios = sel.active_scenarios.clone();
    report.tie_break = Some(sel.tie_break.clone());
}

fn analyze(a: &AnalyzeArgs) -> Outcome {
    let (mut m, text) = load_costs(&a.costs)?;
    for d in &a.drop_decision {
        m = m.without_decision(d)?;
    }
    for s in &a.drop_scenario {
        m = m.without_scenario(s)?;
    }
    let sel = minimax_select(&m, a.rule.kind());
    let mut out = String::new();
    for d in &a.drop_decision {
        let _ = writeln!(out, "dropped decision: {d}");
    }
    for s in &a.drop_scenario {
        let _ = writeln!(out, "dropped scenario: {s}");
    }
    write_selection(&mut out, a.rule, &sel);
    let mut report = Report::new("analyze", a.rule.name(), fingerprint([("costs", text.as_bytes())]));
    fill_selection(&mut report, &sel);
    let r = regret_transform(&m, a.rule.kind());
    report.details = json!({
        "dropped_decisions": a.drop_decision,
        "dropped_scenarios": a.drop_scenario,
        "worst_case": m.decisions().iter().zip(r.column_maxima()).map(|(d, v)| json!({"decision": d, "value": v})).collect::<Vec<_>>(),
    });
    Ok((out, report))
}

fn probe(a: &ProbeArgs) -> Outcome {
    let (m, text) = load_costs(&a.costs)?;
    let kind = a.rule.kind();
    let mut out = String::new();
    let mut report = Report::new("probe", a.rule.name(), fingerprint([("costs", text.as_bytes())]));
    if a.iia {
        let r = iia_probe(&m, kind)?;
        write_selection(&mut out, a.rule, &r.baseline);
        fill_selection(&mut report, &r.baseline);
        if r.findings.is_empty() {
            let _ = writeln!(out, "IIA: no removal changes the choice");
        }
        for f in &r.findings {
            let _ = writeln!(out, "IIA violation: removing {} changes {} to {}", f.removed, f.old_choice, f.new_choice);
            report.findings.push(json!({"probe": "iia", "removed": f.removed, "old_choice": f.old_choice, "new_choice": f.new_choice}));
        }
    } else if a.cycles {
        let sel = minimax_select(&m, kind);
        write_selection(&mut out, a.rule, &sel);
        fill_selection(&mut report, &sel);
        let cycles = find_preference_cycles(&m, kind);
        if cycles.is_empty() {
            let _ = writeln!(out, "cycles: none");
        }
        for c in &cycles {
            let edges: Vec<String> = c.edges.iter().map(|(w, l)| format!("{w} > {l}")).collect();
            let _ = writeln!(out, "cycle: {}", edges.join(", "));
            report.findings.push(json!({"probe": "cycle", "edges": c.edges.iter().map(|(w, l)| json!({"winner": w, "loser": l})).collect::<Vec<_>>()}));
        }
    } else if let Some(target) = &a.rationalize {
        let r = rationalizability(&m, target)?;
        match &r.probabilities {
            Some(p) => {
                let parts: Vec<String> = m.scenarios().iter().zip(p).map(|(s, v)| format!("{s}: {v}")).collect();
                let _ = writeln!(out, "{target} is rationalizable: p = ({})", parts.join(", "));
            }
            None => {
                let _ = writeln!(out, "{target} is not rationalizable: no probability vector makes it an expected-cost minimizer");
            }
        }
        report.chosen = json!(target);
        report.findings.push(json!({
            "probe": "rationalize",
            "target": target,
            "feasible": r.feasible,
            "probabilities": r.probabilities.as_ref().map(|p| m.scenarios().iter().zip(p).map(|(s, v)| (s.to_string(), json!(v))).collect::<serde_json::Map<_, _>>()),
        }));
    } else if let (Some(target), Some(pivot)) = (&a.game, &a.pivot) {
        let (g, augmented) = gaming_construct(&m, target, pivot)?;
        let sel = minimax_select(&augmented, RegretKind::RegretMin);
        let costs: Vec<String> = m.scenarios().iter().zip(&g.injected_costs).map(|(s, v)| format!("{s}: {v}")).collect();
        let _ = writeln!(out, "injected decision {}: M = {}, L = {}, costs ({})", g.injected_label, g.m, g.l, costs.join(", "));
        let _ = writeln!(out, "target {target} in minimax-regret argmin: {}", sel.argmin_set.contains(target));
        write_selection(&mut out, Rule::MinimaxRegret, &sel);
        fill_selection(&mut report, &sel);
        report.findings.push(json!({"probe": "game", "construction": g}));
    }
    Ok((out, report))
}

fn robust(a: &RobustArgs) -> Outcome {
    let (m, costs_text) = load_costs(&a.costs)?;
    let constraints_text = read_input(&a.constraints)?;
    let poly = formats::polytope_from_str(&constraints_text, &a.constraints, m.scenarios())?;
    let sel = robust_select_finite(&m, a.rule.kind(), &poly)?;
    let column = regret_transform(&m, a.rule.kind()).column(sel.chosen_index);
    let worst = inner_max(&column, &poly)?;
    let mut out = String::new();
    write_selection(&mut out, a.rule, &sel);
    let parts: Vec<String> = m.scenarios().iter().zip(&worst.probabilities).map(|(s, p)| format!("{s}: {p}")).collect();
    let _ = writeln!(out, "worst-case probabilities: ({})", parts.join(", "));
    let mut report = Report::new(
        "robust",
        a.rule.name(),
        fingerprint([("costs", costs_text.as_bytes()), ("constraints", constraints_text.as_bytes())]),
    );
    fill_selection(&mut report, &sel);
    report.details = json!({
        "constraint_rows": poly.n_rows(),
        "worst_case_probabilities": m.scenarios().iter().zip(&worst.probabilities).map(|(s, p)| (s.to_string(), json!(p))).collect::<serde_json::Map<_, _>>(),
        "duality_gap": worst.duality_gap,
    });
    Ok((out, report))
}

fn write_subset(out: &mut String, rule: Rule, sel: &SubsetSelection) {
    let _ = writeln!(out, "rule: {} ({})", rule.name(), rule.kind());
    let _ = writeln!(out, "chosen: {}", braces(&sel.chosen));
    let _ = writeln!(out, "value: {}", sel.value);
    let _ = writeln!(out, "argmin: {}", sel.argmin.join(" "));
    let _ = writeln!(out, "active scenarios: {}", braces(&sel.active_scenarios));
    let _ = writeln!(out, "tie-break: {}", sel.tie_break);
}

fn projects(a: &ProjectsArgs) -> Outcome {
    let text = read_input(&a.costs)?;
    let mut inst: AdditiveProjectInstance = formats::project_instance_from_str(&text, &a.costs)?;
    let mut inputs = vec![("costs", text.into_bytes())];
    if let Some(path) = &a.base {
        let base_text = read_input(path)?;
        if inst.base().iter().any(|&w| w != 0.0) {
            return Err(CliError::Usage("base costs given both in the project table and with --base".into()));
        }
        let base = formats::base_costs_from_str(&base_text, path, inst.scenarios())?;
        inst = inst.with_base(base)?;
        inputs.push(("base", base_text.into_bytes()));
    }
    for p in &a.drop_project {
        inst = inst.without_project(p)?;
    }
    let kind = a.rule.kind();
    let sel = select_projects(&inst, kind)?;
    let mut out = String::new();
    for p in &a.drop_project {
        let _ = writeln!(out, "dropped project: {p}");
    }
    write_subset(&mut out, a.rule, &sel);
    let mut report = Report::new("projects", a.rule.name(), fingerprint(inputs.iter().map(|(r, b)| (*r, b.as_slice()))));
    report.chosen = json!(sel.chosen);
    report.value = Some(sel.value);
    report.argmin_set = sel.argmin.clone();
    report.active_scenarios = sel.active_scenarios.clone();
    report.tie_break = Some(sel.tie_break.clone());
    report.details = json!({"dropped_projects": a.drop_project, "projects": inst.projects()});
    if a.iia {
        let r = project_iia_probe(&inst, kind)?;
        if r.findings.is_empty() {
            let _ = writeln!(out, "project IIA: dropping any unchosen project leaves the choice unchanged");
        }
        for f in &r.findings {
            let _ = writeln!(
                out,
                "project IIA violation: dropping {} changes {} (value {}) to {} (value {})",
                f.dropped,
                braces(&f.old_subset),
                f.old_value,
                braces(&f.new_subset),
                f.new_value
            );
            report.findings.push(json!({"probe": "project-iia", "finding": f}));
        }
    }
    if a.essential {
        let e = essential_scenarios(&inst, kind)?;
        for o in &e.outcomes {
            let _ = writeln!(
                out,
                "without scenario {}: {} (value {}){}",
                o.dropped,
                braces(&o.new_subset),
                o.value,
                if o.essential { ", essential" } else { "" }
            );
            report.findings.push(json!({"probe": "essential", "outcome": o}));
        }
        let _ = writeln!(out, "essential scenarios: {} of {} with {} projects", e.essential_count, e.outcomes.len(), inst.projects().len());
    }
    Ok((out, report))
}

fn capacity(a: &CapacityArgs) -> Outcome {
    let text = read_input(&a.model)?;
    let study: CapacityStudy = formats::capacity_study_from_str(&text, &a.model)?;
    let mut out = String::new();
    let mut report = Report::new("capacity", "minimax-regret", fingerprint([("model", text.as_bytes())]));
    let mut details = serde_json::Map::new();
    details.insert("units".into(), json!({"capacity": "MW", "energy": "MWh", "money": "GBP"}));
    let solved = if a.reduce {
        let r = reduce_study(&study)?;
        let _ = writeln!(out, "reduction: kept {}, removed {}", braces(&r.retained_labels), braces(&r.removed_labels));
        details.insert("reduction".into(), json!(r));
        CapacityStudy { scenarios: r.retained.iter().map(|&i| study.scenarios[i].clone()).collect(), ..study.clone() }
    } else {
        study.clone()
    };
    let sol = minimax_regret_capacity(&solved)?;
    let _ = writeln!(out, "capacity to secure: {:.3} MW", sol.x_star[0]);
    let _ = writeln!(out, "worst regret: {:.2} GBP", sol.value);
    let _ = writeln!(out, "active scenarios: {}", braces(&sol.active));
    let _ = writeln!(out, "determining scenarios: {}", braces(&sol.determining_set));
    if let Some((lo, hi)) = pointwise_extremes(&study) {
        let _ = writeln!(out, "pointwise extremes: {}, {}", study.scenarios[lo].name, study.scenarios[hi].name);
        details.insert("pointwise_extremes".into(), json!([study.scenarios[lo].name, study.scenarios[hi].name]));
    }
    for w in &sol.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    if let (Some(path), Some(step)) = (&a.curves, a.grid_step) {
        let table = emit_curves(&study, step)?;
        std::fs::write(path, table.to_csv()).map_err(|source| CliError::Io { path: path.clone(), source })?;
        let _ = writeln!(out, "curves: {} grid points written to {}", table.x.len(), path.display());
        details.insert("curve_points".into(), json!(table.x.len()));
    }
    details.insert("x_star_mw".into(), json!(sol.x_star[0]));
    details.insert("warnings".into(), json!(sol.warnings));
    details.insert("determining_set".into(), json!(sol.determining_set));
    report.chosen = json!(sol.x_star[0]);
    report.value = Some(sol.value);
    report.active_scenarios = sol.active.clone();
    report.details = Value::Object(details);
    Ok((out, report))
}

fn montecarlo(a: &MonteCarloArgs) -> Outcome {
    let config = McConfig::new(a.samples, a.seed);
    let result = run_study(&config)?;
    let mut out = String::new();
    let _ = writeln!(out, "samples: {}, seed: {}", result.samples, result.seed);
    for r in &result.results {
        let _ = writeln!(out, "{}: mean expected cost {:.6} (standard error {:.6})", r.rule.name(), r.mean, r.std_error);
    }
    let params = format!("samples={};seed={}", a.samples, a.seed);
    let mut report = Report::new("montecarlo", "minimax-cost,minimax-regret", fingerprint([("parameters", params.as_bytes())]));
    report.details = json!(result);
    Ok((out, report))
}
