//! Subcommand implementations. Each returns the lines to print and writes
//! its files under the output directory.

use painleve_core::engine::{
    check_hypotheses, continue_from, endpoint_limit, local_step, monodromy_from, Arc, EngineError, EventKind,
    LimitOutcome, TraceStatus, VerdictKind,
};
use painleve_core::format_complex;
use painleve_core::poly::{fiber_roots, line_contained, BivariatePoly, PolyError, SingularSet};
use painleve_core::rhs::{BranchState, EvalError};
use painleve_core::solver::sigma_radius;
use serde_json::{json, Value};
use std::path::Path;
use thiserror::Error;

use crate::config::{Branch, ConfigError, ProblemConfig};
use crate::output::{complex_json, event_json, write_fiber_loci, write_json, write_trace};

#[derive(Debug, Error)]
pub enum Failure {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Hypothesis(String),
    #[error("{0}")]
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Hypothesis(_) => 1,
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Numerical(format!("output error: {e}"))
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Numerical(format!("output error: {e}"))
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Hypothesis(_) => Failure::Hypothesis(e.to_string()),
            EngineError::BadArc(_) | EngineError::ArcStart { .. } | EngineError::NotClosed { .. } => {
                Failure::Config(e.to_string())
            }
            EngineError::Eval(inner) => inner.into(),
            other => Failure::Numerical(other.to_string()),
        }
    }
}

impl From<EvalError> for Failure {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Pole { .. } | EvalError::BranchPoint { .. } => {
                Failure::Hypothesis(format!("F is not holomorphic at the initial point: {e}"))
            }
            EvalError::SheetCount { .. } | EvalError::InconsistentSheet { .. } => {
                Failure::Config(format!("field `branch`: {e}"))
            }
            other => Failure::Numerical(other.to_string()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Solve,
    Limit,
    Fiber,
    CheckLine,
    Monodromy,
    Bounds,
}

pub struct Output {
    pub lines: Vec<String>,
    /// Set when the command ran to completion but found a violation.
    pub failure: Option<Failure>,
}

pub fn run(cmd: Command, cfg: &ProblemConfig, out_dir: &Path, plot: bool) -> Result<Output, Failure> {
    std::fs::create_dir_all(out_dir)?;
    match cmd {
        Command::Solve => solve(cfg, out_dir, plot),
        Command::Limit => limit(cfg, out_dir, plot),
        Command::Fiber => fiber(cfg, out_dir),
        Command::CheckLine => check_line(cfg, out_dir),
        Command::Monodromy => monodromy(cfg, out_dir),
        Command::Bounds => bounds(cfg, out_dir),
    }
}

fn initial_state(cfg: &ProblemConfig) -> Result<BranchState, Failure> {
    Ok(match &cfg.branch {
        Branch::Convention(c) => cfg.rhs.init_branches(cfg.w0, cfg.z0, *c)?,
        Branch::Sheets(s) => cfg.rhs.branches_from_sheets(cfg.w0, cfg.z0, s.clone())?,
    })
}

fn singular_set(cfg: &ProblemConfig) -> Result<SingularSet, Failure> {
    SingularSet::new(cfg.rhs.singular_set().to_vec(), &cfg.options.solver.roots)
        .map_err(|e| Failure::Numerical(e.to_string()))
}

fn status_json(status: &TraceStatus) -> (&'static str, Value) {
    match status {
        TraceStatus::Completed => ("completed", Value::Null),
        TraceStatus::Stopped(kind) => ("stopped", json!(kind.name())),
    }
}

fn failed_event(status: &TraceStatus) -> Option<EventKind> {
    match status {
        TraceStatus::Stopped(
            k @ (EventKind::NumericalFailure | EventKind::ResidualFailure | EventKind::StepBudget),
        ) => Some(*k),
        _ => None,
    }
}

fn solve(cfg: &ProblemConfig, out_dir: &Path, plot: bool) -> Result<Output, Failure> {
    let arc = cfg.arc()?;
    let trace = continue_from(&cfg.rhs, initial_state(cfg)?, arc, &cfg.options)?;
    write_trace(&out_dir.join("trace.csv"), &trace, &[], &[])?;
    if plot {
        write_fiber_loci(&out_dir.join("fibers.csv"), arc, cfg.rhs.singular_set(), &cfg.options.solver.roots)?;
    }
    let (status, stop) = status_json(&trace.status);
    let summary = json!({
        "command": "solve",
        "rhs": cfg.rhs.source(),
        "status": status,
        "stop_event": stop,
        "steps": trace.steps.len(),
        "final": {
            "t": trace.tip.t,
            "z": complex_json(trace.tip.z),
            "w": complex_json(trace.tip.w),
        },
        "events": trace.events.iter().map(event_json).collect::<Vec<_>>(),
    });
    write_json(&out_dir.join("summary.json"), &summary)?;
    let mut lines = vec![format!(
        "{status} after {} steps: w({}) = {}",
        trace.steps.len(),
        format_complex(trace.tip.z),
        format_complex(trace.tip.w)
    )];
    lines.extend(trace.events.iter().map(|e| format!("event {} at t = {}: {}", e.kind, e.t, e.detail)));
    let failure = failed_event(&trace.status).map(|k| Failure::Numerical(format!("continuation stopped: {k}")));
    Ok(Output { lines, failure })
}

fn limit_one(cfg: &ProblemConfig, arc: &Arc) -> Result<(painleve_core::engine::ContinuationTrace, LimitOutcome), Failure> {
    let trace = continue_from(&cfg.rhs, initial_state(cfg)?, arc, &cfg.options)?;
    let outcome = endpoint_limit(&trace, &cfg.rhs, &cfg.options)?;
    Ok((trace, outcome))
}

fn verdict_value(kind: &VerdictKind) -> Value {
    match kind {
        VerdictKind::Finite(c) => complex_json(*c),
        _ => Value::Null,
    }
}

fn limit(cfg: &ProblemConfig, out_dir: &Path, plot: bool) -> Result<Output, Failure> {
    cfg.arc()?;
    let results: Vec<Result<_, Failure>> = std::thread::scope(|scope| {
        let handles: Vec<_> = cfg.arcs.iter().map(|arc| scope.spawn(move || limit_one(cfg, arc))).collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Failure::Numerical("continuation thread panicked".into()))))
            .collect()
    });
    let many = cfg.arcs.len() > 1;
    let mut runs = Vec::new();
    let mut lines = Vec::new();
    for (i, (arc, result)) in cfg.arcs.iter().zip(results).enumerate() {
        let (trace, outcome) = result?;
        let name = if many { format!("trace_{i}.csv") } else { "trace.csv".to_string() };
        write_trace(&out_dir.join(&name), &trace, &outcome.resumed_steps, &outcome.resumed_events)?;
        if plot {
            let fname = if many { format!("fibers_{i}.csv") } else { "fibers.csv".to_string() };
            write_fiber_loci(&out_dir.join(fname), arc, cfg.rhs.singular_set(), &cfg.options.solver.roots)?;
        }
        let v = &outcome.verdict;
        let (status, stop) = status_json(&trace.status);
        runs.push(json!({
            "arc": arc.vertices().iter().map(|&z| complex_json(z)).collect::<Vec<_>>(),
            "trace_file": name,
            "status": status,
            "stop_event": stop,
            "steps": trace.steps.len(),
            "resumed_steps": outcome.resumed_steps.len(),
            "verdict": {
                "kind": v.kind.name(),
                "value": verdict_value(&v.kind),
                "tail_diameter": v.tail_diameter,
                "samples_used": v.samples_used,
                "endpoint_gap": v.endpoint_gap,
                "diagnostics": v.diagnostics,
            },
            "events": trace.events.iter().chain(&outcome.resumed_events).map(event_json).collect::<Vec<_>>(),
        }));
        let value = match &v.kind {
            VerdictKind::Finite(c) => format!(" {}", format_complex(*c)),
            _ => String::new(),
        };
        lines.push(format!(
            "{}verdict {}{value} (tail diameter {:e}, {} samples, {} steps)",
            if many { format!("arc {i}: ") } else { String::new() },
            v.kind.name(),
            v.tail_diameter,
            v.samples_used,
            trace.steps.len() + outcome.resumed_steps.len()
        ));
    }
    let summary = if many {
        json!({ "command": "limit", "rhs": cfg.rhs.source(), "runs": runs })
    } else {
        let mut one = runs.pop().expect("one arc");
        one["command"] = json!("limit");
        one["rhs"] = json!(cfg.rhs.source());
        one
    };
    write_json(&out_dir.join("summary.json"), &summary)?;
    Ok(Output { lines, failure: None })
}

/// Polynomials to query: `[fiber].poly` when given, else the singular set.
fn query_polys(cfg: &ProblemConfig) -> Vec<(String, BivariatePoly)> {
    match &cfg.fiber_poly {
        Some((text, p)) => vec![(text.clone(), p.clone())],
        None => cfg.rhs.singular_set().iter().map(|p| (p.to_string(), p.clone())).collect(),
    }
}

fn fiber(cfg: &ProblemConfig, out_dir: &Path) -> Result<Output, Failure> {
    let nu = cfg.fiber_nu.unwrap_or(cfg.z0);
    let mut lines = Vec::new();
    let mut fibers = Vec::new();
    let mut contained = Vec::new();
    for (text, p) in query_polys(cfg) {
        match fiber_roots(&p, nu, &cfg.options.solver.roots) {
            Ok(f) => {
                lines.push(format!("{{{text}}} at z = {}: {} roots", format_complex(nu), f.count()));
                for r in &f.roots {
                    lines.push(format!("  {} (multiplicity {})", format_complex(r.value), r.multiplicity));
                }
                fibers.push(json!({
                    "poly": text,
                    "status": "ok",
                    "degree_drop": f.degree_drop,
                    "roots": f.roots.iter().map(|r| json!({
                        "re": r.value.re, "im": r.value.im, "multiplicity": r.multiplicity
                    })).collect::<Vec<_>>(),
                }));
            }
            Err(PolyError::LineContained { .. }) => {
                lines.push(format!("{{{text}}} contains the line z = {}", format_complex(nu)));
                contained.push(text.clone());
                fibers.push(json!({ "poly": text, "status": "line-contained" }));
            }
            Err(e) => return Err(Failure::Numerical(format!("{{{text}}}: {e}"))),
        }
    }
    write_json(&out_dir.join("fiber.json"), &json!({ "nu": complex_json(nu), "fibers": fibers }))?;
    let failure = (!contained.is_empty()).then(|| {
        Failure::Hypothesis(format!(
            "the line z = {} lies in {{{}}}",
            format_complex(nu),
            contained.join("}, {")
        ))
    });
    Ok(Output { lines, failure })
}

fn check_line(cfg: &ProblemConfig, out_dir: &Path) -> Result<Output, Failure> {
    let polys = query_polys(cfg);
    let mut lines = Vec::new();
    let mut violations = Vec::new();
    let mut point = Vec::new();
    if let Some(nu) = cfg.fiber_nu {
        for (text, p) in &polys {
            let c = line_contained(p, nu);
            lines.push(format!("line z = {} in {{{text}}}: {c}", format_complex(nu)));
            point.push(json!({ "poly": text, "nu": complex_json(nu), "contained": c }));
            if c {
                violations.push(format!("the line z = {} lies in {{{text}}}", format_complex(nu)));
            }
        }
    }
    let mut arc_report = Value::Null;
    if let Some(arc) = cfg.arcs.first() {
        let set = SingularSet::new(polys.iter().map(|(_, p)| p.clone()).collect(), &cfg.options.solver.roots)
            .map_err(|e| Failure::Numerical(e.to_string()))?;
        let report = check_hypotheses(&set, arc);
        lines.push(format!("arc: {report}"));
        arc_report = json!({
            "passed": report.passed(),
            "samples_checked": report.samples_checked,
            "violations": report.violations.iter().map(|v| json!({
                "poly": v.polynomial,
                "nu": complex_json(v.nu),
                "t": v.t,
            })).collect::<Vec<_>>(),
        });
        if !report.passed() {
            violations.push(format!("arc: {report}"));
        }
    }
    if cfg.fiber_nu.is_none() && cfg.arcs.is_empty() {
        return Err(Failure::Config("check-line needs `fiber.nu` or `arc`".into()));
    }
    write_json(&out_dir.join("check_line.json"), &json!({ "lines": point, "arc": arc_report }))?;
    let failure = (!violations.is_empty()).then(|| Failure::Hypothesis(violations.join("; ")));
    Ok(Output { lines, failure })
}

fn monodromy(cfg: &ProblemConfig, out_dir: &Path) -> Result<Output, Failure> {
    let loop_arc = cfg
        .loop_arc
        .as_ref()
        .ok_or_else(|| Failure::Config("missing field `monodromy.loop`".into()))?;
    let report = monodromy_from(&cfg.rhs, &initial_state(cfg)?, loop_arc)?;
    let mut lines = Vec::new();
    let sheets: Vec<Value> = report
        .sheets
        .iter()
        .map(|s| {
            lines.push(format!(
                "rad #{} (index {}): multiplier {}{}",
                s.radical,
                s.index,
                format_complex(s.multiplier),
                match s.order {
                    Some(o) => format!(", root of unity of order {o}"),
                    None => ", not a root of unity".to_string(),
                }
            ));
            json!({
                "radical": s.radical,
                "index": s.index,
                "initial": complex_json(s.initial),
                "final": complex_json(s.final_value),
                "multiplier": complex_json(s.multiplier),
                "root_of_unity": s.root_of_unity,
                "order": s.order,
            })
        })
        .collect();
    write_json(
        &out_dir.join("monodromy.json"),
        &json!({ "w": complex_json(report.w), "z": complex_json(report.z), "sheets": sheets }),
    )?;
    Ok(Output { lines, failure: None })
}

fn bounds(cfg: &ProblemConfig, out_dir: &Path) -> Result<Output, Failure> {
    let state = initial_state(cfg)?;
    let set = singular_set(cfg)?;
    let (sol, b) = local_step(&cfg.rhs, &state, &cfg.options)?;
    let proximity = set.proximity(cfg.w0, cfg.z0, &Default::default());
    let sigma = sigma_radius(b.a, b.b, b.t_hat);
    let value = json!({
        "w0": complex_json(cfg.w0),
        "z0": complex_json(cfg.z0),
        "proximity": if proximity.is_finite() { json!(proximity) } else { Value::Null },
        "a": b.a,
        "b": b.b,
        "m_hat": b.m_hat,
        "k_hat": b.k_hat,
        "t_hat": b.t_hat,
        "guaranteed_radius": sol.guaranteed_radius,
        "sigma": sigma,
        "residual": sol.residual,
    });
    write_json(&out_dir.join("bounds.json"), &value)?;
    let lines = vec![
        format!("a = {}, b = {}", b.a, b.b),
        format!("M = {}, K = {}, T = {}", b.m_hat, b.k_hat, b.t_hat),
        format!("r = {}, sigma = {}, residual = {:e}", sol.guaranteed_radius, sigma, sol.residual),
    ];
    Ok(Output { lines, failure: None })
}
