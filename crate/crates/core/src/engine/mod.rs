//! Continuation of the local solution along an arc by overlapping discs, with
//! branch tracking, events, the endpoint-limit verdict on the sphere, boundary
//! extension and monodromy reports.

mod arc;
mod limit;
mod monodromy;

pub use arc::Arc;
pub use limit::{
    endpoint_limit, extend_to_boundary, verdict_from_samples, LimitOutcome, LimitSample, LimitVerdict,
    VerdictKind,
};
pub use monodromy::{monodromy_from, monodromy_loop, MonodromyReport, SheetMultiplier};

use num_complex::Complex64;
use std::fmt;
use thiserror::Error;

use crate::poly::{line_contained, PolyError, ProximityOptions, SingularSet};
use crate::rhs::{BranchConvention, BranchState, EvalError, Expression};
use crate::solver::{
    estimate_bounds, sigma_radius, solve_local, LocalBounds, LocalSolution, SolverError, SolverOptions,
};

/// Interior samples per arc segment in the hypothesis check.
const SEGMENT_SAMPLES: usize = 7;
/// Attempts at halving the bidisc after a residual failure.
const RESIDUAL_RETRIES: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("invalid arc: {0}")]
    BadArc(String),
    #[error("arc starts at {arc_start} but the initial point is z0 = {z0}")]
    ArcStart { arc_start: Complex64, z0: Complex64 },
    #[error("hypothesis violated: {0}")]
    Hypothesis(HypothesisReport),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("only {available} limit samples available (need at least 4)")]
    TraceTooShort { available: usize },
    #[error("no guaranteed disc from the trace reaches z = {z_inf}")]
    NoGuaranteedDisc { z_inf: Complex64 },
    #[error("limit candidate (w, z) = ({w}, {z}) is within {proximity:e} of the singular set")]
    CandidateNearSingular {
        w: Complex64,
        z: Complex64,
        proximity: f64,
    },
    #[error("loop is not closed: starts at {start}, ends at {end}")]
    NotClosed { start: Complex64, end: Complex64 },
    #[error("{kind}: {detail}")]
    Step { kind: EventKind, detail: String },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContinuationOptions {
    pub solver: SolverOptions,
    /// Cap on the `z`-radius `a` of the bidisc; the `w`-radius cap is this
    /// times `1 + |w|`.
    pub max_radius: f64,
    /// `SingularApproach` below this proximity.
    pub proximity_floor: f64,
    /// `Blowup` above this modulus.
    pub r_max: f64,
    /// `StepUnderflow` when the bidisc or guaranteed radius falls below this.
    pub min_step: f64,
    /// Largest advance along the arc in one step (lifted while resuming
    /// toward the endpoint).
    pub max_advance: f64,
    pub max_steps: usize,
    /// Chordal diameter below which the tail gives a verdict.
    pub verdict_tol: f64,
    /// Number of tail samples entering the verdict.
    pub verdict_window: usize,
    /// Geometric samples toward the endpoint.
    pub j_max: usize,
    /// Largest distance, relative to the arc length, between the last
    /// sample and the endpoint for a verdict.
    pub endpoint_gap_tol: f64,
    pub branch_convention: BranchConvention,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            max_radius: 0.5,
            proximity_floor: 1e-4,
            r_max: 1e6,
            min_step: 1e-9,
            max_advance: 0.5,
            max_steps: 20_000,
            verdict_tol: 1e-3,
            verdict_window: 8,
            j_max: 40,
            endpoint_gap_tol: 1e-3,
            branch_convention: BranchConvention::PrincipalPositiveReal,
        }
    }
}

/// Hypothesis violation: component `component` contains the line `z = nu`
/// and `nu` lies on the arc.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub component: usize,
    pub polynomial: String,
    pub nu: Complex64,
    /// Arc parameter of the sample, when it came from sampling.
    pub t: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct HypothesisReport {
    pub violations: Vec<Violation>,
    pub samples_checked: usize,
}

impl HypothesisReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for HypothesisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            return write!(f, "no complex line z = ν (ν on the arc) lies in the singular set");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "the line z = {} lies in component {{{}}}", v.nu, v.polynomial)?;
            if let Some(t) = v.t {
                write!(f, " (arc t = {t})")?;
            }
        }
        Ok(())
    }
}

/// Checks that no component of the singular set contains a line `z = ν`
/// with `ν` on the arc: by sampling vertices and segment points, and exactly
/// through each component's contained lines.
pub fn check_hypotheses(singular: &SingularSet, arc: &Arc) -> HypothesisReport {
    let mut report = HypothesisReport::default();
    let mut samples: Vec<f64> = Vec::new();
    for i in 0..arc.vertices().len() - 1 {
        let (t0, t1) = (arc.vertex_t(i), arc.vertex_t(i + 1));
        for k in 0..=SEGMENT_SAMPLES {
            samples.push(t0 + (t1 - t0) * k as f64 / (SEGMENT_SAMPLES + 1) as f64);
        }
    }
    samples.push(1.0);
    let scale = arc.length();
    for (ci, p) in singular.components().iter().enumerate() {
        let mut found: Vec<Complex64> = Vec::new();
        for &t in &samples {
            let nu = arc.point_at(t);
            report.samples_checked += 1;
            if line_contained(p, nu) {
                found.push(nu);
                report.violations.push(Violation {
                    component: ci,
                    polynomial: p.to_string(),
                    nu,
                    t: Some(t),
                });
            }
        }
        for &nu in singular.vertical_lines(ci) {
            let already = found.iter().any(|f| (f - nu).norm() <= 1e-9 * (1.0 + nu.norm()));
            if !already && arc.distance_to(nu) <= 1e-12 * (1.0 + scale) {
                report.violations.push(Violation {
                    component: ci,
                    polynomial: p.to_string(),
                    nu,
                    t: None,
                });
            }
        }
    }
    report
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventKind {
    SingularApproach,
    Blowup,
    StepUnderflow,
    ResidualFailure,
    StepBudget,
    NumericalFailure,
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::SingularApproach => "singular-approach",
            EventKind::Blowup => "blowup",
            EventKind::StepUnderflow => "step-underflow",
            EventKind::ResidualFailure => "residual-failure",
            EventKind::StepBudget => "step-budget",
            EventKind::NumericalFailure => "numerical-failure",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Event {
    pub t: f64,
    pub z: Complex64,
    pub w: Complex64,
    pub kind: EventKind,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TraceStatus {
    Completed,
    Stopped(EventKind),
}

/// One disc of the continuation.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub z: Complex64,
    pub w: Complex64,
    pub local: LocalSolution,
    pub bounds: LocalBounds,
    pub sigma: f64,
    pub branches: BranchState,
    /// Chord from this center to the next one (0 for the last step).
    pub advance: f64,
}

/// Where the continuation currently stands (possibly not yet solved).
#[derive(Clone, Debug, PartialEq)]
pub struct Tip {
    pub t: f64,
    pub z: Complex64,
    pub w: Complex64,
    pub branches: BranchState,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContinuationTrace {
    pub arc: Arc,
    pub steps: Vec<StepRecord>,
    pub events: Vec<Event>,
    pub status: TraceStatus,
    pub tip: Tip,
}

impl ContinuationTrace {
    /// `w(γ(t))` from the disc of the last step at or before `t`, when
    /// `γ(t)` lies in its guaranteed disc.
    pub fn value_at_t(&self, t: f64) -> Option<Complex64> {
        let idx = self.steps.partition_point(|s| s.t <= t);
        let step = self.steps.get(idx.checked_sub(1)?)?;
        let z = self.arc.point_at(t);
        ((z - step.z).norm() <= step.local.guaranteed_radius).then(|| step.local.series.eval(z))
    }

    /// `|s_i(m) - s_{i+1}(m)| / (1 + |w_i|)` at the midpoint `m` of consecutive centers.
    pub fn gluing_errors(&self) -> Vec<f64> {
        self.steps
            .windows(2)
            .map(|p| {
                let m = (p[0].z + p[1].z) * 0.5;
                (p[0].local.series.eval(m) - p[1].local.series.eval(m)).norm() / (1.0 + p[0].w.norm())
            })
            .collect()
    }

    pub fn final_value(&self) -> Complex64 {
        self.tip.w
    }
}

/// Which guards are active while stepping.
#[derive(Clone, Copy, Debug)]
struct Mode {
    guards: bool,
    max_advance: f64,
}

/// Outcome of one attempt to solve at the current point.
enum Solve {
    Done(LocalSolution, LocalBounds),
    Event(EventKind, String),
}

struct Stepper<'a> {
    expr: &'a Expression,
    singular: &'a SingularSet,
    arc: &'a Arc,
    opts: &'a ContinuationOptions,
    tip: Tip,
    /// Solution at the tip, if already computed.
    here: Option<(LocalSolution, LocalBounds)>,
    steps: Vec<StepRecord>,
    events: Vec<Event>,
}

impl<'a> Stepper<'a> {
    fn event(&mut self, kind: EventKind, detail: String) -> EventKind {
        self.events.push(Event {
            t: self.tip.t,
            z: self.tip.z,
            w: self.tip.w,
            kind,
            detail,
        });
        kind
    }

    fn solve_here(&self, mode: Mode) -> Solve {
        let Tip { z, w, .. } = self.tip;
        if mode.guards && w.norm() > self.opts.r_max {
            return Solve::Event(EventKind::Blowup, format!("|w| = {:e} exceeds {:e}", w.norm(), self.opts.r_max));
        }
        let prox = self.singular.proximity(w, z, &ProximityOptions {
            roots: self.opts.solver.roots,
            ..ProximityOptions::default()
        });
        if mode.guards && prox < self.opts.proximity_floor {
            return Solve::Event(
                EventKind::SingularApproach,
                format!("proximity {prox:e} below floor {:e}", self.opts.proximity_floor),
            );
        }
        let mut a = (0.5 * prox).min(self.opts.max_radius);
        let mut b = (0.5 * prox).min(self.opts.max_radius * (1.0 + w.norm()));
        let mut residual_tries = 0;
        loop {
            if !(a >= self.opts.min_step && b >= self.opts.min_step) {
                return Solve::Event(
                    EventKind::StepUnderflow,
                    format!("bidisc radii (b, a) = ({b:e}, {a:e}) below {:e}", self.opts.min_step),
                );
            }
            let bounds = match estimate_bounds(
                self.expr,
                self.singular,
                &self.tip.branches,
                w,
                z,
                a,
                b,
                &self.opts.solver,
            ) {
                Ok(bounds) => bounds,
                Err(SolverError::HitsSingularSet { .. } | SolverError::Sample(_)) => {
                    a *= 0.5;
                    b *= 0.5;
                    continue;
                }
                Err(e) => return Solve::Event(EventKind::NumericalFailure, e.to_string()),
            };
            match solve_local(self.expr, &self.tip.branches, w, z, &bounds, &self.opts.solver) {
                Ok(sol) if sol.guaranteed_radius < self.opts.min_step => {
                    return Solve::Event(
                        EventKind::StepUnderflow,
                        format!("guaranteed radius {:e} below {:e}", sol.guaranteed_radius, self.opts.min_step),
                    )
                }
                Ok(sol) => return Solve::Done(sol, bounds),
                Err(e @ SolverError::Residual { .. }) => {
                    residual_tries += 1;
                    if residual_tries > RESIDUAL_RETRIES {
                        return Solve::Event(EventKind::ResidualFailure, e.to_string());
                    }
                    a *= 0.5;
                    b *= 0.5;
                }
                Err(e) => return Solve::Event(EventKind::NumericalFailure, e.to_string()),
            }
        }
    }

    /// Steps until the tip reaches `target` and is solved there.
    fn run(&mut self, target: f64, mode: Mode) -> Result<(), EventKind> {
        loop {
            if self.here.is_none() {
                match self.solve_here(mode) {
                    Solve::Done(sol, bounds) => {
                        self.steps.push(StepRecord {
                            t: self.tip.t,
                            z: self.tip.z,
                            w: self.tip.w,
                            sigma: sigma_radius(bounds.a, bounds.b, bounds.t_hat),
                            local: sol.clone(),
                            bounds,
                            branches: self.tip.branches.clone(),
                            advance: 0.0,
                        });
                        self.here = Some((sol, bounds));
                    }
                    Solve::Event(kind, detail) => return Err(self.event(kind, detail)),
                }
            }
            if self.tip.t >= target {
                return Ok(());
            }
            if self.steps.len() >= self.opts.max_steps {
                let detail = format!("{} steps taken", self.steps.len());
                return Err(self.event(EventKind::StepBudget, detail));
            }
            let (sol, _) = self.here.as_ref().expect("solved above");
            let len = self.arc.length();
            let ds = (0.5 * sol.guaranteed_radius).min(mode.max_advance) / len;
            let next_t = [self.tip.t + ds, self.arc.next_vertex_t(self.tip.t), target]
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            let z = self.arc.point_at(next_t);
            let w = sol.series.eval(z);
            if !(w.re.is_finite() && w.im.is_finite()) {
                let detail = format!("non-finite series value at z = {z}");
                return Err(self.event(EventKind::NumericalFailure, detail));
            }
            let branches = match self.expr.transport(&self.tip.branches, w, z) {
                Ok(b) => b,
                Err(e) => return Err(self.event(EventKind::NumericalFailure, e.to_string())),
            };
            self.steps.last_mut().expect("solved above").advance = (z - self.tip.z).norm();
            self.tip = Tip {
                t: next_t,
                z,
                w,
                branches,
            };
            self.here = None;
        }
    }
}

fn singular_set_of(expr: &Expression, opts: &ContinuationOptions) -> Result<SingularSet, EngineError> {
    Ok(SingularSet::new(expr.singular_set().to_vec(), &opts.solver.roots)?)
}

/// The first step of a continuation from the base point of `state`: bidisc
/// planning, sampled bounds and the local solution.
pub fn local_step(
    expr: &Expression,
    state: &BranchState,
    opts: &ContinuationOptions,
) -> Result<(LocalSolution, LocalBounds), EngineError> {
    let singular = singular_set_of(expr, opts)?;
    let (w, z) = state.base_point();
    let arc = Arc::segment(z, z + 1.0)?;
    let stepper = Stepper {
        expr,
        singular: &singular,
        arc: &arc,
        opts,
        tip: Tip {
            t: 0.0,
            z,
            w,
            branches: state.clone(),
        },
        here: None,
        steps: Vec::new(),
        events: Vec::new(),
    };
    let mode = Mode {
        guards: true,
        max_advance: opts.max_advance,
    };
    match stepper.solve_here(mode) {
        Solve::Done(sol, bounds) => Ok((sol, bounds)),
        Solve::Event(kind, detail) => Err(EngineError::Step { kind, detail }),
    }
}

/// Continues the solution with `w(z0) = w0` along `arc` (which must start at
/// `z0`), with initial sheets from `opts.branch_convention`.
pub fn continue_along(
    expr: &Expression,
    w0: Complex64,
    z0: Complex64,
    arc: &Arc,
    opts: &ContinuationOptions,
) -> Result<ContinuationTrace, EngineError> {
    let state = expr.init_branches(w0, z0, opts.branch_convention)?;
    continue_from(expr, state, arc, opts)
}

/// Continues from the base point of `state`, whose sheets are taken as given.
pub fn continue_from(
    expr: &Expression,
    state: BranchState,
    arc: &Arc,
    opts: &ContinuationOptions,
) -> Result<ContinuationTrace, EngineError> {
    let (w0, z0) = state.base_point();
    if (arc.start() - z0).norm() > 1e-12 * (1.0 + z0.norm()) {
        return Err(EngineError::ArcStart {
            arc_start: arc.start(),
            z0,
        });
    }
    let singular = singular_set_of(expr, opts)?;
    let report = check_hypotheses(&singular, arc);
    if !report.passed() {
        return Err(EngineError::Hypothesis(report));
    }
    let mut stepper = Stepper {
        expr,
        singular: &singular,
        arc,
        opts,
        tip: Tip {
            t: 0.0,
            z: z0,
            w: w0,
            branches: state,
        },
        here: None,
        steps: Vec::new(),
        events: Vec::new(),
    };
    let mode = Mode {
        guards: true,
        max_advance: opts.max_advance,
    };
    let status = match stepper.run(1.0, mode) {
        Ok(()) => TraceStatus::Completed,
        Err(kind) => TraceStatus::Stopped(kind),
    };
    Ok(ContinuationTrace {
        arc: arc.clone(),
        steps: stepper.steps,
        events: stepper.events,
        status,
        tip: stepper.tip,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::RootOptions;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn run(text: &str, w0: f64, from: f64, to: f64) -> ContinuationTrace {
        let e = Expression::parse(text).unwrap();
        let arc = Arc::segment(c(from), c(to)).unwrap();
        continue_along(&e, c(w0), c(from), &arc, &ContinuationOptions::default()).unwrap()
    }

    #[test]
    fn geometric_to_point_nine() {
        let tr = run("w^2", 1.0, 0.0, 0.9);
        assert_eq!(tr.status, TraceStatus::Completed);
        assert!((tr.final_value() - c(10.0)).norm() < 1e-6);
    }

    #[test]
    fn square_root_to_quarter() {
        let tr = run("1/(2*w)", 1.0, 1.0, 0.25);
        assert_eq!(tr.status, TraceStatus::Completed);
        assert!((tr.final_value() - c(0.5)).norm() < 1e-8);
    }

    #[test]
    fn square_root_to_zero_approaches_singular_set() {
        let tr = run("1/(2*w)", 1.0, 1.0, 0.0);
        assert_eq!(tr.status, TraceStatus::Stopped(EventKind::SingularApproach));
        assert!(tr.tip.z.norm() < 1e-6);
        assert!(tr.tip.w.norm() < 1e-3);
    }

    #[test]
    fn hypothesis_examples() {
        let opts = RootOptions::default();
        let e = Expression::parse("-rad(4,8) * rad(2, 3*z + w^2) / (4 * rad(4, (z + w^2)^3))").unwrap();
        let s = SingularSet::new(e.singular_set().to_vec(), &opts).unwrap();
        let arc = Arc::new(vec![c(1.0), c(-1.0), Complex64::new(0.0, 2.0), c(0.0)]).unwrap();
        assert!(check_hypotheses(&s, &arc).passed());

        let s = SingularSet::new(vec![crate::poly::BivariatePoly::v()], &opts).unwrap();
        let report = check_hypotheses(&s, &Arc::segment(c(-1.0), c(1.0)).unwrap());
        assert!(!report.passed());
        assert!(report.violations.iter().any(|v| v.nu.norm() < 1e-15));
        // between samples: caught by the exact contained-line check
        let p = &crate::poly::BivariatePoly::v() - &crate::poly::BivariatePoly::constant(c(0.1234));
        let s = SingularSet::new(vec![p], &opts).unwrap();
        assert!(!check_hypotheses(&s, &Arc::segment(c(0.0), c(1.0)).unwrap()).passed());

        assert!(check_hypotheses(&SingularSet::default(), &arc).passed());
    }

    #[test]
    fn engine_refuses_violating_arc() {
        let e = Expression::parse("1/(w*z)").unwrap();
        let arc = Arc::segment(c(-1.0), c(1.0)).unwrap();
        let err = continue_along(&e, c(1.0), c(-1.0), &arc, &ContinuationOptions::default());
        assert!(matches!(err, Err(EngineError::Hypothesis(_))));
    }

    #[test]
    fn arc_must_start_at_z0() {
        let e = Expression::parse("w").unwrap();
        let arc = Arc::segment(c(0.5), c(1.0)).unwrap();
        assert!(matches!(
            continue_along(&e, c(1.0), c(0.0), &arc, &ContinuationOptions::default()),
            Err(EngineError::ArcStart { .. })
        ));
    }

    #[test]
    fn steps_are_sound_and_glue() {
        let tr = run("w^2", 1.0, 0.0, 0.9);
        for s in &tr.steps {
            assert!(s.advance <= 0.5 * s.local.guaranteed_radius * (1.0 + 1e-12));
            let b = &s.bounds;
            let cap = b.a.min(b.b / b.m_hat).min(1.0 / b.k_hat);
            assert!(s.local.guaranteed_radius <= 0.8 * cap * (1.0 + 1e-12));
        }
        assert!(tr.gluing_errors().iter().all(|&g| g <= 1e-7));
        for p in tr.steps.windows(2) {
            assert!(p[1].t > p[0].t);
            assert!((p[1].z - p[0].z).norm() <= p[0].local.guaranteed_radius);
        }
    }
}
