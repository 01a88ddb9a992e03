use num_complex::Complex64;

use super::{
    singular_set_of, ContinuationOptions, ContinuationTrace, EngineError, Event, Mode, Solve, StepRecord, Stepper,
    TraceStatus,
};
use crate::numerics::{chordal_diameter, chordal_mean, SpherePoint};
use crate::poly::ProximityOptions;
use crate::rhs::Expression;
use crate::solver::LocalSolution;

/// Fewest samples accepted for a verdict.
const MIN_SAMPLES: usize = 4;
/// Trailing steps tried by the boundary extension.
const EXTENSION_CANDIDATES: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub enum VerdictKind {
    Finite(Complex64),
    Infinity,
    Undetermined,
}

impl VerdictKind {
    pub fn name(&self) -> &'static str {
        match self {
            VerdictKind::Finite(_) => "finite",
            VerdictKind::Infinity => "infinity",
            VerdictKind::Undetermined => "undetermined",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitVerdict {
    pub kind: VerdictKind,
    /// Chordal diameter of the tail window.
    pub tail_diameter: f64,
    pub samples_used: usize,
    /// Distance from the last sample to the endpoint, relative to the arc length.
    pub endpoint_gap: f64,
    pub diagnostics: Vec<String>,
}

/// `w(γ(t))` recorded on the way to the endpoint.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LimitSample {
    pub t: f64,
    pub z: Complex64,
    pub value: SpherePoint,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitOutcome {
    pub verdict: LimitVerdict,
    pub samples: Vec<LimitSample>,
    /// Steps taken while resuming toward the endpoint.
    pub resumed_steps: Vec<StepRecord>,
    pub resumed_events: Vec<Event>,
}

/// Verdict from samples ordered by `t`: the last `opts.verdict_window`
/// samples must have chordal diameter below `opts.verdict_tol`, and the last
/// one must lie within the endpoint-gap tolerance.
pub fn verdict_from_samples(
    samples: &[LimitSample],
    endpoint_gap: f64,
    opts: &ContinuationOptions,
) -> Result<LimitVerdict, EngineError> {
    if samples.len() < MIN_SAMPLES {
        return Err(EngineError::TraceTooShort {
            available: samples.len(),
        });
    }
    let window = opts.verdict_window.clamp(MIN_SAMPLES, samples.len());
    let tail: Vec<SpherePoint> = samples[samples.len() - window..].iter().map(|s| s.value).collect();
    let tail_diameter = chordal_diameter(&tail);
    let tol = opts.verdict_tol;
    let mut diagnostics = Vec::new();
    let mut kind = VerdictKind::Undetermined;
    if endpoint_gap > opts.endpoint_gap_tol {
        diagnostics.push(format!(
            "last sample is {endpoint_gap:e} (relative) short of the endpoint; tolerance {:e}",
            opts.endpoint_gap_tol
        ));
    } else if tail_diameter < tol {
        kind = if tail.iter().all(|p| p.modulus() > 1.0 / tol) {
            VerdictKind::Infinity
        } else {
            match chordal_mean(&tail) {
                Some(SpherePoint::Finite(c)) => VerdictKind::Finite(c),
                Some(SpherePoint::Infinity) => VerdictKind::Infinity,
                None => {
                    diagnostics.push("tail has no chordal mean".to_string());
                    VerdictKind::Undetermined
                }
            }
        };
    } else {
        diagnostics.push(format!(
            "tail diameter {tail_diameter:e} over {window} samples is not below {tol:e}"
        ));
    }
    Ok(LimitVerdict {
        kind,
        tail_diameter,
        samples_used: window,
        endpoint_gap,
        diagnostics,
    })
}

fn sample(t: f64, z: Complex64, w: Complex64) -> LimitSample {
    LimitSample {
        t,
        z,
        value: SpherePoint::from_complex(w),
    }
}

/// Limit of `w(γ(t))` as `t → 1` on the Riemann sphere.
///
/// A completed trace is sampled at `t_j = 1 - 2^{-j}(1 - t_prev)` on its
/// last disc. A stopped trace is resumed from its tip without the advance
/// cap and without the proximity and blow-up guards, recording `w(t_j)` for
/// `t_j = 1 - 2^{-j}(1 - t_tip)` until `j_max` or the first event.
pub fn endpoint_limit(
    trace: &ContinuationTrace,
    expr: &Expression,
    opts: &ContinuationOptions,
) -> Result<LimitOutcome, EngineError> {
    let arc = &trace.arc;
    let mut samples: Vec<LimitSample> = Vec::new();
    let mut resumed_steps = Vec::new();
    let mut resumed_events = Vec::new();
    match trace.status {
        TraceStatus::Completed => {
            let n = trace.steps.len();
            for s in &trace.steps[..n.saturating_sub(1)] {
                samples.push(sample(s.t, s.z, s.w));
            }
            let t_prev = if n >= 2 { trace.steps[n - 2].t } else { 0.0 };
            for j in 1..=opts.j_max {
                let t = 1.0 - 0.5f64.powi(j as i32) * (1.0 - t_prev);
                if let Some(w) = trace.value_at_t(t) {
                    samples.push(sample(t, arc.point_at(t), w));
                }
            }
            samples.push(sample(1.0, trace.tip.z, trace.tip.w));
        }
        TraceStatus::Stopped(_) => {
            for s in &trace.steps {
                samples.push(sample(s.t, s.z, s.w));
            }
            if trace.steps.last().map_or(true, |s| s.t < trace.tip.t) {
                samples.push(sample(trace.tip.t, trace.tip.z, trace.tip.w));
            }
            let singular = singular_set_of(expr, opts)?;
            let mut stepper = Stepper {
                expr,
                singular: &singular,
                arc,
                opts,
                tip: trace.tip.clone(),
                here: None,
                steps: Vec::new(),
                events: Vec::new(),
            };
            let mode = Mode {
                guards: false,
                max_advance: f64::INFINITY,
            };
            let t_last = trace.tip.t;
            for j in 1..=opts.j_max {
                let target = 1.0 - 0.5f64.powi(j as i32) * (1.0 - t_last);
                if target <= stepper.tip.t {
                    continue;
                }
                if stepper.run(target, mode).is_err() {
                    break;
                }
                samples.push(sample(stepper.tip.t, stepper.tip.z, stepper.tip.w));
            }
            resumed_steps = stepper.steps;
            resumed_events = stepper.events;
        }
    }
    let last_z = samples.last().map_or(arc.start(), |s| s.z);
    let endpoint_gap = (last_z - arc.end()).norm() / arc.length();
    let mut verdict = verdict_from_samples(&samples, endpoint_gap, opts)?;
    if let TraceStatus::Stopped(kind) = trace.status {
        verdict.diagnostics.push(format!("trace stopped: {kind}"));
    }
    for e in &resumed_events {
        verdict
            .diagnostics
            .push(format!("resumption ended at t = {}: {} ({})", e.t, e.kind, e.detail));
    }
    Ok(LimitOutcome {
        verdict,
        samples,
        resumed_steps,
        resumed_events,
    })
}

/// Value of the continuation at the boundary point `z_inf`, from the last
/// guaranteed disc of the trace (or a fresh solve at its tip) containing
/// `z_inf`; the candidate `(W∞, z_inf)` must keep at least the proximity
/// floor from the singular set.
pub fn extend_to_boundary(
    trace: &ContinuationTrace,
    z_inf: Complex64,
    expr: &Expression,
    opts: &ContinuationOptions,
) -> Result<(Complex64, LocalSolution), EngineError> {
    let singular = singular_set_of(expr, opts)?;
    let mut candidates: Vec<LocalSolution> = Vec::new();
    if trace.steps.last().map_or(true, |s| s.t < trace.tip.t) {
        let stepper = Stepper {
            expr,
            singular: &singular,
            arc: &trace.arc,
            opts,
            tip: trace.tip.clone(),
            here: None,
            steps: Vec::new(),
            events: Vec::new(),
        };
        let mode = Mode {
            guards: false,
            max_advance: f64::INFINITY,
        };
        if let Solve::Done(sol, _) = stepper.solve_here(mode) {
            candidates.push(sol);
        }
    }
    candidates.extend(
        trace
            .steps
            .iter()
            .rev()
            .take(EXTENSION_CANDIDATES)
            .map(|s| s.local.clone()),
    );
    let local = candidates
        .into_iter()
        .find(|l| (z_inf - l.series.center()).norm() < l.guaranteed_radius)
        .ok_or(EngineError::NoGuaranteedDisc { z_inf })?;
    let value = local.series.eval(z_inf);
    let proximity = singular.proximity(value, z_inf, &ProximityOptions {
        roots: opts.solver.roots,
        ..ProximityOptions::default()
    });
    if !(proximity >= opts.proximity_floor) || !(value.re.is_finite() && value.im.is_finite()) {
        return Err(EngineError::CandidateNearSingular {
            w: value,
            z: z_inf,
            proximity,
        });
    }
    Ok((value, local))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{continue_along, Arc};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn trace(text: &str, w0: f64, from: f64, to: f64) -> (Expression, ContinuationTrace) {
        let e = Expression::parse(text).unwrap();
        let arc = Arc::segment(c(from), c(to)).unwrap();
        let tr = continue_along(&e, c(w0), c(from), &arc, &ContinuationOptions::default()).unwrap();
        (e, tr)
    }

    #[test]
    fn square_root_limit_is_zero() {
        let (e, tr) = trace("1/(2*w)", 1.0, 1.0, 0.0);
        let out = endpoint_limit(&tr, &e, &ContinuationOptions::default()).unwrap();
        match out.verdict.kind {
            VerdictKind::Finite(v) => assert!(v.norm() < 1e-3),
            ref other => panic!("unexpected verdict {other:?}"),
        }
    }

    #[test]
    fn movable_pole_limit_is_infinity() {
        let (e, tr) = trace("w^2", 1.0, 0.0, 1.0);
        let out = endpoint_limit(&tr, &e, &ContinuationOptions::default()).unwrap();
        assert_eq!(out.verdict.kind, VerdictKind::Infinity);
    }

    #[test]
    fn completed_trace_limit_is_endpoint_value() {
        let (e, tr) = trace("w", 1.0, 0.0, 1.0);
        let out = endpoint_limit(&tr, &e, &ContinuationOptions::default()).unwrap();
        match out.verdict.kind {
            VerdictKind::Finite(v) => assert!((v - c(std::f64::consts::E)).norm() < 1e-6),
            ref other => panic!("unexpected verdict {other:?}"),
        }
    }

    #[test]
    fn oscillating_tail_is_undetermined() {
        let samples: Vec<LimitSample> = (0..16)
            .map(|k| {
                let t = 1.0 - 0.5f64.powi(k);
                sample(t, c(1.0 - t), c((k % 2) as f64))
            })
            .collect();
        let v = verdict_from_samples(&samples, 0.0, &ContinuationOptions::default()).unwrap();
        assert_eq!(v.kind, VerdictKind::Undetermined);
        assert!(v.tail_diameter > 0.5);
    }

    #[test]
    fn short_trace_is_an_error() {
        let samples = vec![sample(0.0, c(0.0), c(1.0)); 3];
        assert!(matches!(
            verdict_from_samples(&samples, 0.0, &ContinuationOptions::default()),
            Err(EngineError::TraceTooShort { available: 3 })
        ));
    }

    #[test]
    fn endpoint_gap_blocks_verdict() {
        let samples = vec![sample(0.5, c(0.5), c(1.0)); 8];
        let v = verdict_from_samples(&samples, 0.5, &ContinuationOptions::default()).unwrap();
        assert_eq!(v.kind, VerdictKind::Undetermined);
    }

    #[test]
    fn extension_examples() {
        let opts = ContinuationOptions::default();
        let (e, tr) = trace("w", 1.0, 0.0, 0.95);
        let (v, _) = extend_to_boundary(&tr, c(1.0), &e, &opts).unwrap();
        assert!((v - c(std::f64::consts::E)).norm() < 1e-10);

        let (e, tr) = trace("2*z", 0.0, 0.0, 0.95);
        let (v, _) = extend_to_boundary(&tr, c(1.0), &e, &opts).unwrap();
        assert!((v - c(1.0)).norm() < 1e-12);

        let (e, tr) = trace("w^2", 1.0, 0.0, 1.0);
        assert!(matches!(
            extend_to_boundary(&tr, c(1.0), &e, &opts),
            Err(EngineError::NoGuaranteedDisc { .. })
        ));
    }
}
