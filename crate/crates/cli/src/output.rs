//! Trace, plot-data and summary files.

use num_complex::Complex64;
use painleve_core::engine::{Arc, ContinuationTrace, Event, StepRecord};
use painleve_core::poly::{fiber_roots, BivariatePoly, RootOptions};
use serde::Serialize;
use serde_json::{json, Value};
use std::io;
use std::path::Path;

/// Samples along the arc for fiber loci in the plot data.
const PLOT_SAMPLES: usize = 128;

#[derive(Debug, Serialize)]
struct TraceRow {
    t: f64,
    re_z: f64,
    im_z: f64,
    re_w: f64,
    im_w: f64,
    radius: f64,
    event: String,
}

pub fn complex_json(c: Complex64) -> Value {
    json!({ "re": c.re, "im": c.im })
}

pub fn event_json(e: &Event) -> Value {
    json!({
        "t": e.t,
        "kind": e.kind.name(),
        "z": complex_json(e.z),
        "w": complex_json(e.w),
        "detail": e.detail,
    })
}

/// Rows ordered by `t`: solved steps carry their guaranteed radius, an
/// unsolved tip has radius 0; events are attached to the row at their `t`.
fn rows(trace: &ContinuationTrace, resumed: &[StepRecord], extra_events: &[Event]) -> Vec<TraceRow> {
    let mut out: Vec<TraceRow> = Vec::new();
    let mut push = |t: f64, z: Complex64, w: Complex64, radius: f64| match out.last_mut() {
        Some(last) if last.t == t => {
            if radius > last.radius {
                last.radius = radius;
            }
        }
        Some(last) if last.t > t => {}
        _ => out.push(TraceRow {
            t,
            re_z: z.re,
            im_z: z.im,
            re_w: w.re,
            im_w: w.im,
            radius,
            event: String::new(),
        }),
    };
    for s in &trace.steps {
        push(s.t, s.z, s.w, s.local.guaranteed_radius);
    }
    push(trace.tip.t, trace.tip.z, trace.tip.w, 0.0);
    for s in resumed {
        push(s.t, s.z, s.w, s.local.guaranteed_radius);
    }
    for e in trace.events.iter().chain(extra_events) {
        let row = match out.iter_mut().rev().find(|r| r.t <= e.t) {
            Some(r) => r,
            None => continue,
        };
        if !row.event.is_empty() {
            row.event.push(';');
        }
        row.event.push_str(e.kind.name());
    }
    out
}

pub fn write_trace(
    path: &Path,
    trace: &ContinuationTrace,
    resumed: &[StepRecord],
    extra_events: &[Event],
) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows(trace, resumed, extra_events) {
        w.serialize(row)?;
    }
    w.flush()
}

#[derive(Debug, Serialize)]
struct FiberRow {
    t: f64,
    re_z: f64,
    im_z: f64,
    component: usize,
    re_root: f64,
    im_root: f64,
    multiplicity: usize,
}

/// Fiber roots of every component at evenly spaced arc parameters.
pub fn write_fiber_loci(path: &Path, arc: &Arc, components: &[BivariatePoly], roots: &RootOptions) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "re_z", "im_z", "component", "re_root", "im_root", "multiplicity"])?;
    for k in 0..=PLOT_SAMPLES {
        let t = k as f64 / PLOT_SAMPLES as f64;
        let z = arc.point_at(t);
        for (component, p) in components.iter().enumerate() {
            if let Ok(fiber) = fiber_roots(p, z, roots) {
                for r in &fiber.roots {
                    w.serialize(FiberRow {
                        t,
                        re_z: z.re,
                        im_z: z.im,
                        component,
                        re_root: r.value.re,
                        im_root: r.value.im,
                        multiplicity: r.multiplicity,
                    })?;
                }
            }
        }
    }
    w.flush()
}

pub fn write_json(path: &Path, value: &Value) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    text.push('\n');
    std::fs::write(path, text)
}
