//! Invariants of continuation traces on a fixed regression corpus.

use num_complex::Complex64;
use painleve_core::engine::{
    continue_along, continue_from, endpoint_limit, monodromy_loop, Arc, ContinuationOptions, ContinuationTrace,
    TraceStatus, VerdictKind,
};
use painleve_core::rhs::{BranchConvention, Expression};

const PRINTED: &str = "-rad(4,8) * rad(2, 3*z + w^2) / (4 * rad(4, (z + w^2)^3))";

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

struct Case {
    rhs: &'static str,
    w0: Complex64,
    arc: Vec<Complex64>,
}

/// Problems whose arcs stay away from the singular set.
fn regular_corpus() -> Vec<Case> {
    vec![
        Case { rhs: "w", w0: c(1.0, 0.0), arc: vec![c(0.0, 0.0), c(1.0, 0.0)] },
        Case { rhs: "w^2", w0: c(1.0, 0.0), arc: vec![c(0.0, 0.0), c(0.9, 0.0)] },
        Case { rhs: "w^2", w0: c(1.0, 0.0), arc: vec![c(0.0, 0.0), c(0.5, 0.5), c(1.5, 0.5)] },
        Case { rhs: "1/(2*w)", w0: c(1.0, 0.0), arc: vec![c(1.0, 0.0), c(0.25, 0.0)] },
        Case { rhs: "1/(2*w)", w0: c(1.0, 0.0), arc: vec![c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.1)] },
        Case { rhs: "2*z", w0: c(0.0, 0.0), arc: vec![c(0.0, 0.0), c(1.0, 1.0)] },
        Case { rhs: "1/(2*rad(2, z))", w0: c(1.0, 0.0), arc: vec![c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(-0.5, -0.5)] },
        Case { rhs: PRINTED, w0: c(1.0, 0.0), arc: vec![c(1.0, 0.0), c(0.001, 0.0)] },
        Case { rhs: PRINTED, w0: c(1.0, 0.0), arc: vec![c(1.0, 0.0), c(1.0, 1.0), c(0.2, 0.3)] },
    ]
}

fn run(case: &Case) -> (Expression, ContinuationTrace) {
    let e = Expression::parse(case.rhs).unwrap();
    let arc = Arc::new(case.arc.clone()).unwrap();
    let tr = continue_along(&e, case.w0, case.arc[0], &arc, &ContinuationOptions::default()).unwrap();
    assert_eq!(tr.status, TraceStatus::Completed, "{} along {:?}", case.rhs, case.arc);
    (e, tr)
}

#[test]
fn reversal_returns_to_the_initial_value() {
    for case in regular_corpus() {
        let (e, tr) = run(&case);
        let back = continue_from(&e, tr.tip.branches.clone(), &tr.arc.reversed(), &ContinuationOptions::default())
            .unwrap();
        assert_eq!(back.status, TraceStatus::Completed);
        assert!((back.final_value() - case.w0).norm() <= 1e-6, "{}: {}", case.rhs, back.final_value());
    }
}

#[test]
fn steps_are_sound_and_glue() {
    for case in regular_corpus() {
        let (_, tr) = run(&case);
        for s in &tr.steps {
            assert!(s.advance <= 0.5 * s.local.guaranteed_radius * (1.0 + 1e-12));
            let b = &s.bounds;
            let cap = |n: f64, d: f64| if d > 0.0 { n / d } else { f64::INFINITY };
            let bound = 0.8 * b.a.min(cap(b.b, b.m_hat)).min(cap(1.0, b.k_hat));
            assert!(s.local.guaranteed_radius <= bound * (1.0 + 1e-12));
            assert!(s.local.residual <= 1e-8);
        }
        for pair in tr.steps.windows(2) {
            assert!(pair[1].t > pair[0].t);
            assert!((pair[1].z - pair[0].z).norm() < pair[0].local.guaranteed_radius);
        }
        let worst = tr.gluing_errors().into_iter().fold(0.0, f64::max);
        assert!(worst <= 1e-7, "{}: gluing {worst:e}", case.rhs);
    }
}

#[test]
fn residual_at_step_endpoints() {
    for case in regular_corpus() {
        let (e, tr) = run(&case);
        for pair in tr.steps.windows(2) {
            let z = pair[1].z;
            let series = &pair[0].local.series;
            let (f, _) = e.eval_with_branches(series.eval(z), z, &pair[1].branches).unwrap();
            let r = (series.eval_derivative(z) - f).norm() / f.norm().max(1.0);
            assert!(r <= 1e-6, "{}: residual {r:e} at {z}", case.rhs);
        }
    }
}

fn limit_kind(rhs: &str, w0: Complex64, arc: &[Complex64], tol: f64) -> VerdictKind {
    let e = Expression::parse(rhs).unwrap();
    let arc = Arc::new(arc.to_vec()).unwrap();
    let opts = ContinuationOptions { verdict_tol: tol, ..ContinuationOptions::default() };
    let tr = continue_along(&e, w0, arc.start(), &arc, &opts).unwrap();
    endpoint_limit(&tr, &e, &opts).unwrap().verdict.kind
}

#[test]
fn verdicts_are_stable_under_tighter_tolerance() {
    let corpus: [(&str, Complex64, Vec<Complex64>); 5] = [
        ("1/(2*w)", c(1.0, 0.0), vec![c(1.0, 0.0), c(0.0, 0.0)]),
        ("w^2", c(1.0, 0.0), vec![c(0.0, 0.0), c(1.0, 0.0)]),
        ("w", c(1.0, 0.0), vec![c(0.0, 0.0), c(1.0, 0.0)]),
        (PRINTED, c(1.0, 0.0), vec![c(1.0, 0.0), c(0.001, 0.0)]),
        ("w^2", c(1.0, 0.0), vec![c(0.0, 0.0), c(0.5, 0.5), c(1.0, 0.0)]),
    ];
    for (rhs, w0, arc) in &corpus {
        let coarse = limit_kind(rhs, *w0, arc, 1e-3);
        let fine = limit_kind(rhs, *w0, arc, 5e-4);
        let flipped = matches!(
            (&coarse, &fine),
            (VerdictKind::Finite(_), VerdictKind::Infinity) | (VerdictKind::Infinity, VerdictKind::Finite(_))
        );
        assert!(!flipped, "{rhs}: {coarse:?} vs {fine:?}");
        assert_ne!(coarse, VerdictKind::Undetermined, "{rhs}");
    }
}

#[test]
fn k_loops_restore_the_sheet() {
    for k in 2..=6u32 {
        let e = Expression::parse(&format!("rad({k}, z - 0.5i)")).unwrap();
        let circle = Arc::circle(c(0.0, 0.5), 1.0, 48).unwrap();
        let mut v = circle.vertices()[..48].to_vec();
        let base = v[0];
        for _ in 1..k {
            v.extend_from_slice(&circle.vertices()[..48]);
        }
        v.push(base);
        let arc = Arc::new(v).unwrap();
        let one = monodromy_loop(&e, c(0.0, 0.0), base, &circle, BranchConvention::PrincipalPositiveReal).unwrap();
        assert_eq!(one.sheets[0].order, Some(k));
        let all = monodromy_loop(&e, c(0.0, 0.0), base, &arc, BranchConvention::PrincipalPositiveReal).unwrap();
        assert!((all.sheets[0].multiplier - c(1.0, 0.0)).norm() < 1e-9);
    }
}
