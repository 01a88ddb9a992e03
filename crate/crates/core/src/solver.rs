//! One existence-and-uniqueness step: sampled bounds `M`, `K`, `T` on a
//! bidisc, the guaranteed radii `r` and `σ`, and the local Taylor solution by
//! Picard iteration on truncated series.

use num_complex::Complex64;
use std::f64::consts::TAU;
use thiserror::Error;

use crate::numerics::{Bidisc, BidiscError, SampleError, TaylorSeries, TorusSampler};
use crate::poly::{RootOptions, SingularSet};
use crate::rhs::{BranchState, EvalError, Expression};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Bidisc(#[from] BidiscError),
    #[error("the doubled bidisc about (w, z) = ({w}, {z}) with radii (b, a) = ({b}, {a}) meets the singular set")]
    HitsSingularSet {
        w: Complex64,
        z: Complex64,
        a: f64,
        b: f64,
    },
    #[error("bound sampling failed: {0}")]
    Sample(#[from] SampleError<EvalError>),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
    #[error("residual {residual:e} exceeds tolerance {tolerance:e} at z0 = {z0}")]
    Residual {
        z0: Complex64,
        residual: f64,
        tolerance: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Degree of the local series.
    pub order: usize,
    pub torus: TorusSampler,
    /// Factor applied to `min(a, b/M, 1/K)`.
    pub radius_safety: f64,
    /// Largest accepted residual `|w' - F| / max(1, |F|)` on the half-radius circle.
    pub residual_tol: f64,
    pub roots: RootOptions,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            order: 24,
            torus: TorusSampler::default(),
            radius_safety: 0.8,
            residual_tol: 1e-8,
            roots: RootOptions::default(),
        }
    }
}

/// Sampled bounds of `F` on the bidisc of radii `(b, a)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalBounds {
    /// Radius in `z`.
    pub a: f64,
    /// Radius in `w`.
    pub b: f64,
    pub m_hat: f64,
    pub k_hat: f64,
    pub t_hat: f64,
}

impl LocalBounds {
    pub fn new(a: f64, b: f64, m_hat: f64, k_hat: f64, t_hat: f64) -> Result<Self, SolverError> {
        let pos = |x: f64| x > 0.0 && x.is_finite();
        let nonneg = |x: f64| x >= 0.0 && x.is_finite();
        if !(pos(a) && pos(b) && nonneg(m_hat) && nonneg(k_hat) && nonneg(t_hat)) {
            return Err(SolverError::InvalidBounds(format!(
                "a = {a}, b = {b}, M = {m_hat}, K = {k_hat}, T = {t_hat}"
            )));
        }
        Ok(Self {
            a,
            b,
            m_hat,
            k_hat,
            t_hat,
        })
    }
}

/// `safety · sup |F|` over the torus, with sheets carried along the grid.
fn sample_sup(
    expr: &Expression,
    state: &BranchState,
    bidisc: &Bidisc,
    torus: &TorusSampler,
) -> Result<f64, SampleError<EvalError>> {
    if !expr.has_radicals() {
        return torus.max_abs(bidisc, |u, v| expr.eval_with_branches(u, v, state).map(|(f, _)| f));
    }
    let mut current = state.clone();
    torus.max_abs(bidisc, |u, v| {
        let (f, next) = expr.eval_along(&current, u, v)?;
        current = next;
        Ok(f)
    })
}

/// Sampled `M`, `K`, `T` on the bidisc `{|w - w0| ≤ b} × {|z - z0| ≤ a}`.
///
/// The doubled bidisc must avoid the singular set; `state` must sit at
/// `(w0, z0)`.
pub fn estimate_bounds(
    expr: &Expression,
    singular: &SingularSet,
    state: &BranchState,
    w0: Complex64,
    z0: Complex64,
    a: f64,
    b: f64,
    opts: &SolverOptions,
) -> Result<LocalBounds, SolverError> {
    let inner = Bidisc::new(w0, z0, b, a)?;
    let outer = inner.scaled(2.0)?;
    if !singular.avoids_bidisc(&outer, &opts.roots) {
        return Err(SolverError::HitsSingularSet { w: w0, z: z0, a, b });
    }
    let m_hat = sample_sup(expr, state, &inner, &opts.torus)?;
    let m2 = sample_sup(expr, state, &outer, &opts.torus)?;
    LocalBounds::new(a, b, m_hat, m2 / b, 4.0 * m2)
}

/// `safety · min(a, b/M, 1/K)` with `x/0 = ∞`.
pub fn guaranteed_radius(bounds: &LocalBounds, safety: f64) -> f64 {
    let cap = |num: f64, den: f64| if den > 0.0 { num / den } else { f64::INFINITY };
    safety * bounds.a.min(cap(bounds.b, bounds.m_hat)).min(cap(1.0, bounds.k_hat))
}

/// `σ = a (1 - exp(-b / (2 a T)))`.
pub fn sigma_radius(a: f64, b: f64, t: f64) -> f64 {
    -a * (-b / (2.0 * a * t)).exp_m1()
}

/// An accepted local solution about `z0`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalSolution {
    pub series: TaylorSeries,
    pub guaranteed_radius: f64,
    pub residual: f64,
}

/// One Picard step `w ↦ w0 + ∫ F(w(z), z) dz`.
pub fn picard_step(
    expr: &Expression,
    state: &BranchState,
    w0: Complex64,
    current: &TaylorSeries,
    order: usize,
) -> Result<TaylorSeries, SolverError> {
    Ok(expr.eval_series(current, state, order)?.integrate(w0).truncate(order))
}

/// `order + 1` Picard steps from `initial`; each step fixes one more coefficient.
pub fn picard_iterate(
    expr: &Expression,
    state: &BranchState,
    w0: Complex64,
    initial: TaylorSeries,
    order: usize,
) -> Result<TaylorSeries, SolverError> {
    let mut w = initial.truncate(order);
    for _ in 0..=order {
        w = picard_step(expr, state, w0, &w, order)?;
    }
    Ok(w)
}

/// Largest `|w'(z) - F(w(z), z)| / max(1, |F|)` over 8 points on `|z - z0| = rho`.
pub fn residual_on_circle(
    expr: &Expression,
    state: &BranchState,
    series: &TaylorSeries,
    rho: f64,
) -> Result<f64, SolverError> {
    let z0 = series.center();
    let mut current = state.clone();
    let mut worst: f64 = 0.0;
    for k in 0..8 {
        let z = z0 + Complex64::from_polar(rho, TAU * k as f64 / 8.0);
        let w = series.eval(z);
        let (f, next) = expr.eval_along(&current, w, z)?;
        current = next;
        let r = (series.eval_derivative(z) - f).norm() / f.norm().max(1.0);
        worst = worst.max(r);
    }
    Ok(worst)
}

/// Local series solution of `w' = F(w, z)`, `w(z0) = w0`.
pub fn solve_local(
    expr: &Expression,
    state: &BranchState,
    w0: Complex64,
    z0: Complex64,
    bounds: &LocalBounds,
    opts: &SolverOptions,
) -> Result<LocalSolution, SolverError> {
    let r = guaranteed_radius(bounds, opts.radius_safety);
    let initial = TaylorSeries::constant(z0, w0, opts.order);
    let series = picard_iterate(expr, state, w0, initial, opts.order)?.with_validity_radius(r);
    let residual = residual_on_circle(expr, state, &series, 0.5 * r)?;
    if !(residual <= opts.residual_tol) {
        return Err(SolverError::Residual {
            z0,
            residual,
            tolerance: opts.residual_tol,
        });
    }
    Ok(LocalSolution {
        series,
        guaranteed_radius: r,
        residual,
    })
}
