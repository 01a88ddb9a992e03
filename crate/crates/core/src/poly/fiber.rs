//! Fibers `W_ν = {u : P(u, ν) = 0}`, vertical-line containment, and
//! distance estimates to the zero set of a polynomial.

use num_complex::Complex64;

use super::roots::{polynomial_roots, RootOptions};
use super::{BivariatePoly, PolyError};

/// Relative size below which a restricted coefficient counts as zero.
pub const CONTAINMENT_TOL: f64 = 1e-10;

const CLUSTER_TOL: f64 = 1e-6;
const ON_CURVE_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FiberRoot {
    pub value: Complex64,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fiber {
    pub v_value: Complex64,
    /// Sorted by real then imaginary part.
    pub roots: Vec<FiberRoot>,
    /// How far the `u`-degree of `P(·, ν)` fell below `deg_u(P)`.
    pub degree_drop: usize,
}

impl Fiber {
    /// Number of roots counted with multiplicity.
    pub fn count(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    pub fn values(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.roots.iter().map(|r| r.value)
    }

    pub fn distance_to(&self, u: Complex64) -> Option<f64> {
        self.values().map(|r| (r - u).norm()).reduce(f64::min)
    }
}

fn zero_threshold(p: &BivariatePoly) -> f64 {
    CONTAINMENT_TOL * (1.0 + p.max_abs_coeff())
}

/// Whether the complex line `v = ν` lies in `{P = 0}`, i.e. `P(·, ν) ≡ 0`.
pub fn line_contained(p: &BivariatePoly, nu: Complex64) -> bool {
    let tol = zero_threshold(p);
    p.restrict_v(nu).iter().all(|c| c.norm() < tol)
}

fn cluster(mut raw: Vec<Complex64>) -> Vec<FiberRoot> {
    let mut out: Vec<(Complex64, usize)> = Vec::new();
    for r in raw.drain(..) {
        match out
            .iter_mut()
            .find(|(m, _)| (*m - r).norm() <= CLUSTER_TOL * (1.0 + r.norm()))
        {
            Some((mean, count)) => {
                *mean = (*mean * *count as f64 + r) / (*count as f64 + 1.0);
                *count += 1;
            }
            None => out.push((r, 1)),
        }
    }
    let mut roots: Vec<FiberRoot> = out
        .into_iter()
        .map(|(value, multiplicity)| FiberRoot {
            value,
            multiplicity,
        })
        .collect();
    roots.sort_by(|a, b| {
        (a.value.re, a.value.im)
            .partial_cmp(&(b.value.re, b.value.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    roots
}

/// All roots of `P(·, ν)`.
pub fn fiber_roots(p: &BivariatePoly, nu: Complex64, opts: &RootOptions) -> Result<Fiber, PolyError> {
    if p.is_zero() {
        return Err(PolyError::ZeroPolynomial);
    }
    let tol = zero_threshold(p);
    let mut coeffs = p.restrict_v(nu);
    if coeffs.iter().all(|c| c.norm() < tol) {
        return Err(PolyError::LineContained { nu });
    }
    let full = coeffs.len();
    while coeffs.last().map_or(false, |c| c.norm() < tol) {
        coeffs.pop();
    }
    let degree_drop = full - coeffs.len();
    let raw = polynomial_roots(&coeffs, opts)?;
    Ok(Fiber {
        v_value: nu,
        roots: cluster(raw),
        degree_drop,
    })
}

/// Every `ν` whose vertical line lies in `{P = 0}`: the common zeros of the
/// `u`-coefficients of `P`, viewed as polynomials in `v`.
pub fn contained_lines(p: &BivariatePoly, opts: &RootOptions) -> Result<Vec<Complex64>, PolyError> {
    if p.is_zero() {
        return Err(PolyError::ZeroPolynomial);
    }
    let pivot = (0..=p.deg_u())
        .map(|i| p.u_coefficient(i))
        .filter(|c| !c.is_empty())
        .min_by_key(|c| c.len())
        .expect("nonzero polynomial has a nonzero row");
    if pivot.len() == 1 {
        return Ok(Vec::new());
    }
    let candidates = polynomial_roots(pivot, opts)?;
    Ok(cluster(candidates)
        .into_iter()
        .map(|r| r.value)
        .filter(|&nu| line_contained(p, nu))
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProximityOptions {
    /// Upper cap on the returned estimate.
    pub ceiling: f64,
    /// Gradient norms at or below this skip the first-order estimate.
    pub gradient_floor: f64,
    pub roots: RootOptions,
}

impl Default for ProximityOptions {
    fn default() -> Self {
        Self {
            ceiling: f64::INFINITY,
            gradient_floor: 1e-12,
            roots: RootOptions::default(),
        }
    }
}

/// Distance from `(w, z)` to `{u : P(u, z) = 0}` within the fiber, if defined.
pub fn fiber_distance(p: &BivariatePoly, w: Complex64, z: Complex64, opts: &RootOptions) -> Option<f64> {
    fiber_roots(p, z, opts).ok().and_then(|f| f.distance_to(w))
}

fn component_distance(p: &BivariatePoly, w: Complex64, z: Complex64, opts: &ProximityOptions) -> f64 {
    let value = p.eval(w, z);
    if value.norm() <= ON_CURVE_TOL * p.eval_abs(w, z) {
        return 0.0;
    }
    let mut best: Option<f64> = fiber_distance(p, w, z, &opts.roots);
    let (pu, pv) = p.gradient(w, z);
    let grad = (pu.norm_sqr() + pv.norm_sqr()).sqrt();
    if grad > opts.gradient_floor {
        let newton = value.norm() / grad;
        best = Some(best.map_or(newton, |b| b.min(newton)));
    }
    best.unwrap_or(0.0)
}

/// Estimated distance from `(w, z)` to the union of the components' zero
/// sets: per component the smaller of the in-fiber distance and the
/// first-order estimate `|P| / ‖∇P‖`, minimized over components and capped at
/// `opts.ceiling`. Degenerate components (no fiber, flat gradient) give 0.
pub fn proximity_estimate(
    components: &[BivariatePoly],
    w: Complex64,
    z: Complex64,
    opts: &ProximityOptions,
) -> f64 {
    components
        .iter()
        .map(|p| component_distance(p, w, z, opts))
        .fold(opts.ceiling, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn u() -> BivariatePoly {
        BivariatePoly::u()
    }

    fn v() -> BivariatePoly {
        BivariatePoly::v()
    }

    /// 3v + u²
    fn parabola() -> BivariatePoly {
        &v().scale(c(3.0, 0.0)) + &u().powi(2)
    }

    #[test]
    fn fiber_examples() {
        let o = RootOptions::default();
        let f = fiber_roots(&parabola(), c(1.0, 0.0), &o).unwrap();
        let s3 = 3f64.sqrt();
        assert_eq!(f.count(), 2);
        assert!((f.roots[0].value - c(0.0, -s3)).norm() < 1e-14);
        assert!((f.roots[1].value - c(0.0, s3)).norm() < 1e-14);

        let p = &u().powi(2) - &v();
        let f = fiber_roots(&p, c(4.0, 0.0), &o).unwrap();
        assert!((f.roots[0].value - c(-2.0, 0.0)).norm() < 1e-14);
        assert!((f.roots[1].value - c(2.0, 0.0)).norm() < 1e-14);

        let uv = &u() * &v();
        assert_eq!(
            fiber_roots(&uv, c(0.0, 0.0), &o),
            Err(PolyError::LineContained { nu: c(0.0, 0.0) })
        );
    }

    #[test]
    fn degree_drop_is_reported() {
        // (v - 1) u^2 + u - 2 at v = 1 becomes u - 2
        let p = &(&(&v() - &BivariatePoly::constant(c(1.0, 0.0))) * &u().powi(2))
            + &(&u() - &BivariatePoly::constant(c(2.0, 0.0)));
        let f = fiber_roots(&p, c(1.0, 0.0), &RootOptions::default()).unwrap();
        assert_eq!(f.degree_drop, 1);
        assert_eq!(f.count(), 1);
        assert!((f.roots[0].value - c(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn multiple_roots_are_clustered() {
        let p = u().powi(3);
        let f = fiber_roots(&p, c(0.7, 0.0), &RootOptions::default()).unwrap();
        assert_eq!(f.roots.len(), 1);
        assert_eq!(f.roots[0].multiplicity, 3);
    }

    #[test]
    fn containment_examples() {
        assert!(line_contained(&(&u() * &v()), c(0.0, 0.0)));
        for nu in [c(0.0, 0.0), c(1.0, 0.0), c(-3.0, 2.0)] {
            assert!(!line_contained(&parabola(), nu));
        }
        let p = &(&v() - &BivariatePoly::constant(c(1.0, 0.0))) * &u().powi(2);
        assert!(line_contained(&p, c(1.0, 0.0)));
        assert!(!line_contained(&p, c(1.0 + 1e-6, 0.0)));
    }

    #[test]
    fn contained_lines_are_common_zeros() {
        let o = RootOptions::default();
        assert!(contained_lines(&parabola(), &o).unwrap().is_empty());
        let lines = contained_lines(&(&u() * &v()), &o).unwrap();
        assert_eq!(lines.len(), 1);
        assert!(lines[0].norm() < 1e-14);
        // (v - 2)(v + 1) u + (v - 2) v^2: only v = 2 is common
        let a = &v() - &BivariatePoly::constant(c(2.0, 0.0));
        let b = &v() + &BivariatePoly::constant(c(1.0, 0.0));
        let p = &(&(&a * &b) * &u()) + &(&a * &v().powi(2));
        let lines = contained_lines(&p, &o).unwrap();
        assert_eq!(lines.len(), 1);
        assert!((lines[0] - c(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn proximity_examples() {
        let o = ProximityOptions::default();
        assert!((proximity_estimate(&[u()], c(0.5, 0.0), c(7.0, 0.0), &o) - 0.5).abs() < 1e-15);
        let p = &u().powi(2) - &v();
        assert_eq!(proximity_estimate(&[p], c(1.0, 0.0), c(1.0, 0.0), &o), 0.0);
    }

    #[test]
    fn parabola_fiber_distance_and_first_order_estimate() {
        // within the fiber over v = 1 the nearest zeros are ±i√3
        let d = fiber_distance(&parabola(), c(0.0, 0.0), c(1.0, 0.0), &RootOptions::default()).unwrap();
        assert!((d - 3f64.sqrt()).abs() < 1e-14);
        // but (0, 0) is on the curve at distance 1, which |P|/|∇P| = 3/3 sees
        let prox = proximity_estimate(&[parabola()], c(0.0, 0.0), c(1.0, 0.0), &ProximityOptions::default());
        assert!((prox - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pure_v_component_uses_first_order_estimate() {
        let p = &v() - &BivariatePoly::constant(c(5.0, 0.0));
        let prox = proximity_estimate(&[p], c(100.0, 0.0), c(2.0, 0.0), &ProximityOptions::default());
        assert!((prox - 3.0).abs() < 1e-14);
    }

    #[test]
    fn ceiling_caps_the_estimate() {
        let o = ProximityOptions {
            ceiling: 0.25,
            ..Default::default()
        };
        assert_eq!(proximity_estimate(&[u()], c(10.0, 0.0), c(0.0, 0.0), &o), 0.25);
        assert_eq!(proximity_estimate(&[], c(10.0, 0.0), c(0.0, 0.0), &o), 0.25);
    }
}
