//! All roots of a univariate complex polynomial at once.
//!
//! Aberth–Ehrlich iteration from a seeded random circular start, falling back
//! to Durand–Kerner, followed by Newton polishing.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

use super::PolyError;

const STEP_TOL: f64 = 1e-14;
const ACCEPT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RootOptions {
    pub max_iterations: u32,
    /// Seed for the randomized initial circle.
    pub seed: u64,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            seed: 0x5eed,
        }
    }
}

fn eval_with_derivative(coeffs: &[Complex64], x: Complex64) -> (Complex64, Complex64) {
    let zero = Complex64::new(0.0, 0.0);
    let mut p = zero;
    let mut dp = zero;
    for &c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

fn abs_eval(coeffs: &[Complex64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c.norm())
}

fn initial_guesses(coeffs: &[Complex64], opts: &RootOptions) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n].norm();
    let radius = 1.0
        + coeffs[..n]
            .iter()
            .map(|c| c.norm() / lead)
            .fold(0.0, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let offset: f64 = rng.gen::<f64>() * TAU;
    (0..n)
        .map(|k| {
            let jitter: f64 = rng.gen::<f64>() * 0.25;
            Complex64::from_polar(radius, offset + TAU * (k as f64 + jitter) / n as f64)
        })
        .collect()
}

fn aberth(coeffs: &[Complex64], z: &mut [Complex64], max_iterations: u32) -> bool {
    let n = z.len();
    for _ in 0..max_iterations {
        let mut converged = true;
        for k in 0..n {
            let (p, dp) = eval_with_derivative(coeffs, z[k]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = if dp.norm() == 0.0 {
                // stationary point: nudge
                Complex64::new(STEP_TOL.sqrt(), STEP_TOL.sqrt()) * (1.0 + z[k].norm())
            } else {
                p / dp
            };
            let mut repulsion = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != k {
                    let d = z[k] - z[j];
                    if d.norm() > 0.0 {
                        repulsion += d.inv();
                    }
                }
            }
            let correction = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !(correction.re.is_finite() && correction.im.is_finite()) {
                return false;
            }
            z[k] -= correction;
            if correction.norm() > STEP_TOL * (1.0 + z[k].norm()) {
                converged = false;
            }
        }
        if converged {
            return true;
        }
    }
    false
}

fn durand_kerner(coeffs: &[Complex64], z: &mut [Complex64], max_iterations: u32) -> bool {
    let n = z.len();
    let lead = coeffs[n];
    for _ in 0..max_iterations {
        let mut converged = true;
        for k in 0..n {
            let (p, _) = eval_with_derivative(coeffs, z[k]);
            let mut den = lead;
            for j in 0..n {
                if j != k {
                    den *= z[k] - z[j];
                }
            }
            if den.norm() == 0.0 {
                continue;
            }
            let correction = p / den;
            if !(correction.re.is_finite() && correction.im.is_finite()) {
                return false;
            }
            z[k] -= correction;
            if correction.norm() > STEP_TOL * (1.0 + z[k].norm()) {
                converged = false;
            }
        }
        if converged {
            return true;
        }
    }
    false
}

fn polish(coeffs: &[Complex64], z: &mut [Complex64]) {
    for root in z.iter_mut() {
        for _ in 0..5 {
            let (p, dp) = eval_with_derivative(coeffs, *root);
            if p.norm() == 0.0 || dp.norm() == 0.0 {
                break;
            }
            let next = *root - p / dp;
            if eval_with_derivative(coeffs, next).0.norm() < p.norm() {
                *root = next;
            } else {
                break;
            }
        }
    }
}

fn acceptable(coeffs: &[Complex64], z: &[Complex64]) -> bool {
    z.iter().all(|&r| {
        let p = eval_with_derivative(coeffs, r).0.norm();
        p.is_finite() && p <= ACCEPT_TOL * abs_eval(coeffs, r.norm()).max(f64::MIN_POSITIVE)
    })
}

/// Roots of `Σ coeffs[i] x^i`, repeated according to multiplicity.
///
/// The leading coefficient must be nonzero; callers trim it beforehand.
pub fn polynomial_roots(
    coeffs: &[Complex64],
    opts: &RootOptions,
) -> Result<Vec<Complex64>, PolyError> {
    let n = coeffs.len().saturating_sub(1);
    if coeffs.is_empty() || coeffs[n].norm() == 0.0 {
        return Err(PolyError::ZeroPolynomial);
    }
    match n {
        0 => return Ok(Vec::new()),
        1 => return Ok(vec![-coeffs[0] / coeffs[1]]),
        _ => {}
    }
    let start = initial_guesses(coeffs, opts);
    let mut z = start.clone();
    let mut ok = aberth(coeffs, &mut z, opts.max_iterations);
    if !ok && !acceptable(coeffs, &z) {
        z = start;
        ok = durand_kerner(coeffs, &mut z, opts.max_iterations);
    }
    polish(coeffs, &mut z);
    if ok || acceptable(coeffs, &z) {
        Ok(z)
    } else {
        Err(PolyError::NoConvergence {
            iterations: opts.max_iterations,
        })
    }
}
