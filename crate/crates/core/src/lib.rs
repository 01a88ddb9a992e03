//! Analytic continuation of `w' = F(w, z)` for multi-valued `F` built from
//! radicals of bivariate polynomials, with endpoint-limit verdicts on the
//! Riemann sphere.

pub mod numerics;
pub mod poly;
pub mod rhs;
pub mod solver;
pub mod engine;

use num_complex::Complex64;

/// Shortest round-trip text of `x`, in exponent form outside `[1e-4, 1e15)`.
fn format_real(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !a.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Compact text form of a complex number: `3`, `2i`, `1.5-2i`, `1e-20+1i`.
pub fn format_complex(c: Complex64) -> String {
    if c.im == 0.0 {
        format_real(c.re)
    } else if c.re == 0.0 {
        format!("{}i", format_real(c.im))
    } else {
        let sign = if c.im < 0.0 { '-' } else { '+' };
        format!("{}{}{}i", format_real(c.re), sign, format_real(c.im.abs()))
    }
}
