//! Points of the Riemann sphere and the chordal metric.
//!
//! The normalization makes the sphere have diameter one, so that
//! `chordal_distance(0, ∞) == 1` and every distance lies in `[0, 1]`.

use num_complex::Complex64;
use std::fmt;

/// A point of the extended complex plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpherePoint {
    Finite(Complex64),
    Infinity,
}

impl SpherePoint {
    /// Non-finite input (overflowed or NaN components) maps to `Infinity`.
    pub fn from_complex(c: Complex64) -> Self {
        if c.re.is_finite() && c.im.is_finite() {
            SpherePoint::Finite(c)
        } else {
            SpherePoint::Infinity
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, SpherePoint::Infinity)
    }

    pub fn finite(&self) -> Option<Complex64> {
        match *self {
            SpherePoint::Finite(c) => Some(c),
            SpherePoint::Infinity => None,
        }
    }

    /// Modulus, with `+∞` for the point at infinity.
    pub fn modulus(&self) -> f64 {
        match self {
            SpherePoint::Finite(c) => c.norm(),
            SpherePoint::Infinity => f64::INFINITY,
        }
    }

    /// Inverse stereographic projection onto the unit sphere in R³
    /// (north pole = ∞).
    pub fn to_unit_sphere(&self) -> [f64; 3] {
        match *self {
            SpherePoint::Infinity => [0.0, 0.0, 1.0],
            SpherePoint::Finite(c) => {
                let r2 = c.norm_sqr();
                if !r2.is_finite() {
                    return [0.0, 0.0, 1.0];
                }
                let d = 1.0 + r2;
                [2.0 * c.re / d, 2.0 * c.im / d, (r2 - 1.0) / d]
            }
        }
    }

    /// Stereographic projection of a unit vector back to the plane.
    pub fn from_unit_sphere(x: [f64; 3]) -> Self {
        let [x1, x2, x3] = x;
        if x3 > 0.0 {
            // (x1 + i x2) / (1 - x3) == (1 + x3) / (x1 - i x2), stable near the pole
            let den = Complex64::new(x1, -x2);
            if den.norm() == 0.0 {
                return SpherePoint::Infinity;
            }
            SpherePoint::from_complex(Complex64::new(1.0 + x3, 0.0) / den)
        } else {
            SpherePoint::Finite(Complex64::new(x1, x2) / (1.0 - x3))
        }
    }
}

impl From<Complex64> for SpherePoint {
    fn from(c: Complex64) -> Self {
        SpherePoint::from_complex(c)
    }
}

impl fmt::Display for SpherePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpherePoint::Finite(c) => write!(f, "{c}"),
            SpherePoint::Infinity => write!(f, "inf"),
        }
    }
}

/// Chordal distance on the Riemann sphere of diameter one.
pub fn chordal_distance(p: SpherePoint, q: SpherePoint) -> f64 {
    match (p, q) {
        (SpherePoint::Infinity, SpherePoint::Infinity) => 0.0,
        (SpherePoint::Finite(a), SpherePoint::Infinity)
        | (SpherePoint::Infinity, SpherePoint::Finite(a)) => 1.0 / (1.0 + a.norm_sqr()).sqrt(),
        (SpherePoint::Finite(a), SpherePoint::Finite(b)) => {
            let d = (a - b).norm() / ((1.0 + a.norm_sqr()).sqrt() * (1.0 + b.norm_sqr()).sqrt());
            d.min(1.0)
        }
    }
}

/// Largest pairwise chordal distance.
pub fn chordal_diameter(points: &[SpherePoint]) -> f64 {
    let mut diam: f64 = 0.0;
    for (i, &p) in points.iter().enumerate() {
        for &q in &points[i + 1..] {
            diam = diam.max(chordal_distance(p, q));
        }
    }
    diam
}

/// Fréchet mean for the chordal metric.
///
/// Chordal distance is half the Euclidean distance between the images on the
/// unit sphere, so the minimizer of the summed squared distances is the
/// normalized centroid of those images. Returns `None` for an empty slice or
/// an antipodally balanced set.
pub fn chordal_mean(points: &[SpherePoint]) -> Option<SpherePoint> {
    if points.is_empty() {
        return None;
    }
    let mut acc = [0.0f64; 3];
    for p in points {
        let x = p.to_unit_sphere();
        for k in 0..3 {
            acc[k] += x[k];
        }
    }
    let norm = (acc[0] * acc[0] + acc[1] * acc[1] + acc[2] * acc[2]).sqrt();
    if norm < 1e-300 {
        return None;
    }
    Some(SpherePoint::from_unit_sphere([
        acc[0] / norm,
        acc[1] / norm,
        acc[2] / norm,
    ]))
}
