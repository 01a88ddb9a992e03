//! Bivariate polynomials over C and the singular set they cut out.

mod bivariate;
pub mod fiber;
pub mod roots;

pub use bivariate::BivariatePoly;
pub use fiber::{
    contained_lines, fiber_distance, fiber_roots, line_contained, proximity_estimate, Fiber,
    FiberRoot, ProximityOptions,
};
pub use roots::{polynomial_roots, RootOptions};

use num_complex::Complex64;
use std::f64::consts::TAU;
use thiserror::Error;

use crate::numerics::Bidisc;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("the line z = {nu} lies in the zero set (restriction vanishes identically)")]
    LineContained { nu: Complex64 },
    #[error("root finder did not converge after {iterations} iterations")]
    NoConvergence { iterations: u32 },
    #[error("zero polynomial")]
    ZeroPolynomial,
}

/// Relative clearance demanded between a bidisc and the singular set.
const CLEARANCE_MARGIN: f64 = 0.1;

/// The components of the singular set `A`, kept as a list (never multiplied
/// out), with the vertical lines each component contains.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct SingularSet {
    components: Vec<BivariatePoly>,
    vertical_lines: Vec<Vec<Complex64>>,
}

impl SingularSet {
    pub fn new(components: Vec<BivariatePoly>, opts: &RootOptions) -> Result<Self, PolyError> {
        let vertical_lines = components
            .iter()
            .map(|p| contained_lines(p, opts))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            components,
            vertical_lines,
        })
    }

    pub fn components(&self) -> &[BivariatePoly] {
        &self.components
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Lines `z = ν` contained in component `index`.
    pub fn vertical_lines(&self, index: usize) -> &[Complex64] {
        &self.vertical_lines[index]
    }

    pub fn proximity(&self, w: Complex64, z: Complex64, opts: &ProximityOptions) -> f64 {
        proximity_estimate(&self.components, w, z, opts)
    }

    /// Sampled test that the closed bidisc misses every component.
    ///
    /// Contained vertical lines are checked exactly; the remaining part of each
    /// component is checked through its fibers over the center of the
    /// `v`-disc and two rings of sample points, each fiber kept a margin
    /// beyond `radius_u`.
    pub fn avoids_bidisc(&self, bidisc: &Bidisc, opts: &RootOptions) -> bool {
        let ru = bidisc.radius_u * (1.0 + CLEARANCE_MARGIN);
        let rv = bidisc.radius_v * (1.0 + CLEARANCE_MARGIN);
        let mut samples = vec![bidisc.center_v];
        for (frac, count) in [(0.5, 8usize), (1.0, 16)] {
            for k in 0..count {
                samples.push(
                    bidisc.center_v
                        + Complex64::from_polar(bidisc.radius_v * frac, TAU * k as f64 / count as f64),
                );
            }
        }
        self.components.iter().zip(&self.vertical_lines).all(|(p, lines)| {
            if lines.iter().any(|nu| (nu - bidisc.center_v).norm() <= rv) {
                return false;
            }
            samples.iter().all(|&nu| match fiber_roots(p, nu, opts) {
                Ok(f) => f.values().all(|r| (r - bidisc.center_u).norm() > ru),
                Err(_) => false,
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn bidisc_clearance() {
        let set = SingularSet::new(vec![BivariatePoly::u()], &RootOptions::default()).unwrap();
        let near = Bidisc::new(c(1.0), c(0.0), 1.0, 5.0).unwrap();
        let far = Bidisc::new(c(1.0), c(0.0), 0.5, 5.0).unwrap();
        assert!(!set.avoids_bidisc(&near, &RootOptions::default()));
        assert!(set.avoids_bidisc(&far, &RootOptions::default()));
    }

    #[test]
    fn vertical_component_blocks_nearby_bidiscs() {
        let p = &BivariatePoly::v() - &BivariatePoly::constant(c(5.0));
        let set = SingularSet::new(vec![p], &RootOptions::default()).unwrap();
        assert_eq!(set.vertical_lines(0).len(), 1);
        let o = RootOptions::default();
        assert!(set.avoids_bidisc(&Bidisc::new(c(0.0), c(0.0), 1.0, 1.0).unwrap(), &o));
        assert!(!set.avoids_bidisc(&Bidisc::new(c(0.0), c(4.0), 1.0, 1.0).unwrap(), &o));
    }

    #[test]
    fn empty_set_avoids_everything() {
        let set = SingularSet::default();
        assert!(set.is_empty());
        assert!(set.avoids_bidisc(&Bidisc::new(c(0.0), c(0.0), 1e9, 1e9).unwrap(), &RootOptions::default()));
    }
}
