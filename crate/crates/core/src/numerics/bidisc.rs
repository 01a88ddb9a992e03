//! Bidiscs in C² and suprema sampled on their distinguished boundary.

use num_complex::Complex64;
use std::f64::consts::TAU;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BidiscError {
    #[error("bidisc radii must be positive and finite (u: {radius_u}, v: {radius_v})")]
    BadRadius { radius_u: f64, radius_v: f64 },
}

/// `{|u - center_u| <= radius_u} × {|v - center_v| <= radius_v}`.
///
/// In the Cauchy-problem setting `u` is the dependent variable `w` (radius `b`)
/// and `v` the independent variable `z` (radius `a`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bidisc {
    pub center_u: Complex64,
    pub center_v: Complex64,
    pub radius_u: f64,
    pub radius_v: f64,
}

impl Bidisc {
    pub fn new(
        center_u: Complex64,
        center_v: Complex64,
        radius_u: f64,
        radius_v: f64,
    ) -> Result<Self, BidiscError> {
        let ok = |r: f64| r > 0.0 && r.is_finite();
        if !ok(radius_u) || !ok(radius_v) {
            return Err(BidiscError::BadRadius { radius_u, radius_v });
        }
        Ok(Self {
            center_u,
            center_v,
            radius_u,
            radius_v,
        })
    }

    /// Same center, both radii multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self, BidiscError> {
        Self::new(
            self.center_u,
            self.center_v,
            self.radius_u * factor,
            self.radius_v * factor,
        )
    }

    pub fn contains(&self, u: Complex64, v: Complex64) -> bool {
        (u - self.center_u).norm() <= self.radius_u && (v - self.center_v).norm() <= self.radius_v
    }
}

/// Failure of the sampled function at a boundary point.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("evaluation failed at (u, v) = ({u}, {v}): {source}")]
pub struct SampleError<E: std::error::Error + 'static> {
    pub u: Complex64,
    pub v: Complex64,
    #[source]
    pub source: E,
}

/// Value at a sample point was not finite.
#[derive(Debug, Error, Clone, Copy, PartialEq)]
#[error("non-finite value")]
pub struct NonFinite;

/// Grid sampler for `sup |f|` over the torus `{|u-c_u|=b} × {|v-c_v|=a}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TorusSampler {
    /// Samples per circle; the grid has `n × n` points.
    pub n: usize,
    /// Multiplier (≥ 1) applied to the sampled maximum.
    pub safety: f64,
}

impl Default for TorusSampler {
    fn default() -> Self {
        Self {
            n: 64,
            safety: 1.25,
        }
    }
}

impl TorusSampler {
    /// Grid points in visiting order.
    ///
    /// Rows follow the `v` angle; within a row the `u` angle runs forward on
    /// even rows and backward on odd rows, so consecutive points are always
    /// neighbours on the torus. Stateful evaluators (branch transport) rely
    /// on this.
    pub fn points(&self, bidisc: &Bidisc) -> Vec<(Complex64, Complex64)> {
        let n = self.n.max(1);
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            let v = bidisc.center_v + Complex64::from_polar(bidisc.radius_v, TAU * i as f64 / n as f64);
            for jj in 0..n {
                let j = if i % 2 == 0 { jj } else { n - 1 - jj };
                let u = bidisc.center_u
                    + Complex64::from_polar(bidisc.radius_u, TAU * j as f64 / n as f64);
                out.push((u, v));
            }
        }
        out
    }

    /// `safety · max |f|` over the torus grid.
    pub fn max_abs<F, E>(&self, bidisc: &Bidisc, mut f: F) -> Result<f64, SampleError<E>>
    where
        F: FnMut(Complex64, Complex64) -> Result<Complex64, E>,
        E: std::error::Error + 'static,
    {
        let mut max: f64 = 0.0;
        for (u, v) in self.points(bidisc) {
            let val = f(u, v).map_err(|source| SampleError { u, v, source })?;
            max = max.max(val.norm());
        }
        Ok(max * self.safety)
    }
}
