//! Truncated univariate power series at a complex center.

use num_complex::Complex64;
use thiserror::Error;

const CENTER_TOL: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("series must have at least one coefficient")]
    Empty,
    #[error("validity radius must be nonnegative, got {0}")]
    BadRadius(f64),
    #[error("series centers differ: {0} vs {1}")]
    CenterMismatch(Complex64, Complex64),
    #[error("constant term {0} vanishes (branch point or pole at the center)")]
    VanishingConstant(Complex64),
    #[error("root {root} is not a {k}-th root of the constant term {constant}")]
    InconsistentRoot {
        root: Complex64,
        k: u32,
        constant: Complex64,
    },
}

/// `Σ coeffs[k] (z - center)^k`, valid (at least) on the disc of radius
/// `validity_radius` around `center`.
#[derive(Clone, Debug, PartialEq)]
pub struct TaylorSeries {
    center: Complex64,
    coeffs: Vec<Complex64>,
    validity_radius: f64,
}

impl TaylorSeries {
    pub fn new(
        center: Complex64,
        coeffs: Vec<Complex64>,
        validity_radius: f64,
    ) -> Result<Self, SeriesError> {
        if coeffs.is_empty() {
            return Err(SeriesError::Empty);
        }
        if !(validity_radius >= 0.0) {
            return Err(SeriesError::BadRadius(validity_radius));
        }
        Ok(Self {
            center,
            coeffs,
            validity_radius,
        })
    }

    /// Constant series of degree `order`.
    pub fn constant(center: Complex64, value: Complex64, order: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); order + 1];
        coeffs[0] = value;
        Self {
            center,
            coeffs,
            validity_radius: f64::INFINITY,
        }
    }

    /// The identity `z` expanded at `center`: `center + (z - center)`.
    pub fn variable(center: Complex64, order: usize) -> Self {
        let mut s = Self::constant(center, center, order);
        if order >= 1 {
            s.coeffs[1] = Complex64::new(1.0, 0.0);
        }
        s
    }

    pub fn center(&self) -> Complex64 {
        self.center
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn validity_radius(&self) -> f64 {
        self.validity_radius
    }

    pub fn with_validity_radius(mut self, radius: f64) -> Self {
        self.validity_radius = radius.max(0.0);
        self
    }

    /// Degree of the truncation.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn constant_term(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Horner evaluation; returns `coeffs[0]` exactly at the center.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let h = z - self.center;
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * h + c)
    }

    pub fn eval_derivative(&self, z: Complex64) -> Complex64 {
        let h = z - self.center;
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, &c) in self.coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * h + c * k as f64;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        let coeffs = if self.coeffs.len() == 1 {
            vec![Complex64::new(0.0, 0.0)]
        } else {
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect()
        };
        Self {
            center: self.center,
            coeffs,
            validity_radius: self.validity_radius,
        }
    }

    /// Keeps degrees `0..=order`, padding with zeros if needed.
    pub fn truncate(mut self, order: usize) -> Self {
        self.coeffs.resize(order + 1, Complex64::new(0.0, 0.0));
        self
    }

    fn check_center(&self, other: &Self) -> Result<(), SeriesError> {
        let scale = 1.0 + self.center.norm().max(other.center.norm());
        if (self.center - other.center).norm() > CENTER_TOL * scale {
            return Err(SeriesError::CenterMismatch(self.center, other.center));
        }
        Ok(())
    }

    fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self, SeriesError> {
        self.check_center(other)?;
        let n = self.coeffs.len().min(other.coeffs.len());
        Ok(Self {
            center: self.center,
            coeffs: (0..n).map(|k| f(self.coeffs[k], other.coeffs[k])).collect(),
            validity_radius: self.validity_radius.min(other.validity_radius),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn neg(&self) -> Self {
        self.scale(Complex64::new(-1.0, 0.0))
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            center: self.center,
            coeffs: self.coeffs.iter().map(|&c| c * factor).collect(),
            validity_radius: self.validity_radius,
        }
    }

    /// Cauchy product truncated to the smaller of the two orders.
    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_center(other)?;
        let n = self.coeffs.len().min(other.coeffs.len());
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (i, &a) in self.coeffs[..n].iter().enumerate() {
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (j, &b) in other.coeffs[..n - i].iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Ok(Self {
            center: self.center,
            coeffs: out,
            validity_radius: self.validity_radius.min(other.validity_radius),
        })
    }

    /// Antiderivative with the given value at the center; the degree grows by one.
    pub fn integrate(&self, constant: Complex64) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(constant);
        coeffs.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| c / (k as f64 + 1.0)),
        );
        Self {
            center: self.center,
            coeffs,
            validity_radius: self.validity_radius,
        }
    }

    /// Multiplicative inverse; requires a nonzero constant term.
    pub fn inverse(&self) -> Result<Self, SeriesError> {
        let c0 = self.coeffs[0];
        if c0.norm() == 0.0 || !c0.norm().is_finite() {
            return Err(SeriesError::VanishingConstant(c0));
        }
        let n = self.coeffs.len();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        out[0] = c0.inv();
        for m in 1..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 1..=m {
                acc += self.coeffs[j] * out[m - j];
            }
            out[m] = -acc * out[0];
        }
        Ok(Self {
            center: self.center,
            coeffs: out,
            validity_radius: self.validity_radius,
        })
    }

    pub fn div(&self, other: &Self) -> Result<Self, SeriesError> {
        self.mul(&other.inverse()?)
    }

    /// Integer power by repeated squaring; negative exponents go through [`Self::inverse`].
    pub fn powi(&self, exp: i32) -> Result<Self, SeriesError> {
        let base = if exp < 0 {
            self.inverse()?
        } else {
            self.clone()
        };
        let mut e = exp.unsigned_abs();
        let mut acc = Self::constant(self.center, Complex64::new(1.0, 0.0), self.order())
            .with_validity_radius(self.validity_radius);
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&sq)?;
            }
            e >>= 1;
            if e > 0 {
                sq = sq.mul(&sq)?;
            }
        }
        Ok(acc)
    }

    /// The `k`-th root `s` of `self` with `s(center) = root_at_center`.
    ///
    /// Coefficients come from `k q s' = q' s`, which follows from
    /// differentiating `s^k = q`:
    /// `s_n = Σ_{j=1..n} (j - k (n - j)) q_j s_{n-j} / (k n q_0)`.
    pub fn kth_root(&self, k: u32, root_at_center: Complex64) -> Result<Self, SeriesError> {
        let q0 = self.coeffs[0];
        if q0.norm() == 0.0 || !q0.norm().is_finite() {
            return Err(SeriesError::VanishingConstant(q0));
        }
        let check = root_at_center.powu(k);
        if (check - q0).norm() > 1e-8 * (1.0 + q0.norm()) {
            return Err(SeriesError::InconsistentRoot {
                root: root_at_center,
                k,
                constant: q0,
            });
        }
        let kf = k as f64;
        let n = self.coeffs.len();
        let mut s = vec![Complex64::new(0.0, 0.0); n];
        s[0] = root_at_center;
        for m in 1..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 1..=m {
                let w = j as f64 - kf * (m - j) as f64;
                acc += self.coeffs[j] * s[m - j] * w;
            }
            s[m] = acc / (kf * m as f64 * q0);
        }
        Ok(Self {
            center: self.center,
            coeffs: s,
            validity_radius: self.validity_radius,
        })
    }
}
