use num_complex::Complex64;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::format_complex;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Polynomial `Σ c[i][j] u^i v^j` with complex coefficients.
///
/// Rows are indexed by the `u` degree and may have different lengths.
/// Trailing zero entries and rows are trimmed on construction, so the zero
/// polynomial is the one with no rows.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct BivariatePoly {
    rows: Vec<Vec<Complex64>>,
}

impl BivariatePoly {
    pub fn from_grid(mut rows: Vec<Vec<Complex64>>) -> Self {
        for row in rows.iter_mut() {
            while row.last() == Some(&ZERO) {
                row.pop();
            }
        }
        while rows.last().map_or(false, |r| r.is_empty()) {
            rows.pop();
        }
        Self { rows }
    }

    pub fn zero() -> Self {
        Self { rows: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::from_grid(vec![vec![c]])
    }

    /// `c · u^i v^j`
    pub fn monomial(c: Complex64, i: usize, j: usize) -> Self {
        let mut rows = vec![Vec::new(); i + 1];
        rows[i] = vec![ZERO; j + 1];
        rows[i][j] = c;
        Self::from_grid(rows)
    }

    pub fn u() -> Self {
        Self::monomial(Complex64::new(1.0, 0.0), 1, 0)
    }

    pub fn v() -> Self {
        Self::monomial(Complex64::new(1.0, 0.0), 0, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }

    /// True for nonzero constants and for the zero polynomial.
    pub fn is_constant(&self) -> bool {
        self.rows.len() <= 1 && self.rows.first().map_or(true, |r| r.len() <= 1)
    }

    pub fn deg_u(&self) -> usize {
        self.rows.len().saturating_sub(1)
    }

    pub fn deg_v(&self) -> usize {
        self.rows
            .iter()
            .map(|r| r.len())
            .max()
            .unwrap_or(0)
            .saturating_sub(1)
    }

    pub fn grid(&self) -> &[Vec<Complex64>] {
        &self.rows
    }

    pub fn coefficient(&self, i: usize, j: usize) -> Complex64 {
        self.rows
            .get(i)
            .and_then(|r| r.get(j))
            .copied()
            .unwrap_or(ZERO)
    }

    /// Coefficient of `u^i` as a polynomial in `v` (ascending).
    pub fn u_coefficient(&self, i: usize) -> &[Complex64] {
        self.rows.get(i).map_or(&[], |r| r.as_slice())
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.rows
            .iter()
            .flatten()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// Horner in `u` over coefficients Horner-evaluated in `v`.
    pub fn eval(&self, u: Complex64, v: Complex64) -> Complex64 {
        self.rows
            .iter()
            .rev()
            .fold(ZERO, |acc, row| acc * u + horner(row, v))
    }

    /// `Σ |c_ij| |u|^i |v|^j`, the natural scale for rounding errors in [`Self::eval`].
    pub fn eval_abs(&self, u: Complex64, v: Complex64) -> f64 {
        let (au, av) = (u.norm(), v.norm());
        self.rows.iter().rev().fold(0.0, |acc, row| {
            acc * au + row.iter().rev().fold(0.0, |a, c| a * av + c.norm())
        })
    }

    /// Coefficients in `u` of `P(·, nu)`, ascending; trailing entries may be
    /// (numerically) zero when the degree drops at `nu`.
    pub fn restrict_v(&self, nu: Complex64) -> Vec<Complex64> {
        self.rows.iter().map(|row| horner(row, nu)).collect()
    }

    pub fn partial_u(&self) -> Self {
        Self::from_grid(
            self.rows
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, row)| row.iter().map(|&c| c * i as f64).collect())
                .collect(),
        )
    }

    pub fn partial_v(&self) -> Self {
        Self::from_grid(
            self.rows
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .skip(1)
                        .map(|(j, &c)| c * j as f64)
                        .collect()
                })
                .collect(),
        )
    }

    /// `(∂P/∂u, ∂P/∂v)` at a point.
    pub fn gradient(&self, u: Complex64, v: Complex64) -> (Complex64, Complex64) {
        (self.partial_u().eval(u, v), self.partial_v().eval(u, v))
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self::from_grid(
            self.rows
                .iter()
                .map(|row| row.iter().map(|&c| c * factor).collect())
                .collect(),
        )
    }

    pub fn powi(&self, exp: u32) -> Self {
        let mut acc = Self::constant(Complex64::new(1.0, 0.0));
        for _ in 0..exp {
            acc = &acc * self;
        }
        acc
    }

    /// Coefficient with the largest `(i, j)` in lexicographic order.
    fn leading(&self) -> Option<Complex64> {
        self.rows.last().and_then(|r| r.last()).copied()
    }

    /// Scaled so that the lexicographically leading coefficient is 1.
    pub fn normalized(&self) -> Self {
        match self.leading() {
            Some(lead) => self.scale(lead.inv()),
            None => Self::zero(),
        }
    }

    /// Whether `self = λ · other` for some nonzero `λ`, up to `tol` relative
    /// to the coefficient size after normalization.
    pub fn same_up_to_scalar(&self, other: &Self, tol: f64) -> bool {
        if self.is_zero() || other.is_zero() {
            return self.is_zero() && other.is_zero();
        }
        let (a, b) = (self.normalized(), other.normalized());
        if a.rows.len() != b.rows.len() {
            return false;
        }
        let scale = 1.0 + a.max_abs_coeff().max(b.max_abs_coeff());
        let n = a.rows.len();
        for i in 0..n {
            let m = a.rows[i].len().max(b.rows[i].len());
            for j in 0..m {
                if (a.coefficient(i, j) - b.coefficient(i, j)).norm() > tol * scale {
                    return false;
                }
            }
        }
        true
    }

    fn zip(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        let n = self.rows.len().max(other.rows.len());
        let rows = (0..n)
            .map(|i| {
                let m = self.u_coefficient(i).len().max(other.u_coefficient(i).len());
                (0..m)
                    .map(|j| f(self.coefficient(i, j), other.coefficient(i, j)))
                    .collect()
            })
            .collect();
        Self::from_grid(rows)
    }
}

fn horner(coeffs: &[Complex64], x: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(ZERO, |acc, &c| acc * x + c)
}

impl Add for &BivariatePoly {
    type Output = BivariatePoly;
    fn add(self, rhs: &BivariatePoly) -> BivariatePoly {
        self.zip(rhs, |a, b| a + b)
    }
}

impl Sub for &BivariatePoly {
    type Output = BivariatePoly;
    fn sub(self, rhs: &BivariatePoly) -> BivariatePoly {
        self.zip(rhs, |a, b| a - b)
    }
}

impl Neg for &BivariatePoly {
    type Output = BivariatePoly;
    fn neg(self) -> BivariatePoly {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for &BivariatePoly {
    type Output = BivariatePoly;
    fn mul(self, rhs: &BivariatePoly) -> BivariatePoly {
        if self.is_zero() || rhs.is_zero() {
            return BivariatePoly::zero();
        }
        let mut rows = vec![vec![ZERO; self.deg_v() + rhs.deg_v() + 1]; self.rows.len() + rhs.rows.len() - 1];
        for (i1, r1) in self.rows.iter().enumerate() {
            for (j1, &a) in r1.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                for (i2, r2) in rhs.rows.iter().enumerate() {
                    for (j2, &b) in r2.iter().enumerate() {
                        rows[i1 + i2][j1 + j2] += a * b;
                    }
                }
            }
        }
        BivariatePoly::from_grid(rows)
    }
}

/// Renders in the expression grammar with `w` for `u` and `z` for `v`.
impl fmt::Display for BivariatePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut terms = Vec::new();
        for (i, row) in self.rows.iter().enumerate().rev() {
            for (j, &c) in row.iter().enumerate().rev() {
                if c == ZERO {
                    continue;
                }
                let mut vars = Vec::new();
                match i {
                    0 => {}
                    1 => vars.push("w".to_string()),
                    _ => vars.push(format!("w^{i}")),
                }
                match j {
                    0 => {}
                    1 => vars.push("z".to_string()),
                    _ => vars.push(format!("z^{j}")),
                }
                let coeff = format!("({})", format_complex(c));
                if vars.is_empty() {
                    terms.push(coeff);
                } else if c == Complex64::new(1.0, 0.0) {
                    terms.push(vars.join("*"));
                } else {
                    terms.push(format!("{coeff}*{}", vars.join("*")));
                }
            }
        }
        write!(f, "{}", terms.join(" + "))
    }
}
