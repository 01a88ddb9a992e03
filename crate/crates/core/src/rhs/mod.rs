//! The multi-valued right-hand side `F(w, z)` as an expression tree with
//! radical nodes over bivariate polynomials.
//!
//! Each `rad(k, q)` node contributes a k-sheeted covering branched over
//! `{q = 0}`; a [`BranchState`] picks one sheet per node at a base point and
//! carries it along paths by continuity. The singular set of the problem is
//! the union of radicand and denominator zero sets.

mod branch;
mod parser;
mod series_eval;

pub use branch::{BranchConvention, BranchState};
pub use parser::ParseError;

use num_complex::Complex64;
use std::fmt;
use thiserror::Error;

use crate::numerics::SeriesError;
use crate::poly::BivariatePoly;

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Const(Complex64),
    W,
    Z,
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, i32),
    /// Index into [`Expression::radicals`].
    Rad(usize),
}

/// A `rad(index, radicand)` node.
#[derive(Clone, Debug, PartialEq)]
pub struct Radical {
    pub index: u32,
    pub radicand: Node,
    /// The radicand multiplied out.
    pub poly: BivariatePoly,
    /// Distinct-looking polynomial factors of the radicand, used for the
    /// singular set.
    pub factors: Vec<BivariatePoly>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalOptions {
    /// Denominators with smaller modulus are reported as poles.
    pub pole_tolerance: f64,
    /// Radicands with smaller modulus leave the sheet ambiguous.
    pub continuity_floor: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            pole_tolerance: 1e-12,
            continuity_floor: 1e-12,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("pole: denominator is {value} at (w, z) = ({w}, {z})")]
    Pole {
        w: Complex64,
        z: Complex64,
        value: Complex64,
    },
    #[error("branch point: radicand #{radical} is {value} at (w, z) = ({w}, {z})")]
    BranchPoint {
        radical: usize,
        w: Complex64,
        z: Complex64,
        value: Complex64,
    },
    #[error("ambiguous sheet: radicand #{radical} fell below the continuity floor near (w, z) = ({w}, {z})")]
    AmbiguousSheet {
        radical: usize,
        w: Complex64,
        z: Complex64,
    },
    #[error("expected {expected} sheet values, got {got}")]
    SheetCount { expected: usize, got: usize },
    #[error("sheet value {value} is not a {index}-th root of the radicand {radicand}")]
    InconsistentSheet {
        value: Complex64,
        index: u32,
        radicand: Complex64,
    },
    #[error("non-finite value at (w, z) = ({w}, {z})")]
    NonFinite { w: Complex64, z: Complex64 },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// A parsed right-hand side.
#[derive(Clone, Debug, PartialEq)]
pub struct Expression {
    source: String,
    root: Node,
    radicals: Vec<Radical>,
    components: Vec<BivariatePoly>,
    options: EvalOptions,
}

/// Deduplication tolerance for components that differ by a scalar factor.
const SAME_COMPONENT_TOL: f64 = 1e-12;

impl Expression {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let parsed = parser::parse(text)?;
        let mut components: Vec<BivariatePoly> = Vec::new();
        let candidates = parsed
            .radicals
            .iter()
            .flat_map(|r| r.factors.iter().cloned())
            .chain(parsed.denominators);
        for p in candidates {
            if p.is_constant() {
                continue;
            }
            if !components
                .iter()
                .any(|q| q.same_up_to_scalar(&p, SAME_COMPONENT_TOL))
            {
                components.push(p);
            }
        }
        Ok(Self {
            source: text.trim().to_string(),
            root: parsed.root,
            radicals: parsed.radicals,
            components,
            options: EvalOptions::default(),
        })
    }

    pub fn with_options(mut self, options: EvalOptions) -> Self {
        self.options = options;
        self
    }

    pub fn options(&self) -> &EvalOptions {
        &self.options
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn radicals(&self) -> &[Radical] {
        &self.radicals
    }

    pub fn has_radicals(&self) -> bool {
        !self.radicals.is_empty()
    }

    /// Components of the singular set: radicand factors (branch locus) and
    /// denominator factors (poles), without duplicates up to scalar multiples.
    pub fn singular_set(&self) -> &[BivariatePoly] {
        &self.components
    }

    /// The polynomial the whole expression denotes, when it has no radicals
    /// and no non-constant denominators.
    pub fn as_polynomial(&self) -> Option<BivariatePoly> {
        parser::to_poly(&self.root)
    }

    fn depends_on_point(node: &Node) -> bool {
        match node {
            Node::Const(_) => false,
            Node::W | Node::Z | Node::Rad(_) => true,
            Node::Neg(a) | Node::Pow(a, _) => Self::depends_on_point(a),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                Self::depends_on_point(a) || Self::depends_on_point(b)
            }
        }
    }

    /// Value of an expression without variables or radicals.
    pub fn constant_value(&self) -> Result<Complex64, ParseError> {
        if Self::depends_on_point(&self.root) {
            return Err(ParseError::NotConstant);
        }
        let zero = Complex64::new(0.0, 0.0);
        branch::eval_node(&self.root, zero, zero, &[], &self.options)
            .map_err(|_| ParseError::NotConstant)
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

/// Parses a complex literal such as `1.5-2i`, `-i` or `3`.
pub fn parse_complex(text: &str) -> Result<Complex64, ParseError> {
    Expression::parse(text)?.constant_value()
}
