use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

use super::{EvalError, EvalOptions, Expression, Node};

/// Largest relative radicand change accepted in one transport step.
const MAX_RELATIVE_CHANGE: f64 = 0.25;
/// Transport gives up once a sub-step shrinks below this fraction of the segment.
const MIN_TRANSPORT_FRACTION: f64 = 1e-13;

/// How sheets are chosen at the initial point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum BranchConvention {
    /// The k-th root with argument in `(-π/k, π/k]`: positive on the
    /// positive real axis.
    #[default]
    PrincipalPositiveReal,
}

impl BranchConvention {
    pub fn name(&self) -> &'static str {
        match self {
            BranchConvention::PrincipalPositiveReal => "principal-positive-real",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "principal-positive-real" => Some(BranchConvention::PrincipalPositiveReal),
            _ => None,
        }
    }
}

/// Current sheet value of every radical node at a base point `(w, z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchState {
    w: Complex64,
    z: Complex64,
    sheets: Vec<Complex64>,
}

impl BranchState {
    pub fn base_point(&self) -> (Complex64, Complex64) {
        (self.w, self.z)
    }

    /// Indexed like [`Expression::radicals`].
    pub fn sheets(&self) -> &[Complex64] {
        &self.sheets
    }
}

/// The k-th root with argument in `(-π/k, π/k]`.
pub fn principal_root(q: Complex64, k: u32) -> Complex64 {
    let (r, mut theta) = q.to_polar();
    if theta <= -PI {
        theta = PI;
    }
    Complex64::from_polar(r.powf(1.0 / k as f64), theta / k as f64)
}

/// The k-th root of `q` closest in argument to `previous`.
fn nearest_root(q: Complex64, k: u32, previous: Complex64) -> Complex64 {
    let p = principal_root(q, k);
    let turn = (previous / p).arg();
    let j = (turn * k as f64 / TAU).round();
    p * Complex64::from_polar(1.0, TAU * j / k as f64)
}

pub(super) fn eval_node(
    node: &Node,
    w: Complex64,
    z: Complex64,
    sheets: &[Complex64],
    opts: &EvalOptions,
) -> Result<Complex64, EvalError> {
    Ok(match node {
        Node::Const(c) => *c,
        Node::W => w,
        Node::Z => z,
        Node::Neg(a) => -eval_node(a, w, z, sheets, opts)?,
        Node::Add(a, b) => eval_node(a, w, z, sheets, opts)? + eval_node(b, w, z, sheets, opts)?,
        Node::Sub(a, b) => eval_node(a, w, z, sheets, opts)? - eval_node(b, w, z, sheets, opts)?,
        Node::Mul(a, b) => eval_node(a, w, z, sheets, opts)? * eval_node(b, w, z, sheets, opts)?,
        Node::Div(a, b) => {
            let den = eval_node(b, w, z, sheets, opts)?;
            if den.norm() < opts.pole_tolerance {
                return Err(EvalError::Pole { w, z, value: den });
            }
            eval_node(a, w, z, sheets, opts)? / den
        }
        Node::Pow(a, n) => {
            let base = eval_node(a, w, z, sheets, opts)?;
            if *n < 0 && base.norm() < opts.pole_tolerance {
                return Err(EvalError::Pole { w, z, value: base });
            }
            base.powi(*n)
        }
        Node::Rad(id) => sheets[*id],
    })
}

impl Expression {
    fn radicand_values(&self, w: Complex64, z: Complex64) -> Vec<Complex64> {
        self.radicals.iter().map(|r| r.poly.eval(w, z)).collect()
    }

    /// Sheets at `(w, z)` chosen by `convention`.
    pub fn init_branches(
        &self,
        w: Complex64,
        z: Complex64,
        convention: BranchConvention,
    ) -> Result<BranchState, EvalError> {
        let mut sheets = Vec::with_capacity(self.radicals.len());
        for (radical, (r, q)) in self
            .radicals
            .iter()
            .zip(self.radicand_values(w, z))
            .enumerate()
        {
            if q.norm() < self.options.continuity_floor {
                return Err(EvalError::BranchPoint {
                    radical,
                    w,
                    z,
                    value: q,
                });
            }
            sheets.push(match convention {
                BranchConvention::PrincipalPositiveReal => principal_root(q, r.index),
            });
        }
        Ok(BranchState { w, z, sheets })
    }

    /// Sheets given explicitly, one per radical node; each must be a root of
    /// its radicand at `(w, z)` to relative tolerance `1e-8`.
    pub fn branches_from_sheets(
        &self,
        w: Complex64,
        z: Complex64,
        sheets: Vec<Complex64>,
    ) -> Result<BranchState, EvalError> {
        if sheets.len() != self.radicals.len() {
            return Err(EvalError::SheetCount {
                expected: self.radicals.len(),
                got: sheets.len(),
            });
        }
        for (radical, ((r, q), &s)) in self
            .radicals
            .iter()
            .zip(self.radicand_values(w, z))
            .zip(&sheets)
            .enumerate()
        {
            if q.norm() < self.options.continuity_floor {
                return Err(EvalError::BranchPoint {
                    radical,
                    w,
                    z,
                    value: q,
                });
            }
            if (s.powu(r.index) - q).norm() > 1e-8 * (1.0 + q.norm()) {
                return Err(EvalError::InconsistentSheet {
                    value: s,
                    index: r.index,
                    radicand: q,
                });
            }
        }
        Ok(BranchState { w, z, sheets })
    }

    /// `F` at the state's own base point.
    pub fn eval_at_base(&self, state: &BranchState) -> Result<Complex64, EvalError> {
        self.eval_raw(state.w, state.z, &state.sheets)
    }

    fn eval_raw(&self, w: Complex64, z: Complex64, sheets: &[Complex64]) -> Result<Complex64, EvalError> {
        let v = eval_node(&self.root, w, z, sheets, &self.options)?;
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(EvalError::NonFinite { w, z });
        }
        Ok(v)
    }

    /// One continuity update from the state's base point to `(w, z)`: every
    /// radical takes the root of its new radicand nearest in argument to its
    /// previous sheet value; then `F` is evaluated.
    ///
    /// Correct only when the radicands stay away from zero along the segment,
    /// which the caller's step control must ensure ([`Self::transport`] does).
    pub fn eval_with_branches(
        &self,
        w: Complex64,
        z: Complex64,
        state: &BranchState,
    ) -> Result<(Complex64, BranchState), EvalError> {
        let next = self.step_branches(w, z, state)?;
        let value = self.eval_raw(w, z, &next.sheets)?;
        Ok((value, next))
    }

    fn step_branches(&self, w: Complex64, z: Complex64, state: &BranchState) -> Result<BranchState, EvalError> {
        let mut sheets = Vec::with_capacity(self.radicals.len());
        for (radical, (r, &prev)) in self.radicals.iter().zip(&state.sheets).enumerate() {
            let q = r.poly.eval(w, z);
            if q.norm() < self.options.continuity_floor {
                return Err(EvalError::AmbiguousSheet { radical, w, z });
            }
            sheets.push(nearest_root(q, r.index, prev));
        }
        Ok(BranchState { w, z, sheets })
    }

    /// Whether a single update from `state` to `(w, z)` is safe: every
    /// radicand moves by at most a quarter of its modulus, checked at the
    /// segment midpoint and endpoint.
    fn step_is_safe(&self, state: &BranchState, w: Complex64, z: Complex64) -> Result<bool, EvalError> {
        let (mw, mz) = ((state.w + w) * 0.5, (state.z + z) * 0.5);
        for (radical, r) in self.radicals.iter().enumerate() {
            let q0 = r.poly.eval(state.w, state.z);
            if q0.norm() < self.options.continuity_floor {
                return Err(EvalError::AmbiguousSheet {
                    radical,
                    w: state.w,
                    z: state.z,
                });
            }
            let limit = MAX_RELATIVE_CHANGE * q0.norm();
            if (r.poly.eval(mw, mz) - q0).norm() > limit || (r.poly.eval(w, z) - q0).norm() > limit {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Carries the sheets along the straight segment in C² from the state's
    /// base point to `(w, z)`, subdividing adaptively.
    pub fn transport(&self, state: &BranchState, w: Complex64, z: Complex64) -> Result<BranchState, EvalError> {
        if self.radicals.is_empty() {
            return Ok(BranchState {
                w,
                z,
                sheets: Vec::new(),
            });
        }
        let (w0, z0) = (state.w, state.z);
        let mut current = state.clone();
        let mut s = 0.0f64;
        let mut h = 1.0f64;
        while s < 1.0 {
            h = h.min(1.0 - s);
            let t = if s + h >= 1.0 { 1.0 } else { s + h };
            let (tw, tz) = if t == 1.0 {
                (w, z)
            } else {
                (w0 + (w - w0) * t, z0 + (z - z0) * t)
            };
            if self.step_is_safe(&current, tw, tz)? {
                current = self.step_branches(tw, tz, &current)?;
                s = t;
                h *= 2.0;
            } else {
                h *= 0.5;
                if h < MIN_TRANSPORT_FRACTION {
                    let radical = self
                        .radicals
                        .iter()
                        .enumerate()
                        .min_by(|a, b| {
                            a.1.poly
                                .eval(tw, tz)
                                .norm()
                                .total_cmp(&b.1.poly.eval(tw, tz).norm())
                        })
                        .map_or(0, |(i, _)| i);
                    return Err(EvalError::AmbiguousSheet {
                        radical,
                        w: tw,
                        z: tz,
                    });
                }
            }
        }
        Ok(current)
    }

    /// Transport to `(w, z)`, then evaluate there.
    pub fn eval_along(
        &self,
        state: &BranchState,
        w: Complex64,
        z: Complex64,
    ) -> Result<(Complex64, BranchState), EvalError> {
        let next = self.transport(state, w, z)?;
        let value = self.eval_raw(w, z, &next.sheets)?;
        Ok((value, next))
    }

    /// Transport through a sequence of points.
    pub fn transport_path<I>(&self, state: &BranchState, points: I) -> Result<BranchState, EvalError>
    where
        I: IntoIterator<Item = (Complex64, Complex64)>,
    {
        let mut current = state.clone();
        for (w, z) in points {
            current = self.transport(&current, w, z)?;
        }
        Ok(current)
    }
}
