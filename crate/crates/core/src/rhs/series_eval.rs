use num_complex::Complex64;

use super::{BranchState, EvalError, Expression, Node};
use crate::numerics::TaylorSeries;

impl Expression {
    /// `F(w(z), z)` as a truncated series about `w_series.center()`.
    ///
    /// Radicals are expanded with [`TaylorSeries::kth_root`] seeded by the
    /// state's sheet values, so `state` must sit at
    /// `(w_series(center), center)`.
    pub fn eval_series(
        &self,
        w_series: &TaylorSeries,
        state: &BranchState,
        order: usize,
    ) -> Result<TaylorSeries, EvalError> {
        let w = w_series.clone().truncate(order);
        let z = TaylorSeries::variable(w.center(), order);
        self.series_node(&self.root, &w, &z, state, order)
    }

    fn series_node(
        &self,
        node: &Node,
        w: &TaylorSeries,
        z: &TaylorSeries,
        state: &BranchState,
        order: usize,
    ) -> Result<TaylorSeries, EvalError> {
        let rec = |n: &Node| self.series_node(n, w, z, state, order);
        Ok(match node {
            Node::Const(c) => TaylorSeries::constant(w.center(), *c, order),
            Node::W => w.clone(),
            Node::Z => z.clone(),
            Node::Neg(a) => rec(a)?.neg(),
            Node::Add(a, b) => rec(a)?.add(&rec(b)?)?,
            Node::Sub(a, b) => rec(a)?.sub(&rec(b)?)?,
            Node::Mul(a, b) => rec(a)?.mul(&rec(b)?)?,
            Node::Div(a, b) => {
                let den = rec(b)?;
                self.check_pole(&den, w, z)?;
                rec(a)?.div(&den)?
            }
            Node::Pow(a, n) => {
                let base = rec(a)?;
                if *n < 0 {
                    self.check_pole(&base, w, z)?;
                }
                base.powi(*n)?
            }
            Node::Rad(id) => {
                let radical = &self.radicals[*id];
                let q = rec(&radical.radicand)?;
                let q0 = q.constant_term();
                if q0.norm() < self.options.continuity_floor {
                    return Err(EvalError::BranchPoint {
                        radical: *id,
                        w: w.constant_term(),
                        z: z.constant_term(),
                        value: q0,
                    });
                }
                q.kth_root(radical.index, state.sheets()[*id])?
            }
        })
    }

    fn check_pole(&self, den: &TaylorSeries, w: &TaylorSeries, z: &TaylorSeries) -> Result<(), EvalError> {
        let d0: Complex64 = den.constant_term();
        if d0.norm() < self.options.pole_tolerance {
            return Err(EvalError::Pole {
                w: w.constant_term(),
                z: z.constant_term(),
                value: d0,
            });
        }
        Ok(())
    }
}
