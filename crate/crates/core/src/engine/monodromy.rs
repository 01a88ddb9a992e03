use num_complex::Complex64;

use super::{Arc, EngineError};
use crate::rhs::{BranchConvention, BranchState, Expression};

/// Tolerance for recognizing a multiplier as a root of unity.
const UNITY_TOL: f64 = 1e-6;

/// Effect of one loop on the sheet of a radical node.
#[derive(Clone, Debug, PartialEq)]
pub struct SheetMultiplier {
    pub radical: usize,
    pub index: u32,
    pub initial: Complex64,
    pub final_value: Complex64,
    /// `final_value / initial`.
    pub multiplier: Complex64,
    /// Whether `multiplier^index = 1` within `1e-6`.
    pub root_of_unity: bool,
    /// Smallest `j ≥ 1` with `multiplier^j = 1`, when it is a root of unity.
    pub order: Option<u32>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonodromyReport {
    pub w: Complex64,
    pub z: Complex64,
    pub sheets: Vec<SheetMultiplier>,
}

/// Carries the sheets around a closed loop in `z` with `w` held at `w0`.
pub fn monodromy_loop(
    expr: &Expression,
    w0: Complex64,
    z0: Complex64,
    loop_arc: &Arc,
    convention: BranchConvention,
) -> Result<MonodromyReport, EngineError> {
    let start = expr.init_branches(w0, z0, convention)?;
    monodromy_from(expr, &start, loop_arc)
}

/// [`monodromy_loop`] from given sheets at the loop's base point.
pub fn monodromy_from(expr: &Expression, start: &BranchState, loop_arc: &Arc) -> Result<MonodromyReport, EngineError> {
    let (w0, z0) = start.base_point();
    if !loop_arc.is_closed() {
        return Err(EngineError::NotClosed {
            start: loop_arc.start(),
            end: loop_arc.end(),
        });
    }
    if (loop_arc.start() - z0).norm() > 1e-12 * (1.0 + z0.norm()) {
        return Err(EngineError::ArcStart {
            arc_start: loop_arc.start(),
            z0,
        });
    }
    let points = loop_arc.vertices()[1..].iter().map(|&z| (w0, z));
    let end = expr.transport_path(start, points)?;
    let sheets = expr
        .radicals()
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let initial = start.sheets()[i];
            let final_value = end.sheets()[i];
            let multiplier = final_value / initial;
            let unity = |j: u32| (multiplier.powu(j) - 1.0).norm() <= UNITY_TOL;
            let root_of_unity = unity(r.index);
            let order = if root_of_unity {
                (1..=r.index).find(|&j| unity(j))
            } else {
                None
            };
            SheetMultiplier {
                radical: i,
                index: r.index,
                initial,
                final_value,
                multiplier,
                root_of_unity,
                order,
            }
        })
        .collect();
    Ok(MonodromyReport { w: w0, z: z0, sheets })
}
