//! Demo cutting loop: solve the LP relaxation, separate its vertex from the
//! quadratic constraint with an intersection cut, repeat.

use nalgebra::DMatrix;

use crate::cuts::{separate, SimplicialCone};
use crate::error::{Error, Result};
use crate::lp::{solve, LinearRow, LpProblem, Sense};
use crate::spectral::QuadraticConstraint;
use crate::vecops::{dot, norm};

pub const FEASIBILITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Iteration {
    pub iter: usize,
    pub objective: f64,
    /// `q(vertex)`, positive when the vertex violates the constraint.
    pub violation: f64,
    pub point: Vec<f64>,
    /// Cut added after this iteration, as `coefᵀs ≤ rhs`.
    pub cut: Option<(Vec<f64>, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Feasible,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopOutcome {
    pub iterations: Vec<Iteration>,
    pub cuts: usize,
    pub stop: StopReason,
}

/// Rows active at `x` within a relative tolerance.
pub fn tight_rows(rows: &[LinearRow], x: &[f64]) -> Vec<usize> {
    rows.iter()
        .enumerate()
        .filter(|(_, r)| {
            let scale = 1.0 + r.rhs.abs() + norm(&r.coef) * norm(x);
            (r.activity(x) - r.rhs).abs() <= 1e-9 * scale
        })
        .map(|(i, _)| i)
        .collect()
}

/// The cone `{s : A_T(s − x) ≤ 0}` spanned by the columns of `−A_T⁻¹`, where
/// `A_T` holds the tight rows oriented as `≤`.
pub fn vertex_cone(rows: &[LinearRow], x: &[f64]) -> Result<SimplicialCone> {
    let p = x.len();
    let tight = tight_rows(rows, x);
    if tight.len() != p {
        return Err(Error::DegenerateVertex(format!("{} tight rows at a vertex in dimension {p}", tight.len())));
    }
    let a = DMatrix::from_fn(p, p, |i, j| {
        let r = &rows[tight[i]];
        if r.sense == Sense::Ge {
            -r.coef[j]
        } else {
            r.coef[j]
        }
    });
    let inv = a
        .try_inverse()
        .ok_or_else(|| Error::DegenerateVertex("tight rows are linearly dependent".into()))?;
    SimplicialCone::new(x.to_vec(), -inv).map_err(|e| match e {
        Error::DegenerateCone { condition } => {
            Error::DegenerateVertex(format!("tight rows are ill-conditioned ({condition:e})"))
        }
        other => other,
    })
}

/// Runs the loop until the vertex satisfies `q ≤ FEASIBILITY_TOL` or
/// `max_cuts` cuts were added. `on_iter` sees every iteration as it happens.
pub fn run<F: FnMut(&Iteration)>(
    q: &DMatrix<f64>,
    b: &[f64],
    c: f64,
    lp: &LpProblem,
    max_cuts: usize,
    zero_tol: f64,
    mut on_iter: F,
) -> Result<LoopOutcome> {
    let mut lp = lp.clone();
    let mut iterations = Vec::new();
    let mut cuts = 0;
    loop {
        let sol = solve(&lp)?;
        let qc = QuadraticConstraint::new(q.clone(), b.to_vec(), c, sol.x.clone())?;
        let violation = qc.violation();
        let mut it = Iteration {
            iter: iterations.len(),
            objective: sol.objective,
            violation,
            point: sol.x.clone(),
            cut: None,
        };
        if violation <= FEASIBILITY_TOL || cuts == max_cuts {
            on_iter(&it);
            iterations.push(it);
            let stop = if violation <= FEASIBILITY_TOL {
                StopReason::Feasible
            } else {
                StopReason::IterationLimit
            };
            return Ok(LoopOutcome { iterations, cuts, stop });
        }
        let cone = vertex_cone(&lp.rows, &sol.x)?;
        let cert = separate(&qc, &cone, zero_tol)?;
        let scale = norm(&cert.coef);
        let coef: Vec<f64> = cert.coef.iter().map(|v| v / scale).collect();
        let rhs = cert.rhs / scale;
        debug_assert!(dot(&coef, &sol.x) > rhs);
        lp.rows.push(LinearRow::new(coef.clone(), Sense::Le, rhs));
        cuts += 1;
        it.cut = Some((coef, rhs));
        on_iter(&it);
        iterations.push(it);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::DEFAULT_ZERO_TOL;

    fn box_rows(lo: &[f64], hi: &[f64]) -> Vec<LinearRow> {
        let p = lo.len();
        let mut rows = Vec::new();
        for i in 0..p {
            let mut e = vec![0.0; p];
            e[i] = 1.0;
            rows.push(LinearRow::new(e.clone(), Sense::Ge, lo[i]));
            rows.push(LinearRow::new(e, Sense::Le, hi[i]));
        }
        rows
    }

    #[test]
    fn feasible_vertex_needs_no_cut() {
        let q = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let lp = LpProblem { objective: vec![1.0, 1.0], rows: box_rows(&[0.0, 1.0], &[1.0, 2.0]) };
        let out = run(&q, &[0.0, 0.0], 0.0, &lp, 50, DEFAULT_ZERO_TOL, |_| {}).unwrap();
        assert_eq!(out.cuts, 0);
        assert_eq!(out.stop, StopReason::Feasible);
    }

    #[test]
    fn degenerate_vertex_detected() {
        let mut rows = box_rows(&[0.0, 0.0], &[1.0, 1.0]);
        rows.push(LinearRow::new(vec![1.0, 1.0], Sense::Ge, 0.0));
        assert!(matches!(vertex_cone(&rows, &[0.0, 0.0]), Err(Error::DegenerateVertex(_))));
    }
}
