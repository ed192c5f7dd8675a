//! Dense two-phase simplex with Bland's rule over free variables.

use crate::error::{Error, Result};
use crate::vecops::dot;

const EPS: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl Sense {
    pub fn as_str(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "<=" => Some(Sense::Le),
            "=" | "==" => Some(Sense::Eq),
            ">=" => Some(Sense::Ge),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearRow {
    pub coef: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

impl LinearRow {
    pub fn new(coef: Vec<f64>, sense: Sense, rhs: f64) -> Self {
        Self { coef, sense, rhs }
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        dot(&self.coef, x)
    }

    /// Amount by which `x` violates the row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let a = self.activity(x);
        match self.sense {
            Sense::Le => (a - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - a).max(0.0),
            Sense::Eq => (a - self.rhs).abs(),
        }
    }
}

/// `minimize cᵀx` subject to the rows, `x` free.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub rows: Vec<LinearRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

struct Tableau {
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let pv = self.t[r][c];
        for v in self.t[r].iter_mut() {
            *v /= pv;
        }
        let prow = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, p) in row.iter_mut().zip(&prow) {
                    *v -= f * p;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Minimizes the objective stored in the last row over columns
    /// `allowed`. Returns `false` when unbounded.
    fn run(&mut self, allowed: &[bool]) -> bool {
        let obj = self.t.len() - 1;
        let rhs = self.ncols;
        loop {
            let Some(c) = (0..self.ncols).find(|&j| allowed[j] && self.t[obj][j] < -EPS) else {
                return true;
            };
            let mut best: Option<(f64, usize, usize)> = None;
            for i in 0..obj {
                let a = self.t[i][c];
                if a > EPS {
                    let ratio = self.t[i][rhs] / a;
                    let better = match best {
                        None => true,
                        Some((br, _, bb)) => {
                            ratio < br - EPS || (ratio <= br + EPS && self.basis[i] < bb)
                        }
                    };
                    if better {
                        best = Some((ratio, i, self.basis[i]));
                    }
                }
            }
            let Some((_, r, _)) = best else { return false };
            self.pivot(r, c);
        }
    }
}

pub fn solve(problem: &LpProblem) -> Result<LpSolution> {
    let p = problem.objective.len();
    if problem.rows.iter().any(|r| r.coef.len() != p) {
        return Err(Error::InvalidInput("row length differs from objective length".into()));
    }
    let rows: Vec<(Vec<f64>, Sense, f64)> = problem
        .rows
        .iter()
        .map(|r| {
            if r.rhs < 0.0 {
                let flipped = match r.sense {
                    Sense::Le => Sense::Ge,
                    Sense::Ge => Sense::Le,
                    Sense::Eq => Sense::Eq,
                };
                (r.coef.iter().map(|v| -v).collect(), flipped, -r.rhs)
            } else {
                (r.coef.clone(), r.sense, r.rhs)
            }
        })
        .collect();
    let nrows = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != Sense::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Sense::Le).count();
    let ncols = 2 * p + n_slack + n_art;
    let art_start = 2 * p + n_slack;
    let mut t = vec![vec![0.0; ncols + 1]; nrows + 1];
    let mut basis = vec![0; nrows];
    let (mut si, mut ai) = (2 * p, art_start);
    for (i, (coef, sense, rhs)) in rows.iter().enumerate() {
        for j in 0..p {
            t[i][j] = coef[j];
            t[i][p + j] = -coef[j];
        }
        t[i][ncols] = *rhs;
        match sense {
            Sense::Le => {
                t[i][si] = 1.0;
                basis[i] = si;
                si += 1;
            }
            Sense::Ge => {
                t[i][si] = -1.0;
                si += 1;
                t[i][ai] = 1.0;
                basis[i] = ai;
                ai += 1;
            }
            Sense::Eq => {
                t[i][ai] = 1.0;
                basis[i] = ai;
                ai += 1;
            }
        }
    }
    let mut tab = Tableau { t, basis, ncols };

    if n_art > 0 {
        let obj = nrows;
        for j in art_start..ncols {
            tab.t[obj][j] = 1.0;
        }
        for i in 0..nrows {
            if tab.basis[i] >= art_start {
                let row = tab.t[i].clone();
                for (v, r) in tab.t[obj].iter_mut().zip(&row) {
                    *v -= r;
                }
            }
        }
        let all = vec![true; ncols];
        tab.run(&all);
        if -tab.t[obj][ncols] > 1e-9 {
            return Err(Error::InfeasibleLp);
        }
        // Drive remaining zero-level artificials out of the basis.
        let mut i = 0;
        while i < tab.t.len() - 1 {
            if tab.basis[i] >= art_start {
                if let Some(c) = (0..art_start).find(|&j| tab.t[i][j].abs() > 1e-9) {
                    tab.pivot(i, c);
                } else {
                    tab.t.remove(i);
                    tab.basis.remove(i);
                    continue;
                }
            }
            i += 1;
        }
    }

    let obj = tab.t.len() - 1;
    let mut cost = vec![0.0; ncols];
    for j in 0..p {
        cost[j] = problem.objective[j];
        cost[p + j] = -problem.objective[j];
    }
    tab.t[obj] = cost.iter().copied().chain(std::iter::once(0.0)).collect();
    for i in 0..obj {
        let b = tab.basis[i];
        let cb = cost[b];
        if cb != 0.0 {
            let row = tab.t[i].clone();
            for (v, r) in tab.t[obj].iter_mut().zip(&row) {
                *v -= cb * r;
            }
        }
    }
    let allowed: Vec<bool> = (0..ncols).map(|j| j < art_start).collect();
    if !tab.run(&allowed) {
        return Err(Error::UnboundedLp);
    }
    let mut x = vec![0.0; p];
    for i in 0..obj {
        let b = tab.basis[i];
        let v = tab.t[i][ncols];
        if b < p {
            x[b] += v;
        } else if b < 2 * p {
            x[b - p] -= v;
        }
    }
    let objective = dot(&problem.objective, &x);
    Ok(LpSolution { x, objective })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn boxed(lo: &[f64], hi: &[f64]) -> Vec<LinearRow> {
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
    fn box_minimum() {
        let lp = LpProblem { objective: vec![1.0, 1.0], rows: boxed(&[1.0, -0.5], &[3.0, 3.0]) };
        let sol = solve(&lp).unwrap();
        assert_abs_diff_eq!(sol.x[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.x[1], -0.5, epsilon = 1e-12);
    }

    #[test]
    fn equality_and_cut() {
        let mut rows = boxed(&[-5.0, -5.0], &[5.0, 5.0]);
        rows.push(LinearRow::new(vec![1.0, -1.0], Sense::Eq, 1.0));
        rows.push(LinearRow::new(vec![-1.0, -2.0], Sense::Le, -2.0));
        let lp = LpProblem { objective: vec![1.0, 0.0], rows };
        let sol = solve(&lp).unwrap();
        // x − y = 1, x + 2y ≥ 2 → x ≥ 4/3.
        assert_abs_diff_eq!(sol.x[0], 4.0 / 3.0, epsilon = 1e-10);
        assert_abs_diff_eq!(sol.objective, 4.0 / 3.0, epsilon = 1e-10);
    }

    #[test]
    fn unbounded_and_infeasible() {
        let lp = LpProblem { objective: vec![-1.0], rows: vec![LinearRow::new(vec![1.0], Sense::Ge, 0.0)] };
        assert_eq!(solve(&lp), Err(Error::UnboundedLp));
        let lp = LpProblem {
            objective: vec![1.0],
            rows: vec![LinearRow::new(vec![1.0], Sense::Ge, 2.0), LinearRow::new(vec![1.0], Sense::Le, 1.0)],
        };
        assert_eq!(solve(&lp), Err(Error::InfeasibleLp));
    }
}
