//! Instance files.

use serde::{Deserialize, Serialize};

use quadfree::{DMatrix, LinearRow, LpProblem, QuadraticConstraint, Sense, SimplicialCone};

const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub dim: usize,
    #[serde(rename = "Q")]
    pub q: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: f64,
    pub point: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cone: Option<ConeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linear_constraints: Option<Vec<ConstraintSpec>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeSpec {
    pub rays: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSpec {
    pub coef: Vec<f64>,
    pub rhs: f64,
    pub sense: String,
}

#[derive(Debug)]
pub struct ParseError(pub String);

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ParseError {}

fn bad(msg: impl Into<String>) -> ParseError {
    ParseError(msg.into())
}

fn check_len(what: &str, v: &[f64], p: usize) -> Result<(), ParseError> {
    if v.len() != p {
        return Err(bad(format!("{what} has length {}, expected {p}", v.len())));
    }
    Ok(())
}

impl InstanceFile {
    /// Parses and validates; `Q` is symmetrized in place.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut inst: InstanceFile = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        inst.validate()?;
        Ok(inst)
    }

    fn validate(&mut self) -> Result<(), ParseError> {
        let p = self.dim;
        if p == 0 {
            return Err(bad("dim must be positive"));
        }
        if self.q.len() != p || self.q.iter().any(|r| r.len() != p) {
            return Err(bad(format!("Q must be {p}x{p}")));
        }
        check_len("b", &self.b, p)?;
        check_len("point", &self.point, p)?;
        for i in 0..p {
            for j in (i + 1)..p {
                let (u, v) = (self.q[i][j], self.q[j][i]);
                if (u - v).abs() > SYMMETRY_TOL {
                    return Err(bad(format!("Q is not symmetric: Q[{i}][{j}] = {u}, Q[{j}][{i}] = {v}")));
                }
                let avg = 0.5 * (u + v);
                self.q[i][j] = avg;
                self.q[j][i] = avg;
            }
        }
        if let Some(cone) = &self.cone {
            if cone.rays.len() != p {
                return Err(bad(format!("cone needs {p} rays, got {}", cone.rays.len())));
            }
            for (k, r) in cone.rays.iter().enumerate() {
                check_len(&format!("ray {k}"), r, p)?;
            }
        }
        if let Some(obj) = &self.objective {
            check_len("objective", obj, p)?;
        }
        for (k, row) in self.linear_constraints.iter().flatten().enumerate() {
            check_len(&format!("constraint {k}"), &row.coef, p)?;
            if Sense::parse(&row.sense).is_none() {
                return Err(bad(format!("constraint {k}: unknown sense {:?}", row.sense)));
            }
        }
        let finite = self.q.iter().flatten().chain(&self.b).chain(&self.point).all(|v| v.is_finite());
        if !finite || !self.c.is_finite() {
            return Err(bad("non-finite coefficient"));
        }
        Ok(())
    }

    pub fn q_matrix(&self) -> DMatrix<f64> {
        let p = self.dim;
        DMatrix::from_fn(p, p, |i, j| self.q[i][j])
    }

    pub fn constraint(&self) -> Result<QuadraticConstraint, ParseError> {
        QuadraticConstraint::new(self.q_matrix(), self.b.clone(), self.c, self.point.clone())
            .map_err(|e| bad(e.to_string()))
    }

    pub fn eval(&self, s: &[f64]) -> f64 {
        let p = self.dim;
        let mut v = self.c;
        for i in 0..p {
            v += self.b[i] * s[i];
            for j in 0..p {
                v += s[i] * self.q[i][j] * s[j];
            }
        }
        v
    }

    /// The cone at `point`, if given.
    pub fn cone(&self) -> Option<quadfree::Result<SimplicialCone>> {
        self.cone
            .as_ref()
            .map(|c| SimplicialCone::from_rays(self.point.clone(), &c.rays))
    }

    pub fn lp(&self) -> Result<LpProblem, ParseError> {
        let objective = self.objective.clone().ok_or_else(|| bad("instance has no objective"))?;
        let rows = self
            .linear_constraints
            .iter()
            .flatten()
            .map(|r| LinearRow::new(r.coef.clone(), Sense::parse(&r.sense).expect("validated"), r.rhs))
            .collect();
        Ok(LpProblem { objective, rows })
    }
}

/// Canonical text: pretty-printed with a trailing newline.
pub fn emit(inst: &InstanceFile) -> String {
    let mut s = serde_json::to_string_pretty(inst).expect("instance serializes");
    s.push('\n');
    s
}
