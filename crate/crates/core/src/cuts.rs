//! Intersection cuts from a simplicial cone and a free set.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::freesets::{boundary_step, build_free_set, FreeSet, StepLength, BOUNDARY_TOL};
use crate::spectral::{canonicalize, CanonicalForm, CaseTag, QuadraticConstraint};
use crate::vecops::{dot, norm};

const MAX_CONDITION: f64 = 1e10;

/// Apex plus `p` linearly independent rays (the columns of `rays`).
#[derive(Debug, Clone, PartialEq)]
pub struct SimplicialCone {
    pub apex: Vec<f64>,
    pub rays: DMatrix<f64>,
    inv: DMatrix<f64>,
}

impl SimplicialCone {
    pub fn new(apex: Vec<f64>, rays: DMatrix<f64>) -> Result<Self> {
        let p = apex.len();
        if rays.nrows() != p || rays.ncols() != p || p == 0 {
            return Err(Error::InvalidInput(format!(
                "cone needs {p} rays of length {p}, got a {}x{} matrix",
                rays.nrows(),
                rays.ncols()
            )));
        }
        let sv = rays.clone().singular_values();
        let smax = sv.max();
        let smin = sv.min();
        let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        if !(condition <= MAX_CONDITION) {
            return Err(Error::DegenerateCone { condition });
        }
        let inv = rays
            .clone()
            .try_inverse()
            .ok_or(Error::DegenerateCone { condition: f64::INFINITY })?;
        Ok(Self { apex, rays, inv })
    }

    /// Builds a cone from ray vectors given one per entry.
    pub fn from_rays(apex: Vec<f64>, rays: &[Vec<f64>]) -> Result<Self> {
        let p = apex.len();
        if rays.len() != p || rays.iter().any(|r| r.len() != p) {
            return Err(Error::InvalidInput(format!("cone needs {p} rays of length {p}")));
        }
        Self::new(apex, DMatrix::from_fn(p, p, |i, j| rays[j][i]))
    }

    pub fn dim(&self) -> usize {
        self.apex.len()
    }

    pub fn ray(&self, j: usize) -> Vec<f64> {
        self.rays.column(j).iter().copied().collect()
    }

    /// Multipliers `μ = R⁻¹(s − apex)`.
    pub fn multipliers(&self, s: &[f64]) -> Vec<f64> {
        let diff = DVector::from_iterator(s.len(), s.iter().zip(&self.apex).map(|(a, b)| a - b));
        (&self.inv * diff).as_slice().to_vec()
    }

    pub fn contains(&self, s: &[f64], tol: f64) -> bool {
        self.multipliers(s).iter().all(|&m| m >= -tol)
    }
}

/// A cut `coefᵀs ≤ rhs` violated by the apex, with its derivation.
#[derive(Debug, Clone, PartialEq)]
pub struct CutCertificate {
    pub apex: Vec<f64>,
    pub rays: DMatrix<f64>,
    pub steps: Vec<StepLength>,
    /// Multiplier-space weights `1/t_j` (0 for infinite steps).
    pub weights: Vec<f64>,
    pub coef: Vec<f64>,
    pub rhs: f64,
    /// `coefᵀapex − rhs`
    pub apex_violation: f64,
    pub free_set: FreeSet,
    pub canonical: Option<CanonicalForm>,
}

impl CutCertificate {
    pub fn slack(&self, s: &[f64]) -> f64 {
        dot(&self.coef, s) - self.rhs
    }
}

/// Cut from the cone `cone` (original variables) and a free set living in
/// the canonical coordinates of `cf`.
pub fn intersection_cut(cone: &SimplicialCone, cf: &CanonicalForm, fs: &FreeSet) -> Result<CutCertificate> {
    intersection_cut_tol(cone, cf, fs, BOUNDARY_TOL)
}

pub fn intersection_cut_tol(
    cone: &SimplicialCone,
    cf: &CanonicalForm,
    fs: &FreeSet,
    tol: f64,
) -> Result<CutCertificate> {
    if cone.dim() != cf.p {
        return Err(Error::InvalidInput(format!(
            "cone dimension {} does not match instance dimension {}",
            cone.dim(),
            cf.p
        )));
    }
    let apex_w = cf.forward(&cone.apex);
    let m0 = fs.margin(&apex_w);
    if !(m0 < -tol) {
        return Err(Error::ApexNotInterior { margin: m0 });
    }
    let mut steps = Vec::with_capacity(cf.p);
    for j in 0..cf.p {
        let dir = cf.forward_dir(&cone.ray(j));
        if norm(&dir) == 0.0 {
            return Err(Error::InvalidInput(format!("ray {j} maps to zero")));
        }
        steps.push(boundary_step(fs, &apex_w, &dir, tol)?);
    }
    if steps.iter().all(|s| !s.is_finite()) {
        return Err(Error::AllRaysRecession);
    }
    let weights: Vec<f64> = steps
        .iter()
        .map(|s| if s.is_finite() { 1.0 / s.value } else { 0.0 })
        .collect();
    // Σ_j g_j μ_j ≥ 1 with μ = R⁻¹(s − apex), written as coefᵀs ≤ rhs.
    let g = DVector::from_column_slice(&weights);
    let coef: Vec<f64> = (-(cone.inv.transpose() * g)).as_slice().to_vec();
    let rhs = dot(&coef, &cone.apex) - 1.0;
    let apex_violation = dot(&coef, &cone.apex) - rhs;
    Ok(CutCertificate {
        apex: cone.apex.clone(),
        rays: cone.rays.clone(),
        steps,
        weights,
        coef,
        rhs,
        apex_violation,
        free_set: fs.clone(),
        canonical: Some(cf.clone()),
    })
}

/// Canonicalize, build the free set and cut, end to end.
///
/// The cone apex must be the point of `qc`.
pub fn separate(qc: &QuadraticConstraint, cone: &SimplicialCone, zero_tol: f64) -> Result<CutCertificate> {
    let cf = canonicalize(qc, zero_tol)?;
    match cf.case {
        CaseTag::NotSeparable => return Err(Error::NotSeparable { value: cf.q_point }),
        CaseTag::EmptyS => return Err(Error::EmptyS),
        _ => {}
    }
    let fs = build_free_set(&cf)?;
    intersection_cut(cone, &cf, &fs)
}
