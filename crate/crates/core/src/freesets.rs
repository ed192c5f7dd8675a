//! Free-set families as margin functions, their construction from a
//! canonical form, and boundary steps along rays.

use crate::corefns::{cap_max, phi_value, CaseData};
use crate::error::{Error, Result};
use crate::spectral::{CanonicalForm, CaseTag};
use crate::vecops::{axpy, dot, norm};

/// Default interior/boundary tolerance on margins.
pub const BOUNDARY_TOL: f64 = 1e-9;
const T_CAP: f64 = 1e12;

/// A convex set given by a margin: negative inside, zero on the boundary.
#[derive(Debug, Clone, PartialEq)]
pub enum FreeSet {
    /// `{λᵀx ≥ ‖y‖}`
    CLambda { lambda: Vec<f64> },
    /// `{max_{β ∈ G(λ)} βᵀy ≤ λᵀx}`
    CGLambda(CaseData),
    /// `{φ_λ(y) ≤ λᵀx}`
    CPhiLambda(CaseData),
    /// The relaxed set: inequalities with `r(β) > 0` are translated.
    CRPhiLambda(CaseData),
    /// `{coefᵀw ≤ rhs}`
    Halfspace { coef: Vec<f64>, rhs: f64 },
    /// `inner × Rˡ`, the last `l` coordinates are ignored.
    CylinderLift { inner: Box<FreeSet>, l: usize },
}

impl FreeSet {
    pub fn name(&self) -> &'static str {
        match self {
            FreeSet::CLambda { .. } => "CLambda",
            FreeSet::CGLambda(_) => "CGLambda",
            FreeSet::CPhiLambda(_) => "CPhiLambda",
            FreeSet::CRPhiLambda(_) => "CRPhiLambda",
            FreeSet::Halfspace { .. } => "Halfspace",
            FreeSet::CylinderLift { .. } => "CylinderLift",
        }
    }

    /// Strips any cylinder lifts.
    pub fn core(&self) -> &FreeSet {
        match self {
            FreeSet::CylinderLift { inner, .. } => inner.core(),
            other => other,
        }
    }

    pub fn case_data(&self) -> Option<&CaseData> {
        match self.core() {
            FreeSet::CGLambda(cd) | FreeSet::CPhiLambda(cd) | FreeSet::CRPhiLambda(cd) => Some(cd),
            _ => None,
        }
    }

    pub fn margin(&self, w: &[f64]) -> f64 {
        match self {
            FreeSet::CLambda { lambda } => {
                let n = lambda.len();
                norm(&w[n..]) - dot(lambda, &w[..n])
            }
            FreeSet::CGLambda(cd) => {
                let (x, y) = w.split_at(cd.n());
                cap_max(y, &cd.d, -cd.la) - dot(&cd.lambda, x)
            }
            FreeSet::CPhiLambda(cd) => {
                let (x, y) = w.split_at(cd.n());
                phi_value(cd, y) - dot(&cd.lambda, x)
            }
            FreeSet::CRPhiLambda(cd) => {
                let (x, y) = w.split_at(cd.n());
                relaxed_margin(cd, x, y)
            }
            FreeSet::Halfspace { coef, rhs } => dot(coef, w) - rhs,
            FreeSet::CylinderLift { inner, l } => inner.margin(&w[..w.len() - l]),
        }
    }
}

/// Margin of the relaxed set.
///
/// Its inequalities are `∇φ(β)ᵀy − λᵀx ≤ r(β)` over unit β. With
/// `y₀ = d/(1 − ‖d‖²)` and `λᵀx₀ = −λᵀa/(1 − ‖d‖²)` one has
/// `r(β) = ∇φ(β)ᵀy₀ − λᵀx₀` whenever `r(β) > 0`, so the family splits into
/// untranslated inequalities (β ∈ G(λ)) and inequalities translated to
/// `(x₀, y₀)`. Both suprema over β are caps of a sphere.
fn relaxed_margin(cd: &CaseData, x: &[f64], y: &[f64]) -> f64 {
    let la = cd.la;
    let t = dot(&cd.lambda, x);
    let first = cap_max(y, &cd.d, -la) - t;
    let nd2 = cd.d_norm * cd.d_norm;
    if la <= -cd.d_norm || la <= -1.0 {
        return first;
    }
    let one_m = 1.0 - nd2;
    let s = one_m.sqrt();
    let lx0 = -la / one_m;
    let u: Vec<f64> = y.iter().zip(&cd.d).map(|(yi, di)| yi - di / one_m).collect();
    let du = dot(&cd.d, &u);
    let wu: Vec<f64> = if nd2 > 0.0 {
        u.iter().zip(&cd.d).map(|(ui, di)| ui - (1.0 - s) * du * di / nd2).collect()
    } else {
        u.clone()
    };
    let root = (1.0 - la * la).max(0.0).sqrt();
    let c_prime = -la * s / root;
    let neg_d: Vec<f64> = cd.d.iter().map(|v| -v).collect();
    let cap = cap_max(&wu, &neg_d, -c_prime);
    let second = if cap == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        root * cap - la * du - (t - lx0)
    };
    first.max(second)
}

/// Picks the free set for the case of `cf`.
pub fn build_free_set(cf: &CanonicalForm) -> Result<FreeSet> {
    let lift = |inner: FreeSet| {
        if cf.l > 0 {
            FreeSet::CylinderLift { inner: Box::new(inner), l: cf.l }
        } else {
            inner
        }
    };
    match cf.case {
        CaseTag::NotSeparable => Err(Error::NotSeparable { value: cf.q_point }),
        CaseTag::EmptyS => Ok(FreeSet::Halfspace { coef: vec![0.0; cf.p + 1], rhs: 1.0 }),
        CaseTag::HomogHNonzero => Ok(lift(FreeSet::CLambda { lambda: cf.lambda.clone() })),
        CaseTag::Case1CgLambda => Ok(lift(FreeSet::CGLambda(CaseData::new(
            cf.lambda.clone(),
            cf.a.clone(),
            cf.d.clone(),
        )?))),
        CaseTag::Case2Cr => Ok(lift(FreeSet::CRPhiLambda(CaseData::unit(
            cf.lambda.clone(),
            cf.a.clone(),
            cf.d.clone(),
        )?))),
        CaseTag::Case2CrLambdaNegA => Ok(lift(FreeSet::CPhiLambda(CaseData::unit(
            cf.lambda.clone(),
            cf.a.clone(),
            cf.d.clone(),
        )?))),
        CaseTag::ConvexM1 => convex_halfspace(cf),
    }
}

/// Supporting halfspace for `m = 1`, `‖a‖ ≤ |d|`.
///
/// On the hyperplane `y = −(1 + aᵀx)/d`, so `S` projects to the convex set
/// `{x : |d|‖x‖ − aᵀx ≤ 1}`, which contains `x = 0`. The boundary point on
/// the segment from 0 to `x̄` is found by bisection and the halfspace is the
/// tangent there.
fn convex_halfspace(cf: &CanonicalForm) -> Result<FreeSet> {
    let n = cf.n;
    let ad = cf.d[0].abs();
    if ad == 0.0 {
        return Err(Error::DegenerateQuadratic("hyperplane has no y or x component".into()));
    }
    let xbar = &cf.point[..n];
    let g = |x: &[f64]| ad * norm(x) - dot(&cf.a, x) - 1.0;
    if g(xbar) <= 0.0 {
        return Err(Error::ApexNotInterior { margin: g(xbar) });
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(&xbar.iter().map(|v| v * mid).collect::<Vec<_>>()) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-16 {
            break;
        }
    }
    let xb: Vec<f64> = xbar.iter().map(|v| v * lo).collect();
    let nb = norm(&xb);
    let grad: Vec<f64> = xb.iter().zip(&cf.a).map(|(xi, ai)| ad * xi / nb - ai).collect();
    let gn = norm(&grad);
    let mut coef = vec![0.0; cf.p + 1];
    for i in 0..n {
        coef[i] = -grad[i] / gn;
    }
    let rhs = dot(&coef[..n], &xb);
    Ok(FreeSet::Halfspace { coef, rhs })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepLength {
    /// `sup {t ≥ 0 : apex + t·ray ∈ set}`, possibly infinite.
    pub value: f64,
    /// Margin at the returned step (0 for infinite steps).
    pub residual: f64,
}

impl StepLength {
    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

/// Largest step along `ray` from an apex with margin below `−tol`, by
/// doubling then bisection to relative width 1e−12. The returned step is on
/// the inside of the boundary.
pub fn boundary_step(fs: &FreeSet, apex: &[f64], ray: &[f64], tol: f64) -> Result<StepLength> {
    let m0 = fs.margin(apex);
    if !(m0 < -tol) {
        return Err(Error::ApexNotInterior { margin: m0 });
    }
    if norm(ray) == 0.0 {
        return Err(Error::InvalidInput("zero ray".into()));
    }
    let at = |t: f64| fs.margin(&axpy(apex, t, ray));
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    loop {
        if !(at(hi) <= 0.0) {
            break;
        }
        lo = hi;
        if hi >= T_CAP {
            return Ok(StepLength { value: f64::INFINITY, residual: 0.0 });
        }
        hi = (hi * 2.0).min(T_CAP);
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-12 * hi || mid <= lo || mid >= hi {
            return Ok(StepLength { value: lo, residual: at(lo) });
        }
        let mm = at(mid);
        if mm <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const R2: f64 = std::f64::consts::SQRT_2;

    fn example_three() -> CaseData {
        CaseData::unit(vec![-1.0 / R2, -1.0 / R2], vec![-1.0 / R2, 1.0 / R2], vec![1.0 / R2]).unwrap()
    }

    #[test]
    fn clambda_steps() {
        let fs = FreeSet::CLambda { lambda: vec![1.0] };
        let s = boundary_step(&fs, &[3.0, 0.0], &[0.0, 1.0], 1e-12).unwrap();
        assert_abs_diff_eq!(s.value, 3.0, epsilon = 1e-9);
        let s = boundary_step(&fs, &[3.0, 0.0], &[1.0, 0.0], 1e-12).unwrap();
        assert_eq!(s.value, f64::INFINITY);
        assert!(matches!(
            boundary_step(&fs, &[0.0, 1.0], &[1.0, 0.0], 1e-9),
            Err(Error::ApexNotInterior { .. })
        ));
    }

    #[test]
    fn step_lands_on_boundary() {
        let fs = FreeSet::CRPhiLambda(example_three());
        let apex = [-1.0, -1.0, 0.0];
        for ray in [[1.0, 0.0, 0.0], [0.3, 0.2, 1.0], [0.0, 0.5, -1.0]] {
            let s = boundary_step(&fs, &apex, &ray, 1e-12).unwrap();
            assert!(s.is_finite());
            assert!(s.residual <= 0.0 && s.residual.abs() <= 1e-9, "{s:?}");
            let beyond = axpy(&apex, s.value * (1.0 + 1e-6), &ray);
            assert!(fs.margin(&beyond) > 0.0);
        }
    }

    #[test]
    fn example_four_cglambda_witness_is_interior() {
        let cd = CaseData::new(vec![-0.8, -0.6], vec![-3.0, 4.0], vec![5.0]).unwrap();
        let fs = FreeSet::CGLambda(cd);
        assert_abs_diff_eq!(fs.margin(&[3.0, -4.0, 5.0]), -5.0, epsilon = 1e-12);
    }

    #[test]
    fn example_eight_relaxed_set() {
        let fs = FreeSet::CRPhiLambda(example_three());
        let c1 = |w: &[f64]| {
            let s = (w[0] + w[1]) / R2;
            (s - w[2]).max(s + w[2] / R2 - 1.0)
        };
        let mut state = 1u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 8.0 - 4.0
        };
        for _ in 0..1000 {
            let w = [next(), next(), next()];
            assert_abs_diff_eq!(fs.margin(&w), c1(&w), epsilon = 1e-9);
        }
    }

    #[test]
    fn cylinder_ignores_tail() {
        let fs = FreeSet::CylinderLift { inner: Box::new(FreeSet::CLambda { lambda: vec![1.0] }), l: 2 };
        assert_eq!(fs.margin(&[3.0, 1.0, 100.0, -100.0]), -2.0);
        assert_eq!(fs.core().name(), "CLambda");
    }
}
