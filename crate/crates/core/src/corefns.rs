//! Closed forms for φ_λ, its gradient, the dual multiplier θ, the
//! relaxation amount r(β), the primal maximizer x(β) and G(λ) membership.

use crate::error::{Error, Result};
use crate::vecops::{dot, norm};

const UNIT_TOL: f64 = 1e-10;

/// Data `(λ, a, d)` shared by the closed forms.
///
/// The formulas for φ, θ, r and x(β) assume `‖a‖ = 1`; `unit` records
/// whether that was enforced. G(λ) membership and the CGLambda margin use
/// the raw `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseData {
    pub lambda: Vec<f64>,
    pub a: Vec<f64>,
    pub d: Vec<f64>,
    /// `λᵀa`
    pub la: f64,
    pub d_norm: f64,
    pub unit: bool,
}

impl CaseData {
    pub fn new(lambda: Vec<f64>, a: Vec<f64>, d: Vec<f64>) -> Result<Self> {
        if lambda.len() != a.len() || lambda.is_empty() || d.is_empty() {
            return Err(Error::InvalidInput(format!(
                "need n = len(λ) = len(a) ≥ 1 and m ≥ 1, got {}, {}, {}",
                lambda.len(),
                a.len(),
                d.len()
            )));
        }
        let ln = norm(&lambda);
        if (ln - 1.0).abs() > 1e-12 {
            return Err(Error::NotUnit { norm: ln });
        }
        let la = dot(&lambda, &a);
        let d_norm = norm(&d);
        Ok(Self { lambda, a, d, la, d_norm, unit: false })
    }

    /// Case 2 data: `‖a‖ = 1`, `‖d‖ ≤ 1` and `λ ≠ a`.
    pub fn unit(lambda: Vec<f64>, a: Vec<f64>, d: Vec<f64>) -> Result<Self> {
        let mut cd = Self::new(lambda, a, d)?;
        let an = norm(&cd.a);
        if (an - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotUnit { norm: an });
        }
        if cd.d_norm > 1.0 + 1e-12 {
            return Err(Error::PreconditionViolated(format!("‖d‖ = {} exceeds 1", cd.d_norm)));
        }
        if cd.la >= 1.0 - 1e-12 {
            return Err(Error::PreconditionViolated("λ coincides with a".into()));
        }
        cd.unit = true;
        Ok(cd)
    }

    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    pub fn m(&self) -> usize {
        self.d.len()
    }

    /// `λ = −a`, where r vanishes identically.
    pub fn lambda_is_neg_a(&self) -> bool {
        self.la <= -1.0 + 1e-12
    }
}

fn check_unit(beta: &[f64]) -> Result<()> {
    let n = norm(beta);
    if (n - 1.0).abs() > UNIT_TOL {
        return Err(Error::NotUnit { norm: n });
    }
    Ok(())
}

/// `true` when `λᵀa‖y‖ + dᵀy ≤ 0`, the region where φ(y) = ‖y‖.
#[inline]
pub fn first_branch(cd: &CaseData, y: &[f64]) -> bool {
    cd.la * norm(y) + dot(&cd.d, y) <= 0.0
}

/// `‖y‖_W² = ‖y‖² − (dᵀy)²`, clamped at zero.
#[inline]
fn w_norm_sq(cd: &CaseData, y: &[f64]) -> f64 {
    let dy = dot(&cd.d, y);
    (dot(y, y) - dy * dy).max(0.0)
}

/// `φ_λ(y) = max { λᵀx : ‖x‖ ≤ ‖y‖, aᵀx + dᵀy ≤ 0 }`
pub fn phi_value(cd: &CaseData, y: &[f64]) -> f64 {
    let ny = norm(y);
    let dy = dot(&cd.d, y);
    if cd.la * ny + dy <= 0.0 {
        return ny;
    }
    (w_norm_sq(cd, y) * (1.0 - cd.la * cd.la).max(0.0)).sqrt() - dy * cd.la
}

pub fn phi_gradient(cd: &CaseData, y: &[f64]) -> Result<Vec<f64>> {
    let ny = norm(y);
    if ny == 0.0 {
        return Err(Error::UndefinedGradient);
    }
    if first_branch(cd, y) {
        return Ok(y.iter().map(|v| v / ny).collect());
    }
    let root = (1.0 - cd.la * cd.la).max(0.0).sqrt();
    if cd.m() == 1 {
        let d = cd.d[0];
        let g = y[0].signum() * ((1.0 - d * d).max(0.0) * (1.0 - cd.la * cd.la).max(0.0)).sqrt()
            - cd.la * d;
        return Ok(vec![g]);
    }
    let wn = w_norm_sq(cd, y).sqrt();
    if wn <= 1e-14 * ny {
        return Err(Error::UndefinedGradient);
    }
    let dy = dot(&cd.d, y);
    Ok(y.iter()
        .zip(&cd.d)
        .map(|(yi, di)| root * (yi - di * dy) / wn - cd.la * di)
        .collect())
}

/// Optimal multiplier of the dual of the problem defining φ.
/// Returns `f64::INFINITY` on the second branch when `‖y‖ = |dᵀy|`.
pub fn theta_dual(cd: &CaseData, y: &[f64]) -> f64 {
    if first_branch(cd, y) {
        return 0.0;
    }
    let wn2 = w_norm_sq(cd, y);
    if wn2 == 0.0 {
        return f64::INFINITY;
    }
    cd.la + dot(&cd.d, y) * (1.0 - cd.la * cd.la).max(0.0).sqrt() / wn2.sqrt()
}

/// Dual objective `‖λ − θa‖·‖y‖ − θ·dᵀy`.
pub fn dual_objective(cd: &CaseData, y: &[f64], theta: f64) -> f64 {
    let diff: Vec<f64> = cd.lambda.iter().zip(&cd.a).map(|(l, a)| l - theta * a).collect();
    norm(&diff) * norm(y) - theta * dot(&cd.d, y)
}

/// Relaxation amount of the inequality indexed by the unit vector β.
pub fn r_coefficient(cd: &CaseData, beta: &[f64]) -> Result<f64> {
    check_unit(beta)?;
    let db = dot(&cd.d, beta);
    if cd.la + db <= 0.0 {
        return Ok(0.0);
    }
    let phi = phi_value(cd, beta);
    let den = phi + db * cd.la;
    if den <= 1e-15 {
        return Err(Error::DegenerateDenominator);
    }
    Ok((db + cd.la * phi) / den)
}

/// Maximizer of the problem defining φ(y).
pub fn x_beta(cd: &CaseData, y: &[f64]) -> Result<Vec<f64>> {
    let one_minus = 1.0 - cd.la * cd.la;
    if one_minus <= 1e-14 {
        return Err(Error::DegenerateDenominator);
    }
    let ny = norm(y);
    if first_branch(cd, y) {
        return Ok(cd.lambda.iter().map(|l| l * ny).collect());
    }
    let dy = dot(&cd.d, y);
    let s = (w_norm_sq(cd, y) / one_minus).sqrt();
    let k = dy + cd.la * s;
    Ok(cd.lambda.iter().zip(&cd.a).map(|(l, a)| s * l - k * a).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GMembership {
    Strict,
    Boundary,
    Outside,
}

impl GMembership {
    pub fn is_member(self) -> bool {
        !matches!(self, GMembership::Outside)
    }
}

/// Membership of the unit vector β in `G(λ) = {β : ‖β‖ = 1, aᵀλ + dᵀβ ≤ 0}`.
pub fn in_g(cd: &CaseData, beta: &[f64], tol: f64) -> Result<GMembership> {
    check_unit(beta)?;
    let v = cd.la + dot(&cd.d, beta);
    Ok(if v < -tol {
        GMembership::Strict
    } else if v <= tol {
        GMembership::Boundary
    } else {
        GMembership::Outside
    })
}

/// `max { γᵀv : ‖γ‖ = 1, eᵀγ ≤ c }`, or `−∞` when the cap is empty.
pub fn cap_max(v: &[f64], e: &[f64], c: f64) -> f64 {
    if v.len() == 1 {
        return [-1.0, 1.0]
            .into_iter()
            .filter(|g| e[0] * g <= c)
            .map(|g| g * v[0])
            .fold(f64::NEG_INFINITY, f64::max);
    }
    let ne = norm(e);
    let nv = norm(v);
    if ne == 0.0 {
        return if c >= 0.0 { nv } else { f64::NEG_INFINITY };
    }
    if c >= ne {
        return nv;
    }
    if c < -ne {
        return f64::NEG_INFINITY;
    }
    let ev = dot(e, v);
    if ev <= c * nv {
        return nv;
    }
    let ne2 = ne * ne;
    c * ev / ne2 + (1.0 - c * c / ne2).max(0.0).sqrt() * (nv * nv - ev * ev / ne2).max(0.0).sqrt()
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
    fn example_six_values() {
        let cd = example_three();
        assert_abs_diff_eq!(phi_value(&cd, &[-2.0]), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(phi_value(&cd, &[2.0]), R2, epsilon = 1e-12);
        assert_abs_diff_eq!(phi_gradient(&cd, &[-1.0]).unwrap()[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(phi_gradient(&cd, &[1.0]).unwrap()[0], 1.0 / R2, epsilon = 1e-12);
        assert_eq!(phi_value(&cd, &[0.0]), 0.0);
        assert_eq!(phi_gradient(&cd, &[0.0]), Err(Error::UndefinedGradient));
    }

    #[test]
    fn example_eight_r() {
        let cd = example_three();
        assert_abs_diff_eq!(r_coefficient(&cd, &[1.0]).unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(r_coefficient(&cd, &[-1.0]).unwrap(), 0.0);
        assert!(matches!(r_coefficient(&cd, &[0.5]), Err(Error::NotUnit { .. })));
    }

    #[test]
    fn x_beta_example_seven() {
        let cd = example_three();
        let x = x_beta(&cd, &[1.0]).unwrap();
        assert_abs_diff_eq!(dot(&cd.lambda, &x), 1.0 / R2, epsilon = 1e-12);
        assert_abs_diff_eq!(dot(&cd.a, &x), -1.0 / R2, epsilon = 1e-12);
        assert_abs_diff_eq!(norm(&x), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn lambda_neg_a_is_norm() {
        let a = vec![0.6, 0.8];
        let cd = CaseData::unit(vec![-0.6, -0.8], a, vec![0.3, -0.2]).unwrap();
        for y in [[1.0, 2.0], [-3.0, 0.5], [0.3, -0.1]] {
            assert_abs_diff_eq!(phi_value(&cd, &y), norm(&y), epsilon = 1e-15);
            assert_eq!(theta_dual(&cd, &y), 0.0);
            let g = phi_gradient(&cd, &y).unwrap();
            assert_abs_diff_eq!(g[0], y[0] / norm(&y), epsilon = 1e-15);
        }
        assert!(cd.lambda_is_neg_a());
    }

    #[test]
    fn theta_infinite_on_unit_d() {
        let cd = CaseData::unit(vec![0.0, 1.0], vec![1.0, 0.0], vec![0.6, 0.8]).unwrap();
        assert_eq!(theta_dual(&cd, &[0.6, 0.8]), f64::INFINITY);
    }

    #[test]
    fn g_membership() {
        let cd = example_three();
        assert_eq!(in_g(&cd, &[-1.0], 1e-12).unwrap(), GMembership::Strict);
        assert_eq!(in_g(&cd, &[1.0], 1e-12).unwrap(), GMembership::Outside);
        let ex4 = CaseData::new(vec![-0.8, -0.6], vec![-3.0, 4.0], vec![5.0]).unwrap();
        assert_eq!(in_g(&ex4, &[-1.0], 1e-12).unwrap(), GMembership::Strict);
        assert_eq!(in_g(&ex4, &[1.0], 1e-12).unwrap(), GMembership::Outside);
    }

    #[test]
    fn cap_max_cases() {
        assert_eq!(cap_max(&[5.0], &[5.0], 0.0), -5.0);
        assert_eq!(cap_max(&[5.0], &[5.0], -6.0), f64::NEG_INFINITY);
        assert_abs_diff_eq!(cap_max(&[3.0, 4.0], &[0.0, 0.0], 0.0), 5.0);
        // cap {γ₂ ≤ 0} on the circle, maximize γ₂: best is 0.
        assert_abs_diff_eq!(cap_max(&[0.0, 1.0], &[0.0, 1.0], 0.0), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(cap_max(&[1.0, 1.0], &[0.0, 1.0], 0.0), 1.0, epsilon = 1e-15);
    }
}
