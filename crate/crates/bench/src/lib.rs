//! Fixtures shared by the benchmarks.

use quadfree::oracle::{rng, unit_vector};
use quadfree::{CaseData, DMatrix, QuadraticConstraint, SimplicialCone};

const R2: f64 = std::f64::consts::SQRT_2;

/// `2s₁s₂ + 2√2(s₁ − s₂) − 2 ≤ 0` at `(−2, −2)`.
pub fn section_six() -> QuadraticConstraint {
    let q = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    QuadraticConstraint::new(q, vec![2.0 * R2, -2.0 * R2], -2.0, vec![-2.0, -2.0]).expect("valid")
}

pub fn random_symmetric(p: usize, seed: u64) -> DMatrix<f64> {
    let mut r = rng(seed);
    let cols: Vec<Vec<f64>> = (0..p).map(|_| unit_vector(&mut r, p)).collect();
    let g = DMatrix::from_fn(p, p, |i, j| cols[j][i]);
    let signs = DMatrix::from_fn(p, p, |i, j| if i == j { if i % 2 == 0 { 1.0 } else { -1.0 } } else { 0.0 });
    &g * signs * g.transpose()
}

/// Indefinite instance in dimension `p` whose point violates the constraint.
pub fn random_instance(p: usize, seed: u64) -> QuadraticConstraint {
    let q = random_symmetric(p, seed);
    let mut r = rng(seed ^ 0x5eed);
    let b: Vec<f64> = unit_vector(&mut r, p);
    loop {
        let point: Vec<f64> = unit_vector(&mut r, p).iter().map(|v| 3.0 * v).collect();
        let qc = QuadraticConstraint::new(q.clone(), b.clone(), -0.5, point).expect("valid");
        if qc.violation() > 0.1 {
            return qc;
        }
    }
}

/// Cone at the point of `qc` spanned by the coordinate directions.
pub fn unit_cone(qc: &QuadraticConstraint) -> SimplicialCone {
    let p = qc.dim();
    SimplicialCone::new(qc.point.clone(), DMatrix::identity(p, p)).expect("identity rays")
}

/// `λ = (−1, −1)/√2`, `a = (−1, 1)/√2`, `d = 1/√2`.
pub fn planar_case() -> CaseData {
    CaseData::unit(vec![-1.0 / R2, -1.0 / R2], vec![-1.0 / R2, 1.0 / R2], vec![1.0 / R2]).expect("unit data")
}

/// Case data with `n = m = k`, `‖d‖ = 0.5` and `λ` at an angle to `a`.
pub fn wide_case(k: usize, seed: u64) -> CaseData {
    let mut r = rng(seed);
    let a = unit_vector(&mut r, k);
    let d: Vec<f64> = unit_vector(&mut r, k).iter().map(|v| 0.5 * v).collect();
    let e = unit_vector(&mut r, k);
    let ea: f64 = e.iter().zip(&a).map(|(x, y)| x * y).sum();
    let perp: Vec<f64> = e.iter().zip(&a).map(|(x, y)| x - ea * y).collect();
    let np = perp.iter().map(|v| v * v).sum::<f64>().sqrt();
    let lambda: Vec<f64> = a.iter().zip(&perp).map(|(x, y)| 0.3 * x + 0.3f64.mul_add(-0.3, 1.0).sqrt() * y / np).collect();
    CaseData::unit(lambda, a, d).expect("unit data")
}
