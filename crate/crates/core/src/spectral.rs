//! Homogenization, symmetric eigendecomposition and the canonical form
//! `{‖x‖ ≤ ‖y‖, aᵀx + dᵀy + hᵀz = −1}`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::vecops::{dot, max_abs, norm};

/// Default relative threshold separating zero from nonzero eigenvalues.
pub const DEFAULT_ZERO_TOL: f64 = 1e-9;

const SYMMETRY_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;
const MAX_DIM: usize = 64;

/// The inequality `sᵀQs + bᵀs + c ≤ 0` together with a point to separate.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticConstraint {
    pub q: DMatrix<f64>,
    pub b: Vec<f64>,
    pub c: f64,
    pub point: Vec<f64>,
}

impl QuadraticConstraint {
    pub fn new(q: DMatrix<f64>, b: Vec<f64>, c: f64, point: Vec<f64>) -> Result<Self> {
        let p = q.nrows();
        if p == 0 || q.ncols() != p {
            return Err(Error::InvalidInput(format!(
                "Q must be square and nonempty, got {}x{}",
                q.nrows(),
                q.ncols()
            )));
        }
        if b.len() != p || point.len() != p {
            return Err(Error::InvalidInput(format!(
                "dimension mismatch: Q is {p}x{p}, b has {}, point has {}",
                b.len(),
                point.len()
            )));
        }
        if !q.iter().chain(&b).chain(&point).all(|v| v.is_finite()) || !c.is_finite() {
            return Err(Error::InvalidInput("non-finite coefficient".into()));
        }
        check_symmetric(&q)?;
        Ok(Self { q, b, c, point })
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    /// `q(s) = sᵀQs + bᵀs + c`
    pub fn eval(&self, s: &[f64]) -> f64 {
        let sv = DVector::from_column_slice(s);
        sv.dot(&(&self.q * &sv)) + dot(&self.b, s) + self.c
    }

    pub fn violation(&self) -> f64 {
        self.eval(&self.point)
    }
}

fn check_symmetric(a: &DMatrix<f64>) -> Result<()> {
    let n = a.nrows();
    let scale = 1.0 + a.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    if worst > SYMMETRY_TOL * scale {
        return Err(Error::NonSymmetric { asymmetry: worst });
    }
    Ok(())
}

/// `A = V diag(values) Vᵀ` with eigenvalues sorted in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub vectors: DMatrix<f64>,
    pub values: Vec<f64>,
}

impl EigenDecomposition {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let d = DMatrix::from_diagonal(&DVector::from_column_slice(&self.values));
        &self.vectors * d * self.vectors.transpose()
    }
}

/// Cyclic Jacobi eigensolver with threshold sweeps.
///
/// Eigenvectors are sign-normalized so that their largest-magnitude entry
/// (first one on ties) is positive, which makes the output deterministic.
pub fn jacobi_eigen(a: &DMatrix<f64>) -> Result<EigenDecomposition> {
    let n = a.nrows();
    if n == 0 || a.ncols() != n {
        return Err(Error::InvalidInput("matrix must be square and nonempty".into()));
    }
    if n > MAX_DIM {
        return Err(Error::InvalidInput(format!("dimension {n} exceeds {MAX_DIM}")));
    }
    check_symmetric(a)?;

    let mut m = a.clone();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
    let mut v = DMatrix::<f64>::identity(n, n);
    let fro = m.norm();
    let target = 1e-12 * fro;
    let off = |m: &DMatrix<f64>| {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += 2.0 * m[(i, j)] * m[(i, j)];
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    loop {
        let off_norm = off(&m);
        if off_norm <= target || off_norm == 0.0 {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence { off_norm, sweeps });
        }
        sweeps += 1;
        let threshold = if sweeps < 4 {
            0.2 * off_norm / (n * n) as f64
        } else {
            0.0
        };
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                let g = 100.0 * apq.abs();
                if sweeps > 4
                    && m[(p, p)].abs() + g == m[(p, p)].abs()
                    && m[(q, q)].abs() + g == m[(q, q)].abs()
                {
                    m[(p, q)] = 0.0;
                    m[(q, p)] = 0.0;
                    continue;
                }
                if apq.abs() <= threshold || apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut m, &mut v, p, q, c, s);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].total_cmp(&m[(i, i)]).then(i.cmp(&j)));
    let values: Vec<f64> = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vectors = DMatrix::<f64>::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        let col = v.column(i);
        let mut pivot = 0;
        for r in 0..n {
            if col[r].abs() > col[pivot].abs() {
                pivot = r;
            }
        }
        let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        vectors.set_column(k, &(col * sign));
    }
    Ok(EigenDecomposition { vectors, values })
}

fn rotate(m: &mut DMatrix<f64>, v: &mut DMatrix<f64>, p: usize, q: usize, c: f64, s: f64) {
    let n = m.nrows();
    // A' = Jᵀ A J with J the rotation in the (p, q) plane.
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = c * mkp - s * mkq;
        m[(k, q)] = s * mkp + c * mkq;
    }
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = c * mpk - s * mqk;
        m[(q, k)] = s * mpk + c * mqk;
    }
    m[(p, q)] = 0.0;
    m[(q, p)] = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// `Q̃ = [[Q, b/2], [bᵀ/2, c]]`, so that `(s,1)ᵀ Q̃ (s,1) = q(s)`.
pub fn lift(q: &DMatrix<f64>, b: &[f64], c: f64) -> DMatrix<f64> {
    let p = q.nrows();
    let mut out = DMatrix::<f64>::zeros(p + 1, p + 1);
    out.view_mut((0, 0), (p, p)).copy_from(q);
    for i in 0..p {
        out[(i, p)] = 0.5 * b[i];
        out[(p, i)] = 0.5 * b[i];
    }
    out[(p, p)] = c;
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseTag {
    HomogHNonzero,
    Case1CgLambda,
    ConvexM1,
    Case2Cr,
    Case2CrLambdaNegA,
    EmptyS,
    NotSeparable,
}

impl CaseTag {
    pub fn as_str(self) -> &'static str {
        match self {
            CaseTag::HomogHNonzero => "HOMOG_H_NONZERO",
            CaseTag::Case1CgLambda => "CASE1_CGLAMBDA",
            CaseTag::ConvexM1 => "CONVEX_M1",
            CaseTag::Case2Cr => "CASE2_CR",
            CaseTag::Case2CrLambdaNegA => "CASE2_CR_LAMBDA_NEG_A",
            CaseTag::EmptyS => "EMPTY_S",
            CaseTag::NotSeparable => "NOT_SEPARABLE",
        }
    }
}

impl std::fmt::Display for CaseTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Everything applied on the way from `Q̃` to the canonical coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleRecord {
    pub zero_tol: f64,
    /// Eigenvalues of the lifted matrix, descending.
    pub eigenvalues: Vec<f64>,
    /// Scaling used per eigenvalue: `|eig|`, or 1 for zero eigenvalues.
    pub sigma: Vec<f64>,
    /// `permutation[k]` is the eigen-index placed at canonical coordinate `k`.
    pub permutation: Vec<usize>,
    /// Constant of the mapped homogenizing hyperplane before normalization.
    pub kappa: f64,
    /// Extra factor applied to the x and y rows to make `‖a‖ = 1` (1 if none).
    /// The canonical identity reads `‖x‖² − ‖y‖² = xy_scale² · q(s)`.
    pub xy_scale: f64,
    /// Magnitude of `h` before it was zeroed (cases other than HOMOG_H_NONZERO).
    pub dropped_h_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalForm {
    pub p: usize,
    pub n: usize,
    pub m: usize,
    pub l: usize,
    /// Forward map, `w = M·(s, 1)`.
    pub map: DMatrix<f64>,
    pub map_inv: DMatrix<f64>,
    pub a: Vec<f64>,
    pub d: Vec<f64>,
    pub h: Vec<f64>,
    /// `M·(s̄, 1)` split as `(x̄, ȳ, z̄)`.
    pub point: Vec<f64>,
    pub lambda: Vec<f64>,
    pub case: CaseTag,
    pub scale: ScaleRecord,
    /// `q(s̄)` in original coordinates.
    pub q_point: f64,
}

impl CanonicalForm {
    pub fn x<'a>(&self, w: &'a [f64]) -> &'a [f64] {
        &w[..self.n]
    }

    pub fn y<'a>(&self, w: &'a [f64]) -> &'a [f64] {
        &w[self.n..self.n + self.m]
    }

    pub fn z<'a>(&self, w: &'a [f64]) -> &'a [f64] {
        &w[self.n + self.m..]
    }

    /// `w = M·(s, 1)`
    pub fn forward(&self, s: &[f64]) -> Vec<f64> {
        let mut h = DVector::<f64>::zeros(self.p + 1);
        h.rows_mut(0, self.p).copy_from_slice(s);
        h[self.p] = 1.0;
        (&self.map * h).as_slice().to_vec()
    }

    /// Linear part of the forward map, for directions.
    pub fn forward_dir(&self, r: &[f64]) -> Vec<f64> {
        let rv = DVector::from_column_slice(r);
        (self.map.columns(0, self.p) * rv).as_slice().to_vec()
    }

    /// Maps a canonical point back to `(s, homogenizing coordinate)`.
    pub fn backward(&self, w: &[f64]) -> Vec<f64> {
        (&self.map_inv * DVector::from_column_slice(w)).as_slice().to_vec()
    }

    /// `‖x‖² − ‖y‖²` at `w`.
    pub fn form(&self, w: &[f64]) -> f64 {
        let x = self.x(w);
        let y = self.y(w);
        dot(x, x) - dot(y, y)
    }

    /// `aᵀx + dᵀy + hᵀz`
    pub fn hyperplane(&self, w: &[f64]) -> f64 {
        dot(&self.a, self.x(w)) + dot(&self.d, self.y(w)) + dot(&self.h, self.z(w))
    }

    pub fn is_separable(&self) -> bool {
        !matches!(self.case, CaseTag::NotSeparable)
    }
}

/// Lift, diagonalize, scale and dispatch.
///
/// A point that cannot be separated is reported through the
/// `NOT_SEPARABLE` tag rather than an error, so that callers can still
/// inspect the transform.
pub fn canonicalize(qc: &QuadraticConstraint, zero_tol: f64) -> Result<CanonicalForm> {
    let p = qc.dim();
    let lifted = lift(&qc.q, &qc.b, qc.c);
    let eig = jacobi_eigen(&lifted)?;
    let maxabs = max_abs(&eig.values);
    if maxabs <= zero_tol {
        return Err(Error::DegenerateQuadratic(format!(
            "all eigenvalues of the lifted matrix are below {zero_tol:e}"
        )));
    }
    let cut = zero_tol * maxabs;
    let pos: Vec<usize> = (0..=p).filter(|&i| eig.values[i] > cut).collect();
    let neg: Vec<usize> = (0..=p).filter(|&i| eig.values[i] < -cut).collect();
    let zer: Vec<usize> = (0..=p).filter(|&i| eig.values[i].abs() <= cut).collect();
    let (n, m, l) = (pos.len(), neg.len(), zer.len());
    let permutation: Vec<usize> = pos.iter().chain(&neg).chain(&zer).copied().collect();
    let sigma: Vec<f64> = eig
        .values
        .iter()
        .map(|&e| if e.abs() > cut { e.abs() } else { 1.0 })
        .collect();

    let dim = p + 1;
    let mut map = DMatrix::<f64>::zeros(dim, dim);
    let mut map_inv = DMatrix::<f64>::zeros(dim, dim);
    let mut g = vec![0.0; dim];
    for (k, &i) in permutation.iter().enumerate() {
        let sq = sigma[i].sqrt();
        let col = eig.vectors.column(i);
        for j in 0..dim {
            map[(k, j)] = sq * col[j];
            map_inv[(j, k)] = col[j] / sq;
        }
        g[k] = col[p] / sq;
    }
    // The homogenizing coordinate equals gᵀw = 1, so the constant is 1.
    let kappa = 1.0;
    let coef: Vec<f64> = g.iter().map(|v| -v / kappa).collect();
    let mut a = coef[..n].to_vec();
    let mut d = coef[n..n + m].to_vec();
    let mut h = coef[n + m..].to_vec();

    let mut cf = CanonicalForm {
        p,
        n,
        m,
        l,
        map,
        map_inv,
        a: Vec::new(),
        d: Vec::new(),
        h: Vec::new(),
        point: Vec::new(),
        lambda: Vec::new(),
        case: CaseTag::NotSeparable,
        scale: ScaleRecord {
            zero_tol,
            eigenvalues: eig.values.clone(),
            sigma,
            permutation,
            kappa,
            xy_scale: 1.0,
            dropped_h_norm: 0.0,
        },
        q_point: qc.violation(),
    };
    cf.point = cf.forward(&qc.point);
    let xbar_norm = norm(&cf.point[..n]);
    cf.lambda = if xbar_norm > 0.0 {
        cf.point[..n].iter().map(|v| v / xbar_norm).collect()
    } else {
        vec![0.0; n]
    };

    let h_norm = norm(&h);
    let a_norm = norm(&a);
    let d_norm = norm(&d);
    let case = if cf.q_point <= zero_tol || n == 0 || xbar_norm == 0.0 {
        CaseTag::NotSeparable
    } else if h_norm > zero_tol {
        CaseTag::HomogHNonzero
    } else if m == 0 {
        CaseTag::EmptyS
    } else if a_norm <= d_norm && m > 1 {
        CaseTag::Case1CgLambda
    } else if a_norm <= d_norm {
        CaseTag::ConvexM1
    } else {
        CaseTag::Case2Cr
    };

    if case != CaseTag::HomogHNonzero && case != CaseTag::NotSeparable {
        cf.scale.dropped_h_norm = h_norm;
        h.iter_mut().for_each(|v| *v = 0.0);
    }

    let case = if case == CaseTag::Case2Cr {
        let s = a_norm;
        for r in 0..n + m {
            for j in 0..dim {
                cf.map[(r, j)] *= s;
                cf.map_inv[(j, r)] /= s;
            }
        }
        a.iter_mut().for_each(|v| *v /= s);
        d.iter_mut().for_each(|v| *v /= s);
        cf.scale.xy_scale = s;
        cf.point = cf.forward(&qc.point);
        let gap: Vec<f64> = cf.lambda.iter().zip(&a).map(|(l, a)| l + a).collect();
        if norm(&gap) <= zero_tol {
            CaseTag::Case2CrLambdaNegA
        } else {
            CaseTag::Case2Cr
        }
    } else {
        case
    };

    cf.a = a;
    cf.d = d;
    cf.h = h;
    cf.case = case;
    Ok(cf)
}

/// Maps `αᵀw ≤ β` in canonical space to `coefᵀs ≤ rhs` in original space.
pub fn pullback_linear(cf: &CanonicalForm, alpha: &[f64], beta: f64) -> (Vec<f64>, f64) {
    let t = cf.map.transpose() * DVector::from_column_slice(alpha);
    (t.as_slice()[..cf.p].to_vec(), beta - t[cf.p])
}
