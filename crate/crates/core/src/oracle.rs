//! Independent brute-force and sampling checks: freeness, exposing
//! witnesses, exposing sequences at infinity, duality, convexity and
//! gradients.

use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::SplitMix64;

use crate::corefns::{
    dual_objective, first_branch, phi_gradient, phi_value, r_coefficient, theta_dual, x_beta, CaseData,
};
use crate::cuts::CutCertificate;
use crate::error::{Error, Result};
use crate::freesets::FreeSet;
use crate::spectral::CanonicalForm;
use crate::vecops::{dot, norm, normalized};

pub const FREENESS_TOL: f64 = 1e-7;
pub const IDENTITY_TOL: f64 = 1e-9;
const MAX_ATTEMPTS: usize = 1_000_000;

pub fn rng(seed: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(seed)
}

/// Uniform point on the unit sphere of `Rᵏ` (empty for `k = 0`).
pub fn unit_vector<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    if k == 0 {
        return Vec::new();
    }
    loop {
        let v: Vec<f64> = (0..k).map(|_| rng.sample(StandardNormal)).collect();
        if let Some(u) = normalized(&v) {
            return u;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub name: String,
    pub samples: usize,
    pub worst_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub witness: Option<Vec<f64>>,
    pub seed: Option<u64>,
    /// Named sub-residuals, when a check combines several.
    pub details: Vec<(String, f64)>,
}

impl VerificationReport {
    fn new(name: &str, samples: usize, worst: f64, tolerance: f64, passed: bool) -> Self {
        Self {
            name: name.to_string(),
            samples,
            worst_residual: worst,
            tolerance,
            passed,
            witness: None,
            seed: None,
            details: Vec::new(),
        }
    }
}

/// Points of `S ∩ H` in canonical coordinates.
pub fn sample_s(cf: &CanonicalForm, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let (n, m, l) = (cf.n, cf.m, cf.l);
    if m == 0 {
        return Err(Error::SamplingExhausted { attempts: 0, accepted: 0 });
    }
    let mut rng = rng(seed);
    let hn2 = dot(&cf.h, &cf.h);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        if attempts == MAX_ATTEMPTS {
            return Err(Error::SamplingExhausted { attempts, accepted: out.len() });
        }
        attempts += 1;
        let rho: f64 = rng.random();
        let x: Vec<f64> = unit_vector(&mut rng, n).iter().map(|v| v * rho).collect();
        let y = unit_vector(&mut rng, m);
        let z: Vec<f64> = (0..l).map(|_| rng.random_range(-10.0..=10.0)).collect();
        let f = dot(&cf.a, &x) + dot(&cf.d, &y);
        let mut w = Vec::with_capacity(n + m + l);
        if hn2 > 0.0 {
            let mu = rng.random_range(-2.0_f64..2.0).exp();
            let shift = (-1.0 - mu * f - dot(&cf.h, &z)) / hn2;
            w.extend(x.iter().map(|v| v * mu));
            w.extend(y.iter().map(|v| v * mu));
            w.extend(z.iter().zip(&cf.h).map(|(zi, hi)| zi + shift * hi));
        } else {
            if f >= -1e-6 {
                continue;
            }
            let s = -1.0 / f;
            w.extend(x.iter().map(|v| v * s));
            w.extend(y.iter().map(|v| v * s));
            w.extend(z);
        }
        out.push(w);
    }
    Ok(out)
}

/// Points of `S ∩ H` that maximize `λᵀx` on their y-fiber, where maximal
/// free sets touch `S`.
pub fn sample_s_extreme(cf: &CanonicalForm, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let (n, m, l) = (cf.n, cf.m, cf.l);
    if m == 0 || n == 0 {
        return Err(Error::SamplingExhausted { attempts: 0, accepted: 0 });
    }
    let mut rng = rng(seed);
    let hn2 = dot(&cf.h, &cf.h);
    let an = norm(&cf.a);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        if attempts == MAX_ATTEMPTS {
            return Err(Error::SamplingExhausted { attempts, accepted: out.len() });
        }
        attempts += 1;
        let radius = rng.random_range(0.1_f64.ln()..20.0_f64.ln()).exp();
        let y: Vec<f64> = unit_vector(&mut rng, m).iter().map(|v| v * radius).collect();
        let z: Vec<f64> = (0..l).map(|_| rng.random_range(-10.0..=10.0)).collect();
        let mut w = Vec::with_capacity(n + m + l);
        if hn2 > 0.0 {
            let x: Vec<f64> = cf.lambda.iter().map(|v| v * radius).collect();
            let f = dot(&cf.a, &x) + dot(&cf.d, &y);
            let shift = (-1.0 - f - dot(&cf.h, &z)) / hn2;
            w.extend(x);
            w.extend(y);
            w.extend(z.iter().zip(&cf.h).map(|(zi, hi)| zi + shift * hi));
        } else {
            if an == 0.0 {
                return Err(Error::SamplingExhausted { attempts, accepted: 0 });
            }
            let ahat: Vec<f64> = cf.a.iter().map(|v| v / an).collect();
            let c0 = (-1.0 - dot(&cf.d, &y)) / an;
            if c0.abs() > radius {
                continue;
            }
            let la = dot(&cf.lambda, &ahat);
            let perp: Vec<f64> = cf.lambda.iter().zip(&ahat).map(|(l, a)| l - la * a).collect();
            let rest = (radius * radius - c0 * c0).sqrt();
            let x: Vec<f64> = match normalized(&perp) {
                Some(u) if norm(&perp) > 1e-12 => {
                    ahat.iter().zip(&u).map(|(a, u)| c0 * a + rest * u).collect()
                }
                _ => ahat.iter().map(|a| c0 * a).collect(),
            };
            w.extend(x);
            w.extend(y);
            w.extend(z);
        }
        out.push(w);
    }
    Ok(out)
}

/// Points `(x, y)` with `‖y‖ = 1`, `‖x‖ ≤ 1` and `aᵀx + dᵀy ≤ 0`.
pub fn sample_homogeneous(cd: &CaseData, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let mut rng = rng(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        if attempts == MAX_ATTEMPTS {
            return Err(Error::SamplingExhausted { attempts, accepted: out.len() });
        }
        attempts += 1;
        let rho: f64 = rng.random();
        let x: Vec<f64> = unit_vector(&mut rng, cd.n()).iter().map(|v| v * rho).collect();
        let y = unit_vector(&mut rng, cd.m());
        if dot(&cd.a, &x) + dot(&cd.d, &y) <= 0.0 {
            out.push(x.into_iter().chain(y).collect());
        }
    }
    Ok(out)
}

/// For random unit `y`, the brute-force maximizer of `λᵀx` over
/// `{‖x‖ ≤ ‖y‖, aᵀx + dᵀy ≤ 0}`, returned as `(x, y)`.
pub fn fiber_extremes(cd: &CaseData, count: usize, seed: u64, grid: usize) -> Vec<Vec<f64>> {
    let mut rng = rng(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let y = unit_vector(&mut rng, cd.m());
        if let Some((_, x)) = fiber_argmax(cd, &y, grid) {
            out.push(x.into_iter().chain(y).collect());
        }
    }
    out
}

/// Brute-force maximization of `λᵀx` over `{‖x‖ ≤ ‖y‖, aᵀx + dᵀy ≤ 0}`.
///
/// Objective and constraints see `x` only through `λᵀx`, `aᵀx` and `‖x‖`,
/// so the search runs over a circle in `span{λ, a}` (an angle grid refined
/// by bisection wherever feasibility flips), the point `−(dᵀy)a/‖a‖²` and
/// the origin. Returns `None` when the set is empty.
pub fn fiber_argmax(cd: &CaseData, y: &[f64], grid: usize) -> Option<(f64, Vec<f64>)> {
    let rho = norm(y);
    let kappa = -dot(&cd.d, y);
    let lambda = &cd.lambda;
    let mut best: Option<(f64, Vec<f64>)> = None;
    // `slack` admits the tight candidate, whose aᵀx equals κ up to rounding.
    let mut consider = |x: Vec<f64>, slack: f64| {
        if dot(&cd.a, &x) <= kappa + slack && norm(&x) <= rho * (1.0 + 1e-15) {
            let v = dot(lambda, &x);
            if best.as_ref().is_none_or(|(b, _)| v > *b) {
                best = Some((v, x));
            }
        }
    };
    consider(vec![0.0; cd.n()], 0.0);
    let an2 = dot(&cd.a, &cd.a);
    if an2 > 0.0 {
        consider(cd.a.iter().map(|a| kappa * a / an2).collect(), 1e-12 * (1.0 + kappa.abs()));
    }
    if rho == 0.0 {
        return best;
    }
    if cd.n() == 1 {
        consider(vec![rho], 0.0);
        consider(vec![-rho], 0.0);
        return best;
    }
    let u1 = lambda.clone();
    let perp: Vec<f64> = cd.a.iter().zip(&u1).map(|(a, l)| a - cd.la * l).collect();
    let u2 = if norm(&perp) > 1e-12 * (1.0 + norm(&cd.a)) {
        normalized(&perp).unwrap()
    } else {
        // λ ∥ a: any direction orthogonal to λ spans the relevant plane.
        let k = (0..u1.len()).min_by(|&i, &j| u1[i].abs().total_cmp(&u1[j].abs())).unwrap();
        let mut e = vec![0.0; u1.len()];
        e[k] = 1.0;
        let t = dot(&e, &u1);
        normalized(&e.iter().zip(&u1).map(|(e, l)| e - t * l).collect::<Vec<_>>()).unwrap()
    };
    let alpha1 = dot(&cd.a, &u1);
    let alpha2 = dot(&cd.a, &u2);
    let at = |t: f64| {
        let (s, c) = t.sin_cos();
        (rho * c, rho * (alpha1 * c + alpha2 * s))
    };
    let point = |t: f64| {
        let (s, c) = t.sin_cos();
        u1.iter().zip(&u2).map(|(p, q)| rho * (c * p + s * q)).collect::<Vec<_>>()
    };
    let step = std::f64::consts::TAU / grid as f64;
    let mut best_t: Option<(f64, f64)> = None;
    let mut flips = Vec::new();
    let mut prev_ok = at(0.0).1 <= kappa;
    for k in 0..=grid {
        let t = k as f64 * step;
        let (obj, lin) = at(t);
        let ok = lin <= kappa;
        if ok && best_t.is_none_or(|(b, _)| obj > b) {
            best_t = Some((obj, t));
        }
        if k > 0 && ok != prev_ok {
            flips.push((t - step, t, prev_ok));
        }
        prev_ok = ok;
    }
    for (lo0, hi0, lo_ok) in flips {
        let (mut good, mut bad) = if lo_ok { (lo0, hi0) } else { (hi0, lo0) };
        for _ in 0..80 {
            let mid = 0.5 * (good + bad);
            if at(mid).1 <= kappa {
                good = mid;
            } else {
                bad = mid;
            }
        }
        let obj = at(good).0;
        if best_t.is_none_or(|(b, _)| obj > b) {
            best_t = Some((obj, good));
        }
    }
    // Circle points are judged by the parametrization that found them.
    if let Some((obj, t)) = best_t {
        if best.as_ref().is_none_or(|(b, _)| obj > *b) {
            best = Some((obj, point(t)));
        }
    }
    best
}

/// φ by brute force over the defining maximization.
pub fn phi_bruteforce(cd: &CaseData, y: &[f64], grid: usize) -> f64 {
    fiber_argmax(cd, y, grid).map_or(f64::NEG_INFINITY, |(v, _)| v)
}

/// Minimizer over `θ ≥ 0` of the dual objective, by golden-section search.
pub fn theta_golden(cd: &CaseData, y: &[f64]) -> f64 {
    let f = |t: f64| dual_objective(cd, y, t);
    let mut hi = 1.0;
    while f(2.0 * hi) < f(hi) && hi < 1e12 {
        hi *= 2.0;
    }
    let (mut lo, mut hi) = (0.0_f64, 2.0 * hi);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > 1e-13 * (1.0 + hi) {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

/// Passes iff no sample is interior beyond `FREENESS_TOL`.
pub fn check_freeness(fs: &FreeSet, samples: &[Vec<f64>]) -> VerificationReport {
    check_freeness_with(&format!("freeness[{}]", fs.core().name()), samples, |w| fs.margin(w))
}

pub fn check_freeness_with<F: Fn(&[f64]) -> f64>(name: &str, samples: &[Vec<f64>], margin: F) -> VerificationReport {
    let mut worst = f64::INFINITY;
    let mut witness = None;
    for w in samples {
        let v = margin(w);
        let v = if v.is_nan() { f64::NEG_INFINITY } else { v };
        if v < worst {
            worst = v;
            witness = Some(w.clone());
        }
    }
    let passed = worst >= -FREENESS_TOL;
    let mut report = VerificationReport::new(name, samples.len(), worst, FREENESS_TOL, passed);
    if !passed {
        report.witness = witness;
    }
    report
}

/// Passes iff every point satisfies the cut within `FREENESS_TOL`.
pub fn check_cut_validity(cut: &CutCertificate, points: &[Vec<f64>]) -> VerificationReport {
    let mut worst = f64::NEG_INFINITY;
    let mut witness = None;
    for s in points {
        let v = cut.slack(s);
        if v > worst || v.is_nan() {
            worst = if v.is_nan() { f64::INFINITY } else { v };
            witness = Some(s.clone());
        }
    }
    let passed = worst <= FREENESS_TOL;
    let mut report = VerificationReport::new("cut_validity", points.len(), worst, FREENESS_TOL, passed);
    report.details.push(("apex_violation".into(), cut.apex_violation));
    if !passed {
        report.witness = witness;
    }
    report
}

/// The point `−(λ, β)/(aᵀλ + dᵀβ)` of `S ∩ H` exposing the inequality
/// `βᵀy ≤ λᵀx` of `fs` (which lives in `(x, y)` coordinates).
pub fn exposing_witness(cd: &CaseData, beta: &[f64], fs: &FreeSet) -> Result<(Vec<f64>, VerificationReport)> {
    let v = cd.la + dot(&cd.d, beta);
    if !(v < -1e-9) {
        return Err(Error::NotInStrictRegion { value: v });
    }
    let x: Vec<f64> = cd.lambda.iter().map(|l| -l / v).collect();
    let y: Vec<f64> = beta.iter().map(|b| -b / v).collect();
    let scale = 1.0 + norm(&x);
    let membership = (norm(&x) - norm(&y)).max(0.0) / scale;
    let hyperplane = (dot(&cd.a, &x) + dot(&cd.d, &y) + 1.0).abs();
    let tightness = (dot(beta, &y) - dot(&cd.lambda, &x)).abs() / scale;
    let z: Vec<f64> = x.into_iter().chain(y).collect();
    let margin = fs.margin(&z).abs();
    let worst = membership.max(hyperplane).max(tightness);
    let passed = worst <= IDENTITY_TOL && margin <= FREENESS_TOL;
    let mut report = VerificationReport::new("exposing_witness", 1, worst, IDENTITY_TOL, passed);
    report.details = vec![
        ("membership".into(), membership),
        ("hyperplane".into(), hyperplane),
        ("tightness".into(), tightness),
        ("margin".into(), margin),
    ];
    report.witness = Some(z.clone());
    Ok((z, report))
}

/// Points `z_k = −(x_k, β)/(aᵀx_k + dᵀβ)`, `k = 1..=terms`, of `S ∩ H` with
/// `x_k → x(β)`, along which the violation of `∇φ(β)ᵀy ≤ λᵀx` tends to
/// `r(β)`.
pub fn asymptote_sequence(cd: &CaseData, beta: &[f64], terms: usize) -> Result<(Vec<Vec<f64>>, VerificationReport)> {
    let db = dot(&cd.d, beta);
    if !cd.unit || cd.d_norm >= 1.0 || cd.la + db < -1e-12 || cd.la.abs() >= 1.0 - 1e-12 || terms == 0 {
        return Err(Error::PreconditionViolated(
            "need ‖a‖ = 1 > ‖d‖, λ ≠ ±a and λᵀa + dᵀβ ≥ 0".into(),
        ));
    }
    let r = r_coefficient(cd, beta)?;
    let grad = phi_gradient(cd, beta)?;
    let xb = x_beta(cd, beta)?;
    // Unit direction in span{λ, a}, orthogonal to x(β), decreasing aᵀx.
    let perp_a: Vec<f64> = cd.a.iter().zip(&xb).map(|(a, x)| a - dot(&cd.a, &xb) * x).collect();
    let t_hat: Vec<f64> = normalized(&perp_a)
        .ok_or_else(|| Error::PreconditionViolated("a parallel to x(β)".into()))?
        .iter()
        .map(|v| -v)
        .collect();
    let mut seq = Vec::with_capacity(terms);
    let mut membership = 0.0_f64;
    let mut hyperplane = 0.0_f64;
    let mut last = f64::NAN;
    for k in 1..=terms {
        let ang = 1.0 / k as f64;
        let (s, c) = ang.sin_cos();
        let xk: Vec<f64> = xb.iter().zip(&t_hat).map(|(x, t)| c * x + s * t).collect();
        let f = dot(&cd.a, &xk) + db;
        if !(f < 0.0) {
            continue;
        }
        let x: Vec<f64> = xk.iter().map(|v| -v / f).collect();
        let y: Vec<f64> = beta.iter().map(|v| -v / f).collect();
        let sc = 1.0 + norm(&x);
        membership = membership.max((norm(&x) - norm(&y)).max(0.0) / sc);
        hyperplane = hyperplane.max((dot(&cd.a, &x) + dot(&cd.d, &y) + 1.0).abs());
        last = dot(&grad, &y) - dot(&cd.lambda, &x);
        seq.push(x.into_iter().chain(y).collect());
    }
    let gap = (last - r).abs();
    let bound = 10.0 / terms as f64;
    let passed = membership <= IDENTITY_TOL && hyperplane <= IDENTITY_TOL && gap <= bound;
    let mut report = VerificationReport::new("asymptote_sequence", seq.len(), gap, bound, passed);
    report.details = vec![
        ("membership".into(), membership),
        ("hyperplane".into(), hyperplane),
        ("violation".into(), last),
        ("r".into(), r),
    ];
    Ok((seq, report))
}

/// Strong duality `‖λ − θa‖·‖y‖ − θ·dᵀy = φ(y)` at the closed-form θ.
pub fn check_duality(cd: &CaseData, ys: &[Vec<f64>]) -> VerificationReport {
    let mut worst = 0.0_f64;
    let mut witness = None;
    let mut used = 0;
    for y in ys {
        let theta = theta_dual(cd, y);
        if !theta.is_finite() {
            continue;
        }
        used += 1;
        let res = (dual_objective(cd, y, theta) - phi_value(cd, y)).abs();
        if res > worst {
            worst = res;
            witness = Some(y.clone());
        }
    }
    let passed = worst <= IDENTITY_TOL;
    let mut report = VerificationReport::new("duality", used, worst, IDENTITY_TOL, passed);
    if !passed {
        report.witness = witness;
    }
    report
}

/// Midpoint convexity of φ on the given pairs.
pub fn check_convexity(cd: &CaseData, pairs: &[(Vec<f64>, Vec<f64>)]) -> VerificationReport {
    const TOL: f64 = 1e-10;
    let mut worst = f64::NEG_INFINITY;
    let mut witness = None;
    for (y1, y2) in pairs {
        let mid: Vec<f64> = y1.iter().zip(y2).map(|(a, b)| 0.5 * (a + b)).collect();
        let gap = phi_value(cd, &mid) - 0.5 * (phi_value(cd, y1) + phi_value(cd, y2));
        if gap > worst {
            worst = gap;
            witness = Some(mid);
        }
    }
    let passed = worst <= TOL;
    let mut report = VerificationReport::new("convexity", pairs.len(), worst, TOL, passed);
    if !passed {
        report.witness = witness;
    }
    report
}

/// Central finite differences (step 1e−6, tolerance 1e−5) and the Euler
/// identity `∇φ(y)ᵀy = φ(y)` (tolerance 1e−10).
pub fn check_gradient(cd: &CaseData, ys: &[Vec<f64>]) -> VerificationReport {
    const H: f64 = 1e-6;
    const FD_TOL: f64 = 1e-5;
    const EULER_TOL: f64 = 1e-10;
    let mut fd_worst = 0.0_f64;
    let mut euler_worst = 0.0_f64;
    let mut witness = None;
    let mut used = 0;
    for y in ys {
        let Ok(g) = phi_gradient(cd, y) else { continue };
        used += 1;
        let euler = (dot(&g, y) - phi_value(cd, y)).abs() / (1.0 + norm(y));
        let mut fd = 0.0_f64;
        for i in 0..y.len() {
            let mut yp = y.clone();
            let mut ym = y.clone();
            yp[i] += H;
            ym[i] -= H;
            let approx = (phi_value(cd, &yp) - phi_value(cd, &ym)) / (2.0 * H);
            fd = fd.max((approx - g[i]).abs());
        }
        if fd / FD_TOL > fd_worst / FD_TOL || euler / EULER_TOL > euler_worst / EULER_TOL {
            witness = Some(y.clone());
        }
        fd_worst = fd_worst.max(fd);
        euler_worst = euler_worst.max(euler);
    }
    let passed = fd_worst <= FD_TOL && euler_worst <= EULER_TOL;
    let mut report = VerificationReport::new("gradient", used, fd_worst, FD_TOL, passed);
    report.details = vec![("finite_difference".into(), fd_worst), ("euler".into(), euler_worst)];
    if !passed {
        report.witness = witness;
    }
    report
}

/// Samples of `S ∩ H` mapped back to original coordinates.
pub fn sample_original(cf: &CanonicalForm, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    Ok(sample_s(cf, count, seed)?
        .into_iter()
        .map(|w| cf.backward(&w)[..cf.p].to_vec())
        .collect())
}

/// `true` when the second branch of φ is active at `y`.
pub fn in_relaxed_region(cd: &CaseData, y: &[f64]) -> bool {
    !first_branch(cd, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corefns::phi_value;
    use approx::assert_abs_diff_eq;

    const R2: f64 = std::f64::consts::SQRT_2;

    fn example_three() -> CaseData {
        CaseData::unit(vec![-1.0 / R2, -1.0 / R2], vec![-1.0 / R2, 1.0 / R2], vec![1.0 / R2]).unwrap()
    }

    #[test]
    fn bruteforce_matches_example_six() {
        let cd = example_three();
        assert_abs_diff_eq!(phi_bruteforce(&cd, &[-1.0], 10_000), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(phi_bruteforce(&cd, &[1.0], 10_000), 1.0 / R2, epsilon = 1e-9);
        let neg = CaseData::unit(vec![-1.0, 0.0], vec![1.0, 0.0], vec![0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(phi_bruteforce(&neg, &[3.0, 4.0], 1000), 5.0, epsilon = 1e-9);
    }

    #[test]
    fn example_four_fiber_extreme() {
        let cd = CaseData::new(vec![-0.8, -0.6], vec![-3.0, 4.0], vec![5.0]).unwrap();
        // The feasible set is a single tangency point, resolved to ~√eps.
        for grid in [1000, 1001] {
            let (v, x) = fiber_argmax(&cd, &[5.0], grid).unwrap();
            assert_abs_diff_eq!(v, 0.0, epsilon = 1e-7);
            assert_abs_diff_eq!(x[0], 3.0, epsilon = 1e-7);
            assert_abs_diff_eq!(x[1], -4.0, epsilon = 1e-7);
        }
    }

    #[test]
    fn example_seven_witness_and_sequence() {
        let cd = example_three();
        let fs = FreeSet::CRPhiLambda(cd.clone());
        let (z, rep) = exposing_witness(&cd, &[-1.0], &fs).unwrap();
        assert!(rep.passed, "{rep:?}");
        for (got, want) in z.iter().zip([-1.0, -1.0, -R2]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
        assert!(matches!(exposing_witness(&cd, &[1.0], &fs), Err(Error::NotInStrictRegion { .. })));
        // The displayed sequence (1/√(k²+1), −k/√(k²+1), 1).
        for k in 1..200 {
            let kk = k as f64;
            let r = (kk * kk + 1.0).sqrt();
            let form = dot(&cd.a, &[1.0 / r, -kk / r]) + cd.d[0];
            assert!(form < 0.0);
        }
        let (_, rep) = asymptote_sequence(&cd, &[1.0], 1000).unwrap();
        assert!(rep.passed, "{rep:?}");
    }

    #[test]
    fn golden_theta_and_duality() {
        let cd = CaseData::unit(vec![63.0 / 65.0, 16.0 / 65.0], vec![0.6, -0.8], vec![0.3, 0.4]).unwrap();
        let y = [0.0, 1.0];
        assert_abs_diff_eq!(theta_dual(&cd, &y), theta_golden(&cd, &y), epsilon = 1e-7);
        assert_abs_diff_eq!(phi_value(&cd, &y), phi_bruteforce(&cd, &y, 1_000_000), epsilon = 1e-6);
        assert!(check_duality(&cd, &[y.to_vec()]).passed);
    }

    #[test]
    fn sampler_respects_constraints() {
        use crate::spectral::{canonicalize, QuadraticConstraint, DEFAULT_ZERO_TOL};
        use nalgebra::DMatrix;
        let q = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let qc = QuadraticConstraint::new(q, vec![0.0, 0.0], 0.0, vec![3.0, 0.0]).unwrap();
        let cf = canonicalize(&qc, DEFAULT_ZERO_TOL).unwrap();
        for w in sample_s(&cf, 1000, 5).unwrap() {
            assert!(cf.form(&w) <= 1e-10 * (1.0 + dot(&w, &w)));
            assert!((cf.hyperplane(&w) + 1.0).abs() <= 1e-10 * (1.0 + norm(&w)));
        }
        let empty = QuadraticConstraint::new(DMatrix::identity(2, 2), vec![0.0, 0.0], 1.0, vec![0.0, 0.0]).unwrap();
        let cf = canonicalize(&empty, DEFAULT_ZERO_TOL).unwrap();
        assert!(matches!(sample_s(&cf, 10, 1), Err(Error::SamplingExhausted { .. })));
    }
}
