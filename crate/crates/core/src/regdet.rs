//! Regularised inverse determinant
//! `R_{z,eps}(A) = int dU / det[eps^2 I + (I - AU/z)(I - AU/z)^*]`
//! from the eigenvalues `a_j^2` of `AA^*`, its `eps -> 0` asymptotics
//! `alpha ln(1/eps^2) + beta`, and the slope fit that recovers `alpha`.

use num_traits::{Num, One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    adaptive_integrate_with, det, rat_ln, rat_sqrt, rat_to_f64, AdaptiveOptions, BigRat, ComplexMat, HermSpectrum,
    Poly, C64,
};
use crate::params;
use crate::report::VerificationReport;
use crate::schur::lagrange_weights;

/// Smallest relative gap between normalised eigenvalues accepted by the
/// Lagrange-weight sum.
pub const GAP_THRESHOLD: f64 = 1e-6;

/// Relative slope tolerance of [`theorem2a_density_ratio`].
pub const SLOPE_REL_TOL: f64 = 1e-2;

/// Ratio of term size to result above which [`ik_exact`] switches to
/// rational arithmetic.
const EXACT_SWITCH: f64 = 1e3;
const PRECISION_BITS: u64 = 192;

/// `I_k = int_0^1 (1-t)^k dt / sqrt((t - a^2 + eps^2)^2 + 4 eps^2 a^2)` in the
/// closed form `[Q sqrt(.)]_0^1 + lambda I_0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IkResult {
    pub value: f64,
    /// Antiderivative polynomial in `t`, of degree `k - 1`.
    pub q: Poly<f64>,
    pub lambda: f64,
}

pub fn ik_exact(k: usize, eps2: f64, a2: f64) -> Result<IkResult> {
    if !(eps2 > 0.0 && eps2.is_finite()) {
        return Err(Error::InvalidParameter(format!("eps^2 must be positive, got {eps2}")));
    }
    if !(a2 >= 0.0 && a2.is_finite()) {
        return Err(Error::InvalidParameter(format!("a^2 must be nonnegative, got {a2}")));
    }
    // Work in s = t - c0, where the quadratic under the root is s^2 + d.
    let c0 = a2 - eps2;
    let b = 1.0 - c0;
    let d = 4.0 * eps2 * a2;
    let (q, lambda) = solve_q(k, b, d, |i| i as f64);
    let qs = Poly::new(q.clone());
    let root1 = (b * b + d).sqrt();
    let i0 = i0(eps2, a2);
    let terms = [qs.eval(b) * root1, -qs.eval(-c0) * (eps2 + a2), lambda * i0];
    let mut value: f64 = terms.iter().sum();
    // The three terms cancel badly once |s| > 1; redo the whole sum in
    // rationals with high-precision sqrt and ln when they dwarf the result.
    let size = terms.iter().map(|t| t.abs()).sum::<f64>() + qs.coeffs().iter().map(|c| c.abs()).sum::<f64>();
    if size > EXACT_SWITCH * value.abs() {
        let r = |x: f64| BigRat::from_float(x).expect("finite input");
        let (e2r, a2r) = (r(eps2), r(a2));
        let c0r = &a2r - &e2r;
        let br = BigRat::one() - &c0r;
        let dr = BigRat::from_integer(4.into()) * &e2r * &a2r;
        let (qr, lr) = solve_q(k, br.clone(), dr.clone(), |i| BigRat::from_integer(i.into()));
        let horner = |x: &BigRat| qr.iter().rev().fold(BigRat::zero(), |acc, c| acc * x + c);
        let root = rat_sqrt(&(&br * &br + &dr), PRECISION_BITS);
        let y = if br >= BigRat::zero() {
            (&br + &root) / (BigRat::from_integer(2.into()) * &e2r)
        } else {
            BigRat::from_integer(2.into()) * &a2r / (&root - &br)
        };
        let exact = horner(&br) * &root - horner(&-&c0r) * (&e2r + &a2r) + lr * rat_ln(&y, PRECISION_BITS);
        value = rat_to_f64(&exact);
    }
    if !value.is_finite() {
        return Err(Error::Singular);
    }
    // Re-expand Q about t = 0.
    let shift = Poly::new(vec![-c0, 1.0]);
    let q_t = q.iter().rev().fold(Poly::zero(), |acc, &c| acc.mul(&shift).add(&Poly::constant(c)));
    Ok(IkResult { value, q: q_t, lambda })
}

/// Coefficients of `Q(s)` (ascending) and `lambda` solving
/// `(b - s)^k = Q'(s)(s^2 + d) + s Q(s) + lambda`, matched from the top degree down.
fn solve_q<T: Clone + Num>(k: usize, b: T, d: T, int: impl Fn(i64) -> T) -> (Vec<T>, T) {
    let mut p = Vec::with_capacity(k + 1);
    let mut binom = T::one();
    for j in 0..=k {
        if j > 0 {
            binom = binom * int((k + 1 - j) as i64) / int(j as i64);
        }
        let mut term = binom.clone();
        for _ in j..k {
            term = term * b.clone();
        }
        p.push(if j % 2 == 0 { term } else { T::zero() - term });
    }
    let mut q = vec![T::zero(); k];
    if k > 0 {
        q[k - 1] = p[k].clone() / int(k as i64);
    }
    for j in (1..k).rev() {
        let above = q.get(j + 1).cloned().unwrap_or_else(T::zero);
        q[j - 1] = (p[j].clone() - d.clone() * int(j as i64 + 1) * above) / int(j as i64);
    }
    let lambda = p[0].clone() - d * q.get(1).cloned().unwrap_or_else(T::zero);
    (q, lambda)
}

/// `I_0 = ln[(x + S) / (2 eps^2)]` with `x = 1 - a^2 + eps^2` and
/// `S = sqrt(x^2 + 4 eps^2 a^2)`; for `x < 0` uses `x + S = 4 eps^2 a^2 / (S - x)`.
fn i0(eps2: f64, a2: f64) -> f64 {
    let x = 1.0 - a2 + eps2;
    let s = (x * x + 4.0 * eps2 * a2).sqrt();
    if x >= 0.0 {
        ((x + s) / (2.0 * eps2)).ln()
    } else {
        (2.0 * a2 / (s - x)).ln()
    }
}

/// `I_k` by adaptive quadrature, substituting `t - a^2 + eps^2 = sqrt(d) sinh v`
/// (or `t + eps^2 = e^w` when `a = 0`) so the peak at `t = a^2` becomes flat.
pub fn ik_quadrature(k: usize, eps2: f64, a2: f64) -> Result<f64> {
    if !(eps2 > 0.0) || !(a2 >= 0.0) {
        return Err(Error::InvalidParameter("need eps^2 > 0 and a^2 >= 0".into()));
    }
    let opts = AdaptiveOptions { abs_tol: 0.0, rel_tol: 1e-13, ..AdaptiveOptions::default() };
    let c0 = a2 - eps2;
    let d = 4.0 * eps2 * a2;
    let (v, _) = if d == 0.0 {
        let f = |w: f64| (1.0 + eps2 - w.exp()).powi(k as i32);
        adaptive_integrate_with(f, eps2.ln(), (1.0 + eps2).ln(), opts)?
    } else {
        let r = d.sqrt();
        let f = |v: f64| (1.0 - c0 - r * v.sinh()).powi(k as i32);
        adaptive_integrate_with(f, (-c0 / r).asinh(), ((1.0 - c0) / r).asinh(), opts)?
    };
    Ok(v)
}

/// `F_eps(a) = (n-1) I_{n-2}(eps^2, a^2)`.
pub fn f_eps(a2: f64, eps2: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Precondition(format!("need n >= 2, got {n}")));
    }
    Ok((n - 1) as f64 * ik_exact(n - 2, eps2, a2)?.value)
}

/// Small-`eps` form of [`f_eps`] with its `O(eps)` remainder dropped:
/// `(n-1)[(1-a^2)^k (sgn(a^2-1) gamma_k + L_0) - a^2 Q_a(0)]`, `k = n-2`, where
/// `L_0` is `ln((1-a^2)/eps^2)`, `ln(a^2/(a^2-1))` or `ln(1/eps)` below, above
/// or at `a^2 = 1`, and `Q_a` is the `eps = 0` antiderivative polynomial.
pub fn f_eps_asymptotic(a2: f64, eps2: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Precondition(format!("need n >= 2, got {n}")));
    }
    if !(eps2 > 0.0) || !(a2 >= 0.0) {
        return Err(Error::InvalidParameter("need eps^2 > 0 and a^2 >= 0".into()));
    }
    let k = n - 2;
    let u = 1.0 - a2;
    let gamma = harmonic(k);
    let (sgn, l0) = if a2 < 1.0 {
        (-1.0, (u / eps2).ln())
    } else if a2 > 1.0 {
        (1.0, (a2 / (a2 - 1.0)).ln())
    } else {
        (0.0, -0.5 * eps2.ln())
    };
    let mut binom = 1.0;
    let mut q0 = 0.0;
    for l in 1..=k {
        binom *= (k + 1 - l) as f64 / l as f64;
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        q0 += sign / l as f64 * binom * (-a2).powi(l as i32 - 1) * u.powi((k - l) as i32);
    }
    Ok((n - 1) as f64 * (u.powi(k as i32) * (sgn * gamma + l0) - a2 * q0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegQuery {
    /// Eigenvalues `a_j^2` of `AA^*`.
    pub spectrum: HermSpectrum,
    pub z: C64,
    pub eps: f64,
}

impl RegQuery {
    pub fn new(spectrum: HermSpectrum, z: C64, eps: f64) -> Result<Self> {
        check_z(z)?;
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
        }
        if spectrum.dim() < 2 {
            return Err(Error::Precondition("need n >= 2".into()));
        }
        Ok(Self { spectrum, z, eps })
    }

    pub fn dim(&self) -> usize {
        self.spectrum.dim()
    }
}

fn check_z(z: C64) -> Result<()> {
    if z.norm_sqr() == 0.0 || !z.norm_sqr().is_finite() {
        return Err(Error::InvalidParameter(format!("z must be nonzero and finite, got {z}")));
    }
    Ok(())
}

/// `1 / det[eps^2 I + (I - AU/z)(I - AU/z)^*]` for one `U`.
pub fn reg_integrand(a: &ComplexMat, z: C64, eps: f64, u: &ComplexMat) -> f64 {
    let n = a.dim();
    let x = &ComplexMat::identity(n) - &(a * u).scale(z.inv());
    let m = &x.gram() + &ComplexMat::scalar(n, C64::new(eps * eps, 0.0));
    1.0 / det(&m).re
}

/// How the sum `sum_j F(x_j) prod_{k != j} 1/(x_k - x_j)` is evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SumMode {
    /// Explicit Lagrange weights; refuses gaps below [`GAP_THRESHOLD`].
    #[default]
    Lagrange,
    /// Newton divided-difference table. Accepts any distinct nodes, but the
    /// result carries the cancellation of an `(n-1)`-st difference.
    DividedDifference,
}

pub fn r_eps(q: &RegQuery) -> Result<f64> {
    r_eps_with(q, SumMode::Lagrange)
}

pub fn r_eps_with(q: &RegQuery, mode: SumMode) -> Result<f64> {
    let n = q.dim();
    let eps2 = q.eps * q.eps;
    r_eps_kernel(q, mode, |x| f_eps(x, eps2, n))
}

/// The eigenvalue sum for an arbitrary kernel in place of `F_eps`.
pub fn r_eps_kernel(q: &RegQuery, mode: SumMode, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let x = q.spectrum.scaled(q.z.norm_sqr()).eigs().to_vec();
    let fx = x.iter().map(|&v| f(v)).collect::<Result<Vec<_>>>()?;
    match mode {
        SumMode::Lagrange => {
            let w = lagrange_weights(&x, GAP_THRESHOLD)?;
            Ok(fx.iter().zip(&w).map(|(f, w)| f * w).sum())
        }
        SumMode::DividedDifference => {
            let n = x.len();
            let mut table = fx;
            for level in 1..n {
                for i in 0..n - level {
                    let h = x[i + level] - x[i];
                    if h == 0.0 {
                        return Err(Error::GapTooSmall { gap: 0.0, threshold: 0.0 });
                    }
                    table[i] = (table[i + 1] - table[i]) / h;
                }
            }
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            Ok(sign * table[0])
        }
    }
}

/// `R = alpha ln(1/eps^2) + beta + O(eps)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticCoeffs {
    pub alpha: f64,
    pub beta: f64,
}

fn theta(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x == 0.0 {
        0.5
    } else {
        0.0
    }
}

fn harmonic(k: usize) -> f64 {
    (1..=k).map(|j| 1.0 / j as f64).sum()
}

/// Constant term of `F_eps(a) / ((n-1)(1-a^2)^{n-2})`. At `a^2 = 1` the
/// exact `I_0` is `ln(1/eps) + O(eps)`, so the constant vanishes; it only
/// enters for `n = 2`.
fn psi(a2: f64, n: usize) -> f64 {
    let gamma = harmonic(n - 2);
    if a2 > 1.0 {
        gamma + a2.ln() - (a2 - 1.0).ln()
    } else if a2 < 1.0 {
        -gamma + (1.0 - a2).ln()
    } else {
        0.0
    }
}

pub fn asym_coeffs(spectrum: &HermSpectrum, z: C64) -> Result<AsymptoticCoeffs> {
    check_z(z)?;
    let n = spectrum.dim();
    if n < 2 {
        return Err(Error::Precondition("need n >= 2".into()));
    }
    let x = spectrum.scaled(z.norm_sqr()).eigs().to_vec();
    let w = lagrange_weights(&x, GAP_THRESHOLD)?;
    let nm1 = (n - 1) as f64;
    let (mut alpha, mut beta) = (0.0, 0.0);
    for (xj, wj) in x.iter().zip(&w) {
        let base = (1.0 - xj).powi(n as i32 - 2) * wj;
        alpha += base * theta(1.0 - xj);
        beta += base * psi(*xj, n);
    }
    Ok(AsymptoticCoeffs { alpha: nm1 * alpha, beta: nm1 * beta })
}

/// `lim R_{z,eps} / ln(1/eps^2)` written in the unnormalised eigenvalues:
/// `(n-1)|z|^2 sum_j (|z|^2 - a_j^2)^{n-2} theta(|z|^2 - a_j^2) prod_{k != j} 1/(a_k^2 - a_j^2)`.
pub fn density_limit(spectrum: &HermSpectrum, z: C64) -> Result<f64> {
    check_z(z)?;
    let n = spectrum.dim();
    if n < 2 {
        return Err(Error::Precondition("need n >= 2".into()));
    }
    let r2 = z.norm_sqr();
    let x = spectrum.eigs();
    // Same relative-gap rule as the normalised sum.
    lagrange_weights(spectrum.scaled(r2).eigs(), GAP_THRESHOLD)?;
    let w = lagrange_weights(x, 0.0)?;
    let sum: f64 = x.iter().zip(&w).map(|(a2, wj)| (r2 - a2).powi(n as i32 - 2) * theta(r2 - a2) * wj).sum();
    Ok((n - 1) as f64 * r2 * sum)
}

/// Geometric grid `eps_max, eps_max / ratio, ...` with `points` entries.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsGrid {
    pub eps_max: f64,
    pub points: usize,
    pub ratio: f64,
}

impl Default for EpsGrid {
    fn default() -> Self {
        Self { eps_max: 1e-3, points: 6, ratio: 10.0 }
    }
}

impl EpsGrid {
    pub fn values(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.eps_max / self.ratio.powi(i as i32)).collect()
    }
}

/// Least-squares line `R = slope ln(1/eps^2) + intercept` over the grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub eps: Vec<f64>,
    pub values: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
}

pub fn slope_fit(spectrum: &HermSpectrum, z: C64, grid: EpsGrid) -> Result<SlopeFit> {
    if grid.points < 2 || !(grid.ratio > 1.0) || !(grid.eps_max > 0.0) {
        return Err(Error::InvalidParameter("eps grid needs >= 2 points, ratio > 1, eps_max > 0".into()));
    }
    let eps = grid.values();
    let values = eps.iter().map(|&e| r_eps(&RegQuery::new(spectrum.clone(), z, e)?)).collect::<Result<Vec<_>>>()?;
    let logs: Vec<f64> = eps.iter().map(|e| (1.0 / (e * e)).ln()).collect();
    let k = eps.len() as f64;
    let mx = logs.iter().sum::<f64>() / k;
    let my = values.iter().sum::<f64>() / k;
    let sxx: f64 = logs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = logs.iter().zip(&values).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = logs.iter().zip(&values).map(|(x, y)| (y - slope * x - intercept).abs()).fold(0.0, f64::max);
    Ok(SlopeFit { eps, values, slope, intercept, max_residual })
}

/// Fitted slope of `R_{z,eps}` against `ln(1/eps^2)` versus [`density_limit`].
/// A fit whose residual exceeds `1e-3` of the largest value is flagged with
/// `fit_warning`.
pub fn theorem2a_density_ratio(spectrum: &HermSpectrum, z: C64, grid: EpsGrid) -> Result<VerificationReport> {
    let fit = slope_fit(spectrum, z, grid)?;
    let limit = density_limit(spectrum, z)?;
    let scale = fit.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let warning = fit.max_residual > 1e-3 * scale;
    let tol = SLOPE_REL_TOL * limit.abs() + 1e-6;
    let params = params! {
        "n" => spectrum.dim(),
        "eigs" => spectrum.eigs().to_vec(),
        "z_re" => z.re,
        "z_im" => z.im,
        "eps_max" => grid.eps_max,
        "points" => grid.points,
        "ratio" => grid.ratio,
        "intercept" => fit.intercept,
        "fit_max_residual" => fit.max_residual,
        "fit_warning" => warning,
    };
    Ok(VerificationReport::numeric("thm2a.slope", params, C64::new(fit.slope, 0.0), C64::new(limit, 0.0), tol))
}
