//! Integer moments of `det[(AU + C)(BU + D)^*]` over Haar `U`, as
//! `m x m` determinants of one-dimensional integrals.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::betadet::{norm_const, MeasureKind, MeasureParams};
use crate::error::{Error, Result};
use crate::numerics::{
    adaptive_integrate, beta_rat, complex_eigenvalues, det, factorial, gram_eigs, hermitian_eigs, quad_rule,
    rat_to_f64, BigRat, ComplexMat, GaussRat, GaussRatMat, HermSpectrum, Poly, RuleKind, C64,
};

/// Margin required by the strict spectral preconditions of negative moments.
pub const SPECTRAL_MARGIN: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Positive,
    Negative,
}

/// `int det^{+-m}[(AU + C)(BU + D)^*] dU`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentQuery {
    pub a: ComplexMat,
    pub b: ComplexMat,
    pub c: ComplexMat,
    pub d: ComplexMat,
    pub m: usize,
    pub sign: Sign,
}

impl MomentQuery {
    pub fn new(a: ComplexMat, b: ComplexMat, c: ComplexMat, d: ComplexMat, m: usize, sign: Sign) -> Result<Self> {
        let n = a.dim();
        if [b.dim(), c.dim(), d.dim()].iter().any(|&k| k != n) || n == 0 {
            return Err(Error::InvalidParameter("A, B, C, D must be square of one size".into()));
        }
        if m == 0 {
            return Err(Error::InvalidParameter("moment order m must be positive".into()));
        }
        if ![&a, &b, &c, &d].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidParameter("matrix entries must be finite".into()));
        }
        Ok(Self { a, b, c, d, m, sign })
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    /// `det^m[(AU + C)(BU + D)^*]` (or its reciprocal) for one `U`; the Monte
    /// Carlo counterpart of the moment.
    pub fn integrand(&self, u: &ComplexMat) -> C64 {
        let left = &(&self.a * u) + &self.c;
        let right = &(&self.b * u) + &self.d;
        let v = det(&(&left * &right.adjoint())).powu(self.m as u32);
        match self.sign {
            Sign::Positive => v,
            Sign::Negative => C64::one() / v,
        }
    }

    fn cd(&self) -> ComplexMat {
        &self.c * &self.d.adjoint()
    }

    fn ab(&self) -> ComplexMat {
        &self.a * &self.b.adjoint()
    }
}

/// Coefficients of `det(P + t Q)` from values on a circle of radius `r`
/// and an inverse discrete Fourier transform.
fn det_pencil_poly(p: &ComplexMat, q: &ComplexMat) -> Poly<C64> {
    let n = p.dim();
    let (np, nq) = (p.frobenius_norm(), q.frobenius_norm());
    let r = if np > 0.0 && nq > 0.0 { np / nq } else { 1.0 };
    let nodes = n + 1;
    let vals: Vec<C64> = (0..nodes)
        .map(|j| {
            let t = C64::from_polar(r, 2.0 * std::f64::consts::PI * j as f64 / nodes as f64);
            det(&(p + &q.scale(t)))
        })
        .collect();
    let coeffs = (0..nodes)
        .map(|k| {
            let s: C64 = vals
                .iter()
                .enumerate()
                .map(|(j, v)| v * C64::from_polar(1.0, -2.0 * std::f64::consts::PI * (j * k) as f64 / nodes as f64))
                .sum();
            s / (nodes as f64 * r.powi(k as i32))
        })
        .collect();
    Poly::new(coeffs)
}

/// Coefficients of `det(CD^* + t AB^*)`, degree at most `n`.
pub fn detpoly(a: &ComplexMat, b: &ComplexMat, c: &ComplexMat, d: &ComplexMat) -> Poly<C64> {
    det_pencil_poly(&(c * &d.adjoint()), &(a * &b.adjoint()))
}

fn mu_prefactor(n: usize, m: usize) -> f64 {
    let c = norm_const(MeasureParams { n, m, kind: MeasureKind::Mu });
    rat_to_f64(&(BigRat::from_integer(factorial(m)) / c))
}

fn nu_prefactor(n: usize, m: usize) -> Result<f64> {
    let c = norm_const(MeasureParams::new(n, m, MeasureKind::Nu)?);
    Ok(rat_to_f64(&(BigRat::from_integer(factorial(m)) / c)))
}

/// `(m!/c_n) det(E_ij)` where `E_ij = int_0^1 p(u) u^{i+j} (1-u)^{2m-2-i-j} du`
/// and `p(u) = (1-u)^n det(CD^* + t AB^*)` at `t = u/(1-u)`.
fn positive_from_pencil(n: usize, m: usize, pencil: impl Fn(f64) -> C64) -> Result<C64> {
    let degree = n + 2 * m - 2;
    let rule = quad_rule(RuleKind::Legendre01, degree / 2 + 1)?;
    let vals: Vec<(f64, f64, C64)> = rule.iter().map(|(u, w)| (u, w, pencil(u))).collect();
    let e = ComplexMat::from_fn(m, |i, j| {
        vals.iter()
            .map(|&(u, w, p)| p * (w * u.powi((i + j) as i32) * (1.0 - u).powi((2 * m - 2 - i - j) as i32)))
            .sum()
    });
    Ok(det(&e) * mu_prefactor(n, m))
}

/// Positive moment `int det^m[(AU + C)(BU + D)^*] dU`.
pub fn moment_pos(q: &MomentQuery) -> Result<C64> {
    if q.sign != Sign::Positive {
        return Err(Error::InvalidParameter("moment_pos needs a positive query".into()));
    }
    let (cd, ab) = (q.cd(), q.ab());
    positive_from_pencil(q.dim(), q.m, |u| det(&(&cd.scale(C64::new(1.0 - u, 0.0)) + &ab.scale(C64::new(u, 0.0)))))
}

/// Exact positive moment for Gaussian-rational inputs.
pub fn moment_pos_exact(
    a: &GaussRatMat,
    b: &GaussRatMat,
    c: &GaussRatMat,
    d: &GaussRatMat,
    m: usize,
) -> Result<GaussRat> {
    let n = a.dim();
    if [b.dim(), c.dim(), d.dim()].iter().any(|&k| k != n) || n == 0 || m == 0 {
        return Err(Error::InvalidParameter("need equal positive sizes and m >= 1".into()));
    }
    let cd = c.matmul(&d.adjoint());
    let ab = a.matmul(&b.adjoint());
    // Values at t = 0..n, then Newton divided differences.
    let xs: Vec<BigRat> = (0..=n).map(|k| BigRat::from_integer((k as i64).into())).collect();
    let mut dd: Vec<GaussRat> = xs.iter().map(|x| cd.add_scaled(&GaussRat::real(x.clone()), &ab).det()).collect();
    for level in 1..=n {
        for k in (level..=n).rev() {
            let diff = &dd[k] - &dd[k - 1];
            let h = &xs[k] - &xs[k - level];
            dd[k] = GaussRat::new(diff.re / &h, diff.im / h);
        }
    }
    // Expand the Newton form into monomial coefficients.
    let mut coeffs = vec![GaussRat::zero(); n + 1];
    for k in (0..=n).rev() {
        // coeffs <- coeffs * (t - x_k) + dd[k]
        let mut next = vec![GaussRat::zero(); n + 1];
        for (i, ci) in coeffs.iter().enumerate() {
            if i < n {
                next[i + 1] = &next[i + 1] + ci;
            }
            let shifted = ci * &GaussRat::real(-xs[k].clone());
            next[i] = &next[i] + &shifted;
        }
        next[0] = &next[0] + &dd[k];
        coeffs = next;
    }
    let entry = |i: usize, j: usize| -> GaussRat {
        coeffs.iter().enumerate().fold(GaussRat::zero(), |acc, (k, ck)| {
            if ck.is_zero() {
                return acc;
            }
            let p = k + i + j + 1;
            let beta = beta_rat(p, n + 2 * m - p);
            &acc + &(ck * &GaussRat::real(beta))
        })
    };
    let e = GaussRatMat::from_fn(m, entry);
    let c_n = norm_const(MeasureParams { n, m, kind: MeasureKind::Mu });
    let pre = BigRat::from_integer(factorial(m)) / c_n;
    Ok(&e.det() * &GaussRat::real(pre))
}

fn min_eig_difference(big: &ComplexMat, small: &ComplexMat) -> Result<f64> {
    let diff = &big.gram() - &small.gram();
    Ok(hermitian_eigs(&diff)?[0])
}

/// Real roots of `p` lying in `[0, 1]` (within `tol`), from companion-matrix
/// eigenvalues.
fn roots_near_unit_interval(p: &Poly<C64>, tol: f64) -> Result<Option<f64>> {
    let Some(deg) = p.degree() else {
        return Ok(Some(0.0));
    };
    if deg == 0 {
        return Ok(None);
    }
    let lead = p.coeff(deg);
    let comp = ComplexMat::from_fn(deg, |i, j| {
        if i == 0 {
            -p.coeff(deg - 1 - j) / lead
        } else if i == j + 1 {
            C64::one()
        } else {
            C64::zero()
        }
    });
    for r in complex_eigenvalues(&comp)? {
        if r.im.abs() <= tol && r.re >= -tol && r.re <= 1.0 + tol {
            return Ok(Some(r.re));
        }
    }
    Ok(None)
}

/// `int_0^1 (1-t)^alpha g(t) dt` for smooth complex `g`: Gauss-Jacobi rules
/// of doubling size until two agree, then adaptive refinement as a fallback.
fn jacobi_integral(alpha: usize, g: &(dyn Fn(f64) -> C64 + Sync)) -> Result<C64> {
    let mut prev: Option<C64> = None;
    let mut k = 8;
    while k <= 256 {
        let rule = quad_rule(RuleKind::Jacobi { alpha: alpha as f64 }, k)?;
        let v: C64 = rule.integrate(g);
        if let Some(p) = prev {
            if (v - p).norm() <= 1e-14 * v.norm().max(1e-300) {
                return Ok(v);
            }
        }
        prev = Some(v);
        k *= 2;
    }
    let f = |t: f64| g(t) * (1.0 - t).powi(alpha as i32);
    let scale = prev.map(|p| p.norm()).unwrap_or(1.0).max(1e-300);
    let (v, _) = adaptive_integrate(f, 0.0, 1.0, 1e-13 * scale)?;
    Ok(v)
}

/// `(m!/k_n) det(int_0^1 (1-t)^{n-2m} t^{i+j} / pencil(t) dt)`.
fn negative_from_pencil(n: usize, m: usize, pencil: &(dyn Fn(f64) -> C64 + Sync)) -> Result<C64> {
    let alpha = n - 2 * m;
    let mut e = ComplexMat::zeros(m);
    for s in 0..(2 * m - 1) {
        let v = jacobi_integral(alpha, &|t: f64| C64::new(t.powi(s as i32), 0.0) / pencil(t))?;
        for i in 0..m {
            if s >= i && s - i < m {
                e[(i, s - i)] = v;
            }
        }
    }
    Ok(det(&e) * nu_prefactor(n, m)?)
}

/// Negative moment `int det^{-m}[(AU + C)(BU + D)^*] dU`, which requires
/// `AA^* < CC^*`, `BB^* < DD^*` (with margin) and `2m <= n`.
pub fn moment_neg(q: &MomentQuery) -> Result<C64> {
    if q.sign != Sign::Negative {
        return Err(Error::InvalidParameter("moment_neg needs a negative query".into()));
    }
    let n = q.dim();
    if 2 * q.m > n {
        return Err(Error::Precondition(format!("need 2m <= n, got m = {}, n = {n}", q.m)));
    }
    let gap_ac = min_eig_difference(&q.c, &q.a)?;
    let gap_bd = min_eig_difference(&q.d, &q.b)?;
    if gap_ac <= SPECTRAL_MARGIN || gap_bd <= SPECTRAL_MARGIN {
        return Err(Error::SpectrumStraddle(format!(
            "min eig(CC* - AA*) = {gap_ac:e}, min eig(DD* - BB*) = {gap_bd:e}, margin {SPECTRAL_MARGIN:e}"
        )));
    }
    let (cd, ab) = (q.cd(), q.ab());
    let neg_ab = ab.scale(C64::new(-1.0, 0.0));
    let poly = det_pencil_poly(&cd, &neg_ab);
    if let Some(t) = roots_near_unit_interval(&poly, 1e-10)? {
        return Err(Error::PoleOnPath(t));
    }
    negative_from_pencil(n, q.m, &|t| det(&(&cd - &ab.scale(C64::new(t, 0.0)))))
}

/// `int |det(zI - AU)|^{2m} dU` from the spectrum of `AA^*`.
pub fn moment_pos_z(a: &ComplexMat, z: C64, m: usize) -> Result<f64> {
    moment_pos_spectrum(&gram_eigs(a)?, z, m)
}

pub fn moment_pos_spectrum(spec: &HermSpectrum, z: C64, m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidParameter("moment order m must be positive".into()));
    }
    let z2 = z.norm_sqr();
    let v = positive_from_pencil(spec.dim(), m, |u| {
        C64::new(spec.eigs().iter().map(|&a2| (1.0 - u) * z2 + u * a2).product(), 0.0)
    })?;
    Ok(v.re)
}

/// Which closed form a negative spectral moment used.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `|z|^2` below the spectrum of `AA^*`.
    Lower,
    /// `|z|^2` above the spectrum of `AA^*`.
    Upper,
}

/// Chooses the branch, refusing when `|z|^2` is within the margin of
/// `[lambda_min, lambda_max]`.
pub fn neg_branch(spec: &HermSpectrum, z: C64) -> Result<Branch> {
    let z2 = z.norm_sqr();
    if z2 < spec.min() - SPECTRAL_MARGIN {
        Ok(Branch::Lower)
    } else if z2 > spec.max() + SPECTRAL_MARGIN {
        Ok(Branch::Upper)
    } else {
        Err(Error::SpectrumStraddle(format!("|z|^2 = {z2} lies in [{}, {}]", spec.min(), spec.max())))
    }
}

/// `int |det(zI - AU)|^{-2m} dU` from the spectrum of `AA^*`.
pub fn moment_neg_z(a: &ComplexMat, z: C64, m: usize) -> Result<f64> {
    moment_neg_spectrum(&gram_eigs(a)?, z, m)
}

pub fn moment_neg_spectrum(spec: &HermSpectrum, z: C64, m: usize) -> Result<f64> {
    let n = spec.dim();
    if m == 0 || 2 * m > n {
        return Err(Error::Precondition(format!("need 1 <= m and 2m <= n, got m = {m}, n = {n}")));
    }
    let z2 = z.norm_sqr();
    let eigs = spec.eigs().to_vec();
    let pencil: Box<dyn Fn(f64) -> C64 + Sync> = match neg_branch(spec, z)? {
        Branch::Upper => Box::new(move |t| C64::new(eigs.iter().map(|&a2| z2 - t * a2).product(), 0.0)),
        Branch::Lower => Box::new(move |t| C64::new(eigs.iter().map(|&a2| a2 - t * z2).product(), 0.0)),
    };
    Ok(negative_from_pencil(n, m, pencil.as_ref())?.re)
}

/// `<|det(zI - W)|^2>` for a unitarily invariant `W` of size `n`, given the
/// coefficients of `p_n(x) = <det(xI + WW^*)>`:
/// `(n+1) sum_k p_k |z|^{2k} B(k+1, n+1-k)`.
pub fn invariant_ensemble_moment(pn: &Poly<f64>, z: C64, n: usize) -> Result<f64> {
    if pn.degree().is_some_and(|d| d > n) {
        return Err(Error::InvalidParameter(format!("p_n must have degree <= n = {n}")));
    }
    let z2 = z.norm_sqr();
    let total: f64 = pn
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, &ck)| ck * z2.powi(k as i32) * rat_to_f64(&beta_rat(k + 1, n + 1 - k)))
        .sum();
    Ok((n + 1) as f64 * total)
}

/// Closed form `sum_{k<=n} |z|^{2k}` of `<|det(zI - U)|^2>` for Haar `U(n)`.
pub fn cue_moment(n: usize, z: C64) -> f64 {
    let z2 = z.norm_sqr();
    (0..=n).map(|k| z2.powi(k as i32)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn zi(n: usize, z: C64) -> ComplexMat {
        ComplexMat::scalar(n, z)
    }

    #[test]
    fn one_by_one_angular_average() {
        // <|z - a e^{i theta}|^2> = |z|^2 + |a|^2.
        let (z, a) = (C64::new(0.3, -0.7), C64::new(1.1, 0.4));
        let am = ComplexMat::from_diag(&[-a]);
        let q = MomentQuery::new(am.clone(), am, zi(1, z), zi(1, z), 1, Sign::Positive).unwrap();
        let v = moment_pos(&q).unwrap();
        assert!((v - c(z.norm_sqr() + a.norm_sqr())).norm() < 1e-13);
    }

    #[test]
    fn zero_a_gives_power_of_det() {
        let cm = ComplexMat::from_rows(&[vec![C64::new(1.0, 1.0), c(0.5)], vec![c(0.0), C64::new(0.0, 2.0)]]);
        let dm = ComplexMat::from_rows(&[vec![c(2.0), c(0.0)], vec![C64::new(0.3, 0.1), c(1.0)]]);
        let z = ComplexMat::zeros(2);
        let q = MomentQuery::new(z.clone(), z, cm.clone(), dm.clone(), 2, Sign::Positive).unwrap();
        let expect = det(&(&cm * &dm.adjoint())).powu(2);
        assert!((moment_pos(&q).unwrap() - expect).norm() < 1e-12 * expect.norm());
    }

    #[test]
    fn cue_second_order() {
        let z = C64::new(0.6, 0.5);
        let v = moment_pos_z(&ComplexMat::identity(2), z, 1).unwrap();
        let r = z.norm_sqr();
        assert!((v - (r * r + r + 1.0)).abs() < 1e-14);
        let v = moment_pos_z(&ComplexMat::identity(1), z, 1).unwrap();
        assert!((v - (1.0 + r)).abs() < 1e-14);
        let v = moment_pos_z(&ComplexMat::identity(2), c(0.0), 1).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn negative_examples() {
        let z = C64::new(1.2, 0.5);
        let zz = zi(2, z);
        let zero = ComplexMat::zeros(2);
        let q = MomentQuery::new(zero.clone(), zero, zz.clone(), zz, 1, Sign::Negative).unwrap();
        let r = z.norm_sqr();
        assert!((moment_neg(&q).unwrap() - c(1.0 / (r * r))).norm() < 1e-13);
        let v = moment_neg_z(&ComplexMat::identity(2), z, 1).unwrap();
        assert!((v - 1.0 / (r * (r - 1.0))).abs() < 1e-13);
        let a = ComplexMat::from_real_diag(&[2.0, 2.0]);
        let v = moment_neg_z(&a, c(1.0), 1).unwrap();
        assert!((v - 1.0 / 12.0).abs() < 1e-14, "{v}");
    }

    #[test]
    fn straddle_is_refused() {
        let a = ComplexMat::from_real_diag(&[0.5, 2.0]);
        assert!(matches!(moment_neg_z(&a, c(1.0), 1), Err(Error::SpectrumStraddle(_))));
        let a = ComplexMat::from_real_diag(&[1.0, 2.0]);
        assert!(matches!(moment_neg_z(&a, c(1.0), 1), Err(Error::SpectrumStraddle(_))));
        assert!(moment_neg_z(&ComplexMat::identity(2), c(2.0), 2).is_err());
    }

    #[test]
    fn detpoly_examples() {
        let eye = ComplexMat::identity(2);
        let p = detpoly(&eye, &eye, &eye, &eye);
        for (k, want) in [1.0, 2.0, 1.0].iter().enumerate() {
            assert!((p.coeff(k) - c(*want)).norm() < 1e-14);
        }
        let zero = ComplexMat::zeros(2);
        let cm = ComplexMat::from_real_diag(&[2.0, 3.0]);
        let p = detpoly(&zero, &zero, &cm, &eye);
        assert!((p.coeff(0) - c(6.0)).norm() < 1e-14);
        assert!(p.coeff(1).norm() < 1e-14 && p.coeff(2).norm() < 1e-14);
    }

    #[test]
    fn invariant_ensemble_examples() {
        let z = C64::new(0.4, 0.8);
        for n in 1..6 {
            let mut coeffs = vec![0.0; n + 1];
            coeffs[n] = 1.0;
            let v = invariant_ensemble_moment(&Poly::new(coeffs), z, n).unwrap();
            assert!((v - z.norm_sqr().powi(n as i32)).abs() < 1e-13);
            let v = invariant_ensemble_moment(&Poly::new(vec![1.0]), z, n).unwrap();
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn exact_path_matches_float_path() {
        let g = |re: i64, im: i64| GaussRat::from_ints(re, im);
        let a = GaussRatMat::from_fn(2, |i, j| g(i as i64 - j as i64, 1));
        let b = GaussRatMat::from_fn(2, |i, j| g(1, (i * j) as i64));
        let cc = GaussRatMat::from_fn(2, |i, j| if i == j { g(2, 0) } else { g(0, 1) });
        let d = GaussRatMat::identity(2);
        for m in 1..=3 {
            let exact = moment_pos_exact(&a, &b, &cc, &d, m).unwrap().to_c64();
            let q =
                MomentQuery::new(a.to_complex(), b.to_complex(), cc.to_complex(), d.to_complex(), m, Sign::Positive)
                    .unwrap();
            let float = moment_pos(&q).unwrap();
            assert!((exact - float).norm() < 1e-11 * exact.norm().max(1.0), "m={m}: {exact} vs {float}");
        }
    }
}
