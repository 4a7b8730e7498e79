//! Partitions, Schur functions and the symmetric-function identities used by
//! the moment formulas.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{det, factorial, BigRat, ComplexMat, C64};
use crate::report::VerificationReport;
use crate::sampling::{haar_unitary, mc_scalar, McConfig};

/// Relative separation below which the bialternant is abandoned for
/// Jacobi-Trudi.
pub const CONFLUENT_THRESHOLD: f64 = 1e-6;

/// Weakly decreasing sequence of positive integers.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    /// Validates ordering and strips trailing zeros.
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter(format!("partition parts must be weakly decreasing: {parts:?}")));
        }
        while parts.last() == Some(&0) {
            parts.pop();
        }
        Ok(Self { parts })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// `lambda_i` with zero padding, 0-based.
    pub fn part(&self, i: usize) -> usize {
        self.parts.get(i).copied().unwrap_or(0)
    }

    /// Number of nonzero parts.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.parts.iter().sum()
    }

    /// Transposed Young diagram.
    pub fn conjugate(&self) -> Self {
        let first = self.part(0);
        let parts = (1..=first).map(|k| self.parts.iter().filter(|&&p| p >= k).count()).collect();
        Self { parts }
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", s.join(","))
    }
}

/// Partitions of `weight` with at most `max_len` parts, each at most
/// `max_part`, in reverse lexicographic order.
pub fn partitions(weight: usize, max_len: usize, max_part: usize) -> Vec<Partition> {
    fn rec(rem: usize, cap: usize, slots: usize, cur: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if rem == 0 {
            out.push(Partition { parts: cur.clone() });
            return;
        }
        if slots == 0 {
            return;
        }
        for p in (1..=cap.min(rem)).rev() {
            cur.push(p);
            rec(rem - p, p, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(weight, max_part, max_len, &mut Vec::new(), &mut out);
    out
}

/// All partitions of weight `0..=max_weight`, grouped by weight.
pub fn partitions_up_to(max_weight: usize, max_len: usize, max_part: usize) -> Vec<Partition> {
    (0..=max_weight).flat_map(|w| partitions(w, max_len, max_part)).collect()
}

/// Elementary symmetric functions `e_0..=e_r_max` of `x`.
pub fn elementary(x: &[C64], r_max: usize) -> Vec<C64> {
    let mut e = vec![C64::new(0.0, 0.0); r_max + 1];
    e[0] = C64::new(1.0, 0.0);
    for &xi in x {
        for k in (1..=r_max).rev() {
            let prev = e[k - 1];
            e[k] += xi * prev;
        }
    }
    e
}

/// Complete symmetric functions `h_0..=h_r_max` from the elementary ones.
fn complete_from_elementary(e: &[C64], r_max: usize) -> Vec<C64> {
    let mut h = vec![C64::new(0.0, 0.0); r_max + 1];
    h[0] = C64::new(1.0, 0.0);
    for r in 1..=r_max {
        let mut acc = C64::new(0.0, 0.0);
        for k in 1..=r.min(e.len() - 1) {
            let term = e[k] * h[r - k];
            acc += if k % 2 == 1 { term } else { -term };
        }
        h[r] = acc;
    }
    h
}

pub fn complete(x: &[C64], r_max: usize) -> Vec<C64> {
    let e = elementary(x, x.len().min(r_max));
    complete_from_elementary(&e, r_max)
}

/// `(h_r(x), e_r(x))`, both zero for negative `r`.
pub fn hr_er(x: &[C64], r: i64) -> (C64, C64) {
    if r < 0 {
        return (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
    }
    let r = r as usize;
    (complete(x, r)[r], elementary(x, r)[r])
}

fn jacobi_trudi(lambda: &Partition, h: &[C64]) -> C64 {
    let l = lambda.len();
    if l == 0 {
        return C64::new(1.0, 0.0);
    }
    let m = ComplexMat::from_fn(l, |i, j| {
        let idx = lambda.part(i) as i64 - i as i64 + j as i64;
        if idx < 0 {
            C64::new(0.0, 0.0)
        } else {
            h[idx as usize]
        }
    });
    det(&m)
}

fn min_relative_separation(x: &[C64]) -> f64 {
    let scale = x.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let mut best = f64::INFINITY;
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            best = best.min((x[i] - x[j]).norm() / scale);
        }
    }
    best
}

/// `s_lambda(x_1, ..., x_n)`; zero when `l(lambda) > n`.
pub fn schur_eval(lambda: &Partition, x: &[C64]) -> C64 {
    let n = x.len();
    if lambda.len() > n {
        return C64::new(0.0, 0.0);
    }
    if lambda.is_empty() {
        return C64::new(1.0, 0.0);
    }
    if min_relative_separation(x) < CONFLUENT_THRESHOLD {
        let top = lambda.part(0) + lambda.len();
        return jacobi_trudi(lambda, &complete(x, top));
    }
    let num = ComplexMat::from_fn(n, |i, j| x[i].powu((lambda.part(j) + n - j - 1) as u32));
    let den = ComplexMat::from_fn(n, |i, j| x[i].powu((n - j - 1) as u32));
    det(&num) / det(&den)
}

/// Elementary symmetric functions of the eigenvalues of `m`, via Newton's
/// identities on traces of powers.
pub fn matrix_elementary(m: &ComplexMat) -> Vec<C64> {
    let n = m.dim();
    let mut p = Vec::with_capacity(n + 1);
    p.push(C64::new(n as f64, 0.0));
    let mut power = ComplexMat::identity(n);
    for _ in 1..=n {
        power = &power * m;
        p.push(power.trace());
    }
    let mut e = vec![C64::new(0.0, 0.0); n + 1];
    e[0] = C64::new(1.0, 0.0);
    for k in 1..=n {
        let mut acc = C64::new(0.0, 0.0);
        for i in 1..=k {
            let term = e[k - i] * p[i];
            acc += if i % 2 == 1 { term } else { -term };
        }
        e[k] = acc / k as f64;
    }
    e
}

/// `s_lambda(M)`, the Schur function of the eigenvalues of `M`, by
/// Jacobi-Trudi on the characteristic-polynomial coefficients.
pub fn schur_matrix(lambda: &Partition, m: &ComplexMat) -> C64 {
    if lambda.len() > m.dim() {
        return C64::new(0.0, 0.0);
    }
    let e = matrix_elementary(m);
    let top = lambda.part(0) + lambda.len();
    jacobi_trudi(lambda, &complete_from_elementary(&e, top))
}

fn big(k: i64) -> BigRat {
    BigRat::from_integer(BigInt::from(k))
}

fn vandermonde_part(lambda: &Partition, m: usize) -> BigRat {
    let mut v = BigRat::one();
    for i in 0..m {
        for j in (i + 1)..m {
            v *= big(lambda.part(i) as i64 - i as i64 - lambda.part(j) as i64 + j as i64);
        }
    }
    v
}

/// Dimension `s_lambda(1_n)` of the irreducible `U(n)` representation, exact.
pub fn dim_u(lambda: &Partition, n: usize) -> BigRat {
    if lambda.len() > n {
        return BigRat::zero();
    }
    let m = lambda.len();
    let mut v = vandermonde_part(lambda, m);
    for j in 1..=m {
        let lj = lambda.part(j - 1);
        v *= BigRat::new(factorial(n + lj - j), factorial(m + lj - j) * factorial(n - j));
    }
    v
}

/// `s_{lambda'}(1_n)`, exact; zero when `lambda_1 > n`.
pub fn dim_u_conj(lambda: &Partition, n: usize) -> BigRat {
    if lambda.part(0) > n {
        return BigRat::zero();
    }
    let m = lambda.len();
    let mut v = vandermonde_part(lambda, m);
    for j in 1..=m {
        let lj = lambda.part(j - 1);
        v *= BigRat::new(factorial(n + j - 1), factorial(n + j - 1 - lj) * factorial(m + lj - j));
    }
    v
}

/// Which Cauchy identity to test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CauchyKind {
    /// `prod det(I + t_i X) = sum s_lambda(t) s_lambda'(X)`, a finite sum.
    Dual,
    /// `prod det(I - t_i X)^{-1} = sum s_lambda(t) s_lambda(X)`.
    Inverse,
}

/// Compares both sides of a Cauchy identity, truncating the Schur sum at
/// `max_weight` (the dual sum is exact once `max_weight >= m n`).
pub fn cauchy_check(
    t: &[C64],
    x: &ComplexMat,
    kind: CauchyKind,
    max_weight: usize,
    tolerance: f64,
) -> Result<VerificationReport> {
    let n = x.dim();
    let m = t.len();
    let eye = ComplexMat::identity(n);
    let lhs = match kind {
        CauchyKind::Dual => t.iter().map(|&ti| det(&(&eye + &x.scale(ti)))).product::<C64>(),
        CauchyKind::Inverse => {
            let norm = x.spectral_norm()?;
            if let Some(ti) = t.iter().find(|ti| ti.norm() * norm >= 1.0) {
                return Err(Error::Precondition(format!("series diverges: |t| * |X| = {} >= 1", ti.norm() * norm)));
            }
            t.iter().map(|&ti| C64::new(1.0, 0.0) / det(&(&eye - &x.scale(ti)))).product::<C64>()
        }
    };
    let max_len = match kind {
        CauchyKind::Dual => m,
        CauchyKind::Inverse => m.min(n),
    };
    let max_part = match kind {
        CauchyKind::Dual => n,
        CauchyKind::Inverse => max_weight,
    };
    let rhs: C64 = partitions_up_to(max_weight, max_len, max_part)
        .iter()
        .map(|lam| {
            let sx = match kind {
                CauchyKind::Dual => schur_matrix(&lam.conjugate(), x),
                CauchyKind::Inverse => schur_matrix(lam, x),
            };
            schur_eval(lam, t) * sx
        })
        .sum();
    let check = match kind {
        CauchyKind::Dual => "cauchy_dual",
        CauchyKind::Inverse => "cauchy_inverse",
    };
    Ok(VerificationReport::numeric(
        check,
        crate::params! {"n" => n, "m" => m, "max_weight" => max_weight},
        lhs,
        rhs,
        tolerance,
    ))
}

/// Monte Carlo test of `int s_lambda(AU) conj(s_mu(BU)) dU
/// = delta_{lambda mu} s_lambda(AB^*) / s_lambda(1_n)`, passing within
/// four standard errors.
pub fn orthogonality_check(
    lambda: &Partition,
    mu: &Partition,
    a: &ComplexMat,
    b: &ComplexMat,
    cfg: McConfig,
) -> Result<VerificationReport> {
    let n = a.dim();
    if b.dim() != n {
        return Err(Error::InvalidParameter("A and B must have equal size".into()));
    }
    if lambda.len() > n || mu.len() > n {
        return Err(Error::Precondition("partition longer than the matrix size".into()));
    }
    let est = mc_scalar(cfg, |rng| {
        let u = haar_unitary(n, rng);
        schur_matrix(lambda, &(a * &u)) * schur_matrix(mu, &(b * &u)).conj()
    })?;
    let exact = if lambda == mu {
        let d = crate::numerics::rat_to_f64(&dim_u(lambda, n));
        schur_matrix(lambda, &(a * &b.adjoint())) / d
    } else {
        C64::new(0.0, 0.0)
    };
    Ok(VerificationReport::monte_carlo(
        "schur_orthogonality",
        crate::params! {"lambda" => lambda.to_string(), "mu" => mu.to_string(), "n" => n, "shards" => cfg.shards},
        &est,
        exact,
        4.0,
    ))
}

/// Lagrange weights `w_j = prod_{k != j} 1/(x_k - x_j)`. Fails when the
/// smallest gap relative to `max(1, max |x|)` is below `min_gap`.
pub fn lagrange_weights(x: &[f64], min_gap: f64) -> Result<Vec<f64>> {
    let scale = x.iter().map(|v| v.abs()).fold(1.0, f64::max);
    let mut gap = f64::INFINITY;
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            gap = gap.min((x[i] - x[j]).abs() / scale);
        }
    }
    if gap < min_gap {
        return Err(Error::GapTooSmall { gap, threshold: min_gap });
    }
    Ok((0..x.len()).map(|j| (0..x.len()).filter(|&k| k != j).map(|k| 1.0 / (x[k] - x[j])).product()).collect())
}
