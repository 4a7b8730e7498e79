//! Exact Beta-function determinants: the Selberg-type moment identities for
//! Schur functions, the determinant identity that drives their proof, and
//! floating-point quadrature of the same integrals.

use num_bigint::BigInt;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{beta_rat, factorial, quad_rule, rat_det, rat_to_f64, BigRat, RuleKind, C64};
use crate::params;
use crate::report::VerificationReport;
use crate::schur::{dim_u, dim_u_conj, partitions_up_to, schur_eval, Partition};

/// The two weights: `(1+t)^{-n-2m}` on `[0, inf)` and `(1-t)^{n-2m}` on `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    Mu,
    Nu,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureParams {
    pub n: usize,
    pub m: usize,
    pub kind: MeasureKind,
}

impl MeasureParams {
    pub fn new(n: usize, m: usize, kind: MeasureKind) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("m must be positive".into()));
        }
        if kind == MeasureKind::Nu && n < 2 * m {
            return Err(Error::Precondition(format!("nu measure needs n >= 2m (n = {n}, m = {m})")));
        }
        Ok(Self { n, m, kind })
    }
}

/// `c_n` or `k_n`, the normalisation making the measure unit mass.
pub fn norm_const(p: MeasureParams) -> BigRat {
    let (n, m) = (p.n, p.m);
    let mut c = BigRat::one();
    for j in 0..m {
        let jj = factorial(j) * factorial(j + 1);
        c *= match p.kind {
            MeasureKind::Mu => BigRat::new(jj * factorial(n + j), factorial(n + m + j)),
            MeasureKind::Nu => BigRat::new(jj * factorial(n - m - j - 1), factorial(n - j - 1)),
        };
    }
    c
}

fn beta_det(m: usize, entry: impl Fn(usize, usize) -> (usize, usize)) -> BigRat {
    let rows: Vec<Vec<BigRat>> = (1..=m)
        .map(|i| {
            (1..=m)
                .map(|j| {
                    let (a, b) = entry(i, j);
                    beta_rat(a, b)
                })
                .collect()
        })
        .collect();
    rat_det(&rows)
}

/// Exact check of `det B(p_j - i, q_j + i) = det B(p_j - i, q_j + 1)`,
/// `i, j = 1..m`, for integers `p_j > m`, `q_j > -1`.
pub fn prop1_check(p: &[usize], q: &[usize]) -> Result<VerificationReport> {
    let m = p.len();
    if q.len() != m || m == 0 {
        return Err(Error::InvalidParameter("p and q must be non-empty and of equal length".into()));
    }
    if p.iter().any(|&pj| pj <= m) {
        return Err(Error::Precondition(format!("need every p_j > m = {m}, got {p:?}")));
    }
    let lhs = beta_det(m, |i, j| (p[j - 1] - i, q[j - 1] + i));
    let rhs = beta_det(m, |i, j| (p[j - 1] - i, q[j - 1] + 1));
    Ok(VerificationReport::exact("prop1", params! {"p" => p, "q" => q}, &lhs, &rhs))
}

/// Which Selberg-type identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaKind {
    /// `s_lambda(1_m)^2 / s_lambda'(1_n)` against the `mu` measure.
    A,
    /// `s_lambda(1_m)^2 / s_lambda(1_n)` against the `nu` measure.
    B,
}

impl LemmaKind {
    fn measure(self) -> MeasureKind {
        match self {
            LemmaKind::A => MeasureKind::Mu,
            LemmaKind::B => MeasureKind::Nu,
        }
    }

    fn name(self) -> &'static str {
        match self {
            LemmaKind::A => "a",
            LemmaKind::B => "b",
        }
    }
}

fn lemma_preconditions(lambda: &Partition, m: usize, n: usize, kind: LemmaKind) -> Result<()> {
    if m == 0 || lambda.len() > m {
        return Err(Error::Precondition(format!("need 1 <= l(lambda) <= m, got {lambda} with m = {m}")));
    }
    match kind {
        LemmaKind::A if lambda.part(0) > n => {
            Err(Error::Precondition(format!("need lambda_1 <= n, got {lambda} with n = {n}")))
        }
        LemmaKind::B if 2 * m > n => Err(Error::Precondition(format!("need 2m <= n, got m = {m}, n = {n}"))),
        _ => Ok(()),
    }
}

/// The three exact values compared by [`lemma1_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct LemmaValues {
    /// Ratio of unitary-group dimensions.
    pub dims: BigRat,
    /// Beta determinant obtained from the factorial-determinant identity.
    pub beta_chain: BigRat,
    /// `m! / c_n` (or `m! / k_n`) times the determinant of one-dimensional
    /// moments of the weight, i.e. the value of the `m`-fold integral.
    pub integral: BigRat,
}

pub fn lemma1_values(lambda: &Partition, m: usize, n: usize, kind: LemmaKind) -> Result<LemmaValues> {
    lemma_preconditions(lambda, m, n, kind)?;
    let sm = dim_u(lambda, m);
    let dims = match kind {
        LemmaKind::A => &sm * &sm / dim_u_conj(lambda, n),
        LemmaKind::B => &sm * &sm / dim_u(lambda, n),
    };
    let f: Vec<usize> = (1..=m).map(|j| m + lambda.part(j - 1) - j).collect();
    let mut pre = BigRat::one();
    for j in 0..m {
        let jj = factorial(j) * factorial(j);
        pre *= match kind {
            LemmaKind::A => BigRat::new(factorial(n + m + j), jj * factorial(n + j)),
            LemmaKind::B => BigRat::new(factorial(n - j - 1), jj * factorial(n - m - j - 1)),
        };
    }
    let chain_det = match kind {
        LemmaKind::A => beta_det(m, |i, j| (f[j - 1] + m - i + 1, n + m - f[j - 1])),
        LemmaKind::B => beta_det(m, |i, j| (f[j - 1] + m - i + 1, n - 2 * m + i)),
    };
    let moment_det = match kind {
        LemmaKind::A => beta_det(m, |i, j| (f[j - 1] + m - i + 1, n + m - f[j - 1] + i - 1)),
        LemmaKind::B => beta_det(m, |i, j| (f[j - 1] + m - i + 1, n - 2 * m + 1)),
    };
    let c = norm_const(MeasureParams::new(n, m, kind.measure())?);
    let integral = BigRat::from_integer(factorial(m)) / c * moment_det;
    Ok(LemmaValues { dims, beta_chain: pre * chain_det, integral })
}

/// Exact check of the Selberg-type identity for `s_lambda`; passes only if
/// the dimension ratio, the Beta chain and the integral value coincide.
pub fn lemma1_check(lambda: &Partition, m: usize, n: usize, kind: LemmaKind) -> Result<VerificationReport> {
    let v = lemma1_values(lambda, m, n, kind)?;
    let params = params! {
        "lambda" => lambda.to_string(), "m" => m, "n" => n, "kind" => kind.name(),
        "beta_chain" => v.beta_chain.to_string(),
    };
    let r = VerificationReport::exact("lemma1", params, &v.dims, &v.integral);
    Ok(if v.beta_chain != v.dims { r.failed("beta chain differs from the dimension ratio") } else { r })
}

fn vandermonde_big(f: &[usize]) -> BigInt {
    let mut v = BigInt::one();
    for i in 0..f.len() {
        for j in (i + 1)..f.len() {
            v *= BigInt::from(f[i] as i64 - f[j] as i64);
        }
    }
    v
}

/// Exact check of `f_1! ... f_m! Delta(f) = det((f_j + m - i)!)`.
pub fn factorial_det_check(f: &[usize]) -> Result<VerificationReport> {
    if f.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::Precondition(format!("f must be strictly decreasing, got {f:?}")));
    }
    let m = f.len();
    let lhs_int = f.iter().fold(BigInt::one(), |acc, &fj| acc * factorial(fj)) * vandermonde_big(f);
    let rows: Vec<Vec<BigRat>> =
        (1..=m).map(|i| (1..=m).map(|j| BigRat::from_integer(factorial(f[j - 1] + m - i))).collect()).collect();
    let rhs = rat_det(&rows);
    Ok(VerificationReport::exact("factorial_det", params! {"f" => f}, &BigRat::from_integer(lhs_int), &rhs))
}

/// Relative tolerance for [`quadrature_vs_exact`].
pub const QUADRATURE_REL_TOL: f64 = 1e-9;

/// Evaluates the `m`-fold integral by tensor Gauss rules (exact for the
/// polynomial integrand) and compares with the exact value.
pub fn quadrature_vs_exact(lambda: &Partition, m: usize, n: usize, kind: LemmaKind) -> Result<VerificationReport> {
    let exact = lemma1_values(lambda, m, n, kind)?.integral;
    let c = rat_to_f64(&norm_const(MeasureParams::new(n, m, kind.measure())?));
    // Degree per variable of s_lambda * Delta^2 is at most lambda_1 + 2m - 2.
    let (rule, map): (_, fn(f64, usize, usize) -> (f64, f64)) = match kind {
        LemmaKind::A => {
            // t = u/(1-u) turns t^p (1+t)^{-n-2m} dt into u^p (1-u)^{n+2m-2-p} du.
            let deg = n + 2 * m - 2;
            (quad_rule(RuleKind::Legendre01, deg / 2 + 1)?, |u, n, m| {
                (u / (1.0 - u), (1.0 - u).powi((n + 2 * m - 2) as i32))
            })
        }
        LemmaKind::B => {
            let deg = lambda.part(0) + 2 * m - 2;
            (quad_rule(RuleKind::Jacobi { alpha: (n - 2 * m) as f64 }, deg / 2 + 1)?, |t, _, _| (t, 1.0))
        }
    };
    let k = rule.len();
    let mut idx = vec![0usize; m];
    let mut total = 0.0;
    'outer: loop {
        let mut t = Vec::with_capacity(m);
        let mut w = 1.0;
        for &i in &idx {
            let (ti, jac) = map(rule.nodes()[i], n, m);
            t.push(ti);
            w *= rule.weights()[i] * jac;
        }
        let mut vdm = 1.0;
        for i in 0..m {
            for j in (i + 1)..m {
                vdm *= t[i] - t[j];
            }
        }
        if vdm != 0.0 {
            let tc: Vec<C64> = t.iter().map(|&x| C64::new(x, 0.0)).collect();
            total += w * vdm * vdm * schur_eval(lambda, &tc).re;
        }
        for d in 0..m {
            idx[d] += 1;
            if idx[d] < k {
                continue 'outer;
            }
            idx[d] = 0;
        }
        break;
    }
    let value = total / c;
    let exact_f = rat_to_f64(&exact);
    Ok(VerificationReport::numeric_rel(
        "lemma1_quadrature",
        params! {"lambda" => lambda.to_string(), "m" => m, "n" => n, "kind" => kind.name(), "nodes" => k},
        C64::new(value, 0.0),
        C64::new(exact_f, 0.0),
        QUADRATURE_REL_TOL,
    ))
}

/// Every admissible `(lambda, m, n, kind)` with `|lambda| <= max_weight`,
/// `1 <= m <= max_m`, `n <= max_n`.
pub fn lemma1_cases(max_weight: usize, max_m: usize, max_n: usize) -> Vec<(Partition, usize, usize, LemmaKind)> {
    let mut out = Vec::new();
    for kind in [LemmaKind::A, LemmaKind::B] {
        for m in 1..=max_m {
            for n in 0..=max_n {
                for lam in partitions_up_to(max_weight, m, max_weight) {
                    if lemma_preconditions(&lam, m, n, kind).is_ok() {
                        out.push((lam, m, n, kind));
                    }
                }
            }
        }
    }
    out
}

pub fn lemma1_suite(max_weight: usize, max_m: usize, max_n: usize) -> Vec<VerificationReport> {
    lemma1_cases(max_weight, max_m, max_n)
        .iter()
        .map(|(lam, m, n, kind)| lemma1_check(lam, *m, *n, *kind).expect("cases satisfy preconditions"))
        .collect()
}

/// Unit mass of both measures (`lambda` empty) for `m <= max_m`, `n <= max_n`.
pub fn selberg_mass_suite(max_m: usize, max_n: usize) -> Vec<VerificationReport> {
    lemma1_cases(0, max_m, max_n)
        .iter()
        .map(|(lam, m, n, kind)| {
            let v = lemma1_values(lam, *m, *n, *kind).expect("admissible");
            VerificationReport::exact(
                "selberg_mass",
                params! {"m" => m, "n" => n, "kind" => kind.name()},
                &v.integral,
                &BigRat::one(),
            )
        })
        .collect()
}

/// Proposition checks on a seeded random sample of the integer grid
/// `m < p_j <= max_value`, `0 <= q_j <= max_value`, plus all `m = 1, 2`
/// cases with `p_j, q_j <= 6`.
pub fn prop1_suite(ms: &[usize], max_value: usize, draws: usize, seed: u64) -> Vec<VerificationReport> {
    let mut out = Vec::new();
    for p1 in 2..=6 {
        for q1 in 0..=6 {
            out.push(prop1_check(&[p1], &[q1]).expect("valid"));
        }
    }
    for p in [(3usize, 4usize), (4, 6), (6, 3)] {
        for q in [(0usize, 0usize), (1, 1), (2, 5)] {
            out.push(prop1_check(&[p.0, p.1], &[q.0, q.1]).expect("valid"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for &m in ms {
        for _ in 0..draws {
            let p: Vec<usize> = (0..m).map(|_| rng.random_range(m + 1..=max_value)).collect();
            let q: Vec<usize> = (0..m).map(|_| rng.random_range(0..=max_value)).collect();
            out.push(prop1_check(&p, &q).expect("valid"));
        }
    }
    out
}
