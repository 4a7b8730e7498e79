//! Group integrals `F_n(AB^*) = int exp tr(AU + U^* B^*) dU` through the
//! Bessel kernel `g(x) = I_0(2 sqrt x) = sum_j x^j / (j!)^2`.

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{det, factorial, quad_rule, rat_det, BigRat, ComplexMat, RuleKind, C64};
use crate::schur::{dim_u, Partition};

/// Smallest pairwise gap between the `z_j^2`, relative to `max(1, max |z_j^2|)`.
pub const Z2_GAP_THRESHOLD: f64 = 1e-4;

/// Largest number of nonzero eigenvalues handled by the tensor quadrature.
pub const MAX_RANK: usize = 3;

/// Gauss-Jacobi nodes per dimension in the quadrature paths.
const NODES: usize = 40;

/// Switch from the power series to the Hankel expansion in [`j0`].
const J0_SERIES_MAX: f64 = 12.0;

/// `sum_j x^j / (j!)^2`, which is `I_0(2 sqrt x)` and `J_0(2 sqrt(-x))`.
pub fn i0_series(x: C64) -> C64 {
    let mut term = C64::new(1.0, 0.0);
    let mut sum = term;
    let peak = x.norm().sqrt();
    let mut j = 1.0;
    loop {
        term *= x / (j * j);
        sum += term;
        if j > peak && term.norm() <= 1e-17 * sum.norm() {
            return sum;
        }
        if term.norm() == 0.0 {
            return sum;
        }
        j += 1.0;
    }
}

/// Bessel `J_0` on the real line.
pub fn j0(x: f64) -> f64 {
    let x = x.abs();
    let v = if x <= J0_SERIES_MAX { i0_series(C64::new(-0.25 * x * x, 0.0)).re } else { j0_hankel(x) };
    debug_assert!(v.abs() <= 1.0 + 1e-12);
    v.clamp(-1.0, 1.0)
}

/// Large-argument expansion `sqrt(2/(pi x)) (P cos w - Q sin w)`, `w = x - pi/4`,
/// summed up to its smallest term.
fn j0_hankel(x: f64) -> f64 {
    let (mut p, mut q) = (0.0, 0.0);
    // a_k = prod_{i<=k} (-(2i-1)^2) / (k! 8^k); term_k = a_k / x^k.
    let mut term = 1.0;
    let mut prev = f64::INFINITY;
    for k in 0..200 {
        if k > 0 {
            let odd = (2 * k - 1) as f64;
            term *= -odd * odd / (k as f64 * 8.0 * x);
        }
        if term.abs() >= prev {
            break;
        }
        prev = term.abs();
        // (-1)^{floor(k/2)} alternation between the P and Q series.
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * term;
        } else {
            q += sign * term;
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let w = x - std::f64::consts::FRAC_PI_4;
    (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * w.cos() - q * w.sin())
}

/// Rank-one case `(n-1) int_0^1 g(t z^2) (1-t)^{n-2} dt`, integrated term by term:
/// `sum_j z^{2j} (n-1)! / (j! (n+j-1)!)`.
pub fn fn_rank1(z2: C64, n: usize) -> Result<C64> {
    if n < 2 {
        return Err(Error::Precondition(format!("need n >= 2, got {n}")));
    }
    let mut term = C64::new(1.0, 0.0);
    let mut sum = term;
    let peak = z2.norm().sqrt();
    let mut j = 1usize;
    loop {
        term *= z2 / (j * (n + j - 1)) as f64;
        sum += term;
        if (j as f64 > peak && term.norm() <= 1e-17 * sum.norm()) || term.norm() == 0.0 {
            return Ok(sum);
        }
        j += 1;
    }
}

/// The same integral by Gauss-Jacobi quadrature of the kernel.
pub fn fn_rank1_quadrature(z2: C64, n: usize) -> Result<C64> {
    if n < 2 {
        return Err(Error::Precondition(format!("need n >= 2, got {n}")));
    }
    let rule = quad_rule(RuleKind::Jacobi { alpha: (n - 2) as f64 }, NODES)?;
    Ok(rule.integrate(|t| i0_series(z2 * t)) * (n - 1) as f64)
}

/// Nonzero eigenvalues `z_j^2` of `AB^*` and the group dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesselSpec {
    pub z2: Vec<C64>,
    pub n: usize,
}

impl BesselSpec {
    pub fn new(z2: Vec<C64>, n: usize) -> Result<Self> {
        let m = z2.len();
        if 2 * m > n {
            return Err(Error::Precondition(format!("need 2m <= n, got m = {m}, n = {n}")));
        }
        if z2.iter().any(|z| !z.is_finite() || z.norm() == 0.0) {
            return Err(Error::InvalidParameter("eigenvalues must be nonzero and finite".into()));
        }
        let scale = z2.iter().map(|z| z.norm()).fold(1.0, f64::max);
        for i in 0..m {
            for j in (i + 1)..m {
                let gap = (z2[i] - z2[j]).norm() / scale;
                if gap < Z2_GAP_THRESHOLD {
                    return Err(Error::GapTooSmall { gap, threshold: Z2_GAP_THRESHOLD });
                }
            }
        }
        Ok(Self { z2, n })
    }

    pub fn rank(&self) -> usize {
        self.z2.len()
    }
}

/// `prod_j (n-j)!/(n-m-j)!` times the `m`-fold integral of
/// `det g(t_i z_j^2) / Delta(z^2)` against `prod_i t_i^{m-i} (1-t_i)^{n-2m}`.
pub fn fn_general(spec: &BesselSpec) -> Result<C64> {
    let m = spec.rank();
    let n = spec.n;
    if m == 0 {
        return Ok(C64::new(1.0, 0.0));
    }
    if m > MAX_RANK {
        return Err(Error::Precondition(format!("tensor quadrature limited to m <= {MAX_RANK}, got {m}")));
    }
    let mut prefactor = 1.0;
    for j in 1..=m {
        prefactor *= ((n - m - j + 1)..=(n - j)).map(|v| v as f64).product::<f64>();
    }
    let mut vandermonde = C64::new(1.0, 0.0);
    for i in 0..m {
        for j in (i + 1)..m {
            vandermonde *= spec.z2[i] - spec.z2[j];
        }
    }
    let rule = quad_rule(RuleKind::Jacobi { alpha: (n - 2 * m) as f64 }, NODES)?;
    let k = rule.len();
    // g(t_a z_j^2) for every node, shared by all tensor points.
    let table: Vec<Vec<C64>> =
        rule.nodes().iter().map(|&t| spec.z2.iter().map(|&z| i0_series(z * t)).collect()).collect();
    let mut idx = vec![0usize; m];
    let mut total = C64::new(0.0, 0.0);
    loop {
        let mut weight = 1.0;
        for (i, &a) in idx.iter().enumerate() {
            weight *= rule.weights()[a] * rule.nodes()[a].powi((m - 1 - i) as i32);
        }
        let mat = ComplexMat::from_fn(m, |i, j| table[idx[i]][j]);
        total += det(&mat) * weight;
        // Odometer over the K^m tensor grid.
        let mut pos = 0;
        loop {
            if pos == m {
                return Ok(total * prefactor / vandermonde);
            }
            idx[pos] += 1;
            if idx[pos] < k {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// `exp tr(AU + U^* B^*)` for one `U`.
pub fn group_integrand(a: &ComplexMat, b: &ComplexMat, u: &ComplexMat) -> C64 {
    let bu = b * u;
    ((a * u).trace() + bu.trace().conj()).exp()
}

/// `e^{tr X} = sum_lambda c_lambda s_lambda(X)`, with
/// `c_lambda = det(1/(lambda_j - j + i)!)` over `m >= len(lambda)` rows.
pub fn c_lambda(lambda: &Partition, m: usize) -> Result<BigRat> {
    if lambda.len() > m {
        return Err(Error::InvalidParameter(format!("partition {lambda} longer than {m}")));
    }
    let part = |j: usize| lambda.parts().get(j).copied().unwrap_or(0) as i64;
    let rows: Vec<Vec<BigRat>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let f = part(j) - j as i64 + i as i64;
                    if f < 0 {
                        BigRat::zero()
                    } else {
                        BigRat::new(BigInt::from(1), factorial(f as usize))
                    }
                })
                .collect()
        })
        .collect();
    Ok(rat_det(&rows))
}

/// Product form `s_lambda(1_m) prod_j (m-j)!/(m + lambda_j - j)!` of [`c_lambda`].
pub fn c_lambda_product(lambda: &Partition, m: usize) -> Result<BigRat> {
    if lambda.len() > m {
        return Err(Error::InvalidParameter(format!("partition {lambda} longer than {m}")));
    }
    let mut v = dim_u(lambda, m);
    for j in 1..=m {
        let part = lambda.parts().get(j - 1).copied().unwrap_or(0);
        v *= BigRat::new(factorial(m - j), factorial(m + part - j));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_values() {
        assert_eq!(i0_series(C64::new(0.0, 0.0)), C64::new(1.0, 0.0));
        assert!((i0_series(C64::new(1.0, 0.0)).re - 2.279_585_302_336_067).abs() < 1e-15);
        assert!((fn_rank1(C64::new(1.0, 0.0), 2).unwrap().re - 1.590_636_854_637_329).abs() < 1e-14);
    }

    #[test]
    fn j0_reference_values() {
        assert!((j0(1.0) - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((j0(10.0) + 0.245_935_764_451_348_3).abs() < 1e-12);
        assert!((j0(100.0) - 0.019_985_850_304_223_122).abs() < 1e-15);
    }

    #[test]
    fn empty_spec_is_one() {
        assert_eq!(fn_general(&BesselSpec::new(vec![], 3).unwrap()).unwrap(), C64::new(1.0, 0.0));
        assert_eq!(fn_rank1(C64::new(0.0, 0.0), 4).unwrap(), C64::new(1.0, 0.0));
    }
}
