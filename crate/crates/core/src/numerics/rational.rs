use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::linalg::C64;

/// Arbitrary-precision rational, always reduced with a positive denominator.
pub type BigRat = BigRational;

const FACTORIAL_CACHE: usize = 500;

fn factorial_table() -> &'static [BigInt] {
    static TABLE: OnceLock<Vec<BigInt>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(FACTORIAL_CACHE + 1);
        t.push(BigInt::one());
        for k in 1..=FACTORIAL_CACHE {
            let next = &t[k - 1] * BigInt::from(k);
            t.push(next);
        }
        t
    })
}

pub fn factorial(k: usize) -> BigInt {
    let table = factorial_table();
    if k <= FACTORIAL_CACHE {
        return table[k].clone();
    }
    (FACTORIAL_CACHE + 1..=k).fold(table[FACTORIAL_CACHE].clone(), |acc, j| acc * BigInt::from(j))
}

pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Exact `B(p, q) = (p-1)!(q-1)!/(p+q-1)!` for positive integers.
pub fn beta_rat(p: usize, q: usize) -> BigRat {
    assert!(p >= 1 && q >= 1, "beta_rat needs positive integer arguments");
    BigRat::new(factorial(p - 1) * factorial(q - 1), factorial(p + q - 1))
}

/// Correctly scaled conversion of an exact rational to the nearest-ish `f64`,
/// including values far outside the range of the numerator/denominator.
pub fn rat_to_f64(r: &BigRat) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    if let Some(v) = r.to_f64() {
        if v.is_finite() && v != 0.0 {
            return v;
        }
    }
    let num = r.numer().abs();
    let den = r.denom().clone();
    let shift = num.bits() as i64 - den.bits() as i64;
    // Bring the ratio into [2^-60, 2^60] before converting.
    let (n2, d2) = if shift > 0 { (num, den << (shift as usize)) } else { (num << ((-shift) as usize), den) };
    let base = BigRat::new(n2, d2).to_f64().unwrap_or(f64::NAN);
    let v = base * 2f64.powi(shift.clamp(i32::MIN as i64, i32::MAX as i64) as i32);
    if r.is_negative() {
        -v
    } else {
        v
    }
}

/// `sqrt(r)` for `r >= 0`, accurate to about `2^-bits` relative.
pub fn rat_sqrt(r: &BigRat, bits: u64) -> BigRat {
    assert!(!r.is_negative(), "rat_sqrt of a negative number");
    if r.is_zero() {
        return BigRat::zero();
    }
    let p = bits + r.denom().bits();
    let scaled = (r.numer() << (2 * p)) / r.denom();
    BigRat::new(scaled.sqrt(), BigInt::one() << p)
}

/// `atanh(u)` in fixed point with `p` fractional bits, for `|u| <= 1/3`.
fn atanh_fixed(u: &BigInt, p: u64) -> BigInt {
    let u2 = (u * u) >> p;
    let mut power = u.clone();
    let mut acc = BigInt::zero();
    let mut j = 1u64;
    // Shifts round toward minus infinity, so negative powers stall at -1.
    while power.bits() > 1 {
        acc += &power / BigInt::from(j);
        power = (&power * &u2) >> p;
        j += 2;
    }
    acc
}

/// `ln(r)` for `r > 0`, accurate to about `2^-bits` absolute.
pub fn rat_ln(r: &BigRat, bits: u64) -> BigRat {
    assert!(r.is_positive(), "rat_ln of a nonpositive number");
    let p = bits + 16;
    // r = 2^e m with m in (1/2, 2).
    let e = r.numer().bits() as i64 - r.denom().bits() as i64;
    let (num, den) =
        if e >= 0 { (r.numer().clone(), r.denom() << e as u64) } else { (r.numer() << (-e) as u64, r.denom().clone()) };
    let u = ((&num - &den) << p) / (&num + &den);
    let third = (BigInt::one() << p) / BigInt::from(3);
    let fixed = (atanh_fixed(&u, p) + BigInt::from(e) * atanh_fixed(&third, p)) * 2;
    BigRat::new(fixed, BigInt::one() << p)
}

/// Exact determinant by Gaussian elimination over the rationals.
pub fn rat_det(rows: &[Vec<BigRat>]) -> BigRat {
    let n = rows.len();
    assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
    let mut a: Vec<Vec<BigRat>> = rows.to_vec();
    let mut det = BigRat::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return BigRat::zero();
        };
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        let p = a[col][col].clone();
        det *= &p;
        for r in (col + 1)..n {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] / &p;
            for j in (col + 1)..n {
                let v = &factor * &a[col][j];
                a[r][j] -= v;
            }
        }
    }
    det
}

/// Exact Gaussian rational `re + i im`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaussRat {
    pub re: BigRat,
    pub im: BigRat,
}

impl GaussRat {
    pub fn new(re: BigRat, im: BigRat) -> Self {
        Self { re, im }
    }

    pub fn real(re: BigRat) -> Self {
        Self { re, im: BigRat::zero() }
    }

    pub fn from_ints(re: i64, im: i64) -> Self {
        Self::new(BigRat::from_integer(re.into()), BigRat::from_integer(im.into()))
    }

    pub fn zero() -> Self {
        Self::from_ints(0, 0)
    }

    pub fn one() -> Self {
        Self::from_ints(1, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm_sqr(&self) -> BigRat {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn to_c64(&self) -> C64 {
        C64::new(rat_to_f64(&self.re), rat_to_f64(&self.im))
    }
}

impl Add for &GaussRat {
    type Output = GaussRat;
    fn add(self, rhs: &GaussRat) -> GaussRat {
        GaussRat::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub for &GaussRat {
    type Output = GaussRat;
    fn sub(self, rhs: &GaussRat) -> GaussRat {
        GaussRat::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Mul for &GaussRat {
    type Output = GaussRat;
    fn mul(self, rhs: &GaussRat) -> GaussRat {
        GaussRat::new(&self.re * &rhs.re - &self.im * &rhs.im, &self.re * &rhs.im + &self.im * &rhs.re)
    }
}

impl Div for &GaussRat {
    type Output = GaussRat;
    fn div(self, rhs: &GaussRat) -> GaussRat {
        let d = rhs.norm_sqr();
        let num = self * &rhs.conj();
        GaussRat::new(num.re / &d, num.im / d)
    }
}

impl Neg for &GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat::new(-self.re.clone(), -self.im.clone())
    }
}

/// Square matrix over the Gaussian rationals, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussRatMat {
    dim: usize,
    data: Vec<GaussRat>,
}

impl GaussRatMat {
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> GaussRat) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { GaussRat::one() } else { GaussRat::zero() })
    }

    pub fn scalar(dim: usize, s: &GaussRat) -> Self {
        Self::from_fn(dim, |i, j| if i == j { s.clone() } else { GaussRat::zero() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &GaussRat {
        &self.data[i * self.dim + j]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i).conj())
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        Self::from_fn(self.dim, |i, j| {
            (0..self.dim).fold(GaussRat::zero(), |acc, k| &acc + &(self.get(i, k) * rhs.get(k, j)))
        })
    }

    /// `self + s * rhs`.
    pub fn add_scaled(&self, s: &GaussRat, rhs: &Self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(i, j) + &(s * rhs.get(i, j)))
    }

    pub fn to_complex(&self) -> super::ComplexMat {
        super::ComplexMat::from_fn(self.dim, |i, j| self.get(i, j).to_c64())
    }

    pub fn det(&self) -> GaussRat {
        let n = self.dim;
        let mut a = self.data.clone();
        let mut det = GaussRat::one();
        for col in 0..n {
            let Some(piv) = (col..n).find(|&r| !a[r * n + col].is_zero()) else {
                return GaussRat::zero();
            };
            if piv != col {
                for j in 0..n {
                    a.swap(piv * n + j, col * n + j);
                }
                det = -&det;
            }
            let p = a[col * n + col].clone();
            det = &det * &p;
            for r in (col + 1)..n {
                if a[r * n + col].is_zero() {
                    continue;
                }
                let factor = &a[r * n + col] / &p;
                for j in (col + 1)..n {
                    let v = &factor * &a[col * n + j];
                    a[r * n + j] = &a[r * n + j] - &v;
                }
            }
        }
        det
    }
}
