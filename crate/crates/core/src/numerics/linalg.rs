use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Dense square complex matrix, row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMat {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMat {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn scalar(dim: usize, value: C64) -> Self {
        Self::identity(dim).scale(value)
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let d: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_diag(&d)
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    /// Builds a matrix from rows. Panics if the rows do not form a square.
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let dim = rows.len();
        assert!(rows.iter().all(|r| r.len() == dim), "matrix must be square");
        Self { dim, data: rows.iter().flatten().copied().collect() }
    }

    pub fn from_row_major(dim: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), dim * dim, "row-major data has wrong length");
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `self * self^*`.
    pub fn gram(&self) -> Self {
        self * &self.adjoint()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Largest singular value, from the top eigenvalue of `self * self^*`.
    pub fn spectral_norm(&self) -> Result<f64> {
        let eigs = gram_eigs(self)?;
        Ok(eigs.max().sqrt())
    }

    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<C64> {
        nalgebra::DMatrix::from_fn(self.dim, self.dim, |i, j| self[(i, j)])
    }

    pub fn from_nalgebra(m: &nalgebra::DMatrix<C64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "matrix must be square");
        Self::from_fn(m.nrows(), |i, j| m[(i, j)])
    }
}

impl fmt::Debug for ComplexMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMat({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{:>10.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for ComplexMat {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl<'a> Mul<&'a ComplexMat> for &'a ComplexMat {
    type Output = ComplexMat;
    fn mul(self, rhs: &'a ComplexMat) -> ComplexMat {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = ComplexMat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let rrow = &rhs.data[k * n..(k + 1) * n];
                let orow = &mut out.data[i * n..(i + 1) * n];
                for (o, &b) in orow.iter_mut().zip(rrow) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

impl<'a> Add<&'a ComplexMat> for &'a ComplexMat {
    type Output = ComplexMat;
    fn add(self, rhs: &'a ComplexMat) -> ComplexMat {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMat { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl<'a> Sub<&'a ComplexMat> for &'a ComplexMat {
    type Output = ComplexMat;
    fn sub(self, rhs: &'a ComplexMat) -> ComplexMat {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMat { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

/// Determinant by LU with partial pivoting. Singular input gives exactly zero.
pub fn det(m: &ComplexMat) -> C64 {
    let n = m.dim;
    if n == 0 {
        return C64::new(1.0, 0.0);
    }
    let mut a = m.data.clone();
    let mut det = C64::new(1.0, 0.0);
    for col in 0..n {
        let (piv, pmax) =
            (col..n)
                .map(|r| (r, a[r * n + col].norm()))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmax == 0.0 {
            return C64::new(0.0, 0.0);
        }
        if piv != col {
            for j in 0..n {
                a.swap(piv * n + j, col * n + j);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det *= p;
        let inv = p.inv();
        for r in (col + 1)..n {
            let factor = a[r * n + col] * inv;
            if factor == C64::new(0.0, 0.0) {
                continue;
            }
            for j in (col + 1)..n {
                let v = a[col * n + j];
                a[r * n + j] -= factor * v;
            }
        }
    }
    det
}

/// Eigenvalues of the Hermitian matrix `h`, ascending, by cyclic complex Jacobi
/// rotations. Only the upper triangle is trusted; the input is symmetrised first.
pub fn hermitian_eigs(h: &ComplexMat) -> Result<Vec<f64>> {
    const MAX_SWEEPS: usize = 100;
    let n = h.dim;
    let mut a =
        ComplexMat::from_fn(
            n,
            |i, j| {
                if i == j {
                    C64::new(h[(i, i)].re, 0.0)
                } else {
                    (h[(i, j)] + h[(j, i)].conj()) * 0.5
                }
            },
        );
    let scale = a.frobenius_norm();
    if scale == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let off_norm = |a: &ComplexMat| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += a[(i, j)].norm_sqr();
            }
        }
        s.sqrt()
    };
    let mut sweeps = 0;
    while off_norm(&a) > 1e-15 * scale {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= 1e-300 || r < 1e-18 * scale {
                    continue;
                }
                let phase = apq / r;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // J = diag(1, conj(phase)) * [[c, s], [-s, c]]
                let j_pp = C64::new(c, 0.0);
                let j_pq = C64::new(s, 0.0);
                let j_qp = phase.conj() * (-s);
                let j_qq = phase.conj() * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * j_pp + akq * j_qp;
                    a[(k, q)] = akp * j_pq + akq * j_qq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = j_pp.conj() * apk + j_qp.conj() * aqk;
                    a[(q, k)] = j_pq.conj() * apk + j_qq.conj() * aqk;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    eigs.sort_by(|x, y| x.total_cmp(y));
    Ok(eigs)
}

/// Sorted nonnegative eigenvalues `a_j^2` of a Gram matrix `A A^*`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HermSpectrum {
    eigs: Vec<f64>,
}

impl HermSpectrum {
    /// Validates and sorts. Values in `(-1e-12, 0)` are clamped to zero.
    pub fn new(mut eigs: Vec<f64>) -> Result<Self> {
        if eigs.is_empty() {
            return Err(Error::InvalidParameter("empty spectrum".into()));
        }
        for e in eigs.iter_mut() {
            if !e.is_finite() {
                return Err(Error::InvalidParameter(format!("non-finite eigenvalue {e}")));
            }
            if *e < 0.0 {
                if *e > -CLAMP_TOL {
                    *e = 0.0;
                } else {
                    return Err(Error::NegativeEigenvalue { value: *e });
                }
            }
        }
        eigs.sort_by(|x, y| x.total_cmp(y));
        Ok(Self { eigs })
    }

    pub fn dim(&self) -> usize {
        self.eigs.len()
    }

    pub fn eigs(&self) -> &[f64] {
        &self.eigs
    }

    pub fn min(&self) -> f64 {
        self.eigs[0]
    }

    pub fn max(&self) -> f64 {
        self.eigs[self.eigs.len() - 1]
    }

    /// Spectrum divided by `s` (used to normalise `|z|^2` to one).
    pub fn scaled(&self, s: f64) -> Self {
        Self { eigs: self.eigs.iter().map(|e| e / s).collect() }
    }

    /// Smallest pairwise gap divided by the spectral scale `max(1, a_max^2)`.
    pub fn min_relative_gap(&self) -> f64 {
        let scale = self.max().max(1.0);
        self.eigs.windows(2).map(|w| (w[1] - w[0]) / scale).fold(f64::INFINITY, f64::min)
    }
}

const CLAMP_TOL: f64 = 1e-12;

/// Eigenvalues of `A A^*`, ascending and clamped at zero.
pub fn gram_eigs(a: &ComplexMat) -> Result<HermSpectrum> {
    let raw = hermitian_eigs(&a.gram())?;
    // Roundoff in the Gram product scales with its norm.
    let tol = CLAMP_TOL * raw.last().copied().unwrap_or(0.0).max(1.0);
    let clamped: Vec<f64> = raw.into_iter().map(|e| if e < 0.0 && e > -tol { 0.0 } else { e }).collect();
    HermSpectrum::new(clamped)
}

/// Eigenvalues of a general complex matrix via a complex Schur decomposition.
pub fn complex_eigenvalues(m: &ComplexMat) -> Result<Vec<C64>> {
    let n = m.dim();
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    let schur = nalgebra::Schur::try_new(m.to_nalgebra(), 1e-14, 10_000)
        .ok_or_else(|| Error::Eigensolver("Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    Ok((0..n).map(|i| t[(i, i)]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn det_of_simple_matrices() {
        assert!((det(&ComplexMat::identity(3)) - c(1.0, 0.0)).norm() < 1e-15);
        let d = ComplexMat::from_real_diag(&[2.0, 3.0]);
        assert!((det(&d) - c(6.0, 0.0)).norm() < 1e-14);
        let p = ComplexMat::from_rows(&[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]]);
        assert!((det(&p) - c(-1.0, 0.0)).norm() < 1e-15);
        let sing = ComplexMat::from_rows(&[vec![c(1.0, 1.0), c(2.0, 2.0)], vec![c(1.0, 1.0), c(2.0, 2.0)]]);
        assert_eq!(det(&sing), c(0.0, 0.0));
    }

    #[test]
    fn gram_eigs_of_diagonal() {
        let a = ComplexMat::from_diag(&[c(1.0, 0.0), c(0.0, 2.0)]);
        let s = gram_eigs(&a).unwrap();
        assert!((s.eigs()[0] - 1.0).abs() < 1e-14);
        assert!((s.eigs()[1] - 4.0).abs() < 1e-14);
        let z = gram_eigs(&ComplexMat::zeros(2)).unwrap();
        assert_eq!(z.eigs(), &[0.0, 0.0]);
    }

    #[test]
    fn spectrum_rejects_negative_values() {
        assert!(HermSpectrum::new(vec![-1e-13, 1.0]).is_ok());
        assert!(matches!(HermSpectrum::new(vec![-1e-6, 1.0]), Err(Error::NegativeEigenvalue { .. })));
    }

    #[test]
    fn complex_eigenvalues_of_triangular() {
        let m = ComplexMat::from_rows(&[vec![c(1.0, 1.0), c(5.0, 0.0)], vec![c(0.0, 0.0), c(-2.0, 0.5)]]);
        let mut ev = complex_eigenvalues(&m).unwrap();
        ev.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((ev[0] - c(-2.0, 0.5)).norm() < 1e-12);
        assert!((ev[1] - c(1.0, 1.0)).norm() < 1e-12);
    }
}
