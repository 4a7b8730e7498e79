use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{ComplexMat, C64};

/// Random-matrix ensembles the samplers know about.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Ensemble {
    /// Haar-distributed unitary matrices.
    HaarUnitary,
    /// I.i.d. complex Gaussian entries, density proportional to `exp(-tr WW^*)`.
    Ginibre,
    /// Hermitian, density proportional to `exp(-(beta/2) tr H^2)`.
    Gue { beta: f64 },
    /// `G U` with `G = diag(sqrt(1 - gamma), 1, ..., 1)` and Haar `U`.
    CueRank1 { gamma: f64 },
    /// `H + i diag(gamma, 0, ..., 0)` with `H` from `Gue { beta }`.
    GueRank1 { beta: f64, gamma: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    kind: Ensemble,
    dim: usize,
}

impl EnsembleSpec {
    pub fn new(kind: Ensemble, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("ensemble dimension must be positive".into()));
        }
        match kind {
            Ensemble::Gue { beta } if !(beta > 0.0 && beta.is_finite()) => {
                return Err(Error::InvalidParameter(format!("GUE needs beta > 0, got {beta}")));
            }
            Ensemble::CueRank1 { gamma } if !(gamma > 0.0 && gamma < 1.0) => {
                return Err(Error::InvalidParameter(format!("rank-one CUE needs gamma in (0, 1), got {gamma}")));
            }
            Ensemble::GueRank1 { beta, gamma }
                if !(beta > 0.0 && beta.is_finite() && gamma > 0.0 && gamma.is_finite()) =>
            {
                return Err(Error::InvalidParameter(format!(
                    "rank-one GUE needs beta > 0 and gamma > 0, got beta = {beta}, gamma = {gamma}"
                )));
            }
            _ => {}
        }
        Ok(Self { kind, dim })
    }

    pub fn haar(dim: usize) -> Result<Self> {
        Self::new(Ensemble::HaarUnitary, dim)
    }

    pub fn ginibre(dim: usize) -> Result<Self> {
        Self::new(Ensemble::Ginibre, dim)
    }

    pub fn kind(&self) -> Ensemble {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Complex Gaussian with independent parts of variance `var` each.
fn complex_normal<R: Rng + ?Sized>(rng: &mut R, var: f64) -> C64 {
    let s = var.sqrt();
    let re = normal(rng) * s;
    let im = normal(rng) * s;
    C64::new(re, im)
}

pub fn ginibre<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMat {
    ComplexMat::from_fn(n, |_, _| complex_normal(rng, 0.5))
}

/// Haar unitary from the QR factorisation of a Ginibre matrix.
///
/// Gram-Schmidt produces `R` with a positive real diagonal, so no phase
/// correction is needed for `Q` to be Haar distributed. Each column is
/// orthogonalised twice to keep `Q^* Q = I` at roundoff level.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMat {
    let g = ginibre(n, rng);
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| (0..n).map(|i| g[(i, j)]).collect()).collect();
    for j in 0..n {
        for _pass in 0..2 {
            for k in 0..j {
                let (done, rest) = cols.split_at_mut(j);
                let q = &done[k];
                let v = &mut rest[0];
                let proj: C64 = q.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= proj * qi;
                }
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in cols[j].iter_mut() {
            *z /= norm;
        }
    }
    ComplexMat::from_fn(n, |i, j| cols[j][i])
}

pub fn gue<R: Rng + ?Sized>(n: usize, beta: f64, rng: &mut R) -> ComplexMat {
    let mut h = ComplexMat::zeros(n);
    let diag_sd = (1.0 / beta).sqrt();
    for i in 0..n {
        h[(i, i)] = C64::new(normal(rng) * diag_sd, 0.0);
        for j in (i + 1)..n {
            let z = complex_normal(rng, 0.5 / beta);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h
}

/// Draws one matrix from `spec`.
pub fn sample<R: Rng + ?Sized>(spec: &EnsembleSpec, rng: &mut R) -> ComplexMat {
    let n = spec.dim;
    match spec.kind {
        Ensemble::HaarUnitary => haar_unitary(n, rng),
        Ensemble::Ginibre => ginibre(n, rng),
        Ensemble::Gue { beta } => gue(n, beta, rng),
        Ensemble::CueRank1 { gamma } => {
            let mut u = haar_unitary(n, rng);
            let s = (1.0 - gamma).sqrt();
            for j in 0..n {
                u[(0, j)] *= s;
            }
            u
        }
        Ensemble::GueRank1 { beta, gamma } => {
            let mut h = gue(n, beta, rng);
            h[(0, 0)] += C64::new(0.0, gamma);
            h
        }
    }
}
