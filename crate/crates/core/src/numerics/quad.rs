use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum RuleKind {
    /// Weight 1 on `[0, 1]`.
    Legendre01,
    /// Weight `(1 - t)^alpha` on `[0, 1]`.
    Jacobi { alpha: f64 },
}

/// Gauss rule on `[0, 1]`: exact for polynomials of degree `2K - 1` against its weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    kind: RuleKind,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// `sum_k w_k f(t_k)`; works for any value type that scales by `f64`.
    pub fn integrate<V, F>(&self, mut f: F) -> V
    where
        V: super::QuadValue,
        F: FnMut(f64) -> V,
    {
        self.iter().fold(V::zero(), |acc, (t, w)| acc.add(f(t).scale(w)))
    }
}

/// Builds a `K`-node Gauss rule by the Golub-Welsch eigenvalue method.
pub fn quad_rule(kind: RuleKind, nodes: usize) -> Result<QuadratureRule> {
    if nodes == 0 {
        return Err(Error::InvalidParameter("quadrature rule needs at least one node".into()));
    }
    let alpha = match kind {
        RuleKind::Legendre01 => 0.0,
        RuleKind::Jacobi { alpha } => alpha,
    };
    if !(alpha > -1.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("Jacobi exponent must exceed -1, got {alpha}")));
    }
    // Monic three-term recurrence of P^(alpha, 0) on [-1, 1].
    let beta = 0.0;
    let ab = alpha + beta;
    let mut diag = Vec::with_capacity(nodes);
    let mut off = Vec::with_capacity(nodes);
    for k in 0..nodes {
        let kf = k as f64;
        let a = if k == 0 {
            (beta - alpha) / (ab + 2.0)
        } else {
            (beta * beta - alpha * alpha) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
        };
        diag.push(a);
        if k + 1 < nodes {
            let j = kf + 1.0;
            let s = 2.0 * j + ab;
            let b2 = 4.0 * j * (j + alpha) * (j + beta) * (j + ab) / (s * s * (s + 1.0) * (s - 1.0));
            off.push(b2.sqrt());
        }
    }
    let (x, v0) = tridiagonal_eigen(diag, off)?;
    // Total mass of (1 - t)^alpha on [0, 1].
    let mass = 1.0 / (alpha + 1.0);
    let mut pairs: Vec<(f64, f64)> = x.into_iter().zip(v0).map(|(xi, vi)| (0.5 * (xi + 1.0), mass * vi * vi)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(QuadratureRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
        kind,
    })
}

/// Eigenvalues and first eigenvector components of a symmetric tridiagonal
/// matrix by implicit QL with Wilkinson-type shifts.
fn tridiagonal_eigen(mut d: Vec<f64>, off: Vec<f64>) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = d.len();
    let mut e = off;
    e.push(0.0);
    let mut z = vec![0.0; n];
    z[0] = 1.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 100 {
                return Err(Error::NoConvergence { sweeps: iter });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let fz = z[i + 1];
                z[i + 1] = s * z[i] + c * fz;
                z[i] = c * z[i] - s * fz;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok((d, z))
}
