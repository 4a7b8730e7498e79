//! Mean eigenvalue densities of Ginibre and rank-one deviation ensembles,
//! and the limiting log-potential `Phi(z) = lim (1/n) ln <|det(zI - W)|^2>`
//! of a unitarily invariant ensemble with given limiting law of `WW^*`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::{invariant_ensemble_moment, moment_pos_spectrum};
use crate::numerics::{
    adaptive_integrate_with, det, find_root_monotone, hermitian_eigs, quad_rule, AdaptiveOptions, ComplexMat,
    HermSpectrum, Poly, QuadratureRule, RuleKind, C64,
};
use crate::params;
use crate::report::VerificationReport;
use crate::sampling::{ginibre, sample};
use crate::sampling::{gue, mc_engine, mc_scalar, DensityTable, Draw, EnsembleSpec, McConfig, McEstimate, Region};

/// Allowed deviation of a law's total mass from one.
pub const MASS_TOL: f64 = 1e-10;

/// Relative accuracy requested from every integral against a law.
const LAW_REL_TOL: f64 = 1e-13;

/// Nodes of the coarse rule that sizes the absolute tolerance of an integral.
const SCALE_NODES: usize = 64;

/// Subdivision cap for integrals against a law.
const MAX_INTERVALS: usize = 4000;

/// Accepted error, relative to `int |f|`, when an integrand is too noisy to
/// reach the requested tolerance.
const NOISE_REL_TOL: f64 = 1e-9;

/// How a law is given.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LawKind {
    /// `(1/2pi) sqrt((4 - x)/x)` on `(0, 4)`.
    MarchenkoPastur,
    /// Point masses `weights[i]` at `atoms[i]`.
    Discrete { atoms: Vec<f64>, weights: Vec<f64> },
    /// Histogram: mass `masses[i]` spread uniformly over `[nodes[i], nodes[i+1]]`.
    Table { nodes: Vec<f64>, masses: Vec<f64> },
}

/// `int dw / x`, which is infinite when the law does not vanish fast enough at zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum InverseMoment {
    Finite(f64),
    Infinite,
}

/// A probability law `dw` on `[0, inf)`, the limiting spectral law of `WW^*`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralLaw {
    kind: LawKind,
    support: (f64, f64),
}

impl<'de> Deserialize<'de> for SpectralLaw {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let kind = LawKind::deserialize(d)?;
        SpectralLaw::new(kind).map_err(serde::de::Error::custom)
    }
}

pub fn mp_law() -> SpectralLaw {
    SpectralLaw { kind: LawKind::MarchenkoPastur, support: (0.0, 4.0) }
}

impl SpectralLaw {
    pub fn new(kind: LawKind) -> Result<Self> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.into()));
        let (support, mass) = match &kind {
            LawKind::MarchenkoPastur => return Ok(mp_law()),
            LawKind::Discrete { atoms, weights } => {
                if atoms.is_empty() || atoms.len() != weights.len() {
                    return bad("discrete law needs matching, nonempty atoms and weights");
                }
                if atoms.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
                    return bad("atoms must be finite and nonnegative");
                }
                if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
                    return bad("weights must be finite and nonnegative");
                }
                let lo = atoms.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = atoms.iter().copied().fold(0.0, f64::max);
                ((lo, hi), weights.iter().sum::<f64>())
            }
            LawKind::Table { nodes, masses } => {
                if nodes.len() < 2 || masses.len() + 1 != nodes.len() {
                    return bad("table law needs n + 1 nodes for n masses");
                }
                if nodes.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                    return bad("table nodes must be finite and nonnegative");
                }
                if nodes.windows(2).any(|w| !(w[1] > w[0])) {
                    return bad("table nodes must be strictly increasing");
                }
                if masses.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
                    return bad("table masses must be finite and nonnegative");
                }
                ((nodes[0], nodes[nodes.len() - 1]), masses.iter().sum::<f64>())
            }
        };
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidParameter(format!("total mass {mass} differs from 1")));
        }
        Ok(Self { kind, support })
    }

    pub fn kind(&self) -> &LawKind {
        &self.kind
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    /// `int f dw`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64> {
        match &self.kind {
            LawKind::MarchenkoPastur => {
                // x = 4 sin^2(phi/2) turns the law into (1/pi)(1 + cos phi) dphi on (0, pi).
                smooth_integral(
                    |phi| {
                        let s = (0.5 * phi).sin();
                        f(4.0 * s * s) * (1.0 + phi.cos()) / PI
                    },
                    0.0,
                    PI,
                )
            }
            LawKind::Discrete { atoms, weights } => {
                Ok(atoms.iter().zip(weights).filter(|(_, w)| **w > 0.0).map(|(&a, &w)| w * f(a)).sum())
            }
            LawKind::Table { nodes, masses } => {
                let mut total = 0.0;
                for (i, &m) in masses.iter().enumerate() {
                    if m > 0.0 {
                        let (lo, hi) = (nodes[i], nodes[i + 1]);
                        total += m / (hi - lo) * smooth_integral(&f, lo, hi)?;
                    }
                }
                Ok(total)
            }
        }
    }

    pub fn mass(&self) -> Result<f64> {
        self.integrate(|_| 1.0)
    }

    /// `m_1 = int x dw`.
    pub fn m1(&self) -> f64 {
        match &self.kind {
            LawKind::MarchenkoPastur => 1.0,
            LawKind::Discrete { atoms, weights } => atoms.iter().zip(weights).map(|(a, w)| a * w).sum(),
            LawKind::Table { nodes, masses } => {
                masses.iter().enumerate().map(|(i, m)| m * 0.5 * (nodes[i] + nodes[i + 1])).sum()
            }
        }
    }

    /// `m_{-1} = int dw / x`.
    pub fn m_minus1(&self) -> InverseMoment {
        match &self.kind {
            LawKind::MarchenkoPastur => InverseMoment::Infinite,
            LawKind::Discrete { atoms, weights } => {
                if atoms.iter().zip(weights).any(|(&a, &w)| a == 0.0 && w > 0.0) {
                    InverseMoment::Infinite
                } else {
                    InverseMoment::Finite(
                        atoms.iter().zip(weights).filter(|(_, w)| **w > 0.0).map(|(a, w)| w / a).sum(),
                    )
                }
            }
            LawKind::Table { nodes, masses } => {
                if nodes[0] == 0.0 && masses[0] > 0.0 {
                    InverseMoment::Infinite
                } else {
                    InverseMoment::Finite(
                        masses
                            .iter()
                            .enumerate()
                            .map(|(i, m)| m / (nodes[i + 1] - nodes[i]) * (nodes[i + 1] / nodes[i]).ln())
                            .sum(),
                    )
                }
            }
        }
    }
}

/// Adaptive integral whose absolute tolerance is set from a coarse estimate of
/// `int |f|`, so cancellation in the result does not shrink the tolerance.
/// Integrands with noise above the roundoff floor stop at the subdivision cap
/// and are accepted when the error estimate is still small against `int |f|`.
fn smooth_integral<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> Result<f64> {
    static RULE: OnceLock<QuadratureRule> = OnceLock::new();
    let rule = match RULE.get() {
        Some(r) => r,
        None => {
            let r = quad_rule(RuleKind::Legendre01, SCALE_NODES)?;
            RULE.get_or_init(|| r)
        }
    };
    let scale = (b - a) * rule.iter().map(|(u, w)| w * f(a + (b - a) * u).abs()).sum::<f64>();
    let opts = AdaptiveOptions {
        abs_tol: LAW_REL_TOL * scale.max(f64::MIN_POSITIVE),
        rel_tol: LAW_REL_TOL,
        max_intervals: MAX_INTERVALS,
    };
    match adaptive_integrate_with(&f, a, b, opts) {
        Ok((v, _)) => Ok(v),
        Err(Error::SubdivisionLimit { err, .. }) if err <= NOISE_REL_TOL * scale => {
            // The error only carries a modulus, so rerun to the accuracy actually reached.
            let opts = AdaptiveOptions { abs_tol: err, ..opts };
            adaptive_integrate_with(&f, a, b, opts).map(|(v, _)| v)
        }
        Err(e) => Err(e),
    }
}

/// Which of the three closed forms produced `Phi(z)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiBranch {
    /// `|z|^2 > m_1`: `ln |z|^2`.
    Outer,
    /// `1/|z|^2 >= m_{-1}`, or `z = 0`: `int ln x dw`.
    Inner,
    /// In between: `ln |z|^2 + int ln((x + t0)/(|z|^2 + t0)) dw`.
    Saddle,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiValue {
    pub value: f64,
    pub branch: PhiBranch,
    /// Root of `int dw/(x + t) = 1/(|z|^2 + t)` on the saddle branch.
    pub t0: Option<f64>,
}

pub fn phi_branch(law: &SpectralLaw, z: C64) -> PhiBranch {
    let r2 = z.norm_sqr();
    if r2 == 0.0 {
        // Limit of the saddle branch as t0 -> 0.
        PhiBranch::Inner
    } else if r2 > law.m1() {
        PhiBranch::Outer
    } else if matches!(law.m_minus1(), InverseMoment::Finite(mi) if r2 * mi <= 1.0) {
        PhiBranch::Inner
    } else {
        PhiBranch::Saddle
    }
}

/// `(|z|^2 + t) int dw/(x + t) - 1`, written so that it keeps its relative
/// accuracy as `t` grows.
fn saddle_fn(law: &SpectralLaw, r2: f64, t: f64) -> Result<f64> {
    law.integrate(|x| (r2 - x) / (x + t))
}

/// Solves the saddle equation for `t0 > 0`, working in `ln t`.
pub fn phi_t0(law: &SpectralLaw, z: C64) -> Result<f64> {
    let r2 = z.norm_sqr();
    if r2 == 0.0 {
        return Err(Error::InvalidParameter("saddle equation needs z != 0".into()));
    }
    const STEPS: usize = 80;
    let g = |s: f64| saddle_fn(law, r2, s.exp());
    let mut lo = r2.ln() - 4.0;
    let mut g_lo = g(lo)?;
    for _ in 0..STEPS {
        if g_lo > 0.0 {
            break;
        }
        lo -= 8.0;
        g_lo = g(lo)?;
    }
    let mut hi = r2.max(1.0).ln() + 4.0;
    let mut g_hi = g(hi)?;
    for _ in 0..STEPS {
        if g_hi < 0.0 {
            break;
        }
        hi += 8.0;
        g_hi = g(hi)?;
    }
    // Errors inside the closure surface as NaN and then as a failed bracket.
    let s = find_root_monotone(|s| g(s).unwrap_or(f64::NAN), lo, hi, f64::MIN_POSITIVE)?;
    Ok(s.exp())
}

pub fn fz_phi_detail(law: &SpectralLaw, z: C64) -> Result<PhiValue> {
    let r2 = z.norm_sqr();
    let branch = phi_branch(law, z);
    let (value, t0) = match branch {
        PhiBranch::Outer => (r2.ln(), None),
        PhiBranch::Inner => (law.integrate(f64::ln)?, None),
        PhiBranch::Saddle => {
            let t0 = phi_t0(law, z)?;
            let tail = law.integrate(|x| ((x - r2) / (r2 + t0)).ln_1p())?;
            (r2.ln() + tail, Some(t0))
        }
    };
    Ok(PhiValue { value, branch, t0 })
}

pub fn fz_phi(law: &SpectralLaw, z: C64) -> Result<f64> {
    fz_phi_detail(law, z).map(|p| p.value)
}

/// Where the branches of `Phi` meet, and how well they join.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiTiling {
    /// `1/m_{-1}` (zero when `m_{-1}` is infinite).
    pub inner_edge: f64,
    /// `m_1`.
    pub outer_edge: f64,
    /// `max(0, inner_edge - outer_edge)`: a band of `|z|^2` no branch covers consistently.
    pub gap: f64,
    /// `|Phi(edge+) - Phi(edge-)|` at each edge, `|z|^2` moved by a relative `delta`.
    pub inner_jump: Option<f64>,
    pub outer_jump: f64,
}

pub fn phi_tiling(law: &SpectralLaw, delta: f64) -> Result<PhiTiling> {
    let inner_edge = match law.m_minus1() {
        InverseMoment::Finite(mi) => 1.0 / mi,
        InverseMoment::Infinite => 0.0,
    };
    let outer_edge = law.m1();
    let at = |r2: f64| fz_phi(law, C64::new(r2.sqrt(), 0.0));
    let jump = |edge: f64| -> Result<f64> { Ok((at(edge * (1.0 + delta))? - at(edge * (1.0 - delta))?).abs()) };
    let inner_jump = if inner_edge > 0.0 { Some(jump(inner_edge)?) } else { None };
    Ok(PhiTiling {
        inner_edge,
        outer_edge,
        gap: (inner_edge - outer_edge).max(0.0),
        inner_jump,
        outer_jump: jump(outer_edge)?,
    })
}

/// `(1/pi) e^{-|z|^2} sum_{k<n} |z|^{2k}/k!`, the mean density of Ginibre eigenvalues.
pub fn ginibre_density(n: usize, z: C64) -> f64 {
    let r2 = z.norm_sqr();
    if r2 == 0.0 {
        return if n == 0 { 0.0 } else { 1.0 / PI };
    }
    // Each term in log space, so large |z| neither overflows nor underflows early.
    let lr = r2.ln();
    let mut log_fact = 0.0;
    let mut sum = 0.0;
    for k in 0..n {
        if k > 0 {
            log_fact += (k as f64).ln();
        }
        sum += (k as f64 * lr - r2 - log_fact).exp();
    }
    sum / PI
}

/// Ginibre density at `z` against `e^{-|z|^2}/(pi (n-1)!) <|det(zI - W)|^2>`
/// over `(n-1) x (n-1)` Ginibre `W`.
pub fn ginibre_reduction_check(n: usize, z: C64, cfg: McConfig) -> Result<VerificationReport> {
    if n < 2 {
        return Err(Error::Precondition(format!("need n >= 2, got {n}")));
    }
    let k = n - 1;
    let log_fact: f64 = (1..=k).map(|j| (j as f64).ln()).sum();
    let scale = (-z.norm_sqr() - log_fact).exp() / PI;
    let zi = ComplexMat::scalar(k, z);
    let est = mc_scalar(cfg, |rng| {
        let w = ginibre(k, rng);
        C64::new(det(&(&zi - &w)).norm_sqr() * scale, 0.0)
    })?;
    let params = params! {"n" => n, "z_re" => z.re, "z_im" => z.im};
    Ok(VerificationReport::monte_carlo("ginibre.reduction", params, &est, C64::new(ginibre_density(n, z), 0.0), 3.0))
}

/// Ensemble and parameters of a density evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum DensityModel {
    Ginibre,
    /// `G U` with `G = diag(sqrt(1 - gamma), 1, ..., 1)`.
    CueRank1 {
        gamma: f64,
    },
    /// `H + i diag(gamma, 0, ..., 0)` with `H` from GUE at inverse variance `beta`.
    GueRank1 {
        beta: f64,
        gamma: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityQuery {
    pub n: usize,
    pub model: DensityModel,
    pub z: C64,
}

impl DensityQuery {
    pub fn new(n: usize, model: DensityModel, z: C64) -> Result<Self> {
        if n == 0 || !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::InvalidParameter("need n >= 1 and finite z".into()));
        }
        match model {
            DensityModel::Ginibre => {}
            DensityModel::CueRank1 { gamma } => {
                if n < 2 || !(gamma > 0.0 && gamma < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "rank-one CUE needs n >= 2 and gamma in (0, 1), got n = {n}, gamma = {gamma}"
                    )));
                }
            }
            DensityModel::GueRank1 { beta, gamma } => {
                if n < 2 || !(beta > 0.0 && beta.is_finite() && gamma > 0.0 && gamma.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "rank-one GUE needs n >= 2, beta > 0, gamma > 0, got n = {n}, beta = {beta}, gamma = {gamma}"
                    )));
                }
            }
        }
        Ok(Self { n, model, z })
    }

    /// Mean eigenvalue density at `z`, with a Monte Carlo standard error where one is used.
    pub fn density(&self, cfg: McConfig) -> Result<(f64, f64)> {
        match self.model {
            DensityModel::Ginibre => Ok((ginibre_density(self.n, self.z), 0.0)),
            DensityModel::CueRank1 { gamma } => Ok((cue_rank1_density(self.n, gamma, self.z)?, 0.0)),
            DensityModel::GueRank1 { beta, gamma } => gue_rank1_density(self.n, beta, gamma, self.z, cfg),
        }
    }
}

/// Density of eigenvalues of `G_n U` on `1 - gamma < |z|^2 < 1`, zero elsewhere:
/// `(n-1)/(pi gamma |z|^2) (g/gamma)^{n-2} <|det(zI - G' U')|^2>` over `U(n-1)`,
/// with `g = (|z|^2 + gamma - 1)/|z|^2` and `G' = diag(sqrt(1 - g), 1, ..., 1)`.
pub fn cue_rank1_density(n: usize, gamma: f64, z: C64) -> Result<f64> {
    if n < 2 || !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidParameter(format!("need n >= 2 and gamma in (0, 1), got n = {n}, gamma = {gamma}")));
    }
    let q = z.norm_sqr();
    if q <= 1.0 - gamma || q >= 1.0 {
        return Ok(0.0);
    }
    let g = (q + gamma - 1.0) / q;
    let mut eigs = vec![1.0; n - 1];
    eigs[0] = 1.0 - g;
    let inner = moment_pos_spectrum(&HermSpectrum::new(eigs)?, z, 1)?;
    Ok((n - 1) as f64 / (PI * gamma * q) * (g / gamma).powi(n as i32 - 2) * inner)
}

/// `lim (1/n) <N_n(a, b)>` for the count of eigenvalues with `2a/n <= 1 - |z|^2 <= 2b/n`.
pub fn cue_rank1_count_limit(a: f64, b: f64, gamma: f64) -> Result<f64> {
    if !(a > 0.0 && b >= a && gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < a <= b and gamma in (0, 1), got a = {a}, b = {b}, gamma = {gamma}"
        )));
    }
    let term = |c: f64| {
        let k = (gamma - 2.0) / gamma;
        if c.is_infinite() {
            0.0
        } else if c < 1.0 {
            c.sinh() / c * (k * c).exp()
        } else {
            // Same value with the exponentials combined, so large c cannot overflow.
            (((1.0 + k) * c).exp() - ((k - 1.0) * c).exp()) / (2.0 * c)
        }
    };
    Ok(term(a) - term(b))
}

/// `(1/n) <N_n(a, b)>` at finite `n`, integrating the density over the annulus.
pub fn cue_rank1_count(n: usize, a: f64, b: f64, gamma: f64) -> Result<f64> {
    if !(a > 0.0 && b >= a) {
        return Err(Error::InvalidParameter(format!("need 0 < a <= b, got a = {a}, b = {b}")));
    }
    let lo = (1.0 - 2.0 * b / n as f64).max(1.0 - gamma);
    let hi = (1.0 - 2.0 * a / n as f64).min(1.0);
    if hi <= lo {
        return Ok(0.0);
    }
    // dA = pi d|z|^2 for a radial density.
    let f = |q: f64| cue_rank1_density(n, gamma, C64::new(q.sqrt(), 0.0)).unwrap_or(f64::NAN);
    Ok(PI * smooth_integral(f, lo, hi)? / n as f64)
}

/// Prefactor of the rank-one GUE density on the strip `0 < y < gamma`:
/// `beta^n (gamma - y)^{n-2} e^{-beta x^2/2 - beta (gamma - y) y} / (sqrt(2 pi beta) gamma^{n-1} (n-2)!)`.
pub fn gue_rank1_prefactor(n: usize, beta: f64, gamma: f64, z: C64) -> f64 {
    let (x, y) = (z.re, z.im);
    if !(y > 0.0 && y < gamma) || n < 2 {
        return 0.0;
    }
    let log_fact: f64 = (1..=(n - 2)).map(|j| (j as f64).ln()).sum();
    let log = n as f64 * beta.ln() + (n as f64 - 2.0) * (gamma - y).ln()
        - 0.5 * beta * x * x
        - beta * (gamma - y) * y
        - 0.5 * (2.0 * PI * beta).ln()
        - (n as f64 - 1.0) * gamma.ln()
        - log_fact;
    log.exp()
}

/// `<|z - h - i(gamma - y)|^2>` over scalar `h ~ N(0, 1/beta)`, the inner
/// average at `n = 2`: `x^2 + 1/beta + (2y - gamma)^2`.
pub fn gue_rank1_inner_n2(beta: f64, gamma: f64, z: C64) -> f64 {
    let d = 2.0 * z.im - gamma;
    z.re * z.re + 1.0 / beta + d * d
}

/// `|det(zI - H - i diag(gamma - y, 0, ...))|^2` for one Hermitian `H`.
fn gue_rank1_det2(h: &ComplexMat, gamma: f64, z: C64) -> f64 {
    let k = h.dim();
    let mut m = ComplexMat::scalar(k, z);
    for i in 0..k {
        for j in 0..k {
            m[(i, j)] -= h[(i, j)];
        }
    }
    m[(0, 0)] -= C64::new(0.0, gamma - z.im);
    det(&m).norm_sqr()
}

/// Inner average `<|det(zI - H - i diag(gamma - y, 0, ...))|^2>` over GUE(n-1) by Monte Carlo.
pub fn gue_rank1_inner_mc(n: usize, beta: f64, gamma: f64, z: C64, cfg: McConfig) -> Result<McEstimate> {
    if n < 2 {
        return Err(Error::Precondition(format!("need n >= 2, got {n}")));
    }
    mc_scalar(cfg, |rng| C64::new(gue_rank1_det2(&gue(n - 1, beta, rng), gamma, z), 0.0))
}

/// Density of eigenvalues of `H + i diag(gamma, 0, ...)` at `z`, with its
/// standard error. Zero off the strip `0 < y < gamma`; exact for `n = 2`.
pub fn gue_rank1_density(n: usize, beta: f64, gamma: f64, z: C64, cfg: McConfig) -> Result<(f64, f64)> {
    DensityQuery::new(n, DensityModel::GueRank1 { beta, gamma }, z)?;
    let r = gue_rank1_prefactor(n, beta, gamma, z);
    if r == 0.0 {
        return Ok((0.0, 0.0));
    }
    if n == 2 {
        return Ok((r * gue_rank1_inner_n2(beta, gamma, z), 0.0));
    }
    let est = gue_rank1_inner_mc(n, beta, gamma, z, cfg)?;
    Ok((r * est.mean.re, r * est.stderr))
}

/// Tensor Gauss rule on the strip, `(x, y, weight)`, with `|x| <= 12/sqrt(beta)`.
fn strip_rule(beta: f64, gamma: f64) -> Result<Vec<(f64, f64, f64)>> {
    const X_NODES: usize = 96;
    const Y_NODES: usize = 32;
    let half = 12.0 / beta.sqrt();
    let rx = quad_rule(RuleKind::Legendre01, X_NODES)?;
    let ry = quad_rule(RuleKind::Legendre01, Y_NODES)?;
    let mut out = Vec::with_capacity(X_NODES * Y_NODES);
    for (u, wu) in rx.iter() {
        for (v, wv) in ry.iter() {
            out.push((half * (2.0 * u - 1.0), gamma * v, 2.0 * half * gamma * wu * wv));
        }
    }
    Ok(out)
}

/// Mass of the rank-one GUE density over the strip (should equal `n`). Each
/// Monte Carlo sample integrates the prefactor times `|det|^2` for one `H`.
pub fn gue_rank1_strip_mass(n: usize, beta: f64, gamma: f64, cfg: McConfig) -> Result<McEstimate> {
    DensityQuery::new(n, DensityModel::GueRank1 { beta, gamma }, C64::new(0.0, 0.0))?;
    let rule = strip_rule(beta, gamma)?;
    let weights: Vec<f64> =
        rule.iter().map(|&(x, y, w)| w * gue_rank1_prefactor(n, beta, gamma, C64::new(x, y))).collect();
    if n == 2 {
        let v: f64 =
            rule.iter().zip(&weights).map(|(&(x, y, _), w)| w * gue_rank1_inner_n2(beta, gamma, C64::new(x, y))).sum();
        return Ok(McEstimate { mean: C64::new(v, 0.0), stderr: 0.0, samples: 0, seed: cfg.seed });
    }
    mc_scalar(cfg, |rng| {
        let h = gue(n - 1, beta, rng);
        let v: f64 =
            rule.iter().zip(&weights).map(|(&(x, y, _), w)| w * gue_rank1_det2(&h, gamma, C64::new(x, y))).sum();
        C64::new(v, 0.0)
    })
}

/// Mean of `f` over a bin. Annuli use a 64-point trapezoid in the angle
/// (exact for radial `f`) and adaptive quadrature in `|z|^2`.
pub fn bin_average<F: Fn(C64) -> f64>(region: &Region, f: F) -> Result<f64> {
    match *region {
        Region::Annulus { r_lo, r_hi } => {
            const ANGLES: usize = 64;
            let ring = |q: f64| {
                let r = q.sqrt();
                (0..ANGLES).map(|k| f(C64::from_polar(r, 2.0 * PI * k as f64 / ANGLES as f64))).sum::<f64>()
                    / ANGLES as f64
            };
            let (q_lo, q_hi) = (r_lo * r_lo, r_hi * r_hi);
            Ok(smooth_integral(ring, q_lo, q_hi)? / (q_hi - q_lo))
        }
        Region::Rect { x_lo, x_hi, y_lo, y_hi } => {
            let rule = quad_rule(RuleKind::Legendre01, 16)?;
            let mut total = 0.0;
            for (u, wu) in rule.iter() {
                for (v, wv) in rule.iter() {
                    total += wu * wv * f(C64::new(x_lo + (x_hi - x_lo) * u, y_lo + (y_hi - y_lo) * v));
                }
            }
            Ok(total)
        }
    }
}

/// One Monte Carlo report per bin: empirical density against the bin average of `f`.
pub fn density_histogram_check<F: Fn(C64) -> f64>(
    check: &str,
    table: &DensityTable,
    f: F,
    k_sigma: f64,
) -> Result<Vec<VerificationReport>> {
    table
        .bins
        .iter()
        .enumerate()
        .map(|(k, bin)| {
            let expected = bin_average(&bin.region, &f)?;
            // Sparse bins: the per-matrix variance is useless at a handful of
            // counts, so fall back to the Poisson error of the expected count.
            let area = bin.region.area();
            let poisson = (expected.max(0.0) / (area * table.samples as f64)).sqrt();
            let est = McEstimate {
                mean: C64::new(bin.density, 0.0),
                stderr: bin.stderr.max(poisson),
                samples: table.samples,
                seed: table.seed,
            };
            let (cx, cy) = bin.region.center();
            let params = params! {"bin" => k, "center_x" => cx, "center_y" => cy};
            Ok(VerificationReport::monte_carlo(check, params, &est, C64::new(expected, 0.0), k_sigma))
        })
        .collect()
}

/// Tolerance of the log-potential consistency check for Ginibre matrices.
pub const BER_TOL: f64 = 5e-2;

/// `<det(x + WW^*)>` for `W = G/sqrt(n)`, `G` Ginibre: the coefficient of
/// `x^{n-k}` is `C(n, k) n! / ((n-k)! n^k)`.
pub fn ginibre_pn(n: usize) -> Poly<f64> {
    let mut coeffs = vec![0.0; n + 1];
    // c_k = C(n,k) n!/((n-k)! n^k), built as a running product.
    let mut c = 1.0;
    for k in 0..=n {
        if k > 0 {
            let m = (n - k + 1) as f64;
            c *= m / k as f64 * m / n as f64;
        }
        coeffs[n - k] = c;
    }
    Poly::new(coeffs)
}

/// Compares `(1/n) ln <|det(zI - W)|^2>` for `W = G/sqrt(n)`, with the
/// average taken through the invariant-ensemble formula and a Monte Carlo
/// estimate of `<det(x + WW^*)>`, to `Phi(z)` of the Marchenko-Pastur law.
pub fn ber_check(n: usize, z: C64, cfg: McConfig) -> Result<VerificationReport> {
    if n < 1 {
        return Err(Error::InvalidParameter("need n >= 1".into()));
    }
    let spec = EnsembleSpec::ginibre(n)?;
    let s = 1.0 / (n as f64).sqrt();
    let zi = ComplexMat::scalar(n, z);
    let res = mc_engine(cfg, n + 2, |_, rng| {
        let w = sample(&spec, rng).scale(C64::new(s, 0.0));
        let Ok(eigs) = hermitian_eigs(&w.gram()) else {
            return Ok(Draw::Skip);
        };
        let roots: Vec<f64> = eigs.iter().map(|e| -e).collect();
        let mut out: Vec<C64> = Poly::from_roots(&roots).coeffs().iter().map(|&c| C64::new(c, 0.0)).collect();
        out.resize(n + 1, C64::new(0.0, 0.0));
        out.push(C64::new(det(&(&zi - &w)).norm_sqr().ln(), 0.0));
        Ok(Draw::Value(out))
    })?;
    let pn = Poly::new(res.mean[..=n].iter().map(|c| c.re).collect());
    let moment = invariant_ensemble_moment(&pn, z, n)?;
    let exact = invariant_ensemble_moment(&ginibre_pn(n), z, n)?;
    let lhs = moment.ln() / n as f64;
    let phi = fz_phi(&mp_law(), z)?;
    let log_average = res.mean[n + 1].re / n as f64;
    let params = params! {
        "n" => n,
        "z_re" => z.re,
        "z_im" => z.im,
        "samples" => res.samples,
        "skipped" => res.skipped,
        "closed_form_log_moment" => exact.ln() / n as f64,
        "log_average" => log_average,
        "log_average_stderr" => res.stderr[n + 1] / n as f64,
        "log_average_offset" => log_average - phi,
    };
    Ok(VerificationReport::numeric("ber", params, C64::new(lhs, 0.0), C64::new(phi, 0.0), BER_TOL).with_seed(cfg.seed))
}
