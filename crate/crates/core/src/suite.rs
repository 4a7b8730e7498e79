//! Verification suites: fixed batteries of reports over every module, run
//! by the command-line driver and the acceptance tests. Each suite is a
//! deterministic function of its [`SuiteConfig`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::besselint::{fn_general, fn_rank1, fn_rank1_quadrature, group_integrand, BesselSpec};
use crate::betadet::{lemma1_suite, prop1_suite, selberg_mass_suite};
use crate::densities::{
    ber_check, cue_rank1_count, cue_rank1_count_limit, cue_rank1_density, density_histogram_check, fz_phi,
    ginibre_density, ginibre_reduction_check, gue_rank1_inner_mc, gue_rank1_inner_n2, gue_rank1_strip_mass, mp_law,
};
use crate::error::{Error, Result};
use crate::moments::{cue_moment, moment_neg, moment_neg_spectrum, moment_pos, moment_pos_z, MomentQuery, Sign};
use crate::numerics::{gram_eigs, ComplexMat, HermSpectrum, C64};
use crate::params;
use crate::regdet::{
    f_eps, f_eps_asymptotic, ik_exact, ik_quadrature, r_eps, reg_integrand, theorem2a_density_ratio, EpsGrid, RegQuery,
};
use crate::report::VerificationReport;
use crate::sampling::{eig_histogram, ginibre, haar_unitary, mc_average, Binning, Ensemble, EnsembleSpec, McConfig};

/// Sample counts and seed shared by all suites.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Samples per Haar-average check.
    pub samples: u64,
    /// Matrices per eigenvalue histogram.
    pub hist_samples: u64,
    /// Samples for the rank-one GUE strip mass (each one is a full 2D quadrature).
    pub strip_samples: u64,
    /// Samples per log-potential consistency check.
    pub ber_samples: u64,
    pub shards: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            samples: 200_000,
            hist_samples: 100_000,
            strip_samples: 20_000,
            ber_samples: 10_000,
            shards: McConfig::new(2, 0).shards,
        }
    }
}

impl SuiteConfig {
    /// Monte Carlo configuration for the `item`-th check of a suite. Every
    /// check gets its own seed so reordering never changes a result.
    pub fn mc(&self, samples: u64, item: u64) -> McConfig {
        McConfig::new(samples, self.seed.wrapping_mul(1_000_003).wrapping_add(item)).with_shards(self.shards)
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ salt.rotate_left(17))
    }
}

/// Suite names in run order.
pub const SUITES: [&str; 7] = ["exact", "thm1", "thm2a", "ik", "lemma5", "densities", "phi"];

pub fn run_suite(name: &str, cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    match name {
        "exact" => Ok(exact_suite(cfg)),
        "thm1" => thm1_suite(cfg),
        "thm2a" => thm2a_suite(cfg),
        "ik" => ik_suite(),
        "lemma5" => lemma5_suite(cfg),
        "densities" => densities_suite(cfg),
        "phi" => phi_suite(cfg),
        _ => Err(Error::InvalidParameter(format!("unknown suite {name:?}; known: {}", SUITES.join(", ")))),
    }
}

/// Every suite in order, as `(name, reports)`.
pub fn run_all(cfg: &SuiteConfig) -> Result<Vec<(String, Vec<VerificationReport>)>> {
    SUITES.iter().map(|s| Ok((s.to_string(), run_suite(s, cfg)?))).collect()
}

/// Schur-measure identities for `|lambda| <= 6`, `m <= 3`, `n <= 10`, unit
/// masses, and the Beta-determinant proposition on integer grids.
pub fn exact_suite(cfg: &SuiteConfig) -> Vec<VerificationReport> {
    let mut out = lemma1_suite(6, 3, 10);
    out.extend(selberg_mass_suite(3, 10));
    out.extend(prop1_suite(&[1, 2, 3, 4], 15, 50, cfg.seed));
    out
}

fn random_mat(n: usize, scale: f64, rng: &mut ChaCha8Rng) -> ComplexMat {
    ginibre(n, rng).scale(C64::new(scale, 0.0))
}

/// `G` rescaled so its spectral norm is `ratio` times the smallest singular value of `c`.
fn contraction_of(c: &ComplexMat, ratio: f64, rng: &mut ChaCha8Rng) -> Result<ComplexMat> {
    let g = ginibre(c.dim(), rng);
    let s_min = gram_eigs(c)?.min().sqrt();
    Ok(g.scale(C64::new(ratio * s_min / g.spectral_norm()?, 0.0)))
}

/// Positive and negative moments of random `(A, B, C, D)` against Haar
/// averages. `n` and `m` cycle through `2..=5` and `1..=2` when not given.
pub fn thm1_cases(
    n: Option<usize>,
    m: Option<usize>,
    cases: usize,
    cfg: &SuiteConfig,
) -> Result<Vec<VerificationReport>> {
    let mut rng = cfg.rng(1);
    let mut out = Vec::new();
    for case in 0..cases {
        let n = n.unwrap_or(2 + case % 4);
        let m = m.unwrap_or(if case % 8 >= 4 && n >= 4 { 2 } else { 1 });
        let (a, b, c, d) = (
            random_mat(n, 0.6, &mut rng),
            random_mat(n, 0.6, &mut rng),
            random_mat(n, 0.6, &mut rng),
            random_mat(n, 0.6, &mut rng),
        );
        let q = MomentQuery::new(a, b, c, d, m, Sign::Positive)?;
        let spec = EnsembleSpec::haar(n)?;
        let est = mc_average(|u| q.integrand(u), &spec, cfg.mc(cfg.samples, 2 * case as u64))?;
        let params = params! {"case" => case, "n" => n, "m" => m, "sign" => "positive"};
        out.push(VerificationReport::monte_carlo("thm1.mc", params, &est, moment_pos(&q)?, 4.0));

        let eye = ComplexMat::identity(n);
        let c = &eye + &random_mat(n, 0.3, &mut rng);
        let d = &eye + &random_mat(n, 0.3, &mut rng);
        let a = contraction_of(&c, 0.5, &mut rng)?;
        let b = contraction_of(&d, 0.5, &mut rng)?;
        let q = MomentQuery::new(a, b, c, d, m, Sign::Negative)?;
        let est = mc_average(|u| q.integrand(u), &spec, cfg.mc(cfg.samples, 2 * case as u64 + 1))?;
        let params = params! {"case" => case, "n" => n, "m" => m, "sign" => "negative"};
        out.push(VerificationReport::monte_carlo("thm1.mc", params, &est, moment_neg(&q)?, 4.0));
    }
    Ok(out)
}

/// Twenty random moment cases and the circular ensemble's closed form.
pub fn thm1_suite(cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    let mut out = thm1_cases(None, None, 20, cfg)?;
    for n in 1..=6 {
        for z in [C64::new(0.7, 0.4), C64::new(1.1, -0.3)] {
            let v = moment_pos_z(&ComplexMat::identity(n), z, 1)?;
            let params = params! {"n" => n, "z_re" => z.re, "z_im" => z.im};
            out.push(VerificationReport::numeric_rel(
                "thm1.cue",
                params,
                C64::new(v, 0.0),
                C64::new(cue_moment(n, z), 0.0),
                1e-12,
            ));
        }
    }
    Ok(out)
}

/// Random spectrum with `n / 2` eigenvalues below `|z|^2` and the rest above.
fn straddling_case(n: usize, rng: &mut ChaCha8Rng) -> (HermSpectrum, C64) {
    let z = C64::from_polar(rng.random_range(0.7..1.3), rng.random_range(0.0..std::f64::consts::TAU));
    let r2 = z.norm_sqr();
    loop {
        let eigs = (0..n)
            .map(|i| if i < n / 2 { r2 * rng.random_range(0.15..0.8) } else { r2 * rng.random_range(1.25..2.5) })
            .collect();
        let s = HermSpectrum::new(eigs).expect("positive");
        if s.min_relative_gap() > 0.02 {
            return (s, z);
        }
    }
}

/// Regularised inverse determinants of random straddling spectra against
/// Haar averages, for every `eps` in `eps_grid`.
pub fn thm2a_cases(n: usize, eps_grid: &[f64], cases: usize, cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need n >= 2 for a straddling spectrum, got {n}")));
    }
    let mut rng = cfg.rng(2);
    let mut out = Vec::new();
    let spec = EnsembleSpec::haar(n)?;
    for case in 0..cases {
        let (s, z) = straddling_case(n, &mut rng);
        let root: Vec<C64> = s.eigs().iter().map(|e| C64::new(e.sqrt(), 0.0)).collect();
        let a = &ComplexMat::from_diag(&root) * &haar_unitary(n, &mut rng);
        for (j, &eps) in eps_grid.iter().enumerate() {
            let exact = r_eps(&RegQuery::new(s.clone(), z, eps)?)?;
            let est = mc_average(
                |u| C64::new(reg_integrand(&a, z, eps, u), 0.0),
                &spec,
                cfg.mc(cfg.samples, (case * eps_grid.len() + j) as u64),
            )?;
            let params =
                params! {"case" => case, "eigs" => s.eigs().to_vec(), "z_re" => z.re, "z_im" => z.im, "eps" => eps};
            out.push(VerificationReport::monte_carlo("thm2a.mc", params, &est, C64::new(exact, 0.0), 4.0));
        }
    }
    Ok(out)
}

/// Ten `n = 4` Haar comparisons, slopes against the limiting density, and
/// `eps -> 0` limits off the spectrum.
pub fn thm2a_suite(cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    let mut out = thm2a_cases(4, &[0.05, 0.2], 10, cfg)?;
    let one = C64::new(1.0, 0.0);
    let tilted = C64::new(1.2, -0.9);
    let t2 = tilted.norm_sqr();
    let slopes: [(Vec<f64>, C64); 5] = [
        (vec![0.5, 2.0], one),
        (vec![0.3, 1.4], C64::new(0.0, 0.8)),
        (vec![0.2, 0.7, 1.6], one),
        (vec![0.3 * t2, 0.8 * t2, 1.7 * t2], tilted),
        (vec![0.4, 1.3, 2.2], C64::new(0.6, 0.8)),
    ];
    for (eigs, z) in slopes {
        out.push(theorem2a_density_ratio(&HermSpectrum::new(eigs)?, z, EpsGrid::default())?);
    }
    const LIMIT_EPS: f64 = 1e-8;
    let limits: [(Vec<f64>, C64); 4] = [
        (vec![2.0, 3.5, 5.0], C64::new(0.6, 0.8)),
        (vec![0.1, 0.3, 0.55, 0.8], C64::new(0.6, 0.8)),
        (vec![1.5, 2.5], C64::new(0.6, 0.8)),
        (vec![4.0, 9.0], one),
    ];
    for (eigs, z) in limits {
        let s = HermSpectrum::new(eigs)?;
        let n = s.dim();
        let r = r_eps(&RegQuery::new(s.clone(), z, LIMIT_EPS)?)?;
        let lim = z.norm_sqr().powi(n as i32) * moment_neg_spectrum(&s, z, 1)?;
        let params = params! {"eigs" => s.eigs().to_vec(), "z_re" => z.re, "z_im" => z.im, "eps" => LIMIT_EPS};
        out.push(VerificationReport::numeric("thm2a.limit", params, C64::new(r, 0.0), C64::new(lim, 0.0), 1e-6));
    }
    Ok(out)
}

/// Closed-form `I_k(eps^2, a^2)` against quadrature on a grid, and the
/// small-`eps` form of `F_eps` at `eps = 1e-5`.
pub fn ik_suite() -> Result<Vec<VerificationReport>> {
    let mut out = Vec::new();
    for k in 0..=12 {
        for ia in 0..=20 {
            let a2 = 0.2 * ia as f64;
            for ie in 0..=6 {
                let eps2 = 10f64.powi(-2 * ie);
                let v = ik_exact(k, eps2, a2)?.value;
                let q = ik_quadrature(k, eps2, a2)?;
                let params = params! {"k" => k, "a2" => a2, "eps2" => eps2};
                out.push(VerificationReport::numeric_rel(
                    "ik.quadrature",
                    params,
                    C64::new(v, 0.0),
                    C64::new(q, 0.0),
                    1e-8,
                ));
            }
        }
    }
    let eps2 = 1e-10;
    for a2 in [0.0, 0.3, 0.5, 0.99, 1.0, 1.01, 2.0, 4.0] {
        for n in 2..=8 {
            let exact = f_eps(a2, eps2, n)?;
            let asym = f_eps_asymptotic(a2, eps2, n)?;
            let params = params! {"n" => n, "a2" => a2, "eps2" => eps2};
            out.push(VerificationReport::numeric_rel(
                "ik.asymptotic",
                params,
                C64::new(asym, 0.0),
                C64::new(exact, 0.0),
                1e-2,
            ));
        }
    }
    Ok(out)
}

/// Rank-one group integral against Haar averages, series against
/// quadrature, and `F_n(0) = 1`.
pub fn lemma5_suite(cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    let mut out = Vec::new();
    let n = 4;
    let spec = EnsembleSpec::haar(n)?;
    for (i, z2) in [C64::new(0.6, 0.3), C64::new(-1.2, 0.5), C64::new(2.0, 0.0)].into_iter().enumerate() {
        let mut diag = vec![C64::new(0.0, 0.0); n];
        diag[0] = z2;
        let a = ComplexMat::from_diag(&diag);
        let b = ComplexMat::identity(n);
        let est = mc_average(|u| group_integrand(&a, &b, u), &spec, cfg.mc(cfg.samples, i as u64))?;
        let params = params! {"n" => n, "z2_re" => z2.re, "z2_im" => z2.im};
        out.push(VerificationReport::monte_carlo("lemma5.mc", params, &est, fn_rank1(z2, n)?, 4.0));
    }
    for n in [2, 4, 7] {
        for z2 in [C64::new(0.5, 0.0), C64::new(-3.0, 1.0), C64::new(8.0, -6.0)] {
            let params = params! {"n" => n, "z2_re" => z2.re, "z2_im" => z2.im};
            let s = fn_rank1(z2, n)?;
            out.push(VerificationReport::numeric(
                "lemma5.series",
                params,
                fn_rank1_quadrature(z2, n)?,
                s,
                1e-10 * s.norm().max(1.0),
            ));
        }
    }
    let zero = fn_general(&BesselSpec::new(vec![], 4)?)?;
    out.push(VerificationReport::numeric("lemma5.zero", params! {"n" => 4}, zero, C64::new(1.0, 0.0), 0.0));
    let zero1 = fn_rank1(C64::new(0.0, 0.0), 4)?;
    out.push(VerificationReport::numeric(
        "lemma5.zero",
        params! {"n" => 4, "form" => "rank1"},
        zero1,
        C64::new(1.0, 0.0),
        0.0,
    ));
    Ok(out)
}

/// Eigenvalue histograms against the Ginibre and rank-one CUE densities, the
/// dimensional reduction, rank-one GUE masses and the annulus count.
pub fn densities_suite(cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    let mut out = Vec::new();
    for n in 1..=4 {
        let table = eig_histogram(
            &EnsembleSpec::ginibre(n)?,
            Binning::Radial { r_max: 2.5, bins: 12 },
            cfg.mc(cfg.hist_samples, 10 + n as u64),
        )?;
        let mut reports = density_histogram_check("ginibre.hist", &table, |z| ginibre_density(n, z), 4.0)?;
        for r in reports.iter_mut() {
            r.params.insert("n".into(), n.into());
        }
        out.extend(reports);
    }
    out.push(ginibre_reduction_check(2, C64::new(0.0, 0.0), cfg.mc(cfg.samples, 20))?);
    out.push(ginibre_reduction_check(3, C64::new(1.0, 0.0), cfg.mc(cfg.samples, 21))?);

    let (n, gamma) = (8, 0.5);
    let table = eig_histogram(
        &EnsembleSpec::new(Ensemble::CueRank1 { gamma }, n)?,
        Binning::RadialSq { lo: 1.0 - gamma, hi: 1.0, bins: 10 },
        cfg.mc(cfg.hist_samples, 30),
    )?;
    // A failed evaluation would only come from invalid parameters, fixed above.
    out.extend(density_histogram_check(
        "cue.hist",
        &table,
        |z| cue_rank1_density(n, gamma, z).unwrap_or(f64::NAN),
        4.0,
    )?);

    let (beta, gamma) = (1.0, 0.7);
    for (i, z) in [C64::new(0.3, 0.2), C64::new(-0.8, 0.5)].into_iter().enumerate() {
        let est = gue_rank1_inner_mc(2, beta, gamma, z, cfg.mc(cfg.samples, 40 + i as u64))?;
        let params = params! {"n" => 2, "beta" => beta, "gamma" => gamma, "z_re" => z.re, "z_im" => z.im};
        out.push(VerificationReport::monte_carlo(
            "gue.inner",
            params,
            &est,
            C64::new(gue_rank1_inner_n2(beta, gamma, z), 0.0),
            4.0,
        ));
    }
    let m2 = gue_rank1_strip_mass(2, beta, gamma, cfg.mc(2, 42))?;
    let params = params! {"n" => 2, "beta" => beta, "gamma" => gamma};
    out.push(VerificationReport::numeric("gue.strip_mass", params, m2.mean, C64::new(2.0, 0.0), 1e-9));
    let m3 = gue_rank1_strip_mass(3, beta, gamma, cfg.mc(cfg.strip_samples, 43))?;
    let params = params! {"n" => 3, "beta" => beta, "gamma" => gamma};
    out.push(VerificationReport::monte_carlo("gue.strip_mass", params, &m3, C64::new(3.0, 0.0), 4.0));

    let (a, b, gamma) = (0.5, 1.5, 0.5);
    let limit = cue_rank1_count_limit(a, b, gamma)?;
    let finite = cue_rank1_count(200, a, b, gamma)?;
    let params = params! {"n" => 200, "a" => a, "b" => b, "gamma" => gamma};
    out.push(VerificationReport::numeric_rel("cue.count", params, C64::new(finite, 0.0), C64::new(limit, 0.0), 0.02));
    Ok(out)
}

/// Marchenko-Pastur log-potential inside and outside the unit disk, and its
/// consistency with Ginibre spectral determinants at `n = 24`.
pub fn phi_suite(cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    let law = mp_law();
    let mut out = Vec::new();
    for i in 1..=10 {
        let r = 0.09 * i as f64;
        let z = C64::from_polar(r, 0.5 * i as f64);
        let params = params! {"r" => r, "branch" => "inside"};
        out.push(VerificationReport::numeric(
            "phi.mp",
            params,
            C64::new(fz_phi(&law, z)?, 0.0),
            C64::new(r * r - 1.0, 0.0),
            1e-6,
        ));
    }
    for r in [1.5, 2.0, 3.0] {
        let params = params! {"r" => r, "branch" => "outside"};
        out.push(VerificationReport::numeric(
            "phi.mp",
            params,
            C64::new(fz_phi(&law, C64::new(0.0, r))?, 0.0),
            C64::new((r * r).ln(), 0.0),
            0.0,
        ));
    }
    for (i, r) in [0.3, 0.6, 0.9].into_iter().enumerate() {
        out.push(ber_check(24, C64::new(r, 0.0), cfg.mc(cfg.ber_samples, 50 + i as u64))?);
    }
    Ok(out)
}
