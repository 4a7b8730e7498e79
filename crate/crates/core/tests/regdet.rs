use haarmoments::moments::moment_neg_spectrum;
use haarmoments::numerics::{adaptive_integrate_with, gram_eigs, AdaptiveOptions, ComplexMat, HermSpectrum, C64};
use haarmoments::regdet::{
    asym_coeffs, density_limit, f_eps, f_eps_asymptotic, ik_exact, r_eps, r_eps_kernel, r_eps_with, reg_integrand,
    slope_fit, theorem2a_density_ratio, EpsGrid, RegQuery, SumMode,
};
use haarmoments::sampling::{mc_average, EnsembleSpec, McConfig};
use haarmoments::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// I_k by adaptive quadrature after t - a^2 + eps^2 = sqrt(d) sinh v, which
/// flattens the near-singular peak at t = a^2.
fn quad_ik(k: usize, e2: f64, a2: f64) -> f64 {
    let opts = AdaptiveOptions { abs_tol: 0.0, rel_tol: 1e-13, ..AdaptiveOptions::default() };
    let c0 = a2 - e2;
    let d = 4.0 * e2 * a2;
    if d == 0.0 {
        // (1-t)^k / (t + eps^2) with t + eps^2 = e^w.
        let f = |w: f64| (1.0 + e2 - w.exp()).powi(k as i32);
        return adaptive_integrate_with(f, e2.ln(), (1.0 + e2).ln(), opts).unwrap().0;
    }
    let r = d.sqrt();
    let f = |v: f64| (1.0 - c0 - r * v.sinh()).powi(k as i32);
    adaptive_integrate_with(f, (-c0 / r).asinh(), ((1.0 - c0) / r).asinh(), opts).unwrap().0
}

fn spec(v: &[f64]) -> HermSpectrum {
    HermSpectrum::new(v.to_vec()).unwrap()
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

#[test]
fn ik_matches_quadrature_on_grid() {
    let mut worst = 0.0f64;
    for k in 0..=12 {
        for ia in 0..=20 {
            let a2 = 4.0 * ia as f64 / 20.0;
            for ie in 0..=6 {
                let e2 = 10f64.powi(-2 * ie);
                let v = ik_exact(k, e2, a2).unwrap().value;
                let q = quad_ik(k, e2, a2);
                worst = worst.max(((v - q) / q).abs());
            }
        }
    }
    assert!(worst <= 1e-8, "worst relative error {worst:e}");
}

#[test]
fn i0_at_unit_a_is_log_inverse_eps() {
    for &e in &[1e-3, 1e-5, 1e-7] {
        let v = ik_exact(0, e * e, 1.0).unwrap().value;
        assert!((v - (1.0 / e).ln()).abs() < e, "eps = {e}");
    }
}

#[test]
fn leading_log_coefficient() {
    // I_2 at a^2 = 0.5 grows like (1 - a^2)^2 ln(1/eps^2).
    let (a2, k) = (0.5, 2);
    let i = |e: f64| ik_exact(k, e * e, a2).unwrap().value;
    let slope = (i(1e-4) - i(1e-3)) / (2.0 * 10f64.ln());
    assert!((slope / 0.25 - 1.0).abs() < 1e-2);
    // With the constant and polynomial parts the small-eps form is O(eps) accurate.
    for &a2 in &[0.0, 0.3, 0.5, 0.99, 1.0, 1.01, 2.0, 4.0] {
        for n in 2..=8 {
            let e2 = 1e-10;
            let exact = f_eps(a2, e2, n).unwrap();
            let asym = f_eps_asymptotic(a2, e2, n).unwrap();
            assert!((exact - asym).abs() <= 1e-3 * exact.abs().max(1.0), "a2={a2} n={n}: {exact} {asym}");
        }
    }
}

#[test]
fn f_eps_special_cases() {
    // a^2 = 0: (n-1) int (1-t)^{n-2} / (t + eps^2).
    for n in 2..=6 {
        let e2 = 0.01;
        let want = (n - 1) as f64 * quad_ik(n - 2, e2, 0.0);
        assert!((f_eps(0.0, e2, n).unwrap() - want).abs() < 1e-10 * want);
    }
    // n = 2 is the logarithm itself.
    let (e2, a2) = (0.04f64, 0.7f64);
    let x = 1.0 - a2 + e2;
    let want = ((x + (x * x + 4.0 * e2 * a2).sqrt()) / (2.0 * e2)).ln();
    assert!((f_eps(a2, e2, 2).unwrap() - want).abs() < 1e-14);
    // Large eps: integrand tends to 1/eps^2.
    let e2 = 1e8;
    assert!((f_eps(1.5, e2, 5).unwrap() * e2 - 1.0).abs() < 1e-6);
    assert!(matches!(f_eps(0.5, 0.1, 1), Err(Error::Precondition(_))));
}

#[test]
fn two_by_two_upper_limit() {
    // AA^* = diag(4, 9) sits above |z|^2 = 1: the limit is int_0^1 dt / ((4-t)(9-t)).
    let s = spec(&[4.0, 9.0]);
    let want = (32.0f64 / 27.0).ln() / 5.0;
    let r = r_eps(&RegQuery::new(s.clone(), one(), 1e-7).unwrap()).unwrap();
    assert!((r - want).abs() < 1e-10);
    let thm1 = moment_neg_spectrum(&s, one(), 1).unwrap();
    assert!((thm1 - want).abs() < 1e-12);
    let c = asym_coeffs(&s, one()).unwrap();
    assert!(c.alpha.abs() < 1e-15 && (c.beta - want).abs() < 1e-12);
}

#[test]
fn limits_reproduce_inverse_moments() {
    // Strictly above or below |z|^2: R_{z,eps} -> |z|^{2n} int |det(z - AU)|^{-2} dU.
    let z = C64::new(0.6, 0.8);
    for eigs in [vec![2.0, 3.5, 5.0], vec![0.1, 0.3, 0.55, 0.8], vec![1.5, 2.5]] {
        let s = spec(&eigs);
        let n = eigs.len();
        let lim = z.norm_sqr().powi(n as i32) * moment_neg_spectrum(&s, z, 1).unwrap();
        let c = asym_coeffs(&s, z).unwrap();
        assert!(c.alpha.abs() < 1e-12);
        assert!((c.beta - lim).abs() < 1e-10 * lim);
        let mut ratios = Vec::new();
        for i in 2..=6 {
            let e = 10f64.powi(-i);
            let r = r_eps(&RegQuery::new(s.clone(), z, e).unwrap()).unwrap();
            ratios.push((r - lim).abs() / e);
        }
        // Remainder is at most linear in eps with a bounded constant.
        let c_max = ratios.iter().cloned().fold(0.0, f64::max);
        assert!(c_max < 10.0, "{ratios:?}");
        assert!((r_eps(&RegQuery::new(s, z, 1e-6).unwrap()).unwrap() - lim).abs() < 1e-6 * lim);
    }
}

#[test]
fn density_slope_two_by_two() {
    let s = spec(&[0.5, 2.0]);
    let c = asym_coeffs(&s, one()).unwrap();
    assert!((c.alpha - 2.0 / 3.0).abs() < 1e-15);
    let report = theorem2a_density_ratio(&s, one(), EpsGrid::default()).unwrap();
    assert!(report.pass, "{}", report.summary());
    let fit = slope_fit(&s, one(), EpsGrid::default()).unwrap();
    assert!((fit.slope - 2.0 / 3.0).abs() < 1e-2 * 2.0 / 3.0);
    assert!((fit.intercept - c.beta).abs() < 1e-4);
}

#[test]
fn density_slope_three_eigenvalues_scaled_z() {
    // |z| != 1 checks the unnormalised form of the limit against the fit.
    let z = C64::new(1.2, -0.9);
    let r2 = z.norm_sqr();
    let s = spec(&[0.3 * r2, 0.8 * r2, 1.7 * r2]);
    let report = theorem2a_density_ratio(&s, z, EpsGrid::default()).unwrap();
    assert!(report.pass, "{}", report.summary());
    let c = asym_coeffs(&s, z).unwrap();
    assert!((c.alpha - density_limit(&s, z).unwrap()).abs() < 1e-12);
    let fit = slope_fit(&s, z, EpsGrid::default()).unwrap();
    assert!((fit.intercept - c.beta).abs() < 1e-4);
}

#[test]
fn non_straddling_slope_vanishes() {
    let report = theorem2a_density_ratio(&spec(&[1.5, 2.0, 4.0]), one(), EpsGrid::default()).unwrap();
    assert!(report.pass);
    let report = theorem2a_density_ratio(&spec(&[0.2, 0.5]), C64::new(0.0, 2.0), EpsGrid::default()).unwrap();
    assert!(report.pass);
}

#[test]
fn eigenvalue_at_unit_circle_constant_term() {
    // n = 2 with a^2 = 1 exactly: the log coefficient takes the half weight and
    // the constant term contributed by that eigenvalue is zero.
    let s = spec(&[1.0, 3.0]);
    let c = asym_coeffs(&s, one()).unwrap();
    assert!((c.alpha - 0.25).abs() < 1e-15);
    let fit = slope_fit(&s, one(), EpsGrid::default()).unwrap();
    assert!((fit.slope - c.alpha).abs() < 1e-4);
    // The remainder is linear in eps here, so compare at a small eps directly.
    let e: f64 = 1e-9;
    let r = r_eps(&RegQuery::new(s, one(), e).unwrap()).unwrap();
    assert!((r - c.alpha * (1.0 / (e * e)).ln() - c.beta).abs() < 1e-8);
    assert!((fit.intercept - c.beta).abs() < 1e-3);
}

#[test]
fn decreasing_in_eps() {
    let s = spec(&[0.2, 0.9, 1.4, 3.0]);
    let mut prev = f64::INFINITY;
    for i in 0..40 {
        let e = 1e-4 * 1.4f64.powi(i);
        let r = r_eps(&RegQuery::new(s.clone(), one(), e).unwrap()).unwrap();
        assert!(r < prev, "eps = {e}");
        prev = r;
    }
}

#[test]
fn continuous_across_unit_circle() {
    let at = |a: f64| r_eps(&RegQuery::new(spec(&[0.4, a, 2.5]), one(), 0.05).unwrap()).unwrap();
    let mid = at(1.0);
    for &h in &[1e-6, 1e-8, 1e-10] {
        assert!((at(1.0 - h) - mid).abs() < 1e3 * h * mid.abs().max(1.0));
        assert!((at(1.0 + h) - mid).abs() < 1e3 * h * mid.abs().max(1.0));
    }
}

#[test]
fn low_degree_polynomials_cancel() {
    let s = spec(&[0.25, 0.7, 1.3, 2.2, 3.1]);
    let n = s.dim();
    let q = RegQuery::new(s, C64::new(0.9, 0.3), 0.02).unwrap();
    let base = r_eps(&q).unwrap();
    let eps2 = q.eps * q.eps;
    let shifted = r_eps_kernel(&q, SumMode::Lagrange, |x| {
        // Degree n - 2 = 3.
        Ok(f_eps(x, eps2, n)? + 3.0 - 2.0 * x + 0.5 * x * x - 1.25 * x * x * x)
    })
    .unwrap();
    assert!((shifted - base).abs() < 1e-9 * base.abs().max(1.0));
}

#[test]
fn divided_differences_agree() {
    let q = RegQuery::new(spec(&[0.3, 0.9, 1.6, 2.4]), one(), 0.1).unwrap();
    let a = r_eps(&q).unwrap();
    let b = r_eps_with(&q, SumMode::DividedDifference).unwrap();
    assert!((a - b).abs() < 1e-10 * a);
}

#[test]
fn gap_and_argument_errors() {
    assert!(matches!(
        r_eps(&RegQuery::new(spec(&[0.5, 0.5 + 1e-8, 2.0]), one(), 0.1).unwrap()),
        Err(Error::GapTooSmall { .. })
    ));
    assert!(RegQuery::new(spec(&[0.5, 2.0]), C64::new(0.0, 0.0), 0.1).is_err());
    assert!(RegQuery::new(spec(&[0.5, 2.0]), one(), 0.0).is_err());
    assert!(RegQuery::new(spec(&[0.5]), one(), 0.1).is_err());
}

#[test]
fn matches_group_integral() {
    let n = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let a = ComplexMat::from_fn(n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let s = gram_eigs(&a).unwrap();
    // A point of the spectral annulus.
    let z = C64::from_polar(((s.min() * s.max()).sqrt()).sqrt(), 0.7);
    for (eps, seed) in [(0.1, 5u64), (0.3, 6)] {
        let exact = r_eps(&RegQuery::new(s.clone(), z, eps).unwrap()).unwrap();
        let est = mc_average(
            |u| C64::new(reg_integrand(&a, z, eps, u), 0.0),
            &EnsembleSpec::haar(n).unwrap(),
            McConfig::new(100_000, seed),
        )
        .unwrap();
        assert!((est.mean.re - exact).abs() <= 3.0 * est.stderr, "eps {eps}: {est:?} vs {exact}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ik_random_points(k in 0usize..=12, a2 in 0.0f64..4.0, log_e in -6.0f64..0.0) {
        let e2 = 10f64.powf(2.0 * log_e);
        let v = ik_exact(k, e2, a2).unwrap().value;
        let q = quad_ik(k, e2, a2);
        prop_assert!(((v - q) / q).abs() <= 1e-8);
    }

    #[test]
    fn antiderivative_reproduces_integrand(k in 1usize..=10, a2 in 0.0f64..3.0, e2 in 1e-4f64..1.0, t in 0.0f64..1.0) {
        let r = ik_exact(k, e2, a2).unwrap();
        let quad = (t - a2 + e2).powi(2) + 4.0 * e2 * a2;
        let lhs = r.q.derivative().eval(t) * quad + r.q.eval(t) * (t - a2 + e2) + r.lambda;
        let scale = r.q.coeffs().iter().map(|c| c.abs()).sum::<f64>().max(1.0) * (1.0 + quad) * 4.0;
        prop_assert!((lhs - (1.0 - t).powi(k as i32)).abs() <= 1e-12 * scale);
    }
}
