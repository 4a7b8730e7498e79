use std::f64::consts::PI;

use haarmoments::densities::*;
use haarmoments::moments::invariant_ensemble_moment;
use haarmoments::numerics::{adaptive_integrate_with, AdaptiveOptions};
use haarmoments::sampling::{eig_histogram, Binning, Ensemble, EnsembleSpec, McConfig};
use haarmoments::C64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn integrate(f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let opts = AdaptiveOptions { abs_tol: tol, rel_tol: 0.0, ..AdaptiveOptions::default() };
    adaptive_integrate_with(f, a, b, opts).unwrap().0
}

fn assert_all_pass(reports: &[haarmoments::VerificationReport]) {
    for r in reports {
        assert!(r.pass, "{}", r.summary());
    }
}

#[test]
fn ginibre_density_limits_and_mass() {
    assert!((ginibre_density(1, c(0.0, 0.0)) - 1.0 / PI).abs() < 1e-16);
    assert!((ginibre_density(50, c(0.5, 0.0)) - 1.0 / PI).abs() < 1e-6);
    for n in [1, 3, 10, 40] {
        let cutoff = (n as f64).sqrt() + 8.0;
        let mass = integrate(|r| 2.0 * PI * r * ginibre_density(n, c(r, 0.0)), 0.0, cutoff, 1e-11);
        assert!((mass - n as f64).abs() < 1e-8, "n={n} mass={mass}");
    }
    assert_eq!(ginibre_density(3, c(1.0, 2.0)), ginibre_density(3, C64::from_polar(5f64.sqrt(), 0.3)));
}

#[test]
fn ginibre_histograms() {
    for n in 1..=4 {
        let spec = EnsembleSpec::ginibre(n).unwrap();
        let binning = Binning::Radial { r_max: 2.5, bins: 12 };
        let table = eig_histogram(&spec, binning, McConfig::new(100_000, 11 + n as u64)).unwrap();
        let reports = density_histogram_check("ginibre.hist", &table, |z| ginibre_density(n, z), 4.0).unwrap();
        assert_all_pass(&reports);
    }
}

#[test]
fn ginibre_reduction() {
    let r = ginibre_reduction_check(2, c(0.0, 0.0), McConfig::new(50_000, 1)).unwrap();
    assert!(r.pass, "{}", r.summary());
    let r = ginibre_reduction_check(3, c(1.0, 0.0), McConfig::new(100_000, 2)).unwrap();
    assert!(r.pass, "{}", r.summary());
    let far = ginibre_reduction_check(2, c(30.0, 0.0), McConfig::new(5_000, 3)).unwrap();
    assert!(far.pass);
    assert!(ginibre_density(2, c(30.0, 0.0)) < 1e-300);
    assert!(ginibre_reduction_check(1, c(0.0, 0.0), McConfig::new(5_000, 3)).is_err());
}

/// `n int_0^inf [q + t(1-g)](q + t)^{n-2} / (1+t)^{n+1} dt`, the inner average
/// written as a half-line integral, mapped to `[0, 1)` by `t = s/(1-s)`.
fn cue_inner_oracle(n: usize, gamma: f64, q: f64) -> f64 {
    let g = (q + gamma - 1.0) / q;
    n as f64
        * integrate(
            |s| {
                if s >= 1.0 {
                    return 0.0;
                }
                let t = s / (1.0 - s);
                (q + t * (1.0 - g)) * (q + t).powi(n as i32 - 2) / (1.0 + t).powi(n as i32 + 1) / (1.0 - s).powi(2)
            },
            0.0,
            1.0,
            1e-14,
        )
}

#[test]
fn cue_density_matches_half_line_form() {
    for n in [2, 3, 8] {
        for gamma in [0.3, 0.5, 0.9] {
            for frac in [0.1, 0.5, 0.95] {
                let q = 1.0 - gamma * (1.0 - frac);
                let g = (q + gamma - 1.0) / q;
                let oracle =
                    (n - 1) as f64 / (PI * gamma * q) * (g / gamma).powi(n as i32 - 2) * cue_inner_oracle(n, gamma, q);
                let v = cue_rank1_density(n, gamma, C64::from_polar(q.sqrt(), 1.1)).unwrap();
                assert!((v - oracle).abs() < 1e-10 * oracle.max(1.0), "n={n} gamma={gamma} q={q}");
            }
        }
    }
}

#[test]
fn cue_density_support_and_mass() {
    let gamma = 0.5;
    assert_eq!(cue_rank1_density(8, gamma, c(0.5f64.sqrt(), 0.0)).unwrap(), 0.0);
    assert_eq!(cue_rank1_density(8, gamma, c(0.3, 0.0)).unwrap(), 0.0);
    assert_eq!(cue_rank1_density(8, gamma, c(1.0, 0.0)).unwrap(), 0.0);
    assert_eq!(cue_rank1_density(8, gamma, c(1.2, 0.0)).unwrap(), 0.0);
    for (n, gamma, tol) in [(2, 0.5, 1e-6), (5, 0.3, 1e-6), (8, 0.5, 1e-6), (8, 0.999, 1e-4), (30, 0.7, 1e-6)] {
        let f = |q: f64| PI * cue_rank1_density(n, gamma, c(q.sqrt(), 0.0)).unwrap();
        let mass = integrate(f, 1.0 - gamma, 1.0, 1e-10);
        assert!((mass - n as f64).abs() < tol, "n={n} gamma={gamma} mass={mass}");
    }
    assert!(cue_rank1_density(1, 0.5, c(0.9, 0.0)).is_err());
    assert!(cue_rank1_density(3, 1.0, c(0.9, 0.0)).is_err());
}

#[test]
fn cue_histogram() {
    let (n, gamma) = (8, 0.5);
    let spec = EnsembleSpec::new(Ensemble::CueRank1 { gamma }, n).unwrap();
    let binning = Binning::RadialSq { lo: 1.0 - gamma, hi: 1.0, bins: 10 };
    let table = eig_histogram(&spec, binning, McConfig::new(100_000, 5)).unwrap();
    assert!(table.outside < 1e-9, "eigenvalues outside the annulus: {}", table.outside);
    let reports =
        density_histogram_check("cue.hist", &table, |z| cue_rank1_density(n, gamma, z).unwrap(), 4.0).unwrap();
    assert_all_pass(&reports);
}

#[test]
fn annulus_count() {
    assert!((cue_rank1_count_limit(1e-9, f64::INFINITY, 0.5).unwrap() - 1.0).abs() < 1e-8);
    assert!((cue_rank1_count_limit(1e-9, 1e3, 0.5).unwrap() - 1.0).abs() < 1e-8);
    assert_eq!(cue_rank1_count_limit(0.7, 0.7, 0.4).unwrap(), 0.0);
    let direct = |a: f64, gamma: f64| a.sinh() / a * (a * (gamma - 2.0) / gamma).exp();
    let v = cue_rank1_count_limit(0.5, 1.5, 0.5).unwrap();
    assert!((v - (direct(0.5, 0.5) - direct(1.5, 0.5))).abs() < 1e-15);
    let finite = cue_rank1_count(200, 0.5, 1.5, 0.5).unwrap();
    assert!((finite - v).abs() < 0.02 * v, "finite={finite} limit={v}");
    // All of the annulus at finite n holds every eigenvalue.
    let all = cue_rank1_count(12, 1e-12, 12.0, 0.5).unwrap();
    assert!((all - 1.0).abs() < 1e-8);
}

#[test]
fn gue_density_off_strip_is_zero() {
    let cfg = McConfig::new(2_000, 0);
    for y in [-0.1, 0.0, 0.7, 1.0] {
        assert_eq!(gue_rank1_density(3, 1.0, 0.7, c(0.2, y), cfg).unwrap(), (0.0, 0.0));
    }
    assert!(gue_rank1_density(1, 1.0, 0.7, c(0.2, 0.3), cfg).is_err());
    assert!(gue_rank1_density(3, 0.0, 0.7, c(0.2, 0.3), cfg).is_err());
}

#[test]
fn gue_n2_inner_average() {
    for &(beta, gamma, z) in &[(1.0, 0.7, c(0.3, 0.2)), (2.5, 1.5, c(-1.0, 1.1)), (0.5, 0.4, c(0.0, 0.35))] {
        let exact = gue_rank1_inner_n2(beta, gamma, z);
        let est = gue_rank1_inner_mc(2, beta, gamma, z, McConfig::new(200_000, 9)).unwrap();
        assert!((est.mean.re - exact).abs() <= 4.0 * est.stderr, "{exact} vs {:?}", est);
        let (v, s) = gue_rank1_density(2, beta, gamma, z, McConfig::new(2, 0)).unwrap();
        assert_eq!(s, 0.0);
        assert!((v - gue_rank1_prefactor(2, beta, gamma, z) * exact).abs() < 1e-15);
    }
}

/// Strip mass at n = 2 by nested adaptive quadrature of the closed form.
#[test]
fn gue_n2_strip_mass() {
    for &(beta, gamma) in &[(1.0f64, 0.7f64), (2.0, 0.3), (0.7, 2.0)] {
        let inner = |y: f64| {
            integrate(
                |x| {
                    let z = c(x, y);
                    gue_rank1_prefactor(2, beta, gamma, z) * gue_rank1_inner_n2(beta, gamma, z)
                },
                -15.0 / beta.sqrt(),
                15.0 / beta.sqrt(),
                1e-13,
            )
        };
        let oracle = integrate(inner, 0.0, gamma, 1e-12);
        assert!((oracle - 2.0).abs() < 1e-9, "beta={beta} gamma={gamma} oracle={oracle}");
        let v = gue_rank1_strip_mass(2, beta, gamma, McConfig::new(2, 0)).unwrap();
        assert!((v.mean.re - 2.0).abs() < 1e-9);
    }
}

#[test]
fn gue_n3_strip_mass() {
    let est = gue_rank1_strip_mass(3, 1.0, 0.7, McConfig::new(20_000, 4)).unwrap();
    assert!((est.mean.re - 3.0).abs() <= 4.0 * est.stderr, "{:?}", est);
    assert!(est.stderr < 0.05);
}

/// Direct eigenvalue histogram of the rank-one GUE against the density.
#[test]
fn gue_histogram() {
    let (beta, gamma) = (1.0, 0.7);
    let binning = Binning::Planar { x_lo: -1.5, x_hi: 1.5, nx: 4, y_lo: 0.0, y_hi: gamma, ny: 3 };
    let spec = EnsembleSpec::new(Ensemble::GueRank1 { beta, gamma }, 2).unwrap();
    let table = eig_histogram(&spec, binning, McConfig::new(200_000, 21)).unwrap();
    let cfg = McConfig::new(2, 0);
    let f = |z: C64| gue_rank1_density(2, beta, gamma, z, cfg).unwrap().0;
    assert_all_pass(&density_histogram_check("gue.hist", &table, f, 4.0).unwrap());

    // n = 3: the density's own Monte Carlo error is negligible at bin scale
    // next to the histogram's, so one bin centre is enough of a spot check.
    let spec = EnsembleSpec::new(Ensemble::GueRank1 { beta, gamma }, 3).unwrap();
    let binning = Binning::Planar { x_lo: -0.25, x_hi: 0.25, nx: 1, y_lo: 0.25, y_hi: 0.45, ny: 1 };
    let table = eig_histogram(&spec, binning, McConfig::new(200_000, 22)).unwrap();
    let (v, s) = gue_rank1_density(3, beta, gamma, c(0.0, 0.35), McConfig::new(200_000, 23)).unwrap();
    let bin = &table.bins[0];
    // Curvature across a 0.5 x 0.2 bin is far below the statistical error here.
    assert!((bin.density - v).abs() <= 4.0 * (bin.stderr.powi(2) + s * s).sqrt() + 0.01 * v, "{} vs {v}", bin.density);
}

#[test]
fn mp_log_moment_regression() {
    // Independent 10^4-node midpoint rule in u, with angle u^2 so the
    // logarithmic endpoint singularity becomes u ln u.
    let k = 10_000;
    let h = PI.sqrt() / k as f64;
    let oracle: f64 = (0..k)
        .map(|i| {
            let u = (i as f64 + 0.5) * h;
            let phi = u * u;
            (4.0 * (0.5 * phi).sin().powi(2)).ln() * (1.0 + phi.cos()) / PI * 2.0 * u * h
        })
        .sum();
    let v = mp_law().integrate(f64::ln).unwrap();
    assert!((v - oracle).abs() < 1e-6);
    assert!((v + 1.0).abs() < 1e-10, "{v}");
}

#[test]
fn mp_phi_inside_and_outside() {
    let law = mp_law();
    for i in 1..=10 {
        let r = 0.095 * i as f64;
        let z = C64::from_polar(r, 0.37 * i as f64);
        let p = fz_phi_detail(&law, z).unwrap();
        assert_eq!(p.branch, PhiBranch::Saddle);
        assert!((p.value - (r * r - 1.0)).abs() < 1e-6, "r={r} phi={}", p.value);
        let t0 = p.t0.unwrap();
        assert!((t0 - r.powi(4) / (1.0 - r * r)).abs() < 1e-8 * t0.max(1.0), "t0={t0}");
    }
    for r in [1.0001, 1.5, 2.0, 10.0] {
        let z = c(0.0, r);
        assert_eq!(fz_phi(&law, z).unwrap(), (r * r).ln());
    }
    assert_eq!(fz_phi(&law, c(2.0, 0.0)).unwrap(), 4f64.ln());
}

#[test]
fn mp_phi_continuous_at_unit_circle() {
    let law = mp_law();
    for d in [1e-3, 1e-5, 1e-7] {
        let inside = fz_phi(&law, c(1.0 - d, 0.0)).unwrap();
        let outside = fz_phi(&law, c(1.0 + d, 0.0)).unwrap();
        assert!((inside - outside).abs() < 1e-6 + 5.0 * d, "d={d}: {inside} vs {outside}");
    }
    let tiling = phi_tiling(&law, 1e-8).unwrap();
    assert_eq!(tiling.gap, 0.0);
    assert!(tiling.outer_jump < 1e-6);
    assert_eq!(tiling.inner_jump, None);
}

#[test]
fn mp_phi_subharmonic() {
    let law = mp_law();
    let h = 0.05;
    let phi = |x: f64, y: f64| fz_phi(&law, c(x, y)).unwrap();
    for i in -8..=8 {
        for j in -8..=8 {
            let (x, y) = (0.1 * i as f64, 0.1 * j as f64);
            if x * x + y * y > 0.81 {
                continue;
            }
            let lap = (phi(x + h, y) + phi(x - h, y) + phi(x, y + h) + phi(x, y - h) - 4.0 * phi(x, y)) / (h * h);
            assert!(lap >= -1e-8, "({x}, {y}): {lap}");
        }
    }
}

#[test]
fn point_mass_law() {
    let law = SpectralLaw::new(LawKind::Discrete { atoms: vec![1.0], weights: vec![1.0] }).unwrap();
    assert_eq!(law.m1(), 1.0);
    assert_eq!(law.m_minus1(), InverseMoment::Finite(1.0));
    for r in [0.2, 0.9, 1.1, 3.0] {
        // CUE log-potential: max(0, ln |z|^2).
        let v = fz_phi(&law, c(r, 0.0)).unwrap();
        assert!((v - (r * r).ln().max(0.0)).abs() < 1e-15);
    }
}

/// `h(t) = ln r2 + int ln((x+t)/(r2+t)) dw` is maximised at `t0`; golden
/// section on `ln t` finds the same value without the saddle equation.
fn phi_by_max(law: &SpectralLaw, r2: f64) -> f64 {
    let h = |s: f64| r2.ln() + law.integrate(|x| ((x - r2) / (r2 + s.exp())).ln_1p()).unwrap();
    let (mut a, mut b) = (-40.0, 40.0);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let (c1, c2) = (b - g * (b - a), a + g * (b - a));
        if h(c1) > h(c2) {
            b = c2;
        } else {
            a = c1;
        }
    }
    h(0.5 * (a + b))
}

#[test]
fn saddle_branch_is_a_maximum() {
    let laws = [
        SpectralLaw::new(LawKind::Discrete { atoms: vec![0.5, 2.0, 3.0], weights: vec![0.2, 0.5, 0.3] }).unwrap(),
        SpectralLaw::new(LawKind::Table { nodes: vec![0.0, 0.5, 1.0, 2.5], masses: vec![0.25, 0.25, 0.5] }).unwrap(),
        mp_law(),
    ];
    for law in &laws {
        let lo = match law.m_minus1() {
            InverseMoment::Finite(mi) => 1.0 / mi,
            InverseMoment::Infinite => 0.0,
        };
        for frac in [0.1, 0.5, 0.9] {
            let r2 = lo + frac * (law.m1() - lo);
            let p = fz_phi_detail(law, c(r2.sqrt(), 0.0)).unwrap();
            assert_eq!(p.branch, PhiBranch::Saddle);
            let oracle = phi_by_max(law, r2);
            assert!((p.value - oracle).abs() < 1e-9, "{:?} r2={r2}: {} vs {oracle}", law.kind(), p.value);
        }
    }
}

#[test]
fn discrete_law_tiles_without_gaps() {
    let law = SpectralLaw::new(LawKind::Discrete { atoms: vec![0.5, 2.0, 3.0], weights: vec![0.2, 0.5, 0.3] }).unwrap();
    let t = phi_tiling(&law, 1e-7).unwrap();
    assert_eq!(t.gap, 0.0);
    assert!(t.inner_edge < t.outer_edge);
    assert!(t.inner_jump.unwrap() < 1e-6);
    assert!(t.outer_jump < 1e-6);
    let inner = fz_phi_detail(&law, c(0.1, 0.0)).unwrap();
    assert_eq!(inner.branch, PhiBranch::Inner);
    let direct = 0.2 * 0.5f64.ln() + 0.5 * 2f64.ln() + 0.3 * 3f64.ln();
    assert!((inner.value - direct).abs() < 1e-15);
}

#[test]
fn table_law_moments() {
    let law = SpectralLaw::new(LawKind::Table { nodes: vec![1.0, 2.0, 4.0], masses: vec![0.5, 0.5] }).unwrap();
    assert!((law.m1() - 2.25).abs() < 1e-15);
    let InverseMoment::Finite(mi) = law.m_minus1() else { panic!() };
    assert!((mi - (0.5 * 2f64.ln() + 0.25 * 2f64.ln())).abs() < 1e-15);
    assert!((law.integrate(|x| x * x).unwrap() - (0.5 * 7.0 / 3.0 + 0.25 * 56.0 / 3.0)).abs() < 1e-12);
    let json = r#"{"kind":"table","nodes":[1.0,2.0,4.0],"masses":[0.5,0.5]}"#;
    let parsed: SpectralLaw = serde_json::from_str(json).unwrap();
    assert_eq!(parsed, law);
    assert!(serde_json::from_str::<SpectralLaw>(r#"{"kind":"discrete","atoms":[1.0],"weights":[0.3]}"#).is_err());
}

#[test]
fn ginibre_pn_matches_monte_carlo() {
    use haarmoments::numerics::hermitian_eigs;
    use haarmoments::sampling::{ginibre, mc_engine, Draw};
    use haarmoments::Poly;
    let n = 4;
    let exact = ginibre_pn(n);
    let s = 1.0 / (n as f64).sqrt();
    let res = mc_engine(McConfig::new(100_000, 3), n + 1, |_, rng| {
        let w = ginibre(n, rng).scale(c(s, 0.0));
        let eigs = hermitian_eigs(&w.gram())?;
        let roots: Vec<f64> = eigs.iter().map(|e| -e).collect();
        Ok(Draw::Value(Poly::from_roots(&roots).coeffs().iter().map(|&v| c(v, 0.0)).collect()))
    })
    .unwrap();
    for k in 0..=n {
        assert!((res.mean[k].re - exact.coeff(k)).abs() <= 4.0 * res.stderr[k] + 1e-12, "k={k}");
    }
}

/// The exact average approaches the log-potential as n grows; the gap shrinks
/// roughly like ln(2 pi n)/(2n).
#[test]
fn ber_closed_form_converges() {
    let law = mp_law();
    for r in [0.3, 0.6, 0.9] {
        let z = c(r, 0.0);
        let phi = fz_phi(&law, z).unwrap();
        let mut prev = f64::INFINITY;
        for n in [24, 100, 400] {
            let m = invariant_ensemble_moment(&ginibre_pn(n), z, n).unwrap();
            let offset = m.ln() / n as f64 - phi;
            assert!(offset > 0.0 && offset < prev, "r={r} n={n} offset={offset}");
            let model = (2.0 * PI * n as f64).ln() / (2.0 * n as f64);
            assert!((offset - model).abs() < 0.25 * model, "r={r} n={n} offset={offset} model={model}");
            prev = offset;
        }
        assert!(prev < BER_TOL);
    }
}

#[test]
fn ber_report_fields() {
    let r = ber_check(6, c(0.5, 0.0), McConfig::new(20_000, 8)).unwrap();
    assert_eq!(r.check, "ber");
    assert_eq!(r.tolerance, BER_TOL);
    assert_eq!(r.seed, 8);
    for key in ["closed_form_log_moment", "log_average", "log_average_offset"] {
        assert!(r.params.contains_key(key), "{key}");
    }
    let lhs = match r.lhs {
        haarmoments::Number::Real(v) => v,
        _ => unreachable!(),
    };
    let closed = r.params["closed_form_log_moment"].as_f64().unwrap();
    assert!((lhs - closed).abs() < 0.01);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn densities_are_nonnegative(x in -2.0f64..2.0, y in -2.0f64..2.0, n in 2usize..12, gamma in 0.05f64..0.95) {
        let z = c(x, y);
        prop_assert!(ginibre_density(n, z) >= 0.0);
        prop_assert!(cue_rank1_density(n, gamma, z).unwrap() >= 0.0);
        let (v, _) = gue_rank1_density(2, 1.3, gamma, z, McConfig::new(2, 0)).unwrap();
        prop_assert!(v >= 0.0);
    }

    #[test]
    fn phi_depends_on_modulus_only(r in 0.05f64..3.0, theta in 0.0f64..std::f64::consts::TAU) {
        let law = mp_law();
        let a = fz_phi(&law, c(r, 0.0)).unwrap();
        let b = fz_phi(&law, C64::from_polar(r, theta)).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
        prop_assert!(a >= (r * r).ln() - 1e-9);
    }
}
