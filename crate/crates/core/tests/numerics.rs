use haarmoments::numerics::{
    adaptive_integrate, beta_rat, det, gram_eigs, quad_rule, rat_to_f64, ComplexMat, RuleKind, C64,
};
use haarmoments::sampling::haar_unitary;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn mat_strategy(n: usize) -> impl Strategy<Value = ComplexMat> {
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), n * n)
        .prop_map(move |v| ComplexMat::from_row_major(n, v.into_iter().map(|(a, b)| c(a, b)).collect()))
}

/// One-sided Jacobi SVD: orthogonalises the columns of `A` by plane
/// rotations and returns the squared column norms, i.e. squared singular values.
fn jacobi_singular_values_sq(a: &ComplexMat) -> Vec<f64> {
    let n = a.dim();
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| (0..n).map(|i| a[(i, j)]).collect()).collect();
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: C64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g <= 1e-300 {
                    continue;
                }
                off = off.max(g / (alpha * beta).sqrt());
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for i in 0..n {
                    let x = cols[p][i];
                    let y = cols[q][i] * phase.conj();
                    cols[p][i] = x * cs - y * sn;
                    cols[q][i] = (x * sn + y * cs) * phase;
                }
            }
        }
        if off < 1e-15 {
            break;
        }
    }
    let mut s: Vec<f64> = cols.iter().map(|col| col.iter().map(|z| z.norm_sqr()).sum()).collect();
    s.sort_by(|a, b| a.total_cmp(b));
    s
}

#[test]
fn gram_eigs_match_frozen_svd() {
    // Squared singular values from a LAPACK bidiagonalisation SVD.
    let a = ComplexMat::from_rows(&[
        vec![c(1.0, 2.0), c(0.5, -1.0), c(-0.3, 0.0)],
        vec![c(0.0, 0.2), c(-1.5, 0.4), c(2.0, 0.0)],
        vec![c(0.7, 0.0), c(0.1, -0.9), c(0.0, 1.0)],
    ]);
    let expect = [0.134_069_447_234_302_25, 4.684_779_549_146_770_5, 10.281_151_003_618_93];
    let got = gram_eigs(&a).unwrap();
    for (g, e) in got.eigs().iter().zip(expect) {
        assert!((g - e).abs() < 1e-10, "{g} vs {e}");
    }
}

#[test]
fn adaptive_matches_riemann_oracle() {
    // Midpoint sums with 10^6 panels.
    let (v, e): (f64, f64) = adaptive_integrate(|t| (1.0 - t).powi(2) / (4.0 - t).powi(2), 0.0, 1.0, 1e-10).unwrap();
    assert!((v - 0.023_907_565_289_310_53).abs() <= 1e-10 && e <= 1e-10);
    let (v, e): (f64, f64) = adaptive_integrate(|t| 1.0 / ((0.5 - t).powi(2) + 0.01).sqrt(), 0.0, 1.0, 1e-10).unwrap();
    assert!((v - 4.624_876_682_545_818_5).abs() <= 1e-10 && e <= 1e-10);
}

#[test]
fn adaptive_trivial() {
    let (v, _): (f64, f64) = adaptive_integrate(|_| 1.0, 0.0, 1.0, 1e-10).unwrap();
    assert!((v - 1.0).abs() < 1e-14);
}

#[test]
fn jacobi_rule_reproduces_beta_values() {
    for alpha in 0..8usize {
        for k in 1..8usize {
            let rule = quad_rule(RuleKind::Jacobi { alpha: alpha as f64 }, k).unwrap();
            for r in 0..2 * k {
                let q: f64 = rule.integrate(|t| t.powi(r as i32));
                let b = rat_to_f64(&beta_rat(r + 1, alpha + 1));
                assert!((q - b).abs() <= 1e-13 * b.max(1e-300) + 1e-16, "alpha={alpha} K={k} r={r}: {q} vs {b}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn det_is_multiplicative(a in mat_strategy(6), b in mat_strategy(6)) {
        let lhs = det(&(&a * &b));
        let rhs = det(&a) * det(&b);
        prop_assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm().max(1.0));
    }

    #[test]
    fn gram_eigs_match_jacobi_svd(a in mat_strategy(3)) {
        let got = gram_eigs(&a).unwrap();
        let oracle = jacobi_singular_values_sq(&a);
        for (g, o) in got.eigs().iter().zip(&oracle) {
            prop_assert!((g - o).abs() <= 1e-10 * oracle[2].max(1.0), "{:?} vs {:?}", got.eigs(), oracle);
        }
    }

    #[test]
    fn gram_spectrum_is_left_unitary_invariant(a in mat_strategy(5), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = haar_unitary(5, &mut rng);
        let s1 = gram_eigs(&a).unwrap();
        let s2 = gram_eigs(&(&u * &a)).unwrap();
        for (x, y) in s1.eigs().iter().zip(s2.eigs()) {
            prop_assert!((x - y).abs() <= 1e-10 * s1.max().max(1.0));
        }
    }
}
