use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::linalg::C64;
use crate::error::{Error, Result};

/// Values an integrator can accumulate: reals and complex numbers.
pub trait QuadValue: Copy + Send + Sync {
    fn zero() -> Self;
    fn add(self, other: Self) -> Self;
    fn scale(self, s: f64) -> Self;
    fn norm(self) -> f64;
    fn is_finite(self) -> bool;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn norm(self) -> f64 {
        self.abs()
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl QuadValue for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn norm(self) -> f64 {
        C64::norm(self)
    }
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct AdaptiveOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 0.0, max_intervals: 1_000_000 }
    }
}

// Kronrod 15-point abscissae on [-1, 1]; odd indices are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

struct Piece<V> {
    a: f64,
    b: f64,
    value: V,
    err: f64,
    /// The Gauss-Kronrod difference is already below the roundoff floor.
    settled: bool,
    id: u64,
}

impl<V> PartialEq for Piece<V> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<V> Eq for Piece<V> {}
impl<V> PartialOrd for Piece<V> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<V> Ord for Piece<V> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err).then_with(|| other.id.cmp(&self.id))
    }
}

fn kronrod<V: QuadValue>(f: &mut impl FnMut(f64) -> V, a: f64, b: f64) -> Result<(V, f64, bool)> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut eval = |x: f64| -> Result<V> {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::InvalidParameter(format!("integrand is not finite at {x}")))
        }
    };
    let fc = eval(center)?;
    let mut kron = fc.scale(WGK[7]);
    let mut gauss = fc.scale(WG[3]);
    let mut abs_sum = fc.norm() * WGK[7];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let f1 = eval(center - half * x)?;
        let f2 = eval(center + half * x)?;
        let pair = f1.add(f2);
        kron = kron.add(pair.scale(w));
        abs_sum += (f1.norm() + f2.norm()) * w;
        if j % 2 == 1 {
            gauss = gauss.add(pair.scale(WG[j / 2]));
        }
    }
    let value = kron.scale(half);
    let diff = kron.add(gauss.scale(-1.0)).norm() * half.abs();
    let roundoff = 50.0 * f64::EPSILON * abs_sum * half.abs();
    Ok((value, diff.max(roundoff), diff <= roundoff))
}

/// Adaptive Gauss-Kronrod (7/15) bisection on `[a, b]` to absolute tolerance `tol`.
/// Returns the value and an error estimate. Pieces already at the roundoff
/// floor are not refined, so when the tolerance is below that floor the
/// estimate reports the floor instead of the tolerance.
pub fn adaptive_integrate<V, F>(f: F, a: f64, b: f64, tol: f64) -> Result<(V, f64)>
where
    V: QuadValue,
    F: FnMut(f64) -> V,
{
    adaptive_integrate_with(f, a, b, AdaptiveOptions { abs_tol: tol, ..AdaptiveOptions::default() })
}

pub fn adaptive_integrate_with<V, F>(mut f: F, a: f64, b: f64, opts: AdaptiveOptions) -> Result<(V, f64)>
where
    V: QuadValue,
    F: FnMut(f64) -> V,
{
    if !(opts.abs_tol > 0.0 || opts.rel_tol > 0.0) {
        return Err(Error::InvalidParameter("integration tolerance must be positive".into()));
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidParameter("integration limits must be finite".into()));
    }
    if a == b {
        return Ok((V::zero(), 0.0));
    }
    let (v0, e0, s0) = kronrod(&mut f, a, b)?;
    let mut heap = BinaryHeap::new();
    let mut next_id = 0u64;
    heap.push(Piece { a, b, value: v0, err: e0, settled: s0, id: next_id });
    // Pieces too narrow to bisect further; kept out of the heap.
    let mut frozen: Vec<Piece<V>> = Vec::new();
    let mut total_err = e0;
    let mut intervals = 1usize;
    loop {
        let total = heap.iter().chain(frozen.iter()).fold(V::zero(), |acc, p| acc.add(p.value));
        let target = opts.abs_tol.max(opts.rel_tol * total.norm());
        if total_err <= target {
            return Ok((total, total_err));
        }
        let Some(worst) = heap.pop() else {
            if frozen.iter().all(|p| p.settled) {
                return Ok((total, total_err));
            }
            return Err(Error::SubdivisionLimit { partial: total.norm(), err: total_err, intervals });
        };
        if intervals >= opts.max_intervals {
            heap.push(worst);
            return Err(Error::SubdivisionLimit { partial: total.norm(), err: total_err, intervals });
        }
        if worst.settled {
            frozen.push(worst);
            continue;
        }
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a.min(worst.b) && mid < worst.a.max(worst.b)) {
            frozen.push(worst);
            continue;
        }
        let (vl, el, sl) = kronrod(&mut f, worst.a, mid)?;
        let (vr, er, sr) = kronrod(&mut f, mid, worst.b)?;
        total_err += el + er - worst.err;
        intervals += 1;
        next_id += 1;
        heap.push(Piece { a: worst.a, b: mid, value: vl, err: el, settled: sl, id: next_id });
        next_id += 1;
        heap.push(Piece { a: mid, b: worst.b, value: vr, err: er, settled: sr, id: next_id });
        // Recompute occasionally to stop drift in the running error sum.
        if intervals.is_multiple_of(64) {
            total_err = heap.iter().chain(frozen.iter()).map(|p| p.err).sum();
        }
    }
}
