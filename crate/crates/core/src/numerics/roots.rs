use crate::error::{Error, Result};

/// Root of a function with a sign change on `[lo, hi]`, by a bisection-guarded
/// secant (Illinois) iteration. Stops once `|g(t)| <= tol` or the bracket has
/// collapsed to a few ulps.
pub fn find_root_monotone<G>(mut g: G, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    G: FnMut(f64) -> f64,
{
    if !(lo < hi) || !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("need lo < hi and tol > 0 (lo = {lo}, hi = {hi}, tol = {tol})")));
    }
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (g(a), g(b));
    if fa.abs() <= tol {
        return Ok(a);
    }
    if fb.abs() <= tol {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::NoBracket { lo, hi, g_lo: fa, g_hi: fb });
    }
    // Which endpoint was retained last; used by the Illinois halving.
    let mut side = 0i8;
    for _ in 0..500 {
        let width = b - a;
        let mut t = b - fb * width / (fb - fa);
        if !(t > a && t < b) {
            t = 0.5 * (a + b);
        }
        let ft = g(t);
        if ft.abs() <= tol || width <= 4.0 * f64::EPSILON * t.abs().max(f64::MIN_POSITIVE) {
            return Ok(t);
        }
        if ft.signum() == fb.signum() {
            b = t;
            fb = ft;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = t;
            fa = ft;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        // Force a bisection when the secant stalls on one side.
        if (b - a) > 0.5 * width {
            let m = 0.5 * (a + b);
            let fm = g(m);
            if fm.abs() <= tol {
                return Ok(m);
            }
            if fm.signum() == fb.signum() {
                b = m;
                fb = fm;
            } else {
                a = m;
                fa = fm;
            }
            side = 0;
        }
    }
    Ok(0.5 * (a + b))
}
