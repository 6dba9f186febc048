//! Scalar root finding on a sign-change bracket.

use crate::error::{Error, Result};

/// Scan a geometric grid of `points` values spanning [lo, hi] (both > 0)
/// and return the first adjacent pair on which `f` changes sign.
pub fn expand_bracket<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, points: usize) -> Option<(f64, f64)> {
    debug_assert!(lo > 0.0 && hi > lo && points >= 2);
    let ratio = (hi / lo).powf(1.0 / (points - 1) as f64);
    let mut x_prev = lo;
    let mut f_prev = f(lo);
    for i in 1..points {
        let x = if i == points - 1 { hi } else { lo * ratio.powi(i as i32) };
        let fx = f(x);
        if f_prev == 0.0 {
            return Some((x_prev, x_prev));
        }
        if f_prev.is_finite() && fx.is_finite() && f_prev.signum() != fx.signum() {
            return Some((x_prev, x));
        }
        x_prev = x;
        f_prev = fx;
    }
    if f_prev == 0.0 {
        return Some((x_prev, x_prev));
    }
    None
}

/// Newton's method kept inside a sign-change bracket, falling back to
/// bisection whenever a step leaves the bracket or stalls.
///
/// `fdf` returns `(f(x), f'(x))`. Terminates when the bracket width is
/// below `rel_tol * |x|` or `|f| <= f_tol`.
pub fn newton_safeguarded<F: FnMut(f64) -> (f64, f64)>(
    mut fdf: F,
    mut lo: f64,
    mut hi: f64,
    rel_tol: f64,
    f_tol: f64,
    max_iter: usize,
) -> Result<f64> {
    let (flo, _) = fdf(lo);
    let (fhi, _) = fdf(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() || !flo.is_finite() || !fhi.is_finite() {
        return Err(Error::convergence(
            "newton_safeguarded",
            format!("no sign change on [{lo}, {hi}]: f = ({flo}, {fhi})"),
        ));
    }
    let increasing = fhi > 0.0;
    let mut x = 0.5 * (lo + hi);
    let mut step_old = hi - lo;
    for _ in 0..max_iter {
        let (fx, dfx) = fdf(x);
        if !fx.is_finite() {
            x = 0.5 * (lo + hi);
            continue;
        }
        if fx.abs() <= f_tol {
            return Ok(x);
        }
        if (fx > 0.0) == increasing {
            hi = x;
        } else {
            lo = x;
        }
        if hi - lo <= rel_tol * x.abs().max(f64::MIN_POSITIVE) {
            return Ok(0.5 * (lo + hi));
        }
        let newton = x - fx / dfx;
        // bisect when Newton leaves the bracket or is not halving the step
        let slow = (2.0 * fx).abs() > (step_old * dfx).abs();
        let next =
            if dfx.is_finite() && dfx != 0.0 && newton > lo && newton < hi && !slow { newton } else { 0.5 * (lo + hi) };
        step_old = (next - x).abs();
        if step_old == 0.0 {
            return Ok(x);
        }
        x = next;
    }
    Err(Error::convergence(
        "newton_safeguarded",
        format!("no convergence after {max_iter} iterations, bracket [{lo}, {hi}]"),
    ))
}

/// Brent's method on a sign-change bracket.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, x_tol: f64, max_iter: usize) -> Result<f64> {
    let mut a = lo;
    let mut b = hi;
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return Err(Error::convergence("brent", format!("no sign change on [{lo}, {hi}]: f = ({fa}, {fb})")));
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * x_tol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Err(Error::convergence("brent", format!("no convergence after {max_iter} iterations")))
}

/// Solve `g(x) = target` for nondecreasing `g` on [lo, hi] by bisection,
/// stopping when |g(x) - target| <= `value_tol` or the bracket collapses.
pub fn bisect_increasing<G: FnMut(f64) -> f64>(mut g: G, target: f64, mut lo: f64, mut hi: f64, value_tol: f64) -> f64 {
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..400 {
        mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = g(mid);
        if (v - target).abs() <= value_tol {
            break;
        }
        if v < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    mid
}
