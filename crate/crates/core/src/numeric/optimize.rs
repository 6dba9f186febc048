//! One-dimensional minimization.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenResult {
    pub x: f64,
    pub value: f64,
    pub evaluations: usize,
}

/// Golden-section search for a minimum of `f` on [lo, hi], stopping when
/// the bracket is narrower than `tol`.
pub fn golden_section<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    max_iter: usize,
) -> GoldenResult {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut evaluations = 2;
    for _ in 0..max_iter {
        if (hi - lo).abs() <= tol {
            break;
        }
        // NaN compares false, so a failed evaluation is treated as +inf
        if f1 < f2 || f2.is_nan() {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
        evaluations += 1;
    }
    if f1 <= f2 || f2.is_nan() {
        GoldenResult { x: x1, value: f1, evaluations }
    } else {
        GoldenResult { x: x2, value: f2, evaluations }
    }
}

/// Coarse uniform scan of [lo, hi] followed by golden-section refinement
/// between the neighbours of the best grid point. Guards the golden search
/// against the secondary minima that noisy objectives (KS over data) have.
pub fn grid_then_golden<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    grid_points: usize,
    tol: f64,
    max_iter: usize,
) -> GoldenResult {
    let n = grid_points.max(3);
    let step = (hi - lo) / (n - 1) as f64;
    let mut best_i = 0;
    let mut best_v = f64::INFINITY;
    for i in 0..n {
        let x = lo + step * i as f64;
        let v = f(x);
        if v < best_v {
            best_v = v;
            best_i = i;
        }
    }
    let grid_best = lo + step * best_i as f64;
    let a = lo + step * best_i.saturating_sub(1) as f64;
    let b = lo + step * (best_i + 1).min(n - 1) as f64;
    let mut refined = golden_section(&mut f, a, b, tol, max_iter);
    refined.evaluations += n;
    if refined.value <= best_v {
        refined
    } else {
        GoldenResult { x: grid_best, value: best_v, evaluations: refined.evaluations }
    }
}
