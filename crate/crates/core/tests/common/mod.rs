// Reference computations written independently of the library: plain
// quadrature, series, brute-force statistics.
#![allow(dead_code, clippy::too_many_arguments, clippy::needless_range_loop)]

use incomefit::data::{Observation, WeightedSample};
use incomefit::distributions::Params;

/// Adaptive Simpson on [a, b].
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Tanh-sinh quadrature on (a, b); tolerates integrable endpoint
/// singularities.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let h = 1.0 / 64.0;
    let mut sum = 0.0;
    let kmax = (4.0 / h) as i64;
    for k in -kmax..=kmax {
        let t = k as f64 * h;
        let s = std::f64::consts::FRAC_PI_2 * t.sinh();
        let u = s.tanh();
        let w = std::f64::consts::FRAC_PI_2 * t.cosh() / s.cosh().powi(2);
        // distance to the nearer end, computed without cancellation
        let gap = half / (s.abs().exp() * s.cosh());
        let x = if u < 0.0 { a + gap } else { b - gap };
        if x <= a || x >= b || w == 0.0 {
            continue;
        }
        let v = f(x);
        if v.is_finite() {
            sum += w * v;
        }
    }
    sum * half * h
}

/// Integral over [a, inf) by the substitution x = a + t/(1-t).
pub fn tanh_sinh_to_infinity<F: Fn(f64) -> f64>(f: &F, a: f64) -> f64 {
    tanh_sinh(
        &|t: f64| {
            let one_minus = 1.0 - t;
            f(a + t / one_minus) / (one_minus * one_minus)
        },
        0.0,
        1.0,
    )
}

/// ln Γ(x) for x > 0 from the Stirling series after shifting x above 15.
pub fn ln_gamma_stirling(mut x: f64) -> f64 {
    let mut shift = 0.0;
    while x < 15.0 {
        shift -= x.ln();
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0))));
    shift + (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + series
}

/// Dirichlet eta by Borwein's accelerated alternating sum.
pub fn eta(s: f64) -> f64 {
    let n = 40usize;
    let nf = n as f64;
    let mut term = 1.0 / nf;
    let mut d = vec![0.0; n + 1];
    let mut acc = term;
    d[0] = nf * acc;
    for i in 0..n {
        let i_f = i as f64;
        term *= 4.0 * (nf + i_f) * (nf - i_f) / ((2.0 * i_f + 1.0) * (2.0 * i_f + 2.0));
        acc += term;
        d[i + 1] = nf * acc;
    }
    let dn = d[n];
    let mut sum = 0.0;
    for (k, dk) in d.iter().take(n).enumerate() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * (dk - dn) / ((k + 1) as f64).powf(s);
    }
    -sum / dn
}

pub fn zeta_via_eta(s: f64) -> f64 {
    eta(s) / (1.0 - 2f64.powf(1.0 - s))
}

pub fn central_difference<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Q(a, z) by quadrature of the gamma integrand.
pub fn upper_gamma_by_quadrature(a: f64, z: f64) -> f64 {
    let ln_g = ln_gamma_stirling(a);
    tanh_sinh_to_infinity(&|t: f64| ((a - 1.0) * t.ln() - t - ln_g).exp(), z)
}

/// Davis CDF on the shifted axis as a series of incomplete gammas:
/// F(u) = sum_k k^-a Q(a, k b / u) / zeta(a).
pub fn davis_cdf_series(alpha: f64, beta: f64, u: f64) -> f64 {
    let mut sum = 0.0;
    for k in 1..2000 {
        let kf = k as f64;
        let q = upper_gamma_by_quadrature(alpha, kf * beta / u);
        let term = kf.powf(-alpha) * q;
        sum += term;
        if term < 1e-16 * sum {
            break;
        }
    }
    sum / zeta_via_eta(alpha)
}

/// Solve a small dense system by Gaussian elimination with partial pivoting.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Least squares through the normal equations.
pub fn normal_equations(design: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let p = design[0].len();
    let mut ata = vec![vec![0.0; p]; p];
    let mut aty = vec![0.0; p];
    for (row, &yi) in design.iter().zip(y) {
        for i in 0..p {
            aty[i] += row[i] * yi;
            for j in 0..p {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    solve_dense(ata, aty)
}

/// Weighted Gini as the mean absolute difference over all pairs, O(n^2).
pub fn gini_pairs(x: &[f64], w: &[f64]) -> f64 {
    let total: f64 = w.iter().sum();
    let mean = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / total;
    let mut s = 0.0;
    for (xi, wi) in x.iter().zip(w) {
        for (xj, wj) in x.iter().zip(w) {
            s += wi * wj * (xi - xj).abs();
        }
    }
    s / (2.0 * total * total * mean)
}

/// Gini from the trapezoidal area under the Lorenz curve of sorted data.
pub fn gini_lorenz(x_sorted: &[f64], w: &[f64]) -> f64 {
    let total_w: f64 = w.iter().sum();
    let total_x: f64 = x_sorted.iter().zip(w).map(|(a, b)| a * b).sum();
    let mut area = 0.0;
    let mut prev_l = 0.0;
    for (xi, wi) in x_sorted.iter().zip(w) {
        let l = prev_l + xi * wi / total_x;
        area += wi / total_w * (prev_l + l) / 2.0;
        prev_l = l;
    }
    1.0 - 2.0 * area
}

pub fn unit_sample(incomes: &[f64]) -> WeightedSample {
    WeightedSample::from_incomes(incomes).unwrap()
}

pub fn weighted_sample(pairs: &[(f64, f64)]) -> WeightedSample {
    let obs: Vec<Observation> = pairs.iter().map(|&(income, weight)| Observation { income, weight }).collect();
    WeightedSample::new(&obs).unwrap()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

pub fn scale_of(p: &Params) -> f64 {
    match *p {
        Params::InverseGamma { beta, .. }
        | Params::Davis { beta, .. }
        | Params::Gb2 { beta, .. }
        | Params::Dagum { beta, .. }
        | Params::Burr { beta, .. }
        | Params::Fisk { beta, .. } => beta,
        Params::CssInverseGamma { alpha, year, constants } => constants.scale_shift(year as f64, alpha).0,
        Params::LognormalParetoCutoff { mu, .. } | Params::LognormalParetoMixture { mu, .. } => mu.exp(),
    }
}

/// Points where the density may jump or kink.
pub fn breaks(p: &Params) -> Vec<f64> {
    match *p {
        Params::LognormalParetoCutoff { k, .. } => vec![k],
        Params::LognormalParetoMixture { x_m, c, .. } => vec![x_m + c],
        _ => vec![],
    }
}

/// Integral of f over the support of p, split at the scale and any breaks.
pub fn integrate_support<F: Fn(f64) -> f64>(p: &Params, f: F) -> f64 {
    let c = p.shift();
    let mut cuts = vec![c, c + scale_of(p)];
    cuts.extend(breaks(p));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += tanh_sinh(&f, w[0], w[1]);
    }
    total + tanh_sinh_to_infinity(&f, *cuts.last().unwrap())
}
