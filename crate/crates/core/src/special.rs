//! Special functions used by the densities and the likelihood equations.
//!
//! Public functions validate their arguments and return [`Result`]; the
//! crate-internal `*_raw` variants skip validation and are used in inner
//! loops where the arguments are already known to be in range.

use crate::error::{Error, Result};

/// ln(sqrt(2 pi))
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
/// 1/sqrt(2 pi)
const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Bernoulli numbers B_2, B_4, ..., B_20.
const BERNOULLI_2K: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174_611.0 / 330.0,
];

fn check_positive(function: &'static str, name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(function, format!("{name} = {x} must be positive and finite")))
    }
}

/// log Γ(x) for x > 0.
pub fn log_gamma(x: f64) -> Result<f64> {
    check_positive("log_gamma", "x", x)?;
    Ok(log_gamma_raw(x))
}

pub(crate) fn log_gamma_raw(x: f64) -> f64 {
    if x < 0.5 {
        // Γ(x) = Γ(x + 1) / x keeps the Lanczos sum away from its pole.
        return log_gamma_raw(x + 1.0) - x.ln();
    }
    let z = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    LN_SQRT_2PI + (z + 0.5) * t.ln() - t + acc.ln()
}

/// Digamma ψ(x) = d/dx log Γ(x) for x > 0.
pub fn digamma(x: f64) -> Result<f64> {
    check_positive("digamma", "x", x)?;
    Ok(digamma_raw(x))
}

pub(crate) fn digamma_raw(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // Asymptotic series: ln x - 1/(2x) - sum B_2k / (2k x^2k)
    let mut series = 0.0;
    let mut pow = inv2;
    for (k, b) in BERNOULLI_2K.iter().take(7).enumerate() {
        series += b / (2.0 * (k + 1) as f64) * pow;
        pow *= inv2;
    }
    acc + x.ln() - 0.5 * inv - series
}

/// Trigamma ψ'(x) for x > 0.
pub fn trigamma(x: f64) -> Result<f64> {
    check_positive("trigamma", "x", x)?;
    Ok(trigamma_raw(x))
}

pub(crate) fn trigamma_raw(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 10.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // 1/x + 1/(2x^2) + sum B_2k / x^(2k+1)
    let mut series = 0.0;
    let mut pow = inv2 * inv;
    for b in BERNOULLI_2K.iter().take(7) {
        series += b * pow;
        pow *= inv2;
    }
    acc + inv + 0.5 * inv2 + series
}

/// Riemann zeta ζ(s) and its derivative ζ'(s) for real s > 1.
///
/// Euler–Maclaurin summation with the tail expansion differentiated
/// term by term, so both values carry the same truncation order.
pub fn zeta_and_derivative(s: f64) -> Result<(f64, f64)> {
    if !(s.is_finite() && s > 1.0) {
        return Err(Error::domain("zeta_and_derivative", format!("s = {s} must exceed 1")));
    }
    Ok(zeta_pair_raw(s))
}

pub(crate) fn zeta_pair_raw(s: f64) -> (f64, f64) {
    let n = 10 + s.ceil() as usize;
    let nf = n as f64;
    let ln_n = nf.ln();

    let mut zeta = 0.0;
    let mut dzeta = 0.0;
    for k in 1..n {
        let kf = k as f64;
        let term = kf.powf(-s);
        zeta += term;
        dzeta -= kf.ln() * term;
    }

    let n_pow = nf.powf(-s); // N^-s
    let sm1 = s - 1.0;
    // N^(1-s)/(s-1)
    let integral = nf * n_pow / sm1;
    zeta += integral + 0.5 * n_pow;
    dzeta += integral * (-ln_n - 1.0 / sm1) - 0.5 * ln_n * n_pow;

    // Bernoulli corrections: B_2j/(2j)! * s(s+1)...(s+2j-2) * N^(-s-2j+1)
    let mut rising = s; // s(s+1)...(s+2j-2)
    let mut dlog_rising = 1.0 / s; // d/ds log(rising)
    let mut factorial = 2.0; // (2j)!
    let mut n_power = n_pow / nf; // N^(-s-1)
    for (j, b) in BERNOULLI_2K.iter().take(8).enumerate() {
        let term = b / factorial * rising * n_power;
        zeta += term;
        dzeta += term * (dlog_rising - ln_n);
        let jj = (j + 1) as f64;
        // advance to j+1: multiply rising by (s+2j-1)(s+2j)
        let a1 = s + 2.0 * jj - 1.0;
        let a2 = s + 2.0 * jj;
        rising *= a1 * a2;
        dlog_rising += 1.0 / a1 + 1.0 / a2;
        factorial *= (2.0 * jj + 1.0) * (2.0 * jj + 2.0);
        n_power /= nf * nf;
    }
    (zeta, dzeta)
}

/// Regularized upper incomplete gamma Q(a, z) = Γ(a, z) / Γ(a).
pub fn regularized_gamma_upper(a: f64, z: f64) -> Result<f64> {
    check_gamma_args("regularized_gamma_upper", a, z)?;
    Ok(gamma_q_raw(a, z))
}

/// Regularized lower incomplete gamma P(a, z) = 1 - Q(a, z).
pub fn regularized_gamma_lower(a: f64, z: f64) -> Result<f64> {
    check_gamma_args("regularized_gamma_lower", a, z)?;
    Ok(gamma_p_raw(a, z))
}

fn check_gamma_args(function: &'static str, a: f64, z: f64) -> Result<()> {
    check_positive(function, "a", a)?;
    if z.is_nan() || z < 0.0 {
        return Err(Error::domain(function, format!("z = {z} must be nonnegative")));
    }
    Ok(())
}

pub(crate) fn gamma_q_raw(a: f64, z: f64) -> f64 {
    if z <= 0.0 {
        1.0
    } else if z.is_infinite() {
        0.0
    } else if z < a + 1.0 {
        1.0 - gamma_series(a, z)
    } else {
        gamma_continued_fraction(a, z)
    }
}

pub(crate) fn gamma_p_raw(a: f64, z: f64) -> f64 {
    if z <= 0.0 {
        0.0
    } else if z.is_infinite() {
        1.0
    } else if z < a + 1.0 {
        gamma_series(a, z)
    } else {
        1.0 - gamma_continued_fraction(a, z)
    }
}

fn gamma_prefactor(a: f64, z: f64) -> f64 {
    (a * z.ln() - z - log_gamma_raw(a)).exp()
}

/// P(a, z) by its power series; converges quickly for z < a + 1.
fn gamma_series(a: f64, z: f64) -> f64 {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..1000 {
        ap += 1.0;
        term *= z / ap;
        sum += term;
        if term.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    sum * gamma_prefactor(a, z)
}

/// Q(a, z) by the Legendre continued fraction (modified Lentz).
fn gamma_continued_fraction(a: f64, z: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = z + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..1000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    gamma_prefactor(a, z) * h
}

/// log B(p, q).
pub fn log_beta(p: f64, q: f64) -> Result<f64> {
    check_positive("log_beta", "p", p)?;
    check_positive("log_beta", "q", q)?;
    Ok(log_beta_raw(p, q))
}

pub(crate) fn log_beta_raw(p: f64, q: f64) -> f64 {
    log_gamma_raw(p) + log_gamma_raw(q) - log_gamma_raw(p + q)
}

/// Regularized incomplete beta I_x(a, b).
pub fn regularized_beta(a: f64, b: f64, x: f64) -> Result<f64> {
    check_positive("regularized_beta", "a", a)?;
    check_positive("regularized_beta", "b", b)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain("regularized_beta", format!("x = {x} outside [0, 1]")));
    }
    Ok(beta_reg_raw(a, b, x, 1.0 - x))
}

/// I_x(a, b) where `y = 1 - x` is supplied separately so that callers can
/// pass an accurately computed complement.
pub(crate) fn beta_reg_raw(a: f64, b: f64, x: f64, y: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if y <= 0.0 {
        return 1.0;
    }
    let front = (a * x.ln() + b * y.ln() - log_beta_raw(a, b)).exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, y) / b
    }
}

fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..2000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal CDF Φ(x).
///
/// Evaluated through the incomplete-gamma identity erfc(t) = Q(1/2, t²),
/// which keeps full relative accuracy in the lower tail.
pub fn normal_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let half_q = 0.5 * gamma_q_raw(0.5, 0.5 * x * x);
    if x < 0.0 {
        half_q
    } else {
        1.0 - half_q
    }
}

/// Upper tail 1 - Φ(x), accurate for large positive x.
pub fn normal_sf(x: f64) -> f64 {
    normal_cdf(-x)
}

/// Inverse standard normal CDF Φ⁻¹(u) for u in (0, 1).
pub fn normal_cdf_inverse(u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::domain("normal_cdf_inverse", format!("u = {u} outside (0, 1)")));
    }
    Ok(normal_cdf_inverse_raw(u))
}

pub(crate) fn normal_cdf_inverse_raw(u: f64) -> f64 {
    // Acklam's rational approximation, then Halley refinement against Φ.
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] =
        [7.784_695_709_041_462e-3, 3.224_671_290_700_398e-1, 2.445_134_137_142_996, 3.754_408_661_907_416];
    const P_LOW: f64 = 0.02425;

    let mut x = if u < P_LOW {
        let q = (-2.0 * u.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if u <= 1.0 - P_LOW {
        let q = u - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - u).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };

    for _ in 0..2 {
        // Work with whichever tail keeps the residual well conditioned.
        let e = if x < 0.0 { normal_cdf(x) - u } else { (1.0 - u) - normal_sf(x) };
        let pdf = normal_pdf(x);
        if pdf <= 0.0 {
            break;
        }
        let step = e / pdf;
        x -= step / (1.0 + 0.5 * x * step);
    }
    x
}
