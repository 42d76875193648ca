//! Riemann zeta, its derivative and Euler's constant by Euler–Maclaurin summation.

use crate::error::{CrError, Result};

/// `B_{2k}` for `k = 1..=20` as exact fractions.
const BERNOULLI: [(f64, f64); 20] = [
    (1.0, 6.0),
    (-1.0, 30.0),
    (1.0, 42.0),
    (-1.0, 30.0),
    (5.0, 66.0),
    (-691.0, 2730.0),
    (7.0, 6.0),
    (-3617.0, 510.0),
    (43867.0, 798.0),
    (-174611.0, 330.0),
    (854513.0, 138.0),
    (-236364091.0, 2730.0),
    (8553103.0, 6.0),
    (-23749461029.0, 870.0),
    (8615841276005.0, 14322.0),
    (-7709321041217.0, 510.0),
    (2577687858367.0, 6.0),
    (-26315271553053477373.0, 1919190.0),
    (2929993913841559.0, 6.0),
    (-261082718496449122051.0, 13530.0),
];

fn bernoulli(k: usize) -> f64 {
    let (n, d) = BERNOULLI[k - 1];
    n / d
}

#[derive(Debug, Clone, Copy)]
struct EmSum {
    value: f64,
    derivative: f64,
    error: f64,
}

fn cutoff(s: f64) -> u32 {
    // fewer explicit terms for s < 0 limits cancellation in Σ n^{-s}
    if s < 0.0 {
        6
    } else {
        10
    }
}

/// `Σ_{k ≥ start} k^{-s}` (continued) and its `s`-derivative.
fn euler_maclaurin(s: f64, start: u32) -> EmSum {
    let n = cutoff(s).max(start + 1);
    let nf = n as f64;
    let ln_n = nf.ln();

    let mut value = 0.0;
    let mut derivative = 0.0;
    for k in (start..n).rev() {
        let kf = k as f64;
        let t = kf.powf(-s);
        value += t;
        derivative -= kf.ln() * t;
    }

    let n_s = nf.powf(-s);
    let n_1s = nf * n_s;
    value += n_1s / (s - 1.0) + 0.5 * n_s;
    derivative += -ln_n * n_1s / (s - 1.0) - n_1s / ((s - 1.0) * (s - 1.0)) - 0.5 * ln_n * n_s;

    // B_{2j}/(2j)! · P_j(s) · n^{-s-2j+1},  P_j(s) = s(s+1)…(s+2j−2)
    let mut p = s;
    let mut dp = 1.0;
    let mut fact = 2.0;
    let mut pow = n_s / nf;
    let mut error = f64::INFINITY;
    let mut last = f64::INFINITY;
    for j in 1..=BERNOULLI.len() {
        if j > 1 {
            let a = s + (2 * j - 3) as f64;
            let b = s + (2 * j - 2) as f64;
            dp = dp * a * b + p * (a + b);
            p *= a * b;
            fact *= ((2 * j - 1) * (2 * j)) as f64;
            pow /= nf * nf;
        }
        let c = bernoulli(j) / fact;
        let term = c * p * pow;
        let dterm = c * (dp - ln_n * p) * pow;
        let size = term.abs().max(dterm.abs());
        if size > last {
            break;
        }
        value += term;
        derivative += dterm;
        error = size;
        last = size;
        if size <= 1e-18 * value.abs().max(f64::MIN_POSITIVE) && size <= 1e-18 * derivative.abs().max(1e-300) {
            break;
        }
    }
    EmSum { value, derivative, error }
}

/// `ζ(s)` for real `s ≠ 1`.
pub fn riemann_zeta(s: f64) -> Result<f64> {
    if s == 1.0 {
        return Err(CrError::Pole(s));
    }
    Ok(euler_maclaurin(s, 1).value)
}

/// `ζ(s) − 1 = Σ_{k≥2} k^{-s}`, without cancellation for large `s`.
pub fn riemann_zeta_minus_one(s: f64) -> Result<f64> {
    if s == 1.0 {
        return Err(CrError::Pole(s));
    }
    Ok(euler_maclaurin(s, 2).value)
}

/// `ζ′(s)` for real `s ≠ 1`.
pub fn riemann_zeta_prime(s: f64) -> Result<f64> {
    if s == 1.0 {
        return Err(CrError::Pole(s));
    }
    Ok(euler_maclaurin(s, 1).derivative)
}

/// Truncation error estimate of the Euler–Maclaurin evaluation at `s`.
pub fn riemann_zeta_error(s: f64) -> f64 {
    euler_maclaurin(s, 1).error
}

/// Euler's constant `γ = lim (H_n − ln n)`.
pub fn euler_gamma() -> f64 {
    let n = 10u32;
    let nf = n as f64;
    let harmonic: f64 = (1..n).rev().map(|k| 1.0 / k as f64).sum();
    let mut g = harmonic - nf.ln() + 0.5 / nf;
    let mut pow = 1.0;
    for k in 1..=BERNOULLI.len() {
        pow /= nf * nf;
        g += bernoulli(k) / (2 * k) as f64 * pow;
    }
    g
}

/// `ζ′(−1)`.
pub fn zeta_prime_minus_one() -> f64 {
    euler_maclaurin(-1.0, 1).derivative
}
