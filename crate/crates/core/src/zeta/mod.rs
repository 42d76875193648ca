//! Spectral zeta functions and regularized determinants.

mod riemann;

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{CrError, Result};
use crate::numeric::Neumaier;

pub use riemann::{
    euler_gamma, riemann_zeta, riemann_zeta_error, riemann_zeta_minus_one, riemann_zeta_prime, zeta_prime_minus_one,
};

/// Positive eigenvalues with multiplicities; zero modes are only counted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralSequence {
    pub levels: Vec<(f64, u64)>,
    pub kernel_dim: usize,
}

impl SpectralSequence {
    pub fn new(levels: Vec<(f64, u64)>, kernel_dim: usize) -> Result<Self> {
        for (i, &(l, m)) in levels.iter().enumerate() {
            if !(l.is_finite() && l > 0.0) || m == 0 {
                return Err(CrError::Hypothesis(format!("level {i} must have λ > 0 and multiplicity ≥ 1")));
            }
            if i > 0 && l < levels[i - 1].0 {
                return Err(CrError::Hypothesis("levels must be ascending".into()));
            }
        }
        Ok(SpectralSequence { levels, kernel_dim })
    }

    /// `λ_j = κ j(j+1)`, `m_j = 2(j+1)` for `j = 1..=n`, one zero mode.
    pub fn sphere(n: usize, kappa: f64) -> Self {
        let levels = (1..=n as u64).map(|j| (kappa * (j * (j + 1)) as f64, 2 * (j + 1))).collect();
        SpectralSequence { levels, kernel_dim: 1 }
    }

    /// Groups raw eigenvalues; values with `|λ| ≤ zero_tol` become kernel.
    pub fn from_eigenvalues(values: &[f64], zero_tol: f64) -> Result<Self> {
        let mut v: Vec<f64> = values.to_vec();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut kernel_dim = 0;
        let mut levels: Vec<(f64, u64)> = Vec::new();
        for x in v {
            if x.abs() <= zero_tol {
                kernel_dim += 1;
                continue;
            }
            if x < 0.0 {
                return Err(CrError::Hypothesis(format!("negative eigenvalue {x}")));
            }
            match levels.last_mut() {
                Some((l, m)) if (x - *l).abs() <= 1e-12 * x => *m += 1,
                _ => levels.push((x, 1)),
            }
        }
        SpectralSequence::new(levels, kernel_dim)
    }

    pub fn scaled(&self, c: f64) -> Self {
        SpectralSequence { levels: self.levels.iter().map(|&(l, m)| (c * l, m)).collect(), kernel_dim: self.kernel_dim }
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ZetaMethod {
    Truncated,
    Extrapolated,
    Continued,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZetaResult {
    pub value: f64,
    pub method: ZetaMethod,
    /// `(N, M)`: levels summed and expansion order used.
    pub orders: (usize, usize),
    pub error_estimate: f64,
}

/// Partial sums `Σ_{j ≤ n_k} m_j λ_j^{-s}` at each checkpoint (ascending).
fn partial_sums(seq: &SpectralSequence, s: f64, checkpoints: &[usize]) -> Vec<f64> {
    let mut acc = Neumaier::default();
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next = 0;
    for (j, &(l, m)) in seq.levels.iter().enumerate() {
        while next < checkpoints.len() && checkpoints[next] == j {
            out.push(acc.value());
            next += 1;
        }
        acc.add(m as f64 * l.powf(-s));
    }
    while out.len() < checkpoints.len() {
        out.push(acc.value());
    }
    out
}

fn round_half(x: f64) -> f64 {
    (2.0 * x).round() / 2.0
}

/// Leading decay exponent `p` of the remainder `Σ_{j>n} m_j λ_j^{-s} ~ n^{-p}`,
/// from power-law fits of `λ_j` and `m_j` over the last octave.
fn remainder_exponent(seq: &SpectralSequence, s: f64, n: usize) -> Option<f64> {
    if n < 8 || n > seq.len() {
        return None;
    }
    let (l1, m1) = seq.levels[n - 1];
    let (l0, m0) = seq.levels[n / 2 - 1];
    let ratio = n as f64 / (n / 2) as f64;
    let alpha = round_half((l1 / l0).ln() / ratio.ln());
    let beta = round_half((m1 as f64 / m0 as f64).ln() / ratio.ln());
    let p = alpha * s - beta - 1.0;
    (p > 0.0).then_some(p)
}

/// `Σ_{j ≤ n} m_j λ_j^{-s}`. The error estimate is the fitted size of the
/// remainder when the series converges, infinite otherwise.
pub fn zeta_truncated(seq: &SpectralSequence, s: f64, n: usize) -> ZetaResult {
    let n = n.min(seq.len());
    let sums = partial_sums(seq, s, &[n / 2, n]);
    let error_estimate = match remainder_exponent(seq, s, n) {
        Some(p) => {
            let r = n as f64 / (n / 2) as f64;
            (sums[1] - sums[0]).abs() / (r.powf(p) - 1.0)
        }
        None => f64::INFINITY,
    };
    ZetaResult { value: sums[1], method: ZetaMethod::Truncated, orders: (n, 0), error_estimate }
}

/// Partial sums at `n, n/2, n/4, …` extrapolated to `n → ∞` assuming a remainder
/// expansion in powers `n^{-(p+i)}`, `i = 0, 1, …`.
pub fn zeta_extrapolated(seq: &SpectralSequence, s: f64, n: usize) -> Result<ZetaResult> {
    let n = n.min(seq.len());
    let p = remainder_exponent(seq, s, n)
        .ok_or_else(|| CrError::Unsupported(format!("series does not converge at s = {s} or too few levels")))?;
    let mut ns: Vec<usize> = Vec::new();
    let mut k = n;
    while k >= 64 && ns.len() < 7 {
        ns.push(k);
        k /= 2;
    }
    if ns.len() < 2 {
        return Err(CrError::InsufficientOrder { got: n, min: 128 });
    }
    ns.reverse();
    let sums = partial_sums(seq, s, &ns);
    let solve = |count: usize| -> Result<f64> {
        // S(n_k) = S∞ + Σ_{i<count-1} a_i (n_k/n)^{-(p+i)}
        let top = n as f64;
        let rows = &ns[ns.len() - count..];
        let vals = &sums[sums.len() - count..];
        let m = DMatrix::from_fn(count, count, |r, c| {
            if c == 0 {
                1.0
            } else {
                (rows[r] as f64 / top).powf(-(p + (c - 1) as f64))
            }
        });
        let sol = m
            .lu()
            .solve(&DVector::from_column_slice(vals))
            .ok_or_else(|| CrError::Singular("extrapolation system".into()))?;
        Ok(sol[0])
    };
    let depth = ns.len();
    let best = solve(depth)?;
    let prev = solve(depth - 1)?;
    Ok(ZetaResult {
        value: best,
        method: ZetaMethod::Extrapolated,
        orders: (n, depth - 1),
        error_estimate: (best - prev).abs(),
    })
}

/// Binomial coefficients `c_m(s) = (s)_m / m!` of `(1 − 1/k)^{-s}`.
fn binomial_coefficients(s: f64, count: usize) -> Vec<f64> {
    let mut c = Vec::with_capacity(count);
    let mut v = 1.0;
    for m in 0..count {
        if m > 0 {
            v *= (s + (m - 1) as f64) / m as f64;
        }
        c.push(v);
    }
    c
}

/// `c_m′(s0)` at a zero `s0 = −i0` of `c_m`.
fn binomial_derivative_at_zero(i0: usize, m: usize) -> f64 {
    let s0 = -(i0 as f64);
    let mut v = 1.0;
    for i in 0..m {
        if i != i0 {
            v *= s0 + i as f64;
        }
        v /= (i + 1) as f64;
    }
    v
}

const MAX_EXPANSION: usize = 400;

/// Sphere zeta `ζ_A(s) = 2 Σ_j (j+1)(j(j+1))^{-s}`, continued to all real `s` through
/// `2 Σ_m c_m(s) (ζ_R(2s−1+m) − 1)`. At least `m_min` expansion terms are used;
/// summation continues until terms are negligible.
pub fn sphere_zeta_continued(s: f64, m_min: usize) -> Result<ZetaResult> {
    if m_min < 3 {
        return Err(CrError::InsufficientOrder { got: m_min, min: 3 });
    }
    let coeffs = binomial_coefficients(s, MAX_EXPANSION);
    let mut acc = Neumaier::default();
    let mut last = f64::INFINITY;
    let mut quiet = 0;
    let mut used = 0;
    for (m, &c) in coeffs.iter().enumerate() {
        let x = 2.0 * s - 1.0 + m as f64;
        let term = if (x - 1.0).abs() < 1e-14 {
            // s0 = 1 − m/2; removable when c_m vanishes there
            if m >= 2 && m % 2 == 0 {
                binomial_derivative_at_zero(m / 2 - 1, m) * 0.5
            } else {
                return Err(CrError::Pole(s));
            }
        } else if c == 0.0 {
            0.0
        } else {
            c * riemann_zeta_minus_one(x)?
        };
        acc.add(term);
        used = m + 1;
        last = term.abs();
        if m + 1 >= m_min {
            if last <= 1e-17 * acc.value().abs().max(1e-300) {
                quiet += 1;
                if quiet >= 2 {
                    break;
                }
            } else {
                quiet = 0;
            }
        }
    }
    Ok(ZetaResult {
        value: 2.0 * acc.value(),
        method: ZetaMethod::Continued,
        orders: (0, used),
        error_estimate: 2.0 * last,
    })
}

/// `ζ_A(0) = 2(ζ_R(−1) − 1 + 1/4)`.
pub fn sphere_zeta_zero() -> f64 {
    2.0 * (riemann_zeta(-1.0).expect("regular point") - 1.0 + 0.25)
}

/// `ζ_A′(0) = 2[2ζ_R′(−1) + ζ_R(0) − 1 + 1/4 + (γ−1)/2 + Σ_{m≥3} (ζ_R(m−1) − 1)/m]`,
/// the series summed explicitly to order `m_max`, the remainder reported as error.
pub fn zeta_prime_zero_sphere(m_max: usize) -> Result<ZetaResult> {
    if m_max < 5 {
        return Err(CrError::InsufficientOrder { got: m_max, min: 5 });
    }
    let head = 2.0 * zeta_prime_minus_one() + riemann_zeta(0.0)? - 1.0 + 0.25 + 0.5 * (euler_gamma() - 1.0);
    let mut series = Neumaier::default();
    for m in 3..=m_max {
        series.add(riemann_zeta_minus_one((m - 1) as f64)? / m as f64);
    }
    let mut tail = Neumaier::default();
    for m in m_max + 1..m_max + MAX_EXPANSION {
        let t = riemann_zeta_minus_one((m - 1) as f64)? / m as f64;
        tail.add(t);
        if t < 1e-20 {
            break;
        }
    }
    Ok(ZetaResult {
        value: 2.0 * (head + series.value() + tail.value()),
        method: ZetaMethod::Continued,
        orders: (0, m_max),
        error_estimate: 2.0 * tail.value().abs(),
    })
}

/// `det A = exp(−ζ_A′(0))` for the sphere sequence scaled by `κ`.
pub fn sphere_log_det(kappa: f64) -> Result<f64> {
    // ζ_{κA}′(0) = ζ_A′(0) − ln κ · ζ_A(0)
    let zp = zeta_prime_zero_sphere(30)?.value - kappa.ln() * sphere_zeta_zero();
    Ok(-zp)
}

/// Sphere zeta for the sequence `κ j(j+1)`: `κ^{-s} ζ_A(s)`.
pub fn sphere_zeta_scaled(s: f64, kappa: f64, m_min: usize) -> Result<ZetaResult> {
    let mut r = sphere_zeta_continued(s, m_min)?;
    let f = kappa.powf(-s);
    r.value *= f;
    r.error_estimate *= f;
    Ok(r)
}

/// Five-point central difference of `s ↦ κ^{-s} ζ_A(s)` at `s`.
pub fn sphere_zeta_prime_fd(s: f64, kappa: f64, h: f64) -> Result<f64> {
    let f = |x: f64| sphere_zeta_scaled(x, kappa, 20).map(|r| r.value);
    Ok((f(s - 2.0 * h)? - 8.0 * f(s - h)? + 8.0 * f(s + h)? - f(s + 2.0 * h)?) / (12.0 * h))
}

/// `ζ_A(0) = −(1/24π²) ∫Q′ dν − 1`.
pub fn conformal_index(total_qprime: f64) -> f64 {
    // written through a = ∫Q′/16π² so that a = 1 gives −5/3 to the last bit
    let a = total_qprime / (16.0 * PI * PI);
    -(2.0 * a + 3.0) / 3.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetScaling {
    pub scale: f64,
    /// `det(A_{c²θ})` from the rescaled spectrum's own `ζ′(0)`.
    pub lhs: f64,
    /// `c^{-4ζ(0)} det(A_θ)`.
    pub rhs: f64,
    pub defect: f64,
    /// `(Vol/V)^{ζ(0)} det` before and after scaling.
    pub invariant_before: f64,
    pub invariant_after: f64,
    pub invariant_defect: f64,
}

/// Scaling `θ ↦ c²θ` multiplies the sphere spectrum (base normalization `κ`) by `c^{-4}`
/// and the volume by `c⁴`.
pub fn det_scaling_check(kappa: f64, c: f64) -> Result<DetScaling> {
    if !(c > 0.0 && kappa > 0.0) {
        return Err(CrError::Hypothesis("scale and κ must be positive".into()));
    }
    let zeta0 = sphere_zeta_continued(0.0, 20)?.value;
    let det = (-(zeta_prime_zero_sphere(30)?.value - kappa.ln() * zeta0)).exp();
    let scaled = kappa * c.powi(-4);
    let lhs = if c == 1.0 {
        det
    } else {
        // κ^{-s} has derivatives growing like |ln κ|^k, while the continued values
        // carry ~1e-13 noise that small steps amplify; Richardson on two five-point
        // stencils lets the step stay moderate
        let h = 5e-3 / (1.0 + scaled.ln().abs());
        let coarse = sphere_zeta_prime_fd(0.0, scaled, h)?;
        let fine = sphere_zeta_prime_fd(0.0, scaled, h / 2.0)?;
        (-(16.0 * fine - coarse) / 15.0).exp()
    };
    let rhs = c.powf(-4.0 * zeta0) * det;
    let invariant_before = det;
    let invariant_after = c.powi(4).powf(zeta0) * lhs;
    Ok(DetScaling {
        scale: c,
        lhs,
        rhs,
        defect: ((lhs - rhs) / rhs).abs(),
        invariant_before,
        invariant_after,
        invariant_defect: ((invariant_after - invariant_before) / invariant_before).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncated_examples() {
        let seq = SpectralSequence::sphere(100_000, 1.0);
        assert_eq!(zeta_truncated(&seq, 2.0, 1).value, 1.0);
        assert_eq!(zeta_truncated(&seq, 2.0, 0).value, 0.0);
        let a = zeta_truncated(&seq, 2.0, 10_000).value;
        let b = zeta_truncated(&seq, 2.0, 100_000).value;
        assert!((a - b).abs() < 1e-7);
        assert!(b > a);
    }

    #[test]
    fn continued_at_zero() {
        let z = sphere_zeta_continued(0.0, 3).unwrap();
        assert!((z.value + 5.0 / 3.0).abs() < 1e-12);
        assert!((sphere_zeta_zero() + 5.0 / 3.0).abs() < 1e-14);
        assert_eq!(conformal_index(16.0 * PI * PI), -5.0 / 3.0);
        assert_eq!(conformal_index(0.0), -1.0);
        assert!((conformal_index(24.0 * PI * PI) + 2.0).abs() < 1e-15);
    }

    #[test]
    fn continued_matches_references() {
        // arbitrary-precision references
        for (s, want) in [
            (1.5, 2.547326730707586931315687),
            (2.0, 1.28986813369645287294483),
            (3.0, 0.5345094052298299519649853),
            (0.25, -3.022744325701086010074642),
            (-0.7, -0.08892221087442117232273363),
        ] {
            let got = sphere_zeta_continued(s, 20).unwrap().value;
            assert!((got - want).abs() < 1e-12 * want.abs().max(1.0), "s={s}: {got} vs {want}");
        }
    }

    #[test]
    fn residue_at_one() {
        for k in 4..8 {
            let h = 10f64.powi(-k);
            let r = h * sphere_zeta_continued(1.0 + h, 20).unwrap().value;
            assert!((r - 1.0).abs() < 10.0 * h, "k={k}: {r}");
        }
        assert!(matches!(sphere_zeta_continued(1.0, 20), Err(CrError::Pole(_))));
        assert!(matches!(sphere_zeta_continued(0.5, 20), Err(CrError::Pole(_))));
        assert!(matches!(sphere_zeta_continued(2.0, 2), Err(CrError::InsufficientOrder { .. })));
    }

    #[test]
    fn derivative_at_zero() {
        let a = zeta_prime_zero_sphere(20).unwrap();
        let b = zeta_prime_zero_sphere(30).unwrap();
        assert!((a.value - b.value).abs() < 1e-10);
        assert!(b.error_estimate < a.error_estimate);
        assert!((b.value - -2.999561641211149200416338).abs() < 1e-12);
        let fd = sphere_zeta_prime_fd(0.0, 1.0, 1e-3).unwrap();
        assert!((fd - b.value).abs() < 1e-9);
        let fd2 =
            (sphere_zeta_continued(1e-5, 20).unwrap().value - sphere_zeta_continued(-1e-5, 20).unwrap().value) / 2e-5;
        assert!((fd2 - b.value).abs() < 1e-6);
        assert!(sphere_log_det(1.0).unwrap().exp() > 0.0);
        assert!(matches!(zeta_prime_zero_sphere(4), Err(CrError::InsufficientOrder { .. })));
    }

    #[test]
    fn extrapolation_agrees_with_continuation() {
        let seq = SpectralSequence::sphere(100_000, 1.0);
        for s in [1.5, 2.0, 3.0] {
            let t = zeta_extrapolated(&seq, s, 100_000).unwrap();
            let c = sphere_zeta_continued(s, 20).unwrap();
            assert!(((t.value - c.value) / c.value).abs() < 1e-9, "s={s}: {} vs {}", t.value, c.value);
        }
    }

    #[test]
    fn error_estimates_shrink() {
        let seq = SpectralSequence::sphere(20_000, 1.0);
        for s in [1.5, 2.0, 3.0] {
            let a = zeta_truncated(&seq, s, 1000).error_estimate;
            let b = zeta_truncated(&seq, s, 10_000).error_estimate;
            assert!(b < a);
            let c = sphere_zeta_continued(s, 20).unwrap().value;
            let raw = zeta_truncated(&seq, s, 10_000);
            assert!((c - raw.value).abs() < 2.0 * raw.error_estimate);
        }
    }

    #[test]
    fn scaling_law() {
        let one = det_scaling_check(1.0, 1.0).unwrap();
        assert_eq!(one.defect, 0.0);
        for c in [0.5, 2.0, 10.0] {
            let r = det_scaling_check(1.0, c).unwrap();
            assert!(r.defect < 1e-8, "c={c}: {r:?}");
            assert!(r.invariant_defect < 1e-8);
        }
    }

    #[test]
    fn kappa_shifts_derivative_only() {
        let z0 = sphere_zeta_scaled(0.0, 4.0, 20).unwrap().value;
        assert!((z0 + 5.0 / 3.0).abs() < 1e-12);
        let fd = sphere_zeta_prime_fd(0.0, 4.0, 1e-3).unwrap();
        let want = zeta_prime_zero_sphere(30).unwrap().value - 4f64.ln() * z0;
        assert!((fd - want).abs() < 1e-9);
    }

    #[test]
    fn eigenvalue_grouping() {
        let seq = SpectralSequence::from_eigenvalues(&[6.0, 0.0, 2.0, 2.0, 1e-14], 1e-10).unwrap();
        assert_eq!(seq.kernel_dim, 2);
        assert_eq!(seq.levels, vec![(2.0, 2), (6.0, 1)]);
        assert!(SpectralSequence::from_eigenvalues(&[-1.0], 1e-10).is_err());
    }
}
