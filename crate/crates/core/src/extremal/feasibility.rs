//! Best constant `λ`, the feasibility condition on `(c₂, c₃, a)`, and the
//! coercivity chain bounding `F` from above.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::Serialize;

use super::{mean_zero_basis, restrict};
use crate::conformal::ContactState;
use crate::error::{CrError, Result};
use crate::functionals::{functional_f_value, C1};
use crate::model::Model;

/// Largest `‖Tf‖ / ‖Δ_b f‖` over mean-zero coefficient vectors.
pub fn best_constant_lambda(model: &dyn Model) -> Result<f64> {
    lambda_on(model, &mean_zero_basis(model, &[]))
}

/// `λ` restricted to the span of the given coefficient indices.
pub fn best_constant_lambda_on(model: &dyn Model, indices: &[usize]) -> Result<f64> {
    let d = model.dim();
    if indices.is_empty() || indices.iter().any(|&i| i >= d) {
        return Err(CrError::Hypothesis("indices must be nonempty and within the basis".into()));
    }
    let q = DMatrix::from_fn(d, indices.len(), |i, j| if indices[j] == i { 1.0 } else { 0.0 });
    lambda_on(model, &q)
}

fn lambda_on(model: &dyn Model, q: &DMatrix<f64>) -> Result<f64> {
    let g = model.gram();
    let t = model.reeb_matrix();
    let l = model.sublap_matrix();
    let num = restrict(&(t.transpose() * g * t), q);
    let den = restrict(&(l.transpose() * g * l), q);
    let scale = den.abs().max();
    let eig = den.clone().symmetric_eigen();
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min > 1e-12 * scale) {
        return Err(CrError::Singular("Δ_b is singular on the chosen subspace".into()));
    }
    let chol = den.cholesky().ok_or_else(|| CrError::Singular("Δ_b Gram block".into()))?;
    let linv = chol.l().try_inverse().ok_or_else(|| CrError::Singular("Δ_b Gram block".into()))?;
    let s = &linv * num * linv.transpose();
    let s = (&s + s.transpose()) * 0.5;
    let top = s.symmetric_eigenvalues().iter().cloned().fold(0.0f64, f64::max);
    Ok(top.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub c2: f64,
    pub c3: f64,
    pub a: f64,
    pub lambda: f64,
    pub mu: f64,
    /// `μ(√(25c₂² + c₂(1−a)/(3π²)) − 5c₂)`; `−∞` when the radicand is negative.
    pub bound: f64,
    pub feasible: bool,
    /// Open interval of admissible `α`, if nonempty.
    pub alpha_window: Option<(f64, f64)>,
    /// The largest `μ` for which the closed form is equivalent to a nonempty
    /// `α` window: `3/(2λ)`.
    pub mu_sharp: f64,
}

/// Evaluates the closed-form condition `c₃ < bound` and the `α` window.
/// `mu` defaults to `λ/3`.
pub fn condition_feasible(c2: f64, c3: f64, a: f64, lambda: f64, mu: Option<f64>) -> Result<FeasibilityReport> {
    if !(c2 > 0.0) || !c2.is_finite() {
        return Err(CrError::Hypothesis(format!("c2 must be positive, got {c2}")));
    }
    if !(c3 >= 0.0) || !c3.is_finite() {
        return Err(CrError::Hypothesis(format!("c3 must be nonnegative, got {c3}")));
    }
    if !(lambda > 0.0) || !lambda.is_finite() || !a.is_finite() {
        return Err(CrError::Hypothesis("lambda must be positive and a finite".into()));
    }
    let mu = mu.unwrap_or(lambda / 3.0);
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(CrError::Hypothesis(format!("mu must be positive, got {mu}")));
    }
    let radicand = 25.0 * c2 * c2 + c2 * (1.0 - a) / (3.0 * PI * PI);
    let bound = if radicand < 0.0 { f64::NEG_INFINITY } else { mu * (radicand.sqrt() - 5.0 * c2) };
    let x = lambda * c3;
    let lo = (2.0 * c2 + 2.0 * x / 3.0) / c2;
    let hi = (2.0 * c2 - 2.0 * x - 4.0 * C1 * (1.0 - a)) / (c2 + x / 3.0);
    let first = 4.0 * C1 * (1.0 - a) - 2.0 * c2 + 2.0 * x < 0.0;
    let alpha_window = (first && lo < hi).then_some((lo, hi));
    Ok(FeasibilityReport { c2, c3, a, lambda, mu, bound, feasible: c3 < bound, alpha_window, mu_sharp: 1.5 / lambda })
}

/// Feasibility for a model, with `a = ∫Q′/16π²` and `λ` computed from it.
pub fn model_feasibility(model: &dyn Model, c2: f64, c3: f64, mu: Option<f64>) -> Result<FeasibilityReport> {
    let a = model.qprime_total() / (16.0 * PI * PI);
    condition_feasible(c2, c3, a, best_constant_lambda(model)?, mu)
}

/// Constants of the upper bound that the chain leaves implicit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuditConstants {
    /// Coefficient of `∫|∇_b w|²`.
    pub c4: f64,
    /// Additive constant; absorbs `c₁Q_tot·C` from the Beckner–Onofri bound.
    pub c5: f64,
}

impl AuditConstants {
    /// `C₄ = c₂ max R + max(0, θ)` where `θ` is the best constant in
    /// `c₁(1−a)(∫wAw − 4∫(Δ_b w)²) ≤ θ∫|∇_b w|²` on mean-zero `w`; `C₅ = 0`,
    /// the Beckner–Onofri constant on the sphere.
    pub fn from_model(model: &dyn Model, c2: f64) -> Result<Self> {
        let a = model.qprime_total() / (16.0 * PI * PI);
        let q = mean_zero_basis(model, &[]);
        let g = model.gram();
        let l = model.sublap_matrix();
        let ga = g * model.a_matrix();
        let excess = restrict(&((&ga + ga.transpose()) * 0.5 - l.transpose() * g * l * 4.0), &q) * (C1 * (1.0 - a));
        let dirichlet = restrict(&((g * l + (g * l).transpose()) * 0.5), &q);
        let chol = dirichlet.cholesky().ok_or_else(|| CrError::Singular("Δ_b is singular off the constants".into()))?;
        let linv = chol.l().try_inverse().ok_or_else(|| CrError::Singular("Dirichlet form".into()))?;
        let s = &linv * excess * linv.transpose();
        let theta =
            ((&s + s.transpose()) * 0.5).symmetric_eigenvalues().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let rmax = model.scalar_curvature().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Ok(AuditConstants { c4: c2 * rmax + theta.max(0.0), c5: 0.0 })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoercivityAudit {
    pub alpha: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub coeff_lap_sq: f64,
    pub coeff_grad_quartic: f64,
    pub constants: AuditConstants,
    /// `α∫(Δ_b w)² + α⁻¹∫|∇_b w|⁴ − 2∫Δ_b w|∇_b w|²`.
    pub young_slack: f64,
}

/// Evaluates `F(w)` and the upper bound
/// `K_Δ∫(Δ_b w)² + K₄∫|∇_b w|⁴ + C₄∫|∇_b w|² + 2∫a₄w − 2ac₁∫Q′w + C₅`
/// for the mean-zero part of `w`, with `2∫a₄w = 2c₁∫Q′w + 2c₂∫wΔ_b R + 2c₃∫wR_{,0}`.
pub fn coercivity_audit(
    state: &ContactState,
    alpha: f64,
    c2: f64,
    c3: f64,
    constants: Option<AuditConstants>,
) -> Result<CoercivityAudit> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(CrError::Hypothesis(format!("alpha must be positive, got {alpha}")));
    }
    if !(c2 > 0.0) || !(c3 >= 0.0) {
        return Err(CrError::Hypothesis("requires c2 > 0 and c3 ≥ 0".into()));
    }
    let m = state.model;
    let constants = match constants {
        Some(c) => c,
        None => AuditConstants::from_model(m, c2)?,
    };
    let mean = m.inner(&state.coeffs, m.constants()) / m.volume();
    let centered = state.shifted(-mean)?;
    let lambda = best_constant_lambda(m)?;
    let a = m.qprime_total() / (16.0 * PI * PI);

    let lhs = functional_f_value(&centered, c2, c3);
    let n = m.n_nodes();
    let lap = &centered.lap_w;
    let gsq = &centered.grad_sq_w;
    let w = &centered.w;
    let lap_sq = m.integrate(&(0..n).map(|i| lap[i] * lap[i]).collect::<Vec<_>>());
    let quartic = m.integrate(&(0..n).map(|i| gsq[i] * gsq[i]).collect::<Vec<_>>());
    let dirichlet = m.integrate(gsq);
    let mixed = m.integrate(&(0..n).map(|i| lap[i] * gsq[i]).collect::<Vec<_>>());
    let q_w = m.integrate(&(0..n).map(|i| m.qprime()[i] * w[i]).collect::<Vec<_>>());
    let dr = m.curvature_sublap();
    let r0 = m.curvature_reeb();
    let a4 = 2.0 * C1 * q_w
        + 2.0 * c2 * m.integrate(&(0..n).map(|i| w[i] * dr[i]).collect::<Vec<_>>())
        + 2.0 * c3 * m.integrate(&(0..n).map(|i| w[i] * r0[i]).collect::<Vec<_>>());

    let k_lap = 4.0 * C1 * (1.0 - a) + c2 * (alpha - 2.0) + c3 * (2.0 + alpha / 3.0) * lambda;
    let k_quart = c2 * (1.0 / alpha - 0.5) + c3 * lambda / (3.0 * alpha);
    let rhs = k_lap * lap_sq + k_quart * quartic + constants.c4 * dirichlet + a4 - 2.0 * a * C1 * q_w + constants.c5;
    Ok(CoercivityAudit {
        alpha,
        lhs,
        rhs,
        slack: rhs - lhs,
        coeff_lap_sq: k_lap,
        coeff_grad_quartic: k_quart,
        constants,
        young_slack: alpha * lap_sq + quartic / alpha - 2.0 * mixed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SphereModel;
    use crate::sample::{random_coeffs, seeded_rng};
    use crate::synthetic::{SyntheticModel, SyntheticSpec};

    #[test]
    fn lambda_examples() {
        let m = SphereModel::with_degree(4, 1.0).unwrap();
        assert!((best_constant_lambda(&m).unwrap() - 1.0).abs() < 1e-10);
        let deg1 = m.conformal_directions();
        assert!((best_constant_lambda_on(&m, &deg1).unwrap() - 1.0).abs() < 1e-10);
        assert!(best_constant_lambda_on(&m, &[0]).is_err());

        let spec = SyntheticSpec::ring(16, 2.0, 4.0, 0.0);
        let full = best_constant_lambda(&SyntheticModel::new(spec.clone()).unwrap()).unwrap();
        let mut half = spec;
        half.t = half.t.iter().map(|r| r.iter().map(|x| 0.5 * x).collect()).collect();
        let halved = best_constant_lambda(&SyntheticModel::new(half).unwrap()).unwrap();
        assert!((halved / full - 0.5).abs() < 1e-12);
    }

    #[test]
    fn feasibility_examples() {
        for c3 in [0.0, 1e-3, 0.5, 10.0] {
            let r = condition_feasible(1.0, c3, 1.0, 1.0, None).unwrap();
            assert!(!r.feasible && r.alpha_window.is_none());
        }
        let r = condition_feasible(1.0, 1e-3, 0.0, 1.0, Some(1.0 / 3.0)).unwrap();
        let want = ((25.0 + 1.0 / (3.0 * PI * PI)).sqrt() - 5.0) / 3.0;
        assert!((r.bound - want).abs() < 1e-15);
        assert!(r.feasible);
        assert!(condition_feasible(0.0, 0.0, 0.0, 1.0, None).is_err());
        assert!(condition_feasible(1.0, -1.0, 0.0, 1.0, None).is_err());
        // radicand negative
        let r = condition_feasible(1e-4, 0.0, 1e6, 1.0, None).unwrap();
        assert_eq!(r.bound, f64::NEG_INFINITY);
    }

    #[test]
    fn sharp_mu_matches_alpha_window() {
        // the α window is nonempty exactly when λc₃ < (3/2)(√… − 5c₂)
        for &(c2, a, lambda) in &[(1.0, 0.0, 1.0), (0.3, -2.0, 2.5), (2.0, 0.5, 0.7)] {
            let edge = condition_feasible(c2, 0.0, a, lambda, Some(1.5 / lambda)).unwrap().bound;
            let inside = condition_feasible(c2, edge * 0.999, a, lambda, None).unwrap();
            let outside = condition_feasible(c2, edge * 1.001, a, lambda, None).unwrap();
            assert!(inside.alpha_window.is_some());
            assert!(outside.alpha_window.is_none());
        }
    }

    #[test]
    fn audit_bounds_hold() {
        let m = SyntheticModel::new(SyntheticSpec::ring(24, 2.0, 4.0, 0.0)).unwrap();
        let (c2, c3) = (1.0, 1e-3);
        let rep = model_feasibility(&m, c2, c3, None).unwrap();
        let (lo, hi) = rep.alpha_window.unwrap();
        let alpha = 0.5 * (lo + hi);
        let zero = coercivity_audit(&ContactState::base(&m), alpha, c2, c3, None).unwrap();
        assert!(zero.slack >= 0.0 && zero.lhs == 0.0);
        let mut rng = seeded_rng(3);
        for _ in 0..50 {
            let s = ContactState::new(&m, random_coeffs(&m, &mut rng, 0.5, true)).unwrap();
            let audit = coercivity_audit(&s, alpha, c2, c3, None).unwrap();
            assert!(audit.slack >= -1e-9, "{audit:?}");
            assert!(audit.young_slack >= -1e-12);
            assert!(audit.coeff_lap_sq < 0.0 && audit.coeff_grad_quartic < 0.0);
        }
        let sphere = SphereModel::with_degree(3, 4.0).unwrap();
        let s = ContactState::new(&sphere, random_coeffs(&sphere, &mut rng, 0.5, false)).unwrap();
        let audit = coercivity_audit(&s, 1.5, 1.0, 0.0, None).unwrap();
        assert!((audit.constants.c4 - 2.0).abs() < 1e-9);
        assert!(audit.slack >= -1e-9);
    }
}
