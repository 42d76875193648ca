//! Constrained maximization of `F` and the Euler–Lagrange residual.
//!
//! `F` is invariant under constant shifts, so the ascent runs over mean-zero
//! coefficients and the volume constraint `⨍e^{2w} = 1` is imposed at the end
//! through the constants coordinate. Directions are gradients in the
//! Folland–Stein metric `‖w‖² + ‖Δ_b w‖²`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::Serialize;

use super::{mean_zero_basis, restrict};
use crate::conformal::ContactState;
use crate::error::{CrError, Result};
use crate::functionals::{functional_f_value, grad_f, normalizing_shift};
use crate::model::Model;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepPolicy {
    /// Every line search starts from `initial_step`.
    Fixed,
    /// Line searches start from the Barzilai–Borwein step in the metric.
    BarzilaiBorwein,
    /// BFGS directions with the metric as the initial Hessian model.
    Bfgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AscentOptions {
    /// Stop once the Euler–Lagrange residual falls below this.
    pub tol: f64,
    /// When the line search can no longer raise `F` at working precision, the
    /// run still counts as converged if the residual is below this.
    pub stall_tol: f64,
    pub max_iter: usize,
    pub initial_step: f64,
    pub contraction: f64,
    /// Armijo sufficient-increase fraction.
    pub slope: f64,
    pub max_backtracks: usize,
    pub step_policy: StepPolicy,
    /// Pin the coefficients listed by `Model::conformal_directions` to zero.
    pub gauge: bool,
}

impl Default for AscentOptions {
    fn default() -> Self {
        AscentOptions {
            tol: 1e-10,
            stall_tol: 1e-8,
            max_iter: 5000,
            initial_step: 1.0,
            contraction: 0.5,
            slope: 1e-4,
            max_backtracks: 60,
            step_policy: StepPolicy::Bfgs,
            gauge: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Iterate {
    pub coeffs: Vec<f64>,
    pub f: f64,
    pub grad_norm: f64,
    /// Accepted step length that produced this iterate (0 for the start).
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AscentTrace {
    pub iterates: Vec<Iterate>,
    pub options: AscentOptions,
    pub converged: bool,
    /// The line search stopped making progress before `tol` was reached.
    pub stalled: bool,
    /// Last iterate shifted so that `⨍e^{2w} = 1`.
    pub maximizer: Vec<f64>,
    pub f_max: f64,
    pub el_residual: f64,
    pub backtracks: usize,
}

/// Mean-zero reduced coordinates with the metric restricted to them.
struct Reduced {
    q: DMatrix<f64>,
    metric: Cholesky<f64, Dyn>,
}

impl Reduced {
    fn new(model: &dyn Model, pinned: &[usize]) -> Result<Self> {
        let q = mean_zero_basis(model, pinned);
        let m = restrict(&model.h2_metric(), &q);
        let metric = ((&m + m.transpose()) * 0.5)
            .cholesky()
            .ok_or_else(|| CrError::Singular("metric on the mean-zero subspace".into()))?;
        Ok(Reduced { q, metric })
    }

    fn lift(&self, y: &DVector<f64>) -> Vec<f64> {
        (&self.q * y).as_slice().to_vec()
    }

    fn reduce(&self, g: &[f64]) -> DVector<f64> {
        self.q.transpose() * DVector::from_column_slice(g)
    }

    /// Metric gradient and its dual norm.
    fn direction(&self, g: &DVector<f64>) -> (DVector<f64>, f64) {
        let d = self.metric.solve(g);
        let n2 = g.dot(&d).max(0.0);
        (d, n2.sqrt())
    }
}

/// Inverse BFGS update; skipped when the curvature condition fails.
fn bfgs_update(h: &mut DMatrix<f64>, s: &DVector<f64>, y: &DVector<f64>) {
    let sy = s.dot(y);
    if !(sy > 1e-14 * s.norm() * y.norm()) {
        return;
    }
    let rho = 1.0 / sy;
    let hy = &*h * y;
    let yhy = y.dot(&hy);
    // H ← H − ρ(s(Hy)ᵀ + (Hy)sᵀ) + (ρ²yᵀHy + ρ)ssᵀ
    *h -= (s * hy.transpose() + &hy * s.transpose()) * rho;
    *h += s * s.transpose() * (rho * rho * yhy + rho);
}

/// Dual norm of the constrained gradient of `F`: `√(gᵀM⁻¹g)` with `g` the
/// gradient restricted to mean-zero directions and `M` the Folland–Stein metric.
pub fn el_residual(state: &ContactState, c2: f64, c3: f64) -> Result<f64> {
    let red = Reduced::new(state.model, &[])?;
    let g = red.reduce(&grad_f(state, c2, c3));
    Ok(red.direction(&g).1)
}

/// Armijo ascent for `F` from `init`. The returned trace has nondecreasing `F`.
pub fn maximize_f(init: &ContactState, c2: f64, c3: f64, opts: &AscentOptions) -> Result<AscentTrace> {
    if !(c2 > 0.0) || !(c3 >= 0.0) {
        return Err(CrError::Hypothesis(format!("requires c2 > 0 and c3 ≥ 0, got c2 = {c2}, c3 = {c3}")));
    }
    if !(opts.contraction > 0.0 && opts.contraction < 1.0)
        || !(opts.initial_step > 0.0)
        || !(opts.slope > 0.0 && opts.slope < 1.0)
    {
        return Err(CrError::Hypothesis("invalid line-search parameters".into()));
    }
    let model = init.model;
    let pinned = if opts.gauge { model.conformal_directions() } else { Vec::new() };
    let red = Reduced::new(model, &pinned)?;
    let eval = |y: &DVector<f64>| -> Result<(ContactState, f64)> {
        let s = ContactState::new(model, red.lift(y))?;
        let f = functional_f_value(&s, c2, c3);
        Ok((s, f))
    };

    let mut y = red.reduce(&init.coeffs);
    let (mut state, mut f) = eval(&y)?;
    let mut g = red.reduce(&grad_f(&state, c2, c3));
    let mut gnorm = red.direction(&g).1;
    let mut iterates = vec![Iterate { coeffs: state.coeffs.clone(), f, grad_norm: gnorm, step: 0.0 }];
    let mut prev: Option<(DVector<f64>, DVector<f64>)> = None;
    // inverse Hessian model of −F, for the BFGS policy
    let mut h_inv = red.metric.inverse();
    let mut backtracks = 0;
    let mut converged = gnorm < opts.tol;
    let mut stalled = false;

    for _ in 0..opts.max_iter {
        if converged {
            break;
        }
        let dir = match opts.step_policy {
            StepPolicy::Bfgs => &h_inv * &g,
            _ => red.metric.solve(&g),
        };
        let mut step = match (opts.step_policy, &prev) {
            (StepPolicy::BarzilaiBorwein, Some((s, dg))) => {
                let curv = s.dot(dg);
                let ms = red.metric.l().transpose() * s;
                if curv > 0.0 {
                    (ms.norm_squared() / curv).clamp(1e-10, 1e10)
                } else {
                    opts.initial_step
                }
            }
            _ => opts.initial_step,
        };
        let target = opts.slope * g.dot(&dir);
        let mut accepted = None;
        for _ in 0..=opts.max_backtracks {
            let trial = &y + &dir * step;
            if let Ok((s, ft)) = eval(&trial) {
                if ft.is_finite() && ft >= f + step * target {
                    accepted = Some((trial, s, ft));
                    break;
                }
            }
            step *= opts.contraction;
            backtracks += 1;
        }
        let Some((y_new, s_new, f_new)) = accepted else {
            stalled = true;
            break;
        };
        // increases below this are rounding in F, not progress
        if (&y_new - &y).norm() <= 1e-10 * y.norm() {
            stalled = true;
            break;
        }
        let g_new = red.reduce(&grad_f(&s_new, c2, c3));
        let s_k = &y_new - &y;
        let y_k = &g - &g_new;
        if opts.step_policy == StepPolicy::Bfgs {
            bfgs_update(&mut h_inv, &s_k, &y_k);
        }
        prev = Some((s_k, y_k));
        y = y_new;
        state = s_new;
        f = f_new;
        g = g_new;
        gnorm = red.direction(&g).1;
        iterates.push(Iterate { coeffs: state.coeffs.clone(), f, grad_norm: gnorm, step });
        converged = gnorm < opts.tol;
    }
    if stalled && gnorm < opts.stall_tol {
        converged = true;
    }

    let normalized = state.shifted(normalizing_shift(&state))?;
    let f_max = functional_f_value(&normalized, c2, c3);
    let residual = el_residual(&normalized, c2, c3)?;
    Ok(AscentTrace {
        iterates,
        options: *opts,
        converged,
        stalled,
        maximizer: normalized.coeffs,
        f_max,
        el_residual: residual,
        backtracks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SphereModel;
    use crate::sample::{random_coeffs, seeded_rng, sup_norm};

    #[test]
    fn zero_is_critical_and_stays_put() {
        let m = SphereModel::with_degree(4, 4.0).unwrap();
        let base = ContactState::base(&m);
        assert!(el_residual(&base, 1.0, 0.0).unwrap() < 1e-10);
        let trace = maximize_f(&base, 1.0, 0.0, &AscentOptions::default()).unwrap();
        assert!(trace.converged);
        assert_eq!(trace.iterates.len(), 1);
        assert!(sup_norm(&m, &trace.maximizer) < 1e-14);
    }

    #[test]
    fn ascent_is_monotone_and_reaches_zero() {
        let m = SphereModel::with_degree(4, 4.0).unwrap();
        let mut rng = seeded_rng(11);
        let init = ContactState::new(&m, random_coeffs(&m, &mut rng, 0.1, true)).unwrap();
        let trace = maximize_f(&init, 1.0, 0.0, &AscentOptions::default()).unwrap();
        for pair in trace.iterates.windows(2) {
            assert!(pair[1].f >= pair[0].f);
        }
        assert!(trace.converged, "{} iterations", trace.iterates.len());
        assert!(sup_norm(&m, &trace.maximizer) < 1e-4);
        assert!(trace.el_residual < 1e-6);
    }
}
