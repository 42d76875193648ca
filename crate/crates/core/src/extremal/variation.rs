//! Finite-dimensional first variations under `θ ↦ e^{rw}θ` at `r = 0`:
//! `δτ = 2(τM_w − τM_wτ)`, `δA = −2τM_wA`, `δ Tr e^{−tA} = 2t Tr[M_w A e^{−tA}]`.
//!
//! `τ_r` is the `L²(e^{2rw}dν)` projection of grid functions onto the
//! pluriharmonic span and `A_r = τ_r M_{e^{−2rw}} A`. All three identities are
//! exact for the truncated family, so the defects only measure differencing error.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::conformal::{conformal_spectrum, matrix_a_conformal, ContactState, Projector};
use crate::error::{CrError, Result};
use crate::model::Model;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariationDefects {
    pub t: f64,
    pub step: f64,
    /// Defects are `‖difference − closed form‖ / max(1, ‖closed form‖)` in the
    /// `L²(dν)` operator norm (trace: absolute value).
    pub tau: f64,
    pub a: f64,
    pub heat_trace: f64,
    pub tau_scale: f64,
    pub a_scale: f64,
    pub heat_trace_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariationRefinement {
    pub coarse: VariationDefects,
    pub fine: VariationDefects,
    /// `log₁₀(coarse / fine)` for each defect; `None` when a defect vanishes.
    pub order_tau: Option<f64>,
    pub order_a: Option<f64>,
    pub order_heat_trace: Option<f64>,
}

fn scaled<'m>(model: &'m dyn Model, w: &[f64], r: f64) -> Result<ContactState<'m>> {
    ContactState::new(model, w.iter().map(|x| x * r).collect())
}

/// Grid-level projection `B G_r⁻¹ Bᵀ W_r`.
fn tau_grid(state: &ContactState) -> Result<DMatrix<f64>> {
    let p = Projector::new(state.model, Some(&state.exp_2w))?;
    let b = state.model.basis_values();
    let bw = DMatrix::from_fn(b.ncols(), b.nrows(), |k, i| b[(i, k)] * p.node_weights()[i]);
    Ok(b * p.solve_matrix(&bw))
}

/// `‖W^{1/2} X W^{−1/2}‖₂`.
fn grid_norm(x: &DMatrix<f64>, weights: &[f64]) -> f64 {
    let n = weights.len();
    let y = DMatrix::from_fn(n, n, |i, j| x[(i, j)] * (weights[i] / weights[j]).sqrt());
    y.singular_values().max()
}

/// `‖Lᵀ X L⁻ᵀ‖₂` with `G = LLᵀ`.
fn coeff_norm(x: &DMatrix<f64>, l: &DMatrix<f64>, l_inv: &DMatrix<f64>) -> f64 {
    (l.transpose() * x * l_inv.transpose()).singular_values().max()
}

fn sum_exp(values: &[f64], t: f64) -> f64 {
    values.iter().map(|v| (-t * v).exp()).sum()
}

fn heat_trace(model: &dyn Model, w: &[f64], r: f64, t: f64) -> Result<f64> {
    Ok(sum_exp(&conformal_spectrum(&scaled(model, w, r)?)?, t))
}

/// Central differences with step `h` of `τ_r`, `A_r` and `Tr e^{−tA_r}` at
/// `r = 0` for the direction `state.coeffs`, against the closed forms.
pub fn trace_variation_checks(state: &ContactState, t: f64, h: f64) -> Result<VariationDefects> {
    if !(t > 0.0) || !(h > 0.0) {
        return Err(CrError::Hypothesis("t and the difference step must be positive".into()));
    }
    let m = state.model;
    let w = &state.coeffs;
    let weights = m.weights();
    let nodes = m.n_nodes();
    let d = m.dim();
    let base = ContactState::base(m);
    let tau = tau_grid(&base)?;
    let mw = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&state.w));

    // δτ
    let fd_tau = (tau_grid(&scaled(m, w, h)?)? - tau_grid(&scaled(m, w, -h)?)?) / (2.0 * h);
    let tau_mw = &tau * &mw;
    let closed_tau = (&tau_mw - &tau_mw * &tau) * 2.0;
    let tau_scale = grid_norm(&closed_tau, weights);
    let tau_defect = grid_norm(&(fd_tau - &closed_tau), weights) / tau_scale.max(1.0);

    // δA in coefficients: −2 P_w A_c, P_w = G⁻¹BᵀW M_w B
    let proj = Projector::new(m, None)?;
    let b = m.basis_values();
    let btwmb =
        DMatrix::from_fn(d, d, |k, l| (0..nodes).map(|i| b[(i, k)] * weights[i] * state.w[i] * b[(i, l)]).sum());
    let p_w = proj.solve_matrix(&btwmb);
    let a_c = m.a_matrix();
    let closed_a = &p_w * a_c * -2.0;
    let fd_a = (matrix_a_conformal(&scaled(m, w, h)?)? - matrix_a_conformal(&scaled(m, w, -h)?)?) / (2.0 * h);
    let l = proj.cholesky().l();
    let l_inv = l.clone().try_inverse().ok_or_else(|| CrError::Singular("Gram factor".into()))?;
    let a_scale = coeff_norm(&closed_a, &l, &l_inv);
    let a_defect = coeff_norm(&(fd_a - &closed_a), &l, &l_inv) / a_scale.max(1.0);

    // δ Tr e^{−tA} = 2t tr[P_w A_c e^{−tA_c}], with A_c = L⁻ᵀ S Lᵀ and S symmetric
    let s = l.transpose() * a_c * l_inv.transpose();
    let eig = ((&s + s.transpose()) * 0.5).symmetric_eigen();
    let f_diag = eig.eigenvalues.map(|v| v * (-t * v).exp());
    let f_s = &eig.eigenvectors * DMatrix::from_diagonal(&f_diag) * eig.eigenvectors.transpose();
    let a_heat = l_inv.transpose() * f_s * l.transpose();
    let closed_heat = 2.0 * t * (&p_w * a_heat).trace();
    let fd_heat = (heat_trace(m, w, h, t)? - heat_trace(m, w, -h, t)?) / (2.0 * h);
    let heat_defect = (fd_heat - closed_heat).abs() / closed_heat.abs().max(1.0);

    Ok(VariationDefects {
        t,
        step: h,
        tau: tau_defect,
        a: a_defect,
        heat_trace: heat_defect,
        tau_scale,
        a_scale,
        heat_trace_scale: closed_heat.abs(),
    })
}

/// Defects at steps `10⁻³` and `10⁻⁴` with observed orders.
pub fn variation_refinement(state: &ContactState, t: f64) -> Result<VariationRefinement> {
    let coarse = trace_variation_checks(state, t, 1e-3)?;
    let fine = trace_variation_checks(state, t, 1e-4)?;
    let order = |a: f64, b: f64| (a > 0.0 && b > 0.0).then(|| (a / b).log10());
    Ok(VariationRefinement {
        order_tau: order(coarse.tau, fine.tau),
        order_a: order(coarse.a, fine.a),
        order_heat_trace: order(coarse.heat_trace, fine.heat_trace),
        coarse,
        fine,
    })
}
