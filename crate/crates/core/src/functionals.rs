//! Polyakov-type functionals `Ã₁, Ã₂, Ã₃`, the scaling-invariant pieces
//! `II, III, IV`, `F = c₁II + c₂III + c₃IV`, and the analytic gradient of `F`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::conformal::{matrix_a_conformal, ContactState};
use crate::error::{CrError, Result};
use crate::model::{mat_t_vec, mat_vec, Model};
use crate::numeric::compensated_sum;

/// `c₁ = −1/(24π²)`.
pub const C1: f64 = -1.0 / (24.0 * PI * PI);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VolumeMode {
    Free,
    /// Constants coordinate shifted so that `⨍ e^{2w} dν = 1`.
    Normalized,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionalReport {
    #[serde(rename = "A1")]
    pub a1: f64,
    #[serde(rename = "A2")]
    pub a2: f64,
    #[serde(rename = "A3")]
    pub a3: f64,
    #[serde(rename = "II")]
    pub ii: f64,
    #[serde(rename = "III")]
    pub iii: f64,
    #[serde(rename = "IV")]
    pub iv: f64,
    #[serde(rename = "F")]
    pub f: f64,
    /// `ln(det A_θ / det A_{e^wθ}) = c₁Ã₁ + c₂Ã₂ − c₃Ã₃`.
    pub log_det_ratio: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// `∫Q′dν / 16π²`.
    pub a: f64,
    pub volume_mode: VolumeMode,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn ln_mean_exp2(state: &ContactState) -> f64 {
    state.log_mean_exp2()
}

/// `∫ w A_θ w dν + 2∫ Q′_θ w dν`.
fn a1_polynomial(state: &ContactState) -> f64 {
    let m = state.model;
    let w = &state.coeffs;
    let lin = compensated_sum(state.w.iter().zip(m.qprime()).zip(m.weights()).map(|((a, b), c)| a * b * c));
    m.a_form(w, w) + 2.0 * lin
}

/// `Ã₁(w) = ∫wAw + 2∫Q′w − (1/c₁) ln ⨍e^{2w}`.
pub fn tilde_a1(state: &ContactState) -> f64 {
    a1_polynomial(state) - ln_mean_exp2(state) / C1
}

/// `X = Δ_b w + ½|∇_b w|²` and `Ã₂ = 2∫(RX − X²)`.
pub fn tilde_a2(state: &ContactState) -> f64 {
    let m = state.model;
    let r = m.scalar_curvature();
    let integrand: Vec<f64> = (0..state.w.len())
        .map(|i| {
            let x = state.lap_w[i] + 0.5 * state.grad_sq_w[i];
            r[i] * x - x * x
        })
        .collect();
    2.0 * m.integrate(&integrand)
}

/// `Ã₃ = 2∫ w₀(R − ⅓|∇_b w|² − Δ_b w)`, `w₀ = Tw`.
pub fn tilde_a3(state: &ContactState) -> f64 {
    let m = state.model;
    let r = m.scalar_curvature();
    let integrand: Vec<f64> =
        (0..state.w.len()).map(|i| state.reeb_w[i] * (r[i] - state.grad_sq_w[i] / 3.0 - state.lap_w[i])).collect();
    2.0 * m.integrate(&integrand)
}

/// `II(w) = ∫wAw + 2∫Q′w − (∫Q′) ln ⨍e^{2w}`.
pub fn functional_ii(state: &ContactState) -> f64 {
    a1_polynomial(state) - state.model.qprime_total() * ln_mean_exp2(state)
}

pub fn functional_iii(state: &ContactState) -> f64 {
    tilde_a2(state)
}

pub fn functional_iv(state: &ContactState) -> f64 {
    -tilde_a3(state)
}

pub fn polyakov_log_det_ratio(state: &ContactState, c2: f64, c3: f64) -> f64 {
    C1 * tilde_a1(state) + c2 * tilde_a2(state) - c3 * tilde_a3(state)
}

/// `F = c₁II + c₂III + c₃IV`.
pub fn functional_f_value(state: &ContactState, c2: f64, c3: f64) -> f64 {
    C1 * functional_ii(state) + c2 * functional_iii(state) + c3 * functional_iv(state)
}

/// The constant `c` with `⨍ e^{2(w+c)} = 1`.
pub fn normalizing_shift(state: &ContactState) -> f64 {
    -0.5 * ln_mean_exp2(state)
}

pub fn functional_f(state: &ContactState, c2: f64, c3: f64, mode: VolumeMode) -> Result<FunctionalReport> {
    let shifted;
    let s = match mode {
        VolumeMode::Free => state,
        VolumeMode::Normalized => {
            shifted = state.shifted(normalizing_shift(state))?;
            &shifted
        }
    };
    let (a1, a2, a3) = (tilde_a1(s), tilde_a2(s), tilde_a3(s));
    let ii = functional_ii(s);
    let (iii, iv) = (a2, -a3);
    Ok(FunctionalReport {
        a1,
        a2,
        a3,
        ii,
        iii,
        iv,
        f: C1 * ii + c2 * iii + c3 * iv,
        log_det_ratio: C1 * a1 + c2 * a2 - c3 * a3,
        c1: C1,
        c2,
        c3,
        a: s.model.qprime_total() / (16.0 * PI * PI),
        volume_mode: mode,
    })
}

/// Gradient of `F` with respect to the coefficients of `w`.
pub fn grad_f(state: &ContactState, c2: f64, c3: f64) -> Vec<f64> {
    let m = state.model;
    let n = state.w.len();
    let wts = m.weights();
    let b = m.basis_values();
    let w = &state.coeffs;

    // II: (S + Sᵀ)w + 2q − Q_tot · Bᵀ(2We^{2w}) / ∫We^{2w},  S = G A.
    // The last two are regrouped so that the O(1) parts cancel exactly.
    let aw = mat_vec(m.a_matrix(), w);
    let gaw = mat_vec(m.gram(), &aw);
    let gw = mat_vec(m.gram(), w);
    let agw = mat_t_vec(m.a_matrix(), &gw);
    let qt = m.qprime_total();
    let v0 = m.volume();
    let excess = state.volume_excess();
    let vol = v0 + excess;
    let flat = excess / (v0 * vol);
    let lin: Vec<f64> = (0..n)
        .map(|i| 2.0 * wts[i] * ((m.qprime()[i] - qt / v0) + qt * flat - qt * (2.0 * state.w[i]).exp_m1() / vol))
        .collect();
    let blin = mat_t_vec(b, &lin);
    let mut g: Vec<f64> = (0..w.len()).map(|k| C1 * (gaw[k] + agw[k] + blin[k])).collect();

    let r = m.scalar_curvature();
    if c2 != 0.0 {
        // III = 2∫(RX − X²): dIII = ∫ 2W(R − 2X) dX,  dX = Δ dw + ½ d|∇w|²
        let cot: Vec<f64> = (0..n)
            .map(|i| {
                let x = state.lap_w[i] + 0.5 * state.grad_sq_w[i];
                2.0 * wts[i] * (r[i] - 2.0 * x)
            })
            .collect();
        let via_lap = mat_t_vec(m.sublap_matrix(), &mat_t_vec(b, &cot));
        let via_grad = m.grad_sq_pullback(w, &cot);
        for k in 0..g.len() {
            g[k] += c2 * (via_lap[k] + 0.5 * via_grad[k]);
        }
    }
    if c3 != 0.0 {
        // IV = −2∫ w₀(R − ⅓|∇w|² − Δw)
        let outer: Vec<f64> = (0..n).map(|i| wts[i] * (r[i] - state.grad_sq_w[i] / 3.0 - state.lap_w[i])).collect();
        let ww0: Vec<f64> = (0..n).map(|i| wts[i] * state.reeb_w[i]).collect();
        let via_t = mat_t_vec(m.reeb_matrix(), &mat_t_vec(b, &outer));
        let via_grad = m.grad_sq_pullback(w, &ww0);
        let via_lap = mat_t_vec(m.sublap_matrix(), &mat_t_vec(b, &ww0));
        for k in 0..g.len() {
            g[k] += -2.0 * c3 * (via_t[k] - via_grad[k] / 3.0 - via_lap[k]);
        }
    }
    g
}

/// Central-difference gradient of `F`, for cross-checks.
pub fn grad_f_numeric(state: &ContactState, c2: f64, c3: f64, h: f64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(state.coeffs.len());
    for k in 0..state.coeffs.len() {
        let mut e = vec![0.0; state.coeffs.len()];
        e[k] = h;
        let plus = state.compose(&e)?;
        e[k] = -h;
        let minus = state.compose(&e)?;
        out.push((functional_f_value(&plus, c2, c3) - functional_f_value(&minus, c2, c3)) / (2.0 * h));
    }
    Ok(out)
}

/// `Ã₁` of the increment `w` measured from the frame `base = e^{u}θ`.
pub fn tilde_a1_in_frame(base: &ContactState, w: &[f64]) -> Result<f64> {
    let m = base.model;
    let quad = if base.coeffs.iter().all(|c| *c == 0.0) {
        m.a_form(w, w)
    } else {
        // ⟨w, A_{θ̂} w⟩ in L²(dν̂)
        let a_hat = matrix_a_conformal(base)?;
        let proj = base.projector()?;
        let aw = mat_vec(&a_hat, w);
        dot(w, &mat_vec(proj.gram(), &aw))
    };
    let lin = 2.0 * base.qprime_pairing(w);
    let ew = base.compose(w)?;
    let log = (ew.volume() / base.volume()).ln();
    Ok(quad + lin - log / C1)
}

/// `Ã₂` of the increment `w` measured from the frame `base`, using the transformed
/// curvature, sub-Laplacian, gradient and measure of `base`.
pub fn tilde_a2_in_frame(base: &ContactState, w: &[f64]) -> f64 {
    let r = base.curvature();
    let lap = base.sublap(w);
    let grad = base.grad_sq(w);
    let integrand: Vec<f64> = (0..r.len())
        .map(|i| {
            let x = lap[i] + 0.5 * grad[i];
            r[i] * x - x * x
        })
        .collect();
    2.0 * base.integrate(&integrand)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CocyclePart {
    A1,
    A2,
    A3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CocycleDefect {
    pub part: CocyclePart,
    pub defect: f64,
    /// Size of `Ã(w₁ + w₂)`, for relative reading.
    pub scale: f64,
}

/// `|Ã(w₁+w₂) − Ã(w₁) − Ã^{e^{w₁}θ}(w₂)|` for each requested part.
pub fn cocycle_defect(model: &dyn Model, w1: &[f64], w2: &[f64], parts: &[CocyclePart]) -> Result<Vec<CocycleDefect>> {
    if parts.contains(&CocyclePart::A3) {
        return Err(CrError::Unsupported(
            "the conformal law for the characteristic field is not available, so Ã₃ has no cocycle check".into(),
        ));
    }
    let base = ContactState::base(model);
    let s1 = ContactState::new(model, w1.to_vec())?;
    let s12 = s1.compose(w2)?;
    let mut out = Vec::new();
    for &part in parts {
        let (total, first, second) = match part {
            CocyclePart::A1 => {
                (tilde_a1_in_frame(&base, &s12.coeffs)?, tilde_a1_in_frame(&base, w1)?, tilde_a1_in_frame(&s1, w2)?)
            }
            CocyclePart::A2 => {
                (tilde_a2_in_frame(&base, &s12.coeffs), tilde_a2_in_frame(&base, w1), tilde_a2_in_frame(&s1, w2))
            }
            CocyclePart::A3 => unreachable!(),
        };
        out.push(CocycleDefect { part, defect: (total - first - second).abs(), scale: total.abs() });
    }
    Ok(out)
}
