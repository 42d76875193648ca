//! Conformal contact forms `θ̃ = e^{w}θ` for pluriharmonic `w`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{CrError, Result};
use crate::model::{mat_vec, Model};
use crate::numeric::compensated_sum;
use crate::sphere::{Field, PolyFn, SCALAR_CURVATURE};

/// Condition number above which a weighted Gram matrix is rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// A real pluriharmonic `w` over a model, with nodal caches.
#[derive(Clone)]
pub struct ContactState<'m> {
    pub model: &'m dyn Model,
    pub coeffs: Vec<f64>,
    pub w: Vec<f64>,
    pub lap_w: Vec<f64>,
    pub reeb_w: Vec<f64>,
    pub grad_sq_w: Vec<f64>,
    pub exp_w: Vec<f64>,
    pub exp_2w: Vec<f64>,
}

impl std::fmt::Debug for ContactState<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ContactState").field("model", &self.model.name()).field("coeffs", &self.coeffs).finish()
    }
}

impl<'m> ContactState<'m> {
    pub fn new(model: &'m dyn Model, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != model.dim() {
            return Err(CrError::Dimension { expected: model.dim(), found: coeffs.len() });
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(CrError::Hypothesis("coefficients must be finite".into()));
        }
        let w = model.eval(&coeffs);
        let lap_w = model.eval_sublap(&coeffs);
        let reeb_w = model.eval_reeb(&coeffs);
        let grad_sq_w = model.grad_sq(&coeffs);
        let exp_w: Vec<f64> = w.iter().map(|v| v.exp()).collect();
        let exp_2w: Vec<f64> = exp_w.iter().map(|v| v * v).collect();
        Ok(ContactState { model, coeffs, w, lap_w, reeb_w, grad_sq_w, exp_w, exp_2w })
    }

    /// The background form itself.
    pub fn base(model: &'m dyn Model) -> Self {
        ContactState::new(model, vec![0.0; model.dim()]).expect("zero state is valid")
    }

    /// `w + c` for a constant `c`.
    pub fn shifted(&self, c: f64) -> Result<Self> {
        let mut coeffs = self.coeffs.clone();
        for (x, one) in coeffs.iter_mut().zip(self.model.constants()) {
            *x += c * one;
        }
        ContactState::new(self.model, coeffs)
    }

    /// `e^{w}θ` followed by `e^{v}`: the state for `w + v`.
    pub fn compose(&self, v: &[f64]) -> Result<Self> {
        let coeffs = self.coeffs.iter().zip(v).map(|(a, b)| a + b).collect();
        ContactState::new(self.model, coeffs)
    }

    /// Mean of `w` over the background volume.
    pub fn constant_part(&self) -> f64 {
        self.model.inner(&self.coeffs, self.model.constants()) / self.model.volume()
    }

    /// Quadrature weights of `dν̃ = e^{2w} dν`.
    pub fn measure(&self) -> Vec<f64> {
        self.model.weights().iter().zip(&self.exp_2w).map(|(a, b)| a * b).collect()
    }

    /// `Vol(θ̃)`.
    pub fn volume(&self) -> f64 {
        self.measure().iter().sum()
    }

    /// `Vol(θ̃) − Vol(θ)`, accurate for small `w`.
    pub fn volume_excess(&self) -> f64 {
        compensated_sum(self.model.weights().iter().zip(&self.w).map(|(a, w)| a * (2.0 * w).exp_m1()))
    }

    /// `ln ⨍ e^{2w} dν` over the background volume.
    pub fn log_mean_exp2(&self) -> f64 {
        (self.volume_excess() / self.model.volume()).ln_1p()
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.measure().iter().zip(values).map(|(a, b)| a * b).sum()
    }

    /// Webster curvature of `θ̃`: `(R − |∇_b w|² − 2Δ_b w) e^{−w}`.
    pub fn curvature(&self) -> Vec<f64> {
        let r = self.model.scalar_curvature();
        (0..self.w.len()).map(|i| (r[i] - self.grad_sq_w[i] - 2.0 * self.lap_w[i]) / self.exp_w[i]).collect()
    }

    /// `Δ̃_b f = e^{−w}(Δ_b f + ∇_b f · ∇_b w)`.
    pub fn sublap(&self, f: &[f64]) -> Vec<f64> {
        let lf = self.model.eval_sublap(f);
        let cross = self.model.grad_dot(f, &self.coeffs);
        sublap_law(&lf, &cross, &self.exp_w)
    }

    /// `∇̃_b f · ∇̃_b g = e^{−w} ∇_b f · ∇_b g`.
    pub fn grad_dot(&self, f: &[f64], g: &[f64]) -> Vec<f64> {
        self.model.grad_dot(f, g).iter().zip(&self.exp_w).map(|(a, e)| a / e).collect()
    }

    pub fn grad_sq(&self, f: &[f64]) -> Vec<f64> {
        self.grad_dot(f, f)
    }

    /// `∫ v Q′_{θ̃} dν̃` for pluriharmonic `v`, through `A_θ w + τ Q′_θ = τ(Q′_{θ̃} e^{2w})`.
    pub fn qprime_pairing(&self, v: &[f64]) -> f64 {
        let m = self.model;
        let lin: f64 = m.eval(v).iter().zip(m.qprime()).zip(m.weights()).map(|((a, b), c)| a * b * c).sum();
        m.a_form(v, &self.coeffs) + lin
    }

    /// Projection onto the pluriharmonic span in `L²(dν̃)`.
    pub fn projector(&self) -> Result<Projector<'m>> {
        Projector::new(self.model, Some(&self.exp_2w))
    }
}

/// Pointwise `e^{−w}(Δf + ∇f·∇w)` given nodal `Δf`, `∇f·∇w`, `e^{w}`.
pub fn sublap_law(lap_f: &[f64], grad_fw: &[f64], exp_w: &[f64]) -> Vec<f64> {
    (0..lap_f.len()).map(|i| (lap_f[i] + grad_fw[i]) / exp_w[i]).collect()
}

/// Weighted least-squares projection of nodal values onto the basis span.
#[derive(Clone)]
pub struct Projector<'m> {
    model: &'m dyn Model,
    node_weights: Vec<f64>,
    gram: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
    pub condition: f64,
}

impl<'m> Projector<'m> {
    /// `factor` multiplies the quadrature weights (e.g. `e^{2w}`); `None` is the
    /// background measure.
    pub fn new(model: &'m dyn Model, factor: Option<&[f64]>) -> Result<Self> {
        let node_weights: Vec<f64> = match factor {
            Some(f) => model.weights().iter().zip(f).map(|(a, b)| a * b).collect(),
            None => model.weights().to_vec(),
        };
        let b = model.basis_values();
        let wb = DMatrix::from_fn(b.nrows(), b.ncols(), |i, j| node_weights[i] * b[(i, j)]);
        let g = b.tr_mul(&wb);
        let gram = (&g + g.transpose()) * 0.5;
        let eig = gram.clone().symmetric_eigenvalues();
        let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v.abs())));
        let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        if condition > MAX_CONDITION {
            return Err(CrError::IllConditioned { condition });
        }
        let chol = Cholesky::new(gram.clone()).ok_or(CrError::IllConditioned { condition })?;
        Ok(Projector { model, node_weights, gram, chol, condition })
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn node_weights(&self) -> &[f64] {
        &self.node_weights
    }

    /// Coefficients of the projection of nodal `values`.
    pub fn project(&self, values: &[f64]) -> Vec<f64> {
        let wv: Vec<f64> = values.iter().zip(&self.node_weights).map(|(a, b)| a * b).collect();
        let rhs = self.model.basis_values().tr_mul(&DVector::from_vec(wv));
        self.chol.solve(&rhs).as_slice().to_vec()
    }

    /// `G⁻¹ M` for a coefficient-space matrix `M`.
    pub fn solve_matrix(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        self.chol.solve(m)
    }

    pub fn cholesky(&self) -> &Cholesky<f64, Dyn> {
        &self.chol
    }
}

/// `A_θ` in coefficients.
pub fn matrix_a(model: &dyn Model) -> DMatrix<f64> {
    model.a_matrix().clone()
}

/// `A_{θ̃} = τ_{θ̃}(e^{−2w} A_θ)` in coefficients.
pub fn matrix_a_conformal(state: &ContactState) -> Result<DMatrix<f64>> {
    let m = state.model;
    let proj = state.projector()?;
    let b = m.basis_values();
    let ba = b * m.a_matrix();
    // weights carry e^{2w}; the integrand carries e^{−2w}
    let wba = DMatrix::from_fn(ba.nrows(), ba.ncols(), |i, j| proj.node_weights()[i] / state.exp_2w[i] * ba[(i, j)]);
    Ok(proj.solve_matrix(&b.tr_mul(&wba)))
}

/// Spectrum of `A_{θ̃}`, ascending; real because `A_{θ̃}` is self-adjoint in `L²(dν̃)`.
pub fn conformal_spectrum(state: &ContactState) -> Result<Vec<f64>> {
    let m = state.model;
    let proj = state.projector()?;
    let b = m.basis_values();
    let ba = b * m.a_matrix();
    let wba = DMatrix::from_fn(ba.nrows(), ba.ncols(), |i, j| m.weights()[i] * ba[(i, j)]);
    let s = b.tr_mul(&wba);
    let s = (&s + s.transpose()) * 0.5;
    let l = proj.cholesky().l();
    let li = l.clone().try_inverse().ok_or_else(|| CrError::Singular("weighted Gram factor".into()))?;
    let sym = &li * s * li.transpose();
    let sym = (&sym + sym.transpose()) * 0.5;
    let mut eig: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(eig)
}

/// `∫ v Q′_{θ̃} dν̃`; see [`ContactState::qprime_pairing`].
pub fn projected_qprime_pairing(state: &ContactState, v: &[f64]) -> f64 {
    state.qprime_pairing(v)
}

/// `P′f = 4Δ_b²f − 4 Re ∇¹(R∇₁f)` on the sphere (`A₁₁ = 0`, `R = 2`), evaluated
/// as `4Δ_b²f − 2R(Z̄₁Z₁ + Z₁Z̄₁)f`.
pub fn pprime_formula(f: &PolyFn) -> Result<PolyFn> {
    if !f.is_pluriharmonic() {
        return Err(CrError::NotPluriharmonic(format!("degree {} input has mixed terms", f.degree())));
    }
    let bilap = f.sublaplacian()?.sublaplacian()?.scale_real(4.0);
    let z1 = f.apply_field(Field::Z1)?;
    let z1b = f.apply_field(Field::Z1Bar)?;
    let sym = &z1.apply_field(Field::Z1Bar)? + &z1b.apply_field(Field::Z1)?;
    Ok(&bilap - &sym.scale_real(2.0 * SCALAR_CURVATURE))
}

/// `A w` as nodal values for the state's own `w`.
pub fn a_applied(state: &ContactState) -> Vec<f64> {
    state.model.eval(&mat_vec(state.model.a_matrix(), &state.coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SphereModel;
    use crate::sphere::{GridQuadrature, Monomial, VOLUME};
    use num_complex::Complex64;

    fn sphere() -> SphereModel {
        SphereModel::new(3, GridQuadrature::new(8, 16), 1.0).unwrap()
    }

    fn sample(m: &dyn Model, scale: f64) -> Vec<f64> {
        let mut c: Vec<f64> = (0..m.dim()).map(|k| scale * ((k as f64 * 1.7).sin())).collect();
        c[0] = 0.2;
        c
    }

    #[test]
    fn projection_examples() {
        let m = sphere();
        let base = Projector::new(&m, None).unwrap();
        let ones = vec![1.0; m.n_nodes()];
        let p = base.project(&ones);
        assert!((p[0] - 1.0).abs() < 1e-13 && p[1..].iter().all(|v| v.abs() < 1e-13));
        let modz1 = m.grid.eval_real(&PolyFn::monomial(1, 0, 1, 0));
        let p = base.project(&modz1);
        assert!((p[0] - 0.5).abs() < 1e-13 && p[1..].iter().all(|v| v.abs() < 1e-13));

        let c = ContactState::new(&m, {
            let mut v = vec![0.0; m.dim()];
            v[0] = 0.7;
            v
        })
        .unwrap();
        let weighted = c.projector().unwrap();
        let f: Vec<f64> = (0..m.n_nodes()).map(|i| (i as f64 * 0.013).sin()).collect();
        let (a, b) = (base.project(&f), weighted.project(&f));
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-12));
    }

    #[test]
    fn projection_is_idempotent_under_both_weights() {
        let m = sphere();
        let s = ContactState::new(&m, sample(&m, 0.1)).unwrap();
        for proj in [Projector::new(&m, None).unwrap(), s.projector().unwrap()] {
            let f: Vec<f64> = (0..m.n_nodes()).map(|i| ((i * i) as f64 * 1e-3).cos()).collect();
            let once = proj.project(&f);
            let twice = proj.project(&m.eval(&once));
            assert!(once.iter().zip(&twice).all(|(a, b)| (a - b).abs() < 1e-11));
        }
    }

    #[test]
    fn transformed_curvature_examples() {
        let m = sphere();
        let zero = ContactState::base(&m);
        assert!(zero.curvature().iter().all(|r| (r - 2.0).abs() < 1e-14));
        let c = zero.shifted(0.4).unwrap();
        assert!(c.curvature().iter().all(|r| (r - 2.0 * (-0.4f64).exp()).abs() < 1e-13));

        // w = ε(z1 + z̄1) = 2ε Re z1
        let eps = 0.3;
        let mut coeffs = vec![0.0; m.dim()];
        coeffs[1] = 2.0 * eps;
        let s = ContactState::new(&m, coeffs).unwrap();
        let z1 = PolyFn::z1();
        let u = (&z1 + &z1.conj()).scale_real(eps);
        let law = &(&PolyFn::constant(2.0) - &PolyFn::monomial(0, 1, 0, 1).scale_real(2.0 * eps * eps))
            - &(&z1 + &z1.conj()).scale_real(2.0 * eps);
        let want = m.grid.eval_real(&law);
        let uw = m.grid.eval_real(&u);
        for (i, r) in s.curvature().iter().enumerate() {
            assert!((r - want[i] * (-uw[i]).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn sublaplacian_law_round_trips() {
        let m = sphere();
        let w = sample(&m, 0.15);
        let f = sample(&m, -0.4);
        let s = ContactState::new(&m, w.clone()).unwrap();
        let tilde = s.sublap(&f);
        let neg: Vec<f64> = w.iter().map(|v| -v).collect();
        // law for −w applied in the frame of θ̃
        let back = sublap_law(&tilde, &s.grad_dot(&f, &neg), &s.exp_w.iter().map(|e| 1.0 / e).collect::<Vec<_>>());
        let direct = m.eval_sublap(&f);
        assert!(back.iter().zip(&direct).all(|(a, b)| (a - b).abs() < 1e-9));
        assert_eq!(ContactState::base(&m).sublap(&f), direct);
    }

    #[test]
    fn conformal_matrix_examples() {
        let m = sphere();
        let a0 = matrix_a_conformal(&ContactState::base(&m)).unwrap();
        assert!((&a0 - matrix_a(&m)).abs().max() < 1e-10);
        let c = ContactState::base(&m).shifted(0.3).unwrap();
        let ac = matrix_a_conformal(&c).unwrap();
        assert!((&ac - matrix_a(&m) * (-0.6f64).exp()).abs().max() < 1e-10);
        assert_eq!(matrix_a(&m)[(1, 1)], 2.0);
        assert_eq!(matrix_a(&m)[(0, 0)], 0.0);
        assert_eq!(matrix_a(&m)[(5, 5)], 6.0);
    }

    #[test]
    fn conformal_spectrum_is_nonnegative_with_one_zero() {
        let m = sphere();
        let s = ContactState::new(&m, sample(&m, 0.2)).unwrap();
        let eig = conformal_spectrum(&s).unwrap();
        let scale = eig.last().unwrap().abs();
        assert!(eig[0].abs() < 1e-9 * scale);
        assert!(eig[1] > 1e-6 * scale);
        // agrees with the nonsymmetric realization
        let direct = matrix_a_conformal(&s).unwrap();
        let mut ev: Vec<f64> = direct.complex_eigenvalues().iter().map(|z| z.re).collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in eig.iter().zip(&ev) {
            assert!((a - b).abs() < 1e-8 * scale);
        }
    }

    #[test]
    fn total_qprime_is_invariant() {
        let m = sphere();
        let one = m.constants().to_vec();
        for scale in [0.0, 0.1, 0.5] {
            let s = ContactState::new(&m, sample(&m, scale)).unwrap();
            let v = projected_qprime_pairing(&s, &one);
            assert!((v - 4.0 * VOLUME).abs() < 1e-9 * v);
        }
        let mut v = vec![0.0; m.dim()];
        v[1] = 2.0;
        assert!(projected_qprime_pairing(&ContactState::base(&m), &v).abs() < 1e-12);
    }

    #[test]
    fn pprime_on_holomorphic_powers() {
        assert!(pprime_formula(&PolyFn::constant(1.0)).unwrap().is_empty());
        for j in 1..=6u32 {
            let f = PolyFn::monomial(j, 0, 0, 0);
            let p = pprime_formula(&f).unwrap();
            let want = f.scale_real(4.0 * (j * (j + 1)) as f64);
            assert!(p.distance(&want) < 1e-12, "j={j}");
        }
        let mixed = PolyFn::term(Monomial::new(1, 0, 1, 0), Complex64::new(1.0, 0.0));
        assert!(matches!(pprime_formula(&mixed), Err(CrError::NotPluriharmonic(_))));
    }
}
