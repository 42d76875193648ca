//! Discretized pseudo-Einstein models.
//!
//! Every downstream computation works against [`Model`]: a finite coefficient
//! space for pluriharmonic functions, a node set with quadrature weights on which
//! integrands are assembled, and the operators `Δ_b`, `T`, `A_θ` acting on
//! coefficients. The standard sphere is [`SphereModel`]; externally supplied
//! spectral data is [`crate::synthetic::SyntheticModel`].

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{CrError, Result};
use crate::numeric::compensated_sum;
use crate::sphere::{Field, GridQuadrature, PluriBasis, RealFrame, QPRIME, SCALAR_CURVATURE};

pub trait Model: Send + Sync {
    fn name(&self) -> &str;

    /// Dimension of the coefficient space.
    fn dim(&self) -> usize;

    /// Quadrature weights of the node set.
    fn weights(&self) -> &[f64];

    fn volume(&self) -> f64 {
        self.weights().iter().sum()
    }

    fn n_nodes(&self) -> usize {
        self.weights().len()
    }

    /// Nodal values of the basis functions, `n_nodes × dim`.
    fn basis_values(&self) -> &DMatrix<f64>;

    /// Exact Gram matrix of the basis under `ν`.
    fn gram(&self) -> &DMatrix<f64>;

    /// `Δ_b` acting on coefficients.
    fn sublap_matrix(&self) -> &DMatrix<f64>;

    /// `T` acting on coefficients.
    fn reeb_matrix(&self) -> &DMatrix<f64>;

    /// `A_θ` acting on coefficients.
    fn a_matrix(&self) -> &DMatrix<f64>;

    /// Nodal `∇_b f · ∇_b g` for coefficient vectors `f, g`.
    fn grad_dot(&self, f: &[f64], g: &[f64]) -> Vec<f64>;

    /// `Σ_i cot_i ∂(|∇_b w|²)_i / ∂c` at `w = c`.
    fn grad_sq_pullback(&self, c: &[f64], cot: &[f64]) -> Vec<f64>;

    /// Nodal Webster scalar curvature.
    fn scalar_curvature(&self) -> &[f64];

    /// Nodal `Q′`.
    fn qprime(&self) -> &[f64];

    /// `∫ Q′ dν`.
    fn qprime_total(&self) -> f64;

    /// Coefficients of the constant function 1.
    fn constants(&self) -> &[f64];

    /// Nodal `Δ_b R`.
    fn curvature_sublap(&self) -> Vec<f64>;

    /// Nodal `R_{,0} = T R`.
    fn curvature_reeb(&self) -> Vec<f64>;

    /// Coefficient indices of directions generated by CR automorphisms, if known.
    fn conformal_directions(&self) -> Vec<usize> {
        Vec::new()
    }

    /// Nodal values `B c`.
    fn eval(&self, c: &[f64]) -> Vec<f64> {
        mat_vec(self.basis_values(), c)
    }

    /// Nodal values of `Δ_b w`.
    fn eval_sublap(&self, c: &[f64]) -> Vec<f64> {
        self.eval(&mat_vec(self.sublap_matrix(), c))
    }

    /// Nodal values of `T w`.
    fn eval_reeb(&self, c: &[f64]) -> Vec<f64> {
        self.eval(&mat_vec(self.reeb_matrix(), c))
    }

    /// Nodal values of `A w`.
    fn eval_a(&self, c: &[f64]) -> Vec<f64> {
        self.eval(&mat_vec(self.a_matrix(), c))
    }

    fn grad_sq(&self, c: &[f64]) -> Vec<f64> {
        self.grad_dot(c, c)
    }

    fn integrate(&self, values: &[f64]) -> f64 {
        compensated_sum(self.weights().iter().zip(values).map(|(w, v)| w * v))
    }

    /// `⟨f, g⟩_ν` through the exact Gram matrix.
    fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        let gf = mat_vec(self.gram(), g);
        f.iter().zip(&gf).map(|(a, b)| a * b).sum()
    }

    /// `⟨f, A g⟩_ν`.
    fn a_form(&self, f: &[f64], g: &[f64]) -> f64 {
        self.inner(f, &mat_vec(self.a_matrix(), g))
    }

    /// Folland–Stein `W^{2,2}_H` metric `‖w‖² + ‖Δ_b w‖²` on coefficients.
    fn h2_metric(&self) -> DMatrix<f64> {
        let l = self.sublap_matrix();
        self.gram() + l.transpose() * self.gram() * l
    }
}

pub(crate) fn mat_vec(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    let out = m * DVector::from_column_slice(v);
    out.as_slice().to_vec()
}

pub(crate) fn mat_t_vec(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    let out = m.tr_mul(&DVector::from_column_slice(v));
    out.as_slice().to_vec()
}

/// The standard sphere with `R = 2`, `A₁₁ = 0`, `Q′ = 4`, `Vol = 4π²`, truncated to
/// pluriharmonic degree `N`.
#[derive(Debug, Clone)]
pub struct SphereModel {
    pub frame: RealFrame,
    pub basis: PluriBasis,
    pub grid: GridQuadrature,
    pub kappa: f64,
    basis_values: DMatrix<f64>,
    z1_re: DMatrix<f64>,
    z1_im: DMatrix<f64>,
    gram: DMatrix<f64>,
    sublap: DMatrix<f64>,
    reeb: DMatrix<f64>,
    a: DMatrix<f64>,
    curvature: Vec<f64>,
    qprime: Vec<f64>,
    constants: Vec<f64>,
}

/// Default `κ` for the geometric model: `A_θ = τP′τ` with `P′ = 4Δ_b² + 4Δ_b`.
pub const PPRIME_KAPPA: f64 = 4.0;

impl SphereModel {
    pub fn new(max_degree: u32, grid: GridQuadrature, kappa: f64) -> Result<Self> {
        if max_degree < 1 {
            return Err(CrError::Hypothesis("pluriharmonic degree must be at least 1".into()));
        }
        if !(kappa > 0.0) {
            return Err(CrError::Hypothesis(format!("kappa must be positive, got {kappa}")));
        }
        if grid.exactness_degree < 2 * max_degree {
            return Err(CrError::InvalidModel(format!(
                "grid exactness {} cannot resolve degree-{} Gram entries",
                grid.exactness_degree, max_degree
            )));
        }
        let frame = RealFrame::new(max_degree);
        let basis = PluriBasis::new(max_degree);
        let n = frame.len();
        let nodes = grid.len();

        let mut basis_values = DMatrix::zeros(nodes, n);
        let mut z1_re = DMatrix::zeros(nodes, n);
        let mut z1_im = DMatrix::zeros(nodes, n);
        for (k, e) in frame.entries.iter().enumerate() {
            let vals = grid.eval_real(&e.function);
            basis_values.set_column(k, &DVector::from_vec(vals));
            let z = grid.eval(&e.function.apply_field(Field::Z1)?);
            z1_re.set_column(k, &DVector::from_iterator(nodes, z.iter().map(|v| v.re)));
            z1_im.set_column(k, &DVector::from_iterator(nodes, z.iter().map(|v| v.im)));
        }

        let degrees = frame.degrees();
        let gram = DMatrix::from_diagonal(&DVector::from_vec(frame.norms_sq()));
        let sublap = DMatrix::from_diagonal(&DVector::from_iterator(n, degrees.iter().map(|&j| j as f64)));
        let a =
            DMatrix::from_diagonal(&DVector::from_iterator(n, degrees.iter().map(|&j| kappa * (j * (j + 1)) as f64)));
        // T Re z^α = −j Im z^α,  T Im z^α = j Re z^α
        let mut reeb = DMatrix::zeros(n, n);
        let mut k = 1;
        while k + 1 < n {
            let j = degrees[k] as f64;
            reeb[(k, k + 1)] = j;
            reeb[(k + 1, k)] = -j;
            k += 2;
        }
        let mut constants = vec![0.0; n];
        constants[0] = 1.0;

        Ok(SphereModel {
            frame,
            basis,
            kappa,
            basis_values,
            z1_re,
            z1_im,
            gram,
            sublap,
            reeb,
            a,
            curvature: vec![SCALAR_CURVATURE; nodes],
            qprime: vec![QPRIME; nodes],
            constants,
            grid,
        })
    }

    /// Degree-`N` model on the default grid for that degree.
    pub fn with_degree(max_degree: u32, kappa: f64) -> Result<Self> {
        SphereModel::new(max_degree, GridQuadrature::for_degree(max_degree), kappa)
    }

    pub fn degrees(&self) -> Vec<u32> {
        self.frame.degrees()
    }

    /// Nodal `Z₁ w`.
    pub fn eval_z1(&self, c: &[f64]) -> Vec<Complex64> {
        let re = mat_vec(&self.z1_re, c);
        let im = mat_vec(&self.z1_im, c);
        re.into_iter().zip(im).map(|(r, i)| Complex64::new(r, i)).collect()
    }
}

impl Model for SphereModel {
    fn name(&self) -> &str {
        "sphere"
    }

    fn dim(&self) -> usize {
        self.frame.len()
    }

    fn weights(&self) -> &[f64] {
        &self.grid.weights
    }

    fn basis_values(&self) -> &DMatrix<f64> {
        &self.basis_values
    }

    fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    fn sublap_matrix(&self) -> &DMatrix<f64> {
        &self.sublap
    }

    fn reeb_matrix(&self) -> &DMatrix<f64> {
        &self.reeb
    }

    fn a_matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    fn grad_dot(&self, f: &[f64], g: &[f64]) -> Vec<f64> {
        let zf = self.eval_z1(f);
        let zg = self.eval_z1(g);
        zf.iter().zip(&zg).map(|(a, b)| 2.0 * (a * b.conj()).re).collect()
    }

    fn grad_sq_pullback(&self, c: &[f64], cot: &[f64]) -> Vec<f64> {
        // ∂/∂c_k 2|Z₁w|² = 4 Re(conj(Z₁w) Z₁φ_k)
        let zw = self.eval_z1(c);
        let sr: Vec<f64> = zw.iter().zip(cot).map(|(z, t)| 4.0 * t * z.re).collect();
        let si: Vec<f64> = zw.iter().zip(cot).map(|(z, t)| 4.0 * t * z.im).collect();
        let a = mat_t_vec(&self.z1_re, &sr);
        let b = mat_t_vec(&self.z1_im, &si);
        a.iter().zip(&b).map(|(x, y)| x + y).collect()
    }

    fn scalar_curvature(&self) -> &[f64] {
        &self.curvature
    }

    fn qprime(&self) -> &[f64] {
        &self.qprime
    }

    fn qprime_total(&self) -> f64 {
        QPRIME * crate::sphere::VOLUME
    }

    fn constants(&self) -> &[f64] {
        &self.constants
    }

    fn curvature_sublap(&self) -> Vec<f64> {
        vec![0.0; self.n_nodes()]
    }

    fn curvature_reeb(&self) -> Vec<f64> {
        vec![0.0; self.n_nodes()]
    }

    fn conformal_directions(&self) -> Vec<usize> {
        self.frame.degrees().iter().enumerate().filter(|(_, &j)| j == 1).map(|(k, _)| k).collect()
    }
}
