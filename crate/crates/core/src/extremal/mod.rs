//! Extremal problem for `F`: the best constant `λ`, feasibility of the
//! coefficient condition, the coercivity chain, constrained ascent with the
//! Euler–Lagrange residual, and finite-dimensional variation identities.

mod ascent;
mod feasibility;
mod variation;

pub use ascent::{el_residual, maximize_f, AscentOptions, AscentTrace, Iterate, StepPolicy};
pub use feasibility::{
    best_constant_lambda, best_constant_lambda_on, coercivity_audit, condition_feasible, model_feasibility,
    AuditConstants, CoercivityAudit, FeasibilityReport,
};
pub use variation::{trace_variation_checks, variation_refinement, VariationDefects, VariationRefinement};

use nalgebra::DMatrix;

use crate::model::Model;

/// Orthonormal (Euclidean) basis of the coefficient vectors `c` with
/// `⟨c, 1⟩_ν = 0` and `c_k = 0` for every `k` in `pinned`.
pub(crate) fn mean_zero_basis(model: &dyn Model, pinned: &[usize]) -> DMatrix<f64> {
    let d = model.dim();
    let ones = nalgebra::DVector::from_column_slice(model.constants());
    let mut cols = vec![model.gram() * ones];
    for &k in pinned {
        let mut e = nalgebra::DVector::zeros(d);
        e[k] = 1.0;
        cols.push(e);
    }
    let c = DMatrix::from_columns(&cols);
    let ctc = c.transpose() * &c;
    let inv = ctc.pseudo_inverse(1e-12).expect("pseudo-inverse of a small Gram block");
    let proj = DMatrix::identity(d, d) - &c * inv * c.transpose();
    let eig = ((&proj + proj.transpose()) * 0.5).symmetric_eigen();
    let keep: Vec<usize> = (0..d).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
    let mut q = DMatrix::zeros(d, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        let mut v = eig.eigenvectors.column(i).clone_owned();
        // deterministic sign: largest entry positive
        let (imax, _) =
            v.iter()
                .enumerate()
                .fold((0, 0.0f64), |acc, (k, x)| if x.abs() > acc.1 + 1e-12 { (k, x.abs()) } else { acc });
        if v[imax] < 0.0 {
            v = -v;
        }
        q.set_column(j, &v);
    }
    q
}

/// `QᵀMQ`.
pub(crate) fn restrict(m: &DMatrix<f64>, q: &DMatrix<f64>) -> DMatrix<f64> {
    q.transpose() * m * q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SphereModel;

    #[test]
    fn mean_zero_basis_is_orthonormal_and_annihilates_constants() {
        let m = SphereModel::with_degree(3, 4.0).unwrap();
        for pinned in [vec![], m.conformal_directions()] {
            let q = mean_zero_basis(&m, &pinned);
            assert_eq!(q.ncols(), m.dim() - 1 - pinned.len());
            let eye = q.transpose() * &q;
            assert!((eye - DMatrix::identity(q.ncols(), q.ncols())).abs().max() < 1e-12);
            for j in 0..q.ncols() {
                let col: Vec<f64> = q.column(j).iter().copied().collect();
                assert!(m.inner(&col, m.constants()).abs() < 1e-12);
                for &k in &pinned {
                    assert!(col[k].abs() < 1e-12);
                }
            }
        }
    }
}
