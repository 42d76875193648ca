//! Externally supplied spectral data standing in for a pseudo-Einstein manifold.
//!
//! The document is nodal: coefficients are values at `dim` nodes, so the basis
//! matrix is the identity and integrals are weighted sums.
//!
//! ```json
//! { "dim": 3, "weights": [..], "R": [..], "T": [[..]], "Delta_b": [[..]],
//!   "A": [[..]], "Qprime_total": 0.0, "Qprime": [..] }
//! ```
//!
//! `Qprime` is optional; when absent `Q′` is taken constant, `Qprime_total / V`.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{CrError, Result};
use crate::model::{mat_t_vec, mat_vec, Model};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<u32>,
    pub dim: usize,
    pub weights: Vec<f64>,
    #[serde(rename = "R")]
    pub r: Vec<f64>,
    #[serde(rename = "T")]
    pub t: Vec<Vec<f64>>,
    #[serde(rename = "Delta_b")]
    pub delta_b: Vec<Vec<f64>>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "Qprime_total")]
    pub qprime_total: f64,
    #[serde(rename = "Qprime", default, skip_serializing_if = "Option::is_none")]
    pub qprime: Option<Vec<f64>>,
}

impl SyntheticSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| CrError::InvalidModel(format!("line {}, column {}: {}", e.line(), e.column(), e)))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    /// Periodic ring of `n` nodes: second-difference `Δ_b`, central-difference `T`,
    /// `A = κΔ_b(Δ_b + 1)`, constant `R`.
    pub fn ring(n: usize, curvature: f64, kappa: f64, qprime_total: f64) -> Self {
        let h = 2.0 * PI / n as f64;
        let w = 4.0 * PI * PI / n as f64;
        let mut lap = DMatrix::zeros(n, n);
        let mut t = DMatrix::zeros(n, n);
        for i in 0..n {
            let (next, prev) = ((i + 1) % n, (i + n - 1) % n);
            lap[(i, i)] += 2.0 / (h * h);
            lap[(i, next)] -= 1.0 / (h * h);
            lap[(i, prev)] -= 1.0 / (h * h);
            t[(i, next)] += 0.5 / h;
            t[(i, prev)] -= 0.5 / h;
        }
        let a = (&lap * (&lap + DMatrix::identity(n, n))) * kappa;
        let rows = |m: &DMatrix<f64>| (0..n).map(|i| m.row(i).iter().copied().collect()).collect();
        SyntheticSpec {
            schema: Some(1),
            dim: n,
            weights: vec![w; n],
            r: vec![curvature; n],
            t: rows(&t),
            delta_b: rows(&lap),
            a: rows(&a),
            qprime_total,
            qprime: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticModel {
    pub spec: SyntheticSpec,
    basis_values: DMatrix<f64>,
    gram: DMatrix<f64>,
    sublap: DMatrix<f64>,
    reeb: DMatrix<f64>,
    a: DMatrix<f64>,
    qprime: Vec<f64>,
    constants: Vec<f64>,
}

fn to_matrix(name: &str, rows: &[Vec<f64>], n: usize) -> Result<DMatrix<f64>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(CrError::InvalidModel(format!("{name} must be a {n}x{n} array")));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(CrError::InvalidModel(format!("{name} has non-finite entries")));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// Checks that `m` is self-adjoint and positive semidefinite in `L²(W)` with the
/// constants in its kernel.
fn check_sym_psd(name: &str, m: &DMatrix<f64>, w: &[f64]) -> Result<()> {
    let n = w.len();
    let scale = m.abs().max().max(1.0);
    let wm = DMatrix::from_fn(n, n, |i, j| w[i] * m[(i, j)]);
    let asym = (&wm - wm.transpose()).abs().max();
    if asym > 1e-9 * scale * w.iter().cloned().fold(0.0, f64::max) {
        return Err(CrError::InvalidModel(format!(
            "{name} is not symmetric in the weighted inner product (defect {asym:.3e})"
        )));
    }
    let sym = DMatrix::from_fn(n, n, |i, j| m[(i, j)] * (w[i] / w[j]).sqrt());
    let sym = (&sym + sym.transpose()) * 0.5;
    let min = sym.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -1e-9 * scale {
        return Err(CrError::InvalidModel(format!("{name} has negative eigenvalue {min:.3e}")));
    }
    let row_sums = mat_vec(m, &vec![1.0; n]);
    let leak = row_sums.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if leak > 1e-9 * scale {
        return Err(CrError::InvalidModel(format!("{name} does not annihilate constants (defect {leak:.3e})")));
    }
    Ok(())
}

impl SyntheticModel {
    pub fn new(spec: SyntheticSpec) -> Result<Self> {
        let n = spec.dim;
        if n < 2 {
            return Err(CrError::InvalidModel("dim must be at least 2".into()));
        }
        if let Some(v) = spec.schema {
            if v != 1 {
                return Err(CrError::InvalidModel(format!("unsupported schema version {v}")));
            }
        }
        if spec.weights.len() != n || spec.weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(CrError::InvalidModel(format!("weights must be {n} positive numbers")));
        }
        if spec.r.len() != n || spec.r.iter().any(|v| !v.is_finite()) {
            return Err(CrError::InvalidModel(format!("R must have {n} finite entries")));
        }
        if !spec.qprime_total.is_finite() {
            return Err(CrError::InvalidModel("Qprime_total must be finite".into()));
        }
        let sublap = to_matrix("Delta_b", &spec.delta_b, n)?;
        let reeb = to_matrix("T", &spec.t, n)?;
        let a = to_matrix("A", &spec.a, n)?;
        check_sym_psd("Delta_b", &sublap, &spec.weights)?;
        check_sym_psd("A", &a, &spec.weights)?;
        let t_leak = mat_vec(&reeb, &vec![1.0; n]).iter().map(|v| v.abs()).fold(0.0, f64::max);
        if t_leak > 1e-9 * reeb.abs().max().max(1.0) {
            return Err(CrError::InvalidModel(format!("T does not annihilate constants (defect {t_leak:.3e})")));
        }
        let volume: f64 = spec.weights.iter().sum();
        let qprime = match &spec.qprime {
            Some(q) => {
                if q.len() != n || q.iter().any(|v| !v.is_finite()) {
                    return Err(CrError::InvalidModel(format!("Qprime must have {n} finite entries")));
                }
                let total: f64 = q.iter().zip(&spec.weights).map(|(a, b)| a * b).sum();
                if (total - spec.qprime_total).abs() > 1e-9 * spec.qprime_total.abs().max(1.0) {
                    return Err(CrError::InvalidModel(format!(
                        "Qprime integrates to {total}, Qprime_total is {}",
                        spec.qprime_total
                    )));
                }
                q.clone()
            }
            None => vec![spec.qprime_total / volume; n],
        };
        Ok(SyntheticModel {
            basis_values: DMatrix::identity(n, n),
            gram: DMatrix::from_diagonal(&DVector::from_column_slice(&spec.weights)),
            sublap,
            reeb,
            a,
            qprime,
            constants: vec![1.0; n],
            spec,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        SyntheticModel::new(SyntheticSpec::from_json(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| CrError::InvalidModel(format!("{}: {e}", path.display())))?;
        SyntheticModel::from_json(&text)
    }
}

impl Model for SyntheticModel {
    fn name(&self) -> &str {
        "synthetic"
    }

    fn dim(&self) -> usize {
        self.spec.dim
    }

    fn weights(&self) -> &[f64] {
        &self.spec.weights
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

    fn eval(&self, c: &[f64]) -> Vec<f64> {
        c.to_vec()
    }

    /// Polarized carré du champ: `½(fΔg + gΔf − Δ(fg))`.
    fn grad_dot(&self, f: &[f64], g: &[f64]) -> Vec<f64> {
        let lf = mat_vec(&self.sublap, f);
        let lg = mat_vec(&self.sublap, g);
        let fg: Vec<f64> = f.iter().zip(g).map(|(a, b)| a * b).collect();
        let lfg = mat_vec(&self.sublap, &fg);
        (0..f.len()).map(|i| 0.5 * (f[i] * lg[i] + g[i] * lf[i] - lfg[i])).collect()
    }

    fn grad_sq_pullback(&self, c: &[f64], cot: &[f64]) -> Vec<f64> {
        // |∇w|² = wΔw − ½Δ(w²)
        let lw = mat_vec(&self.sublap, c);
        let cw: Vec<f64> = cot.iter().zip(c).map(|(a, b)| a * b).collect();
        let lt_cw = mat_t_vec(&self.sublap, &cw);
        let lt_cot = mat_t_vec(&self.sublap, cot);
        (0..c.len()).map(|k| cot[k] * lw[k] + lt_cw[k] - c[k] * lt_cot[k]).collect()
    }

    fn scalar_curvature(&self) -> &[f64] {
        &self.spec.r
    }

    fn qprime(&self) -> &[f64] {
        &self.qprime
    }

    fn qprime_total(&self) -> f64 {
        self.spec.qprime_total
    }

    fn constants(&self) -> &[f64] {
        &self.constants
    }

    fn curvature_sublap(&self) -> Vec<f64> {
        mat_vec(&self.sublap, &self.spec.r)
    }

    fn curvature_reeb(&self) -> Vec<f64> {
        mat_vec(&self.reeb, &self.spec.r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_round_trips_through_json() {
        let spec = SyntheticSpec::ring(6, 1.0, 4.0, 0.0);
        let back = SyntheticSpec::from_json(&spec.to_json()).unwrap();
        assert_eq!(spec, back);
        let m = SyntheticModel::new(back).unwrap();
        assert_eq!(m.dim(), 6);
        assert!((m.volume() - 4.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn grad_sq_is_nonnegative_and_kills_constants() {
        let m = SyntheticModel::new(SyntheticSpec::ring(8, 1.0, 4.0, 0.0)).unwrap();
        let w: Vec<f64> = (0..8).map(|i| (i as f64 * 0.7).sin()).collect();
        assert!(m.grad_sq(&w).iter().all(|v| *v >= -1e-12));
        assert!(m.grad_sq(&[3.0; 8]).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn pullback_matches_finite_difference() {
        let m = SyntheticModel::new(SyntheticSpec::ring(7, 1.0, 4.0, 0.0)).unwrap();
        let w: Vec<f64> = (0..7).map(|i| 0.3 * (i as f64).cos()).collect();
        let cot: Vec<f64> = (0..7).map(|i| 1.0 + 0.1 * i as f64).collect();
        let g = m.grad_sq_pullback(&w, &cot);
        let h = 1e-6;
        for k in 0..7 {
            let mut p = w.clone();
            let mut q = w.clone();
            p[k] += h;
            q[k] -= h;
            let fp: f64 = m.grad_sq(&p).iter().zip(&cot).map(|(a, b)| a * b).sum();
            let fq: f64 = m.grad_sq(&q).iter().zip(&cot).map(|(a, b)| a * b).sum();
            assert!(((fp - fq) / (2.0 * h) - g[k]).abs() < 1e-6);
        }
    }

    #[test]
    fn rejects_broken_documents() {
        let err = SyntheticModel::from_json("{\n \"dim\": 2,\n \"weights\": [1, \n}").unwrap_err();
        assert!(err.to_string().contains("line 4"), "{err}");

        let mut spec = SyntheticSpec::ring(5, 1.0, 4.0, 0.0);
        spec.delta_b[0][1] += 0.5;
        assert!(SyntheticModel::new(spec).is_err());

        let mut spec = SyntheticSpec::ring(5, 1.0, 4.0, 0.0);
        spec.weights[2] = -1.0;
        assert!(SyntheticModel::new(spec).is_err());

        let mut spec = SyntheticSpec::ring(5, 1.0, 4.0, 0.0);
        for row in spec.a.iter_mut() {
            for v in row.iter_mut() {
                *v = -*v;
            }
        }
        assert!(SyntheticModel::new(spec).is_err());
    }
}
