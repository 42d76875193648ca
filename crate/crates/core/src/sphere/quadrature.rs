//! Product quadrature on `S³` in Hopf coordinates
//! `z₁ = cos η e^{iξ₁}`, `z₂ = sin η e^{iξ₂}`, `dν = 2 cos η sin η dη dξ₁ dξ₂`.
//!
//! The `η` direction uses Gauss–Legendre in `t = cos² η` (so `dt` absorbs the
//! weight `2 cos η sin η dη`); the angles use the uniform trapezoid rule.

use std::f64::consts::PI;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;

use super::poly::PolyFn;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopfNode {
    pub eta: f64,
    pub xi1: f64,
    pub xi2: f64,
}

impl HopfNode {
    pub fn z(&self) -> (Complex64, Complex64) {
        (Complex64::from_polar(self.eta.cos(), self.xi1), Complex64::from_polar(self.eta.sin(), self.xi2))
    }
}

#[derive(Debug, Clone)]
pub struct GridQuadrature {
    pub nodes: Vec<HopfNode>,
    pub weights: Vec<f64>,
    /// Every monomial of total degree at most this is integrated exactly.
    pub exactness_degree: u32,
    n_eta: usize,
    n_xi: usize,
}

impl GridQuadrature {
    /// `n_eta` Gauss points in `cos² η`, `n_xi` trapezoid points per angle.
    pub fn new(n_eta: usize, n_xi: usize) -> Self {
        let n_eta = n_eta.max(2);
        let n_xi = n_xi.max(1);
        let rule = GaussLegendre::new(n_eta).expect("at least two Gauss points");
        let dxi = 2.0 * PI / n_xi as f64;
        let mut nodes = Vec::with_capacity(n_eta * n_xi * n_xi);
        let mut weights = Vec::with_capacity(n_eta * n_xi * n_xi);
        for (x, w) in rule.iter() {
            // map [-1, 1] -> t in [0, 1]
            let t = 0.5 * (x + 1.0);
            let eta = t.sqrt().acos();
            let wt = 0.5 * w * dxi * dxi;
            for i in 0..n_xi {
                for k in 0..n_xi {
                    nodes.push(HopfNode { eta, xi1: i as f64 * dxi, xi2: k as f64 * dxi });
                    weights.push(wt);
                }
            }
        }
        // torus-invariant part has t-degree (a+b) for degree 2(a+b); angular
        // frequencies up to n_xi - 1 are resolved
        let exactness_degree = ((4 * n_eta - 2) as u32).min((n_xi - 1) as u32);
        GridQuadrature { nodes, weights, exactness_degree, n_eta, n_xi }
    }

    /// Grid sized for integrands built from a degree-`n` pluriharmonic basis.
    pub fn for_degree(n: u32) -> Self {
        let n = n.max(1) as usize;
        GridQuadrature::new(6 * n, 12 * n)
    }

    /// Smallest grid that still integrates degree-`2n` monomials exactly.
    pub fn minimal_for_degree(n: u32) -> Self {
        let n = n.max(1) as usize;
        GridQuadrature::new((2 * n + 2).div_ceil(4), 2 * n + 1)
    }

    pub fn sizes(&self) -> (usize, usize) {
        (self.n_eta, self.n_xi)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn volume(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    pub fn integrate_complex(&self, values: &[Complex64]) -> Complex64 {
        self.weights.iter().zip(values).map(|(w, v)| v * *w).sum()
    }

    /// Pointwise values of a polynomial on the grid.
    pub fn eval(&self, f: &PolyFn) -> Vec<Complex64> {
        eval_on_grid(f, self)
    }

    /// Pointwise values of a polynomial flagged real; panics in debug builds if the
    /// imaginary residue exceeds `1e-13` relative.
    pub fn eval_real(&self, f: &PolyFn) -> Vec<f64> {
        let vals = self.eval(f);
        let scale = f.max_abs_coeff().max(1.0);
        debug_assert!(vals.iter().all(|v| v.im.abs() <= 1e-13 * scale));
        vals.into_iter().map(|v| v.re).collect()
    }
}

/// Evaluate `f` at every grid node.
pub fn eval_on_grid(f: &PolyFn, grid: &GridQuadrature) -> Vec<Complex64> {
    grid.nodes
        .iter()
        .map(|n| {
            let (c, s) = (n.eta.cos(), n.eta.sin());
            f.terms()
                .map(|(m, coeff)| {
                    let modulus = c.powi((m.a + m.c) as i32) * s.powi((m.b + m.d) as i32);
                    let phase = (m.a as f64 - m.c as f64) * n.xi1 + (m.b as f64 - m.d as f64) * n.xi2;
                    coeff * Complex64::from_polar(modulus, phase)
                })
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::monomial::{mono_integrate, Monomial, VOLUME};

    #[test]
    fn weights_sum_to_volume() {
        let g = GridQuadrature::new(8, 16);
        assert!((g.volume() - VOLUME).abs() < 1e-12 * VOLUME);
    }

    #[test]
    fn exact_on_monomials_up_to_degree() {
        let g = GridQuadrature::new(6, 14);
        assert_eq!(g.exactness_degree, 13);
        for a in 0..=4u32 {
            for b in 0..=4u32 {
                for c in 0..=4u32 {
                    for d in 0..=4u32 {
                        let m = Monomial::new(a, b, c, d);
                        if m.degree() > g.exactness_degree {
                            continue;
                        }
                        let exact = mono_integrate(&m);
                        let num = g.integrate_complex(&g.eval(&PolyFn::monomial(a, b, c, d)));
                        assert!(
                            (num.re - exact).abs() <= 1e-12 * exact.abs().max(1.0) && num.im.abs() < 1e-12,
                            "{m}: {num} vs {exact}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn minimal_grid_resolves_gram_degree() {
        for n in 1..=12 {
            let g = GridQuadrature::minimal_for_degree(n);
            assert!(g.exactness_degree >= 2 * n);
            let (ne, nx) = g.sizes();
            assert!(GridQuadrature::new(ne, nx - 1).exactness_degree < 2 * n);
        }
    }

    #[test]
    fn sixth_moment() {
        let g = GridQuadrature::new(6, 12);
        let f = PolyFn::monomial(1, 2, 1, 2);
        let v = g.integrate_complex(&g.eval(&f)).re;
        assert!((v - PI * PI / 3.0).abs() < 1e-12);
        assert!(g.integrate_complex(&g.eval(&PolyFn::z1())).norm() < 1e-12);
    }

    #[test]
    fn eval_examples() {
        let g = GridQuadrature::new(4, 8);
        assert!(g.eval(&PolyFn::constant(1.0)).iter().all(|v| (v - 1.0).norm() < 1e-15));
        let second = g.integrate(&g.eval_real(&PolyFn::monomial(1, 0, 1, 0)));
        assert!((second - 2.0 * PI * PI).abs() < 1e-12);
        let node = HopfNode { eta: 0.0, xi1: 0.0, xi2: 1.234 };
        let (z1, _) = node.z();
        assert!((PolyFn::z1().eval(z1, Complex64::new(0.0, 0.0)) - 1.0).norm() < 1e-15);
    }
}
