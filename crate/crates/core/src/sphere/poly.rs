//! Exact polynomials in `z₁, z₂, z̄₁, z̄₂` restricted to the sphere, and the CR
//! vector fields acting on them.
//!
//! Conventions on `S³ ⊂ ℂ²`:
//!
//! ```text
//! Z₁ = z̄₂ ∂_{z₁} − z̄₁ ∂_{z₂}          (tangential, annihilates |z|²)
//! Z̄₁ = z₂ ∂_{z̄₁} − z₁ ∂_{z̄₂}
//! T  = i (z₁∂_{z₁} + z₂∂_{z₂} − z̄₁∂_{z̄₁} − z̄₂∂_{z̄₂})
//! Δ_b = −(Z₁Z̄₁ + Z̄₁Z₁)                 (nonnegative spectrum)
//! |∇_b u|² = 2 |Z₁u|²
//! ```
//!
//! Representatives are not reduced modulo `|z₁|² + |z₂|² = 1`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::monomial::{mono_integrate, Monomial};
use crate::error::{CrError, Result};

/// Degree cap for symbolic manipulation.
pub const DEGREE_CAP: u32 = 64;

const ZERO_EPS: f64 = 0.0;

/// CR vector fields on the sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Z1,
    Z1Bar,
    T,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PolyFn {
    terms: BTreeMap<Monomial, Complex64>,
}

impl PolyFn {
    pub fn zero() -> Self {
        PolyFn::default()
    }

    pub fn constant(c: f64) -> Self {
        PolyFn::term(Monomial::ONE, Complex64::new(c, 0.0))
    }

    pub fn term(m: Monomial, coeff: Complex64) -> Self {
        let mut p = PolyFn::zero();
        p.add_term(m, coeff);
        p
    }

    pub fn monomial(a: u32, b: u32, c: u32, d: u32) -> Self {
        PolyFn::term(Monomial::new(a, b, c, d), Complex64::new(1.0, 0.0))
    }

    pub fn z1() -> Self {
        PolyFn::monomial(1, 0, 0, 0)
    }

    pub fn z2() -> Self {
        PolyFn::monomial(0, 1, 0, 0)
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, Complex64)>>(terms: I) -> Self {
        let mut p = PolyFn::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, coeff: Complex64) {
        let entry = self.terms.entry(m).or_insert(Complex64::new(0.0, 0.0));
        *entry += coeff;
        if entry.norm() <= ZERO_EPS {
            self.terms.remove(&m);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> Complex64 {
        self.terms.get(m).copied().unwrap_or_default()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        PolyFn::from_terms(self.terms.iter().map(|(m, c)| (*m, c * s)))
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    /// Complex conjugate as a function.
    pub fn conj(&self) -> Self {
        PolyFn::from_terms(self.terms.iter().map(|(m, c)| (m.conj(), c.conj())))
    }

    /// Largest coefficient of `f − f̄`; zero for real functions.
    pub fn imaginary_residue(&self) -> f64 {
        (self - &self.conj()).max_abs_coeff() / 2.0
    }

    /// True iff `f` equals its conjugate term by term.
    pub fn is_real(&self) -> bool {
        self.imaginary_residue() <= 1e-14 * self.max_abs_coeff().max(1.0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Sum of holomorphic and antiholomorphic monomials only.
    pub fn is_pluriharmonic(&self) -> bool {
        self.terms.keys().all(|m| m.is_holomorphic() || m.is_antiholomorphic())
    }

    pub fn real_part(&self) -> Self {
        (self + &self.conj()).scale_real(0.5)
    }

    pub fn imag_part(&self) -> Self {
        (self - &self.conj()).scale(Complex64::new(0.0, -0.5))
    }

    /// Exact `∫_{S³} f dν`.
    pub fn integrate(&self) -> Complex64 {
        self.terms.iter().map(|(m, c)| c * mono_integrate(m)).sum()
    }

    /// Pointwise value at `(z₁, z₂)`.
    pub fn eval(&self, z1: Complex64, z2: Complex64) -> Complex64 {
        let (zb1, zb2) = (z1.conj(), z2.conj());
        self.terms.iter().map(|(m, c)| c * z1.powu(m.a) * z2.powu(m.b) * zb1.powu(m.c) * zb2.powu(m.d)).sum()
    }

    fn check_cap(&self) -> Result<()> {
        let degree = self.degree();
        if degree > DEGREE_CAP {
            return Err(CrError::DegreeCap { degree, cap: DEGREE_CAP });
        }
        Ok(())
    }

    /// Apply one of the CR vector fields exactly.
    pub fn apply_field(&self, field: Field) -> Result<PolyFn> {
        self.check_cap()?;
        let mut out = PolyFn::zero();
        for (m, c) in &self.terms {
            match field {
                Field::Z1 => {
                    // z̄₂ ∂_{z₁}
                    if m.a > 0 {
                        let n = Monomial { a: m.a - 1, d: m.d + 1, ..*m };
                        out.add_term(n, c * m.a as f64);
                    }
                    // −z̄₁ ∂_{z₂}
                    if m.b > 0 {
                        let n = Monomial { b: m.b - 1, c: m.c + 1, ..*m };
                        out.add_term(n, -c * m.b as f64);
                    }
                }
                Field::Z1Bar => {
                    // z₂ ∂_{z̄₁}
                    if m.c > 0 {
                        let n = Monomial { c: m.c - 1, b: m.b + 1, ..*m };
                        out.add_term(n, c * m.c as f64);
                    }
                    // −z₁ ∂_{z̄₂}
                    if m.d > 0 {
                        let n = Monomial { d: m.d - 1, a: m.a + 1, ..*m };
                        out.add_term(n, -c * m.d as f64);
                    }
                }
                Field::T => {
                    let q = m.charge();
                    if q != 0 {
                        out.add_term(*m, c * Complex64::new(0.0, q as f64));
                    }
                }
            }
        }
        Ok(out)
    }

    /// `Δ_b f = −(Z₁Z̄₁ + Z̄₁Z₁) f`.
    pub fn sublaplacian(&self) -> Result<PolyFn> {
        let a = self.apply_field(Field::Z1Bar)?.apply_field(Field::Z1)?;
        let b = self.apply_field(Field::Z1)?.apply_field(Field::Z1Bar)?;
        Ok(-(&a + &b))
    }

    /// `|∇_b u|² = 2 Z₁u · conj(Z₁u)` for real `u`.
    pub fn horizontal_grad_sq(&self) -> Result<PolyFn> {
        if !self.is_real() {
            return Err(CrError::NotReal { residue: self.imaginary_residue() });
        }
        let zu = self.apply_field(Field::Z1)?;
        Ok((&zu * &zu.conj()).scale_real(2.0))
    }

    /// Polarised `∇_b f · ∇_b g = Z₁f·conj(Z₁g) + conj(Z₁f)·Z₁g` for real `f, g`.
    pub fn horizontal_dot(&self, other: &PolyFn) -> Result<PolyFn> {
        let zf = self.apply_field(Field::Z1)?;
        let zg = other.apply_field(Field::Z1)?;
        Ok(&(&zf * &zg.conj()) + &(&zf.conj() * &zg))
    }

    /// Max coefficient distance, used for exact-identity checks.
    pub fn distance(&self, other: &PolyFn) -> f64 {
        (self - other).max_abs_coeff()
    }
}

impl fmt::Display for PolyFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(m, c)| format!("({}{:+}i)*{}", c.re, c.im, m)).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl Add for &PolyFn {
    type Output = PolyFn;
    fn add(self, rhs: &PolyFn) -> PolyFn {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, *c);
        }
        out
    }
}

impl Sub for &PolyFn {
    type Output = PolyFn;
    fn sub(self, rhs: &PolyFn) -> PolyFn {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, -*c);
        }
        out
    }
}

impl Mul for &PolyFn {
    type Output = PolyFn;
    fn mul(self, rhs: &PolyFn) -> PolyFn {
        let mut out = PolyFn::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for PolyFn {
    type Output = PolyFn;
    fn neg(self) -> PolyFn {
        self.scale_real(-1.0)
    }
}

impl Add for PolyFn {
    type Output = PolyFn;
    fn add(self, rhs: PolyFn) -> PolyFn {
        &self + &rhs
    }
}

impl Sub for PolyFn {
    type Output = PolyFn;
    fn sub(self, rhs: PolyFn) -> PolyFn {
        &self - &rhs
    }
}

impl Mul for PolyFn {
    type Output = PolyFn;
    fn mul(self, rhs: PolyFn) -> PolyFn {
        &self * &rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn z1bar_kills_holomorphic() {
        for j in 0..7 {
            let f = PolyFn::monomial(j, 0, 0, 0);
            assert!(f.apply_field(Field::Z1Bar).unwrap().is_empty());
        }
    }

    #[test]
    fn reeb_on_z1_squared_z2() {
        let f = PolyFn::monomial(2, 1, 0, 0);
        let tf = f.apply_field(Field::T).unwrap();
        assert_eq!(tf, PolyFn::term(Monomial::new(2, 1, 0, 0), c(0.0, 3.0)));
    }

    #[test]
    fn reeb_preserves_reality() {
        // T = i(z∂ − z̄∂̄) is a real vector field: real functions map to real functions
        let u = &PolyFn::z1() + &PolyFn::z1().conj();
        let tu = u.apply_field(Field::T).unwrap();
        assert!(tu.is_real());
        assert!(!tu.is_empty());
    }

    #[test]
    fn z1_of_z1() {
        let f = PolyFn::z1().apply_field(Field::Z1).unwrap();
        assert_eq!(f, PolyFn::monomial(0, 0, 0, 1));
    }

    #[test]
    fn sublaplacian_on_holomorphic_powers() {
        assert!(PolyFn::constant(1.0).sublaplacian().unwrap().is_empty());
        for j in 1..=6 {
            let f = PolyFn::monomial(j, 0, 0, 0);
            let lf = f.sublaplacian().unwrap();
            assert!(lf.distance(&f.scale_real(j as f64)) < 1e-12, "j = {j}");
        }
    }

    #[test]
    fn sublaplacian_bidegree_one_one() {
        let f = &PolyFn::monomial(1, 0, 1, 0) - &PolyFn::monomial(0, 1, 0, 1);
        let lf = f.sublaplacian().unwrap();
        assert!(lf.distance(&f.scale_real(4.0)) < 1e-12);
    }

    #[test]
    fn grad_sq_examples() {
        assert!(PolyFn::constant(3.0).horizontal_grad_sq().unwrap().is_empty());
        let u = &PolyFn::z1() + &PolyFn::z1().conj();
        let g = u.horizontal_grad_sq().unwrap();
        assert!(g.distance(&PolyFn::monomial(0, 1, 0, 1).scale_real(2.0)) < 1e-14);
        // Δ_b(u²) = 2uΔ_bu − 4|z₂|²
        let lhs = (&u * &u).sublaplacian().unwrap();
        let rhs = &(&u * &u.sublaplacian().unwrap()).scale_real(2.0) - &PolyFn::monomial(0, 1, 0, 1).scale_real(4.0);
        assert!(lhs.distance(&rhs) < 1e-12);
    }

    #[test]
    fn grad_sq_rejects_complex_input() {
        assert!(matches!(PolyFn::z1().horizontal_grad_sq(), Err(CrError::NotReal { .. })));
    }

    #[test]
    fn degree_cap_is_enforced() {
        let f = PolyFn::monomial(DEGREE_CAP + 1, 0, 0, 0);
        assert!(matches!(f.apply_field(Field::Z1), Err(CrError::DegreeCap { .. })));
    }

    #[test]
    fn integrate_uses_moments() {
        let f = &PolyFn::monomial(1, 0, 1, 0) + &PolyFn::z1();
        assert!((f.integrate().re - 2.0 * std::f64::consts::PI.powi(2)).abs() < 1e-12);
    }
}
