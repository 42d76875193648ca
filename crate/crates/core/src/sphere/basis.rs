use num_complex::Complex64;

use super::monomial::{moment_ratio, Monomial, VOLUME};
use super::poly::PolyFn;
use crate::error::{CrError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    Constant,
    Holomorphic,
    Antiholomorphic,
}

#[derive(Debug, Clone)]
pub struct BasisEntry {
    pub function: PolyFn,
    pub degree: u32,
    pub kind: BasisKind,
    /// `‖f‖²` under `ν`.
    pub norm_sq: f64,
}

/// Truncated pluriharmonic basis: constants, `z₁^a z₂^b` and their conjugates with
/// `a + b ≤ N`.
#[derive(Debug, Clone)]
pub struct PluriBasis {
    pub entries: Vec<BasisEntry>,
    pub max_degree: u32,
}

/// Expected dimension `N² + 3N + 1`.
pub fn pluri_dimension(n: u32) -> usize {
    (n * n + 3 * n + 1) as usize
}

impl PluriBasis {
    pub fn new(max_degree: u32) -> Self {
        let mut entries =
            vec![BasisEntry { function: PolyFn::constant(1.0), degree: 0, kind: BasisKind::Constant, norm_sq: VOLUME }];
        for j in 1..=max_degree {
            for a in (0..=j).rev() {
                let b = j - a;
                let norm_sq = VOLUME * moment_ratio(a, b);
                let hol = PolyFn::term(Monomial::new(a, b, 0, 0), Complex64::new(1.0, 0.0));
                let anti = hol.conj();
                entries.push(BasisEntry { function: hol, degree: j, kind: BasisKind::Holomorphic, norm_sq });
                entries.push(BasisEntry { function: anti, degree: j, kind: BasisKind::Antiholomorphic, norm_sq });
            }
        }
        PluriBasis { entries, max_degree }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Exact Gram matrix `⟨e_i, e_j⟩ = ∫ e_i conj(e_j) dν`.
    pub fn gram(&self) -> Vec<Vec<Complex64>> {
        self.entries
            .iter()
            .map(|ei| self.entries.iter().map(|ej| (&ei.function * &ej.function.conj()).integrate()).collect())
            .collect()
    }
}

/// One element of the real pluriharmonic frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RealPart {
    Constant,
    /// `Re(z₁^a z₂^b)`
    Re {
        a: u32,
        b: u32,
    },
    /// `Im(z₁^a z₂^b)`
    Im {
        a: u32,
        b: u32,
    },
}

#[derive(Debug, Clone)]
pub struct RealFrameEntry {
    pub part: RealPart,
    pub function: PolyFn,
    pub degree: u32,
    pub norm_sq: f64,
}

/// Real orthogonal frame of the same span: `1, Re z^α, Im z^α`. Coefficients of a
/// real pluriharmonic function live here.
#[derive(Debug, Clone)]
pub struct RealFrame {
    pub entries: Vec<RealFrameEntry>,
    pub max_degree: u32,
}

impl RealFrame {
    pub fn new(max_degree: u32) -> Self {
        let mut entries = vec![RealFrameEntry {
            part: RealPart::Constant,
            function: PolyFn::constant(1.0),
            degree: 0,
            norm_sq: VOLUME,
        }];
        for j in 1..=max_degree {
            for a in (0..=j).rev() {
                let b = j - a;
                let m = PolyFn::monomial(a, b, 0, 0);
                let norm_sq = 0.5 * VOLUME * moment_ratio(a, b);
                entries.push(RealFrameEntry {
                    part: RealPart::Re { a, b },
                    function: m.real_part(),
                    degree: j,
                    norm_sq,
                });
                entries.push(RealFrameEntry {
                    part: RealPart::Im { a, b },
                    function: m.imag_part(),
                    degree: j,
                    norm_sq,
                });
            }
        }
        RealFrame { entries, max_degree }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn degrees(&self) -> Vec<u32> {
        self.entries.iter().map(|e| e.degree).collect()
    }

    pub fn norms_sq(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.norm_sq).collect()
    }

    /// Symbolic function with the given real coefficients.
    pub fn synthesize(&self, coeffs: &[f64]) -> PolyFn {
        let mut out = PolyFn::zero();
        for (e, &c) in self.entries.iter().zip(coeffs) {
            if c != 0.0 {
                out = &out + &e.function.scale_real(c);
            }
        }
        out
    }

    /// Real coefficients of a function given over the complex basis; requires the
    /// conjugate symmetry `c_{ᾱ} = conj(c_α)`.
    pub fn from_complex(&self, basis: &PluriBasis, coeffs: &[Complex64], tol: f64) -> Option<Vec<f64>> {
        if coeffs.len() != basis.len() || basis.max_degree != self.max_degree {
            return None;
        }
        if coeffs[0].im.abs() > tol {
            return None;
        }
        let mut out = vec![coeffs[0].re];
        // basis pairs (hol, antihol) align with frame pairs (Re, Im)
        for pair in coeffs[1..].chunks(2) {
            let (h, ah) = (pair[0], pair[1]);
            if (h - ah.conj()).norm() > tol {
                return None;
            }
            // h z^α + conj(h) z̄^α = 2Re(h) Re z^α − 2Im(h) Im z^α
            out.push(2.0 * h.re);
            out.push(-2.0 * h.im);
        }
        Some(out)
    }

    /// Real coefficients of a symbolic function, which must be real,
    /// pluriharmonic and of degree at most `max_degree`.
    pub fn from_poly(&self, f: &PolyFn) -> Result<Vec<f64>> {
        if !f.is_pluriharmonic() {
            let mixed =
                f.terms().find(|(m, _)| !m.is_holomorphic() && !m.is_antiholomorphic()).map(|(m, _)| m.to_string());
            return Err(CrError::NotPluriharmonic(mixed.unwrap_or_default()));
        }
        if f.degree() > self.max_degree {
            return Err(CrError::DegreeCap { degree: f.degree(), cap: self.max_degree });
        }
        let residue = f.imaginary_residue();
        if residue > 1e-12 * f.max_abs_coeff().max(1.0) {
            return Err(CrError::NotReal { residue });
        }
        let mut out = vec![f.coeff(&Monomial::ONE).re];
        for e in &self.entries[1..] {
            // h z^α + conj(h) z̄^α = 2Re(h) Re z^α − 2Im(h) Im z^α
            match e.part {
                RealPart::Re { a, b } => out.push(2.0 * f.coeff(&Monomial::new(a, b, 0, 0)).re),
                RealPart::Im { a, b } => out.push(-2.0 * f.coeff(&Monomial::new(a, b, 0, 0)).im),
                RealPart::Constant => unreachable!("constant entry leads the frame"),
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn dimensions() {
        assert_eq!(PluriBasis::new(1).len(), 5);
        assert_eq!(PluriBasis::new(2).len(), 11);
        for n in 1..8 {
            assert_eq!(PluriBasis::new(n).len(), pluri_dimension(n));
            assert_eq!(RealFrame::new(n).len(), pluri_dimension(n));
        }
    }

    #[test]
    fn z1_norm() {
        let b = PluriBasis::new(2);
        let e = b.entries.iter().find(|e| e.function == PolyFn::z1()).unwrap();
        assert!((e.norm_sq - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn gram_is_diagonal() {
        let b = PluriBasis::new(4);
        let g = b.gram();
        for i in 0..b.len() {
            for j in 0..b.len() {
                if i == j {
                    assert!((g[i][j].re - b.entries[i].norm_sq).abs() < 1e-12);
                } else {
                    assert!(g[i][j].norm() < 1e-14);
                }
            }
        }
        assert_eq!(b.entries.iter().filter(|e| e.kind == BasisKind::Constant).count(), 1);
    }

    #[test]
    fn real_frame_is_orthogonal() {
        let f = RealFrame::new(3);
        for (i, ei) in f.entries.iter().enumerate() {
            for (j, ej) in f.entries.iter().enumerate() {
                let v = (&ei.function * &ej.function).integrate();
                let expect = if i == j { ei.norm_sq } else { 0.0 };
                assert!((v.re - expect).abs() < 1e-12 && v.im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn symbolic_to_real_coefficients() {
        let frame = RealFrame::new(3);
        let mut rng = 0.3f64;
        let c: Vec<f64> = (0..frame.len())
            .map(|_| {
                rng = (rng * 7.1).fract();
                rng - 0.5
            })
            .collect();
        let back = frame.from_poly(&frame.synthesize(&c)).unwrap();
        for (x, y) in c.iter().zip(&back) {
            assert!((x - y).abs() < 1e-14);
        }
        assert!(matches!(frame.from_poly(&PolyFn::z1()), Err(CrError::NotReal { .. })));
        assert!(matches!(frame.from_poly(&PolyFn::monomial(1, 0, 1, 0)), Err(CrError::NotPluriharmonic(_))));
        let quartic = PolyFn::monomial(4, 0, 0, 0).real_part();
        assert!(matches!(frame.from_poly(&quartic), Err(CrError::DegreeCap { .. })));
    }

    #[test]
    fn complex_to_real_coefficients() {
        let basis = PluriBasis::new(1);
        let frame = RealFrame::new(1);
        // w = 0.5 + (1+2i) z1 + (1−2i) z̄1
        let mut cs = vec![Complex64::new(0.0, 0.0); basis.len()];
        cs[0] = Complex64::new(0.5, 0.0);
        cs[1] = Complex64::new(1.0, 2.0);
        cs[2] = Complex64::new(1.0, -2.0);
        let real = frame.from_complex(&basis, &cs, 1e-12).unwrap();
        let direct = basis.entries.iter().zip(&cs).fold(PolyFn::zero(), |acc, (e, c)| &acc + &e.function.scale(*c));
        assert!(frame.synthesize(&real).distance(&direct) < 1e-14);
        cs[2] = Complex64::new(1.0, 2.0);
        assert!(frame.from_complex(&basis, &cs, 1e-12).is_none());
    }
}
