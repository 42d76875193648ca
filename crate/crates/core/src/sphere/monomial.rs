use std::f64::consts::PI;
use std::fmt;

/// Volume of the standard sphere under `θ ∧ dθ`.
pub const VOLUME: f64 = 4.0 * PI * PI;

/// `z₁^a z₂^b z̄₁^c z̄₂^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial {
    pub a: u32,
    pub b: u32,
    pub c: u32,
    pub d: u32,
}

impl Monomial {
    pub const ONE: Monomial = Monomial { a: 0, b: 0, c: 0, d: 0 };

    pub const fn new(a: u32, b: u32, c: u32, d: u32) -> Self {
        Monomial { a, b, c, d }
    }

    pub fn degree(&self) -> u32 {
        self.a + self.b + self.c + self.d
    }

    pub fn conj(&self) -> Self {
        Monomial { a: self.c, b: self.d, c: self.a, d: self.b }
    }

    pub fn mul(&self, other: &Monomial) -> Self {
        Monomial { a: self.a + other.a, b: self.b + other.b, c: self.c + other.c, d: self.d + other.d }
    }

    /// Charge under the Reeb rotation: `T m = i·charge·m`.
    pub fn charge(&self) -> i64 {
        (self.a + self.b) as i64 - (self.c + self.d) as i64
    }

    pub fn is_holomorphic(&self) -> bool {
        self.c == 0 && self.d == 0
    }

    pub fn is_antiholomorphic(&self) -> bool {
        self.a == 0 && self.b == 0
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == Monomial::ONE {
            return write!(f, "1");
        }
        let mut parts = Vec::new();
        for (name, e) in [("z1", self.a), ("z2", self.b), ("zb1", self.c), ("zb2", self.d)] {
            match e {
                0 => {}
                1 => parts.push(name.to_string()),
                _ => parts.push(format!("{name}^{e}")),
            }
        }
        write!(f, "{}", parts.join("*"))
    }
}

/// Exact value of `∫ |z₁|^{2a} |z₂|^{2b} dν / Vol = a! b! / (a+b+1)!` as a reduced
/// fraction, when it fits in `u128`.
pub fn moment_fraction(a: u32, b: u32) -> Option<(u128, u128)> {
    // a! b! / (a+b+1)! = 1 / ((a+b+1) · C(a+b, a))
    let n = (a + b) as u128;
    let k = a.min(b) as u128;
    let mut binom: u128 = 1;
    for i in 0..k {
        binom = binom.checked_mul(n - i)? / (i + 1);
    }
    let den = binom.checked_mul(n + 1)?;
    Some((1, den))
}

/// Exact integral of a monomial over the sphere with respect to `ν = θ ∧ dθ`.
pub fn mono_integrate(m: &Monomial) -> f64 {
    if m.a != m.c || m.b != m.d {
        return 0.0;
    }
    VOLUME * moment_ratio(m.a, m.b)
}

/// `a! b! / (a+b+1)!` in floating point.
pub fn moment_ratio(a: u32, b: u32) -> f64 {
    if let Some((num, den)) = moment_fraction(a, b) {
        return num as f64 / den as f64;
    }
    let (lo, hi) = (a.min(b), a.max(b));
    // 1/((n+1) C(n, lo)) accumulated as a product of ratios to stay in range
    let mut r = 1.0 / (a + b + 1) as f64;
    for i in 0..lo {
        r *= (i + 1) as f64 / (hi + i + 1) as f64;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn volume_and_second_moment() {
        assert!((mono_integrate(&Monomial::ONE) - 4.0 * PI * PI).abs() < 1e-13);
        assert!((mono_integrate(&Monomial::new(1, 0, 1, 0)) - 2.0 * PI * PI).abs() < 1e-13);
        assert_eq!(mono_integrate(&Monomial::new(1, 0, 0, 1)), 0.0);
    }

    #[test]
    fn sphere_relation_is_consistent() {
        // |z1|^2 + |z2|^2 integrates to the volume
        let s = mono_integrate(&Monomial::new(1, 0, 1, 0)) + mono_integrate(&Monomial::new(0, 1, 0, 1));
        assert!((s - VOLUME).abs() < 1e-12);
        // and multiplying any moment by the relation leaves it unchanged
        for a in 0..6 {
            for b in 0..6 {
                let m = Monomial::new(a, b, a, b);
                let lifted = mono_integrate(&m.mul(&Monomial::new(1, 0, 1, 0)))
                    + mono_integrate(&m.mul(&Monomial::new(0, 1, 0, 1)));
                assert!((lifted - mono_integrate(&m)).abs() < 1e-12 * mono_integrate(&m).max(1.0));
            }
        }
    }

    #[test]
    fn exact_fraction_matches_float_path() {
        assert_eq!(moment_fraction(1, 2), Some((1, 12)));
        assert_eq!(moment_fraction(0, 0), Some((1, 1)));
        for (a, b) in [(3, 4), (10, 10), (20, 7)] {
            let (n, d) = moment_fraction(a, b).unwrap();
            let (lo, hi) = (a.min(b), a.max(b));
            let mut r = 1.0 / (a + b + 1) as f64;
            for i in 0..lo {
                r *= (i + 1) as f64 / (hi + i + 1) as f64;
            }
            assert!((n as f64 / d as f64 - r).abs() <= 1e-15 * r);
        }
        // far past u128 the float path still answers
        assert!(moment_ratio(200, 200) > 0.0);
    }
}
