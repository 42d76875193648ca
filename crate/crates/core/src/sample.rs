//! Seeded random pluriharmonic functions for property suites and optimizer starts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::Model;

pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random real coefficients with nodal sup norm drawn uniformly in `[sup/10, sup]`.
/// Higher-degree directions are damped so samples are not dominated by the top
/// degree. The constant coordinate is left at zero unless `with_constant`.
pub fn random_coeffs<R: Rng + ?Sized>(model: &dyn Model, rng: &mut R, sup: f64, with_constant: bool) -> Vec<f64> {
    let ones = model.constants();
    let gram = model.gram();
    let sublap = model.sublap_matrix();
    let mut c: Vec<f64> = (0..model.dim())
        .map(|k| {
            let norm = gram[(k, k)].sqrt().max(1e-300);
            let damp = 1.0 + sublap[(k, k)].abs();
            rng.gen_range(-1.0..1.0) / (norm * damp)
        })
        .collect();
    // remove the mean, then optionally add a random constant
    let mean = model.inner(&c, ones) / model.volume();
    for (x, o) in c.iter_mut().zip(ones) {
        *x -= mean * o;
    }
    let values = model.eval(&c);
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let target = sup * rng.gen_range(0.1..=1.0);
    if peak > 0.0 {
        for x in c.iter_mut() {
            *x *= target / peak;
        }
    }
    if with_constant {
        let shift = rng.gen_range(-0.5..0.5) * sup;
        for (x, o) in c.iter_mut().zip(ones) {
            *x += shift * o;
        }
        // keep the sup bound after shifting
        let values = model.eval(&c);
        let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if peak > sup {
            for x in c.iter_mut() {
                *x *= sup / peak;
            }
        }
    }
    c
}

/// Nodal sup norm.
pub fn sup_norm(model: &dyn Model, c: &[f64]) -> f64 {
    model.eval(c).iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SphereModel;
    use crate::sphere::GridQuadrature;

    #[test]
    fn respects_bound_and_is_reproducible() {
        let m = SphereModel::new(3, GridQuadrature::new(8, 16), 4.0).unwrap();
        let mut a = seeded_rng(7);
        let mut b = seeded_rng(7);
        for _ in 0..10 {
            let x = random_coeffs(&m, &mut a, 0.5, true);
            let y = random_coeffs(&m, &mut b, 0.5, true);
            assert_eq!(x, y);
            assert!(sup_norm(&m, &x) <= 0.5 + 1e-12);
        }
        let z = random_coeffs(&m, &mut a, 0.3, false);
        assert!(m.inner(&z, m.constants()).abs() < 1e-12);
    }
}
