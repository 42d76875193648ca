//! Fixtures shared by the benchmarks.

use crdet::sample::{random_coeffs, seeded_rng};
use crdet::{Model, SphereModel, PPRIME_KAPPA};

pub fn sphere(degree: u32) -> SphereModel {
    SphereModel::with_degree(degree, PPRIME_KAPPA).expect("sphere model")
}

/// Seeded pluriharmonic coefficients with the given sup norm.
pub fn random_w(model: &dyn Model, seed: u64, sup: f64) -> Vec<f64> {
    random_coeffs(model, &mut seeded_rng(seed), sup, true)
}
