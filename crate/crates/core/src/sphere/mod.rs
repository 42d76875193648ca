//! Exact calculus on the standard CR sphere `S³ ⊂ ℂ²`.

mod basis;
mod monomial;
mod poly;
mod quadrature;

pub use basis::{pluri_dimension, BasisEntry, BasisKind, PluriBasis, RealFrame, RealFrameEntry, RealPart};
pub use monomial::{moment_fraction, moment_ratio, mono_integrate, Monomial, VOLUME};
pub use poly::{Field, PolyFn, DEGREE_CAP};
pub use quadrature::{eval_on_grid, GridQuadrature, HopfNode};

/// Webster scalar curvature of the standard contact form.
pub const SCALAR_CURVATURE: f64 = 2.0;

/// `Q′ = R²` for the torsion-free standard form.
pub const QPRIME: f64 = SCALAR_CURVATURE * SCALAR_CURVATURE;
