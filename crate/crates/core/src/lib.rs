//! Functional determinants of the pluriharmonic `P′`-type operator on the CR
//! three-sphere: spectral zeta regularization, Polyakov-type functionals under
//! conformal change, and extremal problems for the resulting determinant.

pub mod conformal;
pub mod error;
pub mod extremal;
pub mod functionals;
pub mod model;
mod numeric;
pub mod sample;
pub mod sphere;
pub mod synthetic;
pub mod zeta;

pub use conformal::ContactState;
pub use error::{CrError, Result};
pub use extremal::{AscentOptions, AscentTrace, FeasibilityReport, StepPolicy};
pub use functionals::{FunctionalReport, VolumeMode, C1};
pub use model::{Model, SphereModel, PPRIME_KAPPA};
pub use synthetic::{SyntheticModel, SyntheticSpec};
pub use zeta::{SpectralSequence, ZetaMethod, ZetaResult};
