pub mod maximize;
pub mod polyakov;
pub mod spectrum;
pub mod verify;
pub mod zeta;

use crdet::model::{Model, SphereModel};
use crdet::synthetic::SyntheticModel;

use crate::config::{ModelSource, RunConfig};
use crate::error::CliResult;

pub enum LoadedModel {
    Sphere(SphereModel),
    Synthetic(SyntheticModel),
}

impl LoadedModel {
    pub fn load(cfg: &RunConfig) -> CliResult<LoadedModel> {
        Ok(match &cfg.model {
            ModelSource::Sphere => LoadedModel::Sphere(SphereModel::new(cfg.degree, cfg.grid_quadrature(), cfg.kappa)?),
            ModelSource::File(path) => LoadedModel::Synthetic(SyntheticModel::load(path)?),
        })
    }

    pub fn model(&self) -> &dyn Model {
        match self {
            LoadedModel::Sphere(m) => m,
            LoadedModel::Synthetic(m) => m,
        }
    }

    pub fn sphere(&self) -> Option<&SphereModel> {
        match self {
            LoadedModel::Sphere(m) => Some(m),
            LoadedModel::Synthetic(_) => None,
        }
    }
}

/// Fixed-width scientific notation for text listings.
pub(crate) fn sci(x: f64) -> String {
    format!("{x:>22.15e}")
}

pub(crate) fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}
