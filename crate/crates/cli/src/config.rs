//! Run configuration: built-in defaults, then a `key = value` file, then flags.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::ValueEnum;
use crdet::sphere::GridQuadrature;
use serde::{Serialize, Serializer};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelSource {
    Sphere,
    File(PathBuf),
}

impl FromStr for ModelSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "" => Err("empty model source".into()),
            "sphere" => Ok(ModelSource::Sphere),
            path => Ok(ModelSource::File(PathBuf::from(path))),
        }
    }
}

impl Serialize for ModelSource {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ModelSource::Sphere => s.serialize_str("sphere"),
            ModelSource::File(p) => s.serialize_str(&p.display().to_string()),
        }
    }
}

/// Grid given as `N_ETAxN_XI`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GridSize {
    pub n_eta: usize,
    pub n_xi: usize,
}

impl FromStr for GridSize {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) =
            s.split_once(['x', 'X', ',']).ok_or_else(|| format!("grid `{s}` is not of the form N_ETAxN_XI"))?;
        let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("grid `{s}`: {e}"));
        let (n_eta, n_xi) = (parse(a)?, parse(b)?);
        if n_eta < 2 || n_xi < 1 {
            return Err(format!("grid `{s}` needs at least 2 Gauss points and 1 angle"));
        }
        Ok(GridSize { n_eta, n_xi })
    }
}

/// Which defaults a command starts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Defaults {
    /// Spectral listings: `κ = 1` and the smallest exact grid.
    Listing,
    /// Functionals and the optimizer: `κ = 4` and the standard grid.
    Geometric,
}

/// Optional settings from one source. Later layers win.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigLayer {
    pub degree: Option<u32>,
    pub grid: Option<GridSize>,
    pub kappa: Option<f64>,
    pub c2: Option<f64>,
    pub c3: Option<f64>,
    pub mu: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub seed: Option<u64>,
    pub model: Option<ModelSource>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub force: Option<bool>,
}

impl ConfigLayer {
    pub fn merge(self, over: ConfigLayer) -> ConfigLayer {
        ConfigLayer {
            degree: over.degree.or(self.degree),
            grid: over.grid.or(self.grid),
            kappa: over.kappa.or(self.kappa),
            c2: over.c2.or(self.c2),
            c3: over.c3.or(self.c3),
            mu: over.mu.or(self.mu),
            tol: over.tol.or(self.tol),
            max_iter: over.max_iter.or(self.max_iter),
            seed: over.seed.or(self.seed),
            model: over.model.or(self.model),
            out: over.out.or(self.out),
            format: over.format.or(self.format),
            force: over.force.or(self.force),
        }
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str, path: &Path) -> CliResult<ConfigLayer> {
        let mut layer = ConfigLayer::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| CliError::Config { path: path.to_path_buf(), line: i + 1, message };
            let (key, value) =
                line.split_once('=').ok_or_else(|| err(format!("expected `key = value`, found `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            fn num<T: FromStr>(key: &str, value: &str) -> Result<T, String>
            where
                T::Err: std::fmt::Display,
            {
                value.parse::<T>().map_err(|e| format!("{key}: cannot parse `{value}`: {e}"))
            }
            match key.replace('-', "_").as_str() {
                "degree" => layer.degree = Some(num(key, value).map_err(err)?),
                "grid" => layer.grid = Some(value.parse().map_err(err)?),
                "kappa" => layer.kappa = Some(num(key, value).map_err(err)?),
                "c2" => layer.c2 = Some(num(key, value).map_err(err)?),
                "c3" => layer.c3 = Some(num(key, value).map_err(err)?),
                "mu" => layer.mu = Some(num(key, value).map_err(err)?),
                "tol" => layer.tol = Some(num(key, value).map_err(err)?),
                "max_iter" => layer.max_iter = Some(num(key, value).map_err(err)?),
                "seed" => layer.seed = Some(num(key, value).map_err(err)?),
                "model" => layer.model = Some(value.parse().map_err(err)?),
                "out" => layer.out = Some(PathBuf::from(value)),
                "format" => {
                    layer.format = Some(
                        Format::from_str(value, true)
                            .map_err(|_| err(format!("format must be json or csv, found `{value}`")))?,
                    )
                }
                "force" => layer.force = Some(num(key, value).map_err(err)?),
                _ => return Err(err(format!("unknown key `{key}`"))),
            }
        }
        Ok(layer)
    }

    pub fn load(path: &Path) -> CliResult<ConfigLayer> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        ConfigLayer::parse(&text, path)
    }
}

/// Fully resolved settings, echoed into every output document.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub degree: u32,
    pub grid: GridSize,
    pub kappa: f64,
    pub c2: f64,
    pub c3: f64,
    pub mu: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub model: ModelSource,
    pub force: bool,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub format: Option<Format>,
}

impl RunConfig {
    pub fn resolve(layer: ConfigLayer, defaults: Defaults) -> CliResult<RunConfig> {
        let degree = layer.degree.unwrap_or(4);
        if degree < 1 {
            return Err(CliError::Usage("degree must be at least 1".into()));
        }
        let grid = layer.grid.unwrap_or_else(|| {
            let g = match defaults {
                Defaults::Listing => GridQuadrature::minimal_for_degree(degree),
                Defaults::Geometric => GridQuadrature::for_degree(degree),
            };
            let (n_eta, n_xi) = g.sizes();
            GridSize { n_eta, n_xi }
        });
        let kappa = layer.kappa.unwrap_or(match defaults {
            Defaults::Listing => 1.0,
            Defaults::Geometric => crdet::PPRIME_KAPPA,
        });
        let cfg = RunConfig {
            degree,
            grid,
            kappa,
            c2: layer.c2.unwrap_or(1.0),
            c3: layer.c3.unwrap_or(0.0),
            mu: layer.mu,
            tol: layer.tol.unwrap_or(1e-10),
            max_iter: layer.max_iter.unwrap_or(5000),
            seed: layer.seed.unwrap_or(0),
            model: layer.model.unwrap_or(ModelSource::Sphere),
            force: layer.force.unwrap_or(false),
            out: layer.out,
            format: layer.format,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> CliResult<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(CliError::Usage(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("kappa", self.kappa)?;
        positive("tol", self.tol)?;
        if let Some(mu) = self.mu {
            positive("mu", mu)?;
        }
        if !self.c2.is_finite() || !self.c3.is_finite() {
            return Err(CliError::Usage("c2 and c3 must be finite".into()));
        }
        if self.max_iter == 0 {
            return Err(CliError::Usage("max_iter must be at least 1".into()));
        }
        Ok(())
    }

    pub fn grid_quadrature(&self) -> GridQuadrature {
        GridQuadrature::new(self.grid.n_eta, self.grid.n_xi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> CliResult<ConfigLayer> {
        ConfigLayer::parse(text, Path::new("run.cfg"))
    }

    #[test]
    fn parses_keys_and_comments() {
        let layer = parse(
            "# sweep\ndegree = 3\ngrid = 8x16\nkappa=2.5  # scaled\nmodel = ring.json\nformat = CSV\nforce = true\n",
        )
        .unwrap();
        assert_eq!(layer.degree, Some(3));
        assert_eq!(layer.grid, Some(GridSize { n_eta: 8, n_xi: 16 }));
        assert_eq!(layer.kappa, Some(2.5));
        assert_eq!(layer.model, Some(ModelSource::File("ring.json".into())));
        assert_eq!(layer.format, Some(Format::Csv));
        assert_eq!(layer.force, Some(true));
    }

    #[test]
    fn reports_the_offending_line() {
        match parse("degree = 3\n\ncolour = red\n") {
            Err(CliError::Config { line, message, .. }) => {
                assert_eq!(line, 3);
                assert!(message.contains("colour"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("degree 3"), Err(CliError::Config { line: 1, .. })));
        assert!(matches!(parse("c2 = one"), Err(CliError::Config { line: 1, .. })));
    }

    #[test]
    fn later_layers_win_and_defaults_depend_on_command() {
        let file = parse("degree = 3\nkappa = 2\n").unwrap();
        let flags = ConfigLayer { kappa: Some(3.0), ..Default::default() };
        let cfg = RunConfig::resolve(file.merge(flags), Defaults::Geometric).unwrap();
        assert_eq!((cfg.degree, cfg.kappa), (3, 3.0));
        let listing = RunConfig::resolve(ConfigLayer::default(), Defaults::Listing).unwrap();
        assert_eq!(listing.kappa, 1.0);
        let geometric = RunConfig::resolve(ConfigLayer::default(), Defaults::Geometric).unwrap();
        assert_eq!(geometric.kappa, 4.0);
        assert_eq!(geometric.grid, GridSize { n_eta: 24, n_xi: 48 });
    }

    #[test]
    fn rejects_degree_zero_and_bad_tolerances() {
        let zero = ConfigLayer { degree: Some(0), ..Default::default() };
        assert!(matches!(RunConfig::resolve(zero, Defaults::Listing), Err(CliError::Usage(_))));
        let tol = ConfigLayer { tol: Some(-1.0), ..Default::default() };
        assert!(matches!(RunConfig::resolve(tol, Defaults::Geometric), Err(CliError::Usage(_))));
    }
}
