//! Command-line front end: `spectrum`, `zeta`, `polyakov`, `maximize`, `verify`.
//!
//! Exit status is 0 on success, 2 for usage and configuration problems and
//! 3 for numerical failures.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod suite;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use commands::maximize::{MaximizeArgs, Policy};
use commands::polyakov::{PolyakovArgs, WSource};
use config::{ConfigLayer, Defaults, Format, GridSize, ModelSource, RunConfig};
use error::{CliError, CliResult};
use output::{write_atomic, Report};

#[derive(Debug, Parser)]
#[command(
    name = "crdet",
    version,
    about = "Functional determinants and Polyakov-type functionals on the CR three-sphere"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// `key = value` configuration file; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Maximal pluriharmonic degree N of the sphere truncation.
    #[arg(long, global = true)]
    pub degree: Option<u32>,
    /// Quadrature grid as N_ETAxN_XI.
    #[arg(long, global = true)]
    pub grid: Option<GridSize>,
    /// Normalization of A = kappa * Delta_b (Delta_b + 1).
    #[arg(long, global = true)]
    pub kappa: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub c2: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub c3: Option<f64>,
    /// Override for the constant in the feasibility condition.
    #[arg(long, global = true)]
    pub mu: Option<f64>,
    /// Euler-Lagrange residual tolerance for the ascent.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// `sphere` or a synthetic model JSON file.
    #[arg(long, global = true, value_name = "sphere|FILE")]
    pub model: Option<ModelSource>,
    /// Write the output document here instead of standard output.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Run the ascent even when the feasibility condition fails.
    #[arg(long, global = true)]
    pub force: bool,
}

impl CommonArgs {
    fn layer(&self) -> ConfigLayer {
        ConfigLayer {
            degree: self.degree,
            grid: self.grid,
            kappa: self.kappa,
            c2: self.c2,
            c3: self.c3,
            mu: self.mu,
            tol: self.tol,
            max_iter: self.max_iter,
            seed: self.seed,
            model: self.model.clone(),
            out: self.out.clone(),
            format: self.format,
            force: self.force.then_some(true),
        }
    }
}

#[derive(Debug, Args)]
pub struct WArgs {
    /// Real coefficients over the model basis, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, conflicts_with_all = ["w_file", "random"])]
    pub w: Option<Vec<f64>>,
    /// JSON file with real, complex or symbolic coefficients.
    #[arg(long, value_name = "FILE", conflicts_with = "random")]
    pub w_file: Option<PathBuf>,
    /// Seeded random pluriharmonic w.
    #[arg(long)]
    pub random: bool,
    /// Sup norm bound for random samples.
    #[arg(long, default_value_t = 0.5)]
    pub sup: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues of A with multiplicities and the P' normalization table.
    Spectrum,
    /// Sphere zeta values, conformal index, determinant and its scaling law.
    Zeta {
        /// Points s at which to evaluate, comma separated.
        #[arg(long = "s", value_delimiter = ',', allow_negative_numbers = true, default_values_t = [0.0, 2.0])]
        s: Vec<f64>,
        /// Check the determinant scaling law under theta -> c^2 theta.
        #[arg(long, value_delimiter = ',')]
        scale: Vec<f64>,
        /// Levels in the direct sums.
        #[arg(long, default_value_t = 100_000)]
        terms: usize,
    },
    /// Polyakov-type functionals of a conformal factor w.
    Polyakov {
        #[command(flatten)]
        w: WArgs,
        /// Second increment; reports the cocycle defects of (w, w2).
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, conflicts_with = "w2_file")]
        w2: Option<Vec<f64>>,
        #[arg(long, value_name = "FILE")]
        w2_file: Option<PathBuf>,
        /// Shift w so that the mean of e^{2w} is 1 first.
        #[arg(long)]
        normalize: bool,
    },
    /// Feasibility check, then constrained ascent of F.
    Maximize {
        /// Initial w coefficients, comma separated.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, conflicts_with_all = ["init_file", "zero_init"])]
        init: Option<Vec<f64>>,
        #[arg(long, value_name = "FILE", conflicts_with = "zero_init")]
        init_file: Option<PathBuf>,
        /// Start from w = 0.
        #[arg(long)]
        zero_init: bool,
        /// Sup norm bound of the seeded random start.
        #[arg(long, default_value_t = 0.1)]
        sup: f64,
        /// Write the iterate trace as CSV.
        #[arg(long, value_name = "FILE")]
        trace: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Policy::Bfgs)]
        step_policy: Policy,
        /// Pin the directions generated by CR automorphisms.
        #[arg(long)]
        gauge: bool,
    },
    /// Runs every invariant suite; with --model FILE also validates that model.
    Verify,
}

impl Command {
    fn defaults(&self) -> Defaults {
        match self {
            Command::Spectrum | Command::Zeta { .. } => Defaults::Listing,
            _ => Defaults::Geometric,
        }
    }
}

fn w_source(w: &WArgs) -> WSource {
    if let Some(v) = &w.w {
        WSource::Inline(v.clone())
    } else if let Some(p) = &w.w_file {
        WSource::File(p.clone())
    } else if w.random {
        WSource::Random { sup: w.sup }
    } else {
        WSource::Zero
    }
}

fn execute(cli: &Cli, cfg: &RunConfig, progress: &mut dyn Write) -> CliResult<Report> {
    match &cli.command {
        Command::Spectrum => commands::spectrum::run(cfg),
        Command::Zeta { s, scale, terms } => commands::zeta::run(cfg, s, scale, *terms),
        Command::Polyakov { w, w2, w2_file, normalize } => {
            let w2 = match (w2, w2_file) {
                (Some(v), _) => Some(WSource::Inline(v.clone())),
                (None, Some(p)) => Some(WSource::File(p.clone())),
                (None, None) => None,
            };
            commands::polyakov::run(cfg, &PolyakovArgs { w: w_source(w), w2, normalize: *normalize })
        }
        Command::Maximize { init, init_file, zero_init, sup, trace, step_policy, gauge } => {
            let init = match (init, init_file, zero_init) {
                (Some(v), _, _) => WSource::Inline(v.clone()),
                (None, Some(p), _) => WSource::File(p.clone()),
                (None, None, true) => WSource::Zero,
                (None, None, false) => WSource::Random { sup: *sup },
            };
            let args = MaximizeArgs { init, trace: trace.clone(), policy: *step_policy, gauge: *gauge };
            commands::maximize::run(cfg, &args)
        }
        Command::Verify => commands::verify::run(cfg, |line| {
            let _ = writeln!(progress, "{line}");
        }),
    }
}

fn resolve_config(cli: &Cli) -> CliResult<RunConfig> {
    let file = match &cli.common.config {
        Some(path) => ConfigLayer::load(path)?,
        None => ConfigLayer::default(),
    };
    RunConfig::resolve(file.merge(cli.common.layer()), cli.command.defaults())
}

/// The document goes to `--out` when given, otherwise to standard output when a
/// format was requested; the text listing is printed in every other case.
fn emit(report: &Report, cfg: &RunConfig, stdout: &mut dyn Write) -> CliResult<()> {
    let io = |e| CliError::io("<stdout>", e);
    match (&cfg.out, cfg.format) {
        (Some(path), format) => {
            let doc = report.document(cfg, format.unwrap_or(Format::Json))?;
            write_atomic(path, &doc)?;
            stdout.write_all(report.text.as_bytes()).map_err(io)?;
        }
        (None, Some(format)) => stdout.write_all(report.document(cfg, format)?.as_bytes()).map_err(io)?,
        (None, None) => stdout.write_all(report.text.as_bytes()).map_err(io)?,
    }
    Ok(())
}

/// Parses `args`, runs the command and returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { error::EXIT_USAGE } else { 0 };
            let rendered = e.render().to_string();
            let _ =
                if code == 0 { stdout.write_all(rendered.as_bytes()) } else { stderr.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    let result = resolve_config(&cli).and_then(|cfg| {
        // verify streams progress to stderr only when stdout carries a document
        let mut sink = std::io::sink();
        let progress: &mut dyn Write = if cfg.out.is_none() && cfg.format.is_some() { &mut *stderr } else { &mut sink };
        let report = execute(&cli, &cfg, progress)?;
        emit(&report, &cfg, stdout)?;
        Ok(report)
    });
    match result {
        Ok(report) => {
            if let output::Status::Rejected(msg) | output::Status::Failed(msg) = &report.status {
                let _ = writeln!(stderr, "error: {msg}");
            }
            report.status.exit_code()
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
