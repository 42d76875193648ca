//! Sphere zeta values, the conformal index and the determinant.

use std::f64::consts::PI;
use std::fmt::Write;

use crdet::zeta::{
    conformal_index, det_scaling_check, sphere_zeta_continued, sphere_zeta_scaled, zeta_extrapolated,
    zeta_prime_zero_sphere, zeta_truncated, DetScaling, SpectralSequence,
};
use crdet::CrError;
use serde::Serialize;
use serde_json::json;

use super::{sci, verdict};
use crate::config::{ModelSource, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{num, Report, Status, Table};

/// Agreement required between the continued and summed values, and for the index check.
pub const AGREEMENT_TOL: f64 = 1e-9;
pub const INDEX_TOL: f64 = 1e-10;
pub const SCALING_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZetaRow {
    pub s: f64,
    pub continued: f64,
    pub continued_error: f64,
    /// Partial sum with tail correction; only where the series converges.
    pub extrapolated: Option<f64>,
    /// Raw partial sum over `terms` levels.
    pub truncated: Option<f64>,
    pub rel_diff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZetaSummary {
    pub zeta0: f64,
    pub index: f64,
    pub index_defect: f64,
    pub index_ok: bool,
    pub zeta_prime0: f64,
    pub log_det: f64,
    pub det: f64,
}

pub fn zeta_rows(s_values: &[f64], kappa: f64, terms: usize) -> CliResult<Vec<ZetaRow>> {
    let seq = SpectralSequence::sphere(terms, kappa);
    s_values
        .iter()
        .map(|&s| {
            let c = sphere_zeta_scaled(s, kappa, 20)?;
            let (extrapolated, truncated) = if s > 1.0 {
                (Some(zeta_extrapolated(&seq, s, terms)?.value), Some(zeta_truncated(&seq, s, terms).value))
            } else {
                (None, None)
            };
            Ok(ZetaRow {
                s,
                continued: c.value,
                continued_error: c.error_estimate,
                extrapolated,
                truncated,
                rel_diff: extrapolated.map(|e| ((c.value - e) / c.value).abs()),
            })
        })
        .collect()
}

pub fn summary(kappa: f64) -> CliResult<ZetaSummary> {
    let zeta0 = sphere_zeta_continued(0.0, 20)?.value;
    let index = conformal_index(16.0 * PI * PI);
    let index_defect = (zeta0 - index).abs();
    // ζ_{κA}′(0) = ζ_A′(0) − ln κ · ζ_A(0)
    let zeta_prime0 = zeta_prime_zero_sphere(30)?.value - kappa.ln() * zeta0;
    Ok(ZetaSummary {
        zeta0,
        index,
        index_defect,
        index_ok: index_defect < INDEX_TOL,
        zeta_prime0,
        log_det: -zeta_prime0,
        det: (-zeta_prime0).exp(),
    })
}

pub fn scaling_ok(d: &DetScaling) -> bool {
    d.defect < SCALING_TOL && d.invariant_defect < SCALING_TOL
}

pub fn run(cfg: &RunConfig, s_values: &[f64], scales: &[f64], terms: usize) -> CliResult<Report> {
    if cfg.model != ModelSource::Sphere {
        return Err(CrError::Unsupported("zeta continuation is available for the sphere model only".into()).into());
    }
    if terms < 2 {
        return Err(CliError::Usage("--terms must be at least 2".into()));
    }
    let rows = zeta_rows(s_values, cfg.kappa, terms)?;
    let sum = summary(cfg.kappa)?;
    let checks: Vec<DetScaling> = scales.iter().map(|&c| det_scaling_check(cfg.kappa, c)).collect::<Result<_, _>>()?;

    let mut text = String::new();
    writeln!(text, "sphere zeta, kappa = {}, {} summed levels", cfg.kappa, terms).unwrap();
    writeln!(
        text,
        "{:>8} {:>22} {:>22} {:>22} {:>10}",
        "s", "continued", "extrapolated sum", "truncated sum", "rel diff"
    )
    .unwrap();
    let mut table = Table::new(["s", "continued", "continued_error", "extrapolated", "truncated", "rel_diff"]);
    let opt = |v: Option<f64>| v.map_or_else(|| format!("{:>22}", "-"), sci);
    for r in &rows {
        let diff = r.rel_diff.map_or_else(|| "-".to_string(), |d| format!("{d:.2e}"));
        writeln!(text, "{:>8} {} {} {} {:>10}", r.s, sci(r.continued), opt(r.extrapolated), opt(r.truncated), diff)
            .unwrap();
        let cell = |v: Option<f64>| v.map_or_else(String::new, num);
        table.push(vec![
            num(r.s),
            num(r.continued),
            num(r.continued_error),
            cell(r.extrapolated),
            cell(r.truncated),
            cell(r.rel_diff),
        ]);
    }
    writeln!(text, "zeta(0) = {:.15} (expected -5/3)", sum.zeta0).unwrap();
    writeln!(
        text,
        "conformal index -(1/24pi^2) int Q' - 1 = {:.15}; index check: {} (defect {:.2e})",
        sum.index,
        verdict(sum.index_ok),
        sum.index_defect
    )
    .unwrap();
    writeln!(text, "zeta'(0) = {:.15}", sum.zeta_prime0).unwrap();
    writeln!(text, "log det = {:.15}  det = {:.15e}", sum.log_det, sum.det).unwrap();
    for d in &checks {
        writeln!(
            text,
            "det scaling c = {}: det ratio defect {:.2e}, invariant defect {:.2e}: {}",
            d.scale,
            d.defect,
            d.invariant_defect,
            verdict(scaling_ok(d))
        )
        .unwrap();
    }

    let failed = !sum.index_ok || checks.iter().any(|d| !scaling_ok(d));
    let result = json!({ "rows": rows, "summary": sum, "scaling": checks, "terms": terms });
    Ok(Report {
        command: "zeta",
        text,
        result,
        table: Some(table),
        status: if failed { Status::Failed("zeta consistency check failed".into()) } else { Status::Success },
    })
}
