//! Feasibility of the coefficient condition, then constrained ascent of `F`.

use std::fmt::Write;
use std::path::PathBuf;

use clap::ValueEnum;
use crdet::conformal::ContactState;
use crdet::extremal::{maximize_f, model_feasibility, AscentOptions, AscentTrace, FeasibilityReport, StepPolicy};
use crdet::functionals::functional_f_value;
use crdet::sample::{seeded_rng, sup_norm};
use serde_json::json;

use super::polyakov::{resolve, WSource};
use super::LoadedModel;
use crate::config::RunConfig;
use crate::error::CliResult;
use crate::output::{csv_with_header, num, write_atomic, Report, Status, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Policy {
    Fixed,
    BarzilaiBorwein,
    Bfgs,
}

impl From<Policy> for StepPolicy {
    fn from(p: Policy) -> Self {
        match p {
            Policy::Fixed => StepPolicy::Fixed,
            Policy::BarzilaiBorwein => StepPolicy::BarzilaiBorwein,
            Policy::Bfgs => StepPolicy::Bfgs,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaximizeArgs {
    pub init: WSource,
    /// Iterate trace destination, written as CSV.
    pub trace: Option<PathBuf>,
    pub policy: Policy,
    pub gauge: bool,
}

/// Six significant digits without trailing zeros.
fn short(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

pub fn feasibility_line(r: &FeasibilityReport) -> String {
    let verdict = if r.feasible { "FEASIBLE" } else { "INFEASIBLE" };
    let window = match r.alpha_window {
        Some((lo, hi)) => format!("alpha in ({lo:.6e}, {hi:.6e})"),
        None => "no admissible alpha".into(),
    };
    format!(
        "condition: {verdict} (a={}) lambda = {:.6}, lambda*c3 = {:.3e} vs bound {:.3e}; {window}",
        short(r.a),
        r.lambda,
        r.lambda * r.c3,
        r.bound
    )
}

fn trace_table(trace: &AscentTrace) -> Table {
    let dim = trace.iterates.first().map_or(0, |i| i.coeffs.len());
    let mut header = vec!["iter".to_string(), "f".into(), "grad_norm".into(), "step".into()];
    header.extend((0..dim).map(|k| format!("c{k}")));
    let mut table = Table { header, rows: Vec::new() };
    for (k, it) in trace.iterates.iter().enumerate() {
        let mut row = vec![k.to_string(), num(it.f), num(it.grad_norm), num(it.step)];
        row.extend(it.coeffs.iter().map(|c| num(*c)));
        table.push(row);
    }
    table
}

pub fn run(cfg: &RunConfig, args: &MaximizeArgs) -> CliResult<Report> {
    let loaded = LoadedModel::load(cfg)?;
    let model = loaded.model();
    let feas = model_feasibility(model, cfg.c2, cfg.c3, cfg.mu)?;
    let mut text = String::new();
    writeln!(text, "{}", feasibility_line(&feas)).unwrap();
    if !feas.feasible && !cfg.force {
        writeln!(text, "warning: refusing to run the ascent on an infeasible configuration; pass --force to override")
            .unwrap();
        return Ok(Report {
            command: "maximize",
            text,
            result: json!({ "feasibility": feas, "ascent": null }),
            table: None,
            status: Status::Rejected(format!("condition: INFEASIBLE (a={})", short(feas.a))),
        });
    }
    if !feas.feasible {
        writeln!(text, "warning: condition fails; continuing because of --force").unwrap();
    }

    let mut rng = seeded_rng(cfg.seed);
    let init = ContactState::new(model, resolve(&args.init, &loaded, &mut rng)?)?;
    let opts = AscentOptions {
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        step_policy: args.policy.into(),
        gauge: args.gauge,
        ..AscentOptions::default()
    };
    let trace = maximize_f(&init, cfg.c2, cfg.c3, &opts)?;
    let f_init = functional_f_value(&init, cfg.c2, cfg.c3);
    let sup = sup_norm(model, &trace.maximizer);
    let iterations = trace.iterates.len() - 1;
    writeln!(
        text,
        "ascent: {} after {iterations} iterations ({} backtracks){}",
        if trace.converged { "converged" } else { "NOT converged" },
        trace.backtracks,
        if trace.stalled { ", line search stalled" } else { "" }
    )
    .unwrap();
    writeln!(text, "F(init) = {f_init:.15e}").unwrap();
    writeln!(text, "F(w*)   = {:.15e}", trace.f_max).unwrap();
    writeln!(text, "EL residual = {:.3e}  sup|w*| = {:.3e}", trace.el_residual, sup).unwrap();

    let table = trace_table(&trace);
    if let Some(path) = &args.trace {
        write_atomic(path, &csv_with_header(&table, "maximize", cfg)?)?;
        writeln!(text, "trace: {}", path.display()).unwrap();
    }
    let status = if trace.converged {
        Status::Success
    } else {
        Status::Failed(format!("ascent did not converge (EL residual {:.3e})", trace.el_residual))
    };
    let result = json!({
        "feasibility": feas,
        "ascent": {
            "converged": trace.converged,
            "stalled": trace.stalled,
            "iterations": iterations,
            "backtracks": trace.backtracks,
            "f_init": f_init,
            "f_max": trace.f_max,
            "el_residual": trace.el_residual,
            "sup_norm": sup,
            "maximizer": trace.maximizer,
            "options": trace.options,
        },
    });
    Ok(Report { command: "maximize", text, result, table: Some(table), status })
}
