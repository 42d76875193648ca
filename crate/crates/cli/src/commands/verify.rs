use std::fmt::Write;

use serde_json::json;

use crate::config::{ModelSource, RunConfig};
use crate::error::CliResult;
use crate::output::{num, Report, Status, Table};
use crate::suite::{model_checks, run_criteria, Check, SuiteOptions};

/// Runs every suite; `progress` sees each line as soon as its check finishes.
pub fn run(cfg: &RunConfig, mut progress: impl FnMut(&str)) -> CliResult<Report> {
    let opts = SuiteOptions { kappa: cfg.kappa };
    let mut text = String::new();
    let mut emit = |c: &Check| {
        let line = c.line();
        progress(&line);
        writeln!(text, "{line}").unwrap();
    };
    let mut checks = run_criteria(&opts, &mut emit);
    let mut schema_failed = false;
    if let ModelSource::File(path) = &cfg.model {
        let extra = model_checks(path, &mut emit);
        schema_failed = extra.first().is_some_and(|c| !c.passed);
        checks.extend(extra);
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    writeln!(text, "{} of {} checks passed", checks.len() - failed, checks.len()).unwrap();

    let mut table = Table::new(["id", "name", "passed", "measured", "tolerance"]);
    for c in &checks {
        table.push(vec![c.id.clone(), c.name.clone(), c.passed.to_string(), num(c.measured), num(c.tolerance)]);
    }
    let status = if schema_failed {
        Status::Rejected("synthetic model failed validation".into())
    } else if failed > 0 {
        Status::Failed(format!("{failed} checks failed"))
    } else {
        Status::Success
    };
    Ok(Report {
        command: "verify",
        text,
        result: json!({ "checks": checks, "passed": failed == 0 }),
        table: Some(table),
        status,
    })
}
