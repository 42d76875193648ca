//! The twelve acceptance criteria, one PASS/FAIL line each, plus the bundled
//! synthetic fixture. Runs without the test harness so lines print unbuffered
//! and timings are not disturbed by parallel tests.

use std::path::PathBuf;
use std::process::ExitCode;

use crdet::extremal::model_feasibility;
use crdet::synthetic::SyntheticModel;
use crdet_cli::suite::{run_criteria, SuiteOptions};

fn main() -> ExitCode {
    println!("acceptance criteria");
    let checks = run_criteria(&SuiteOptions::default(), |c| println!("{}", c.line()));
    let mut failed = checks.iter().filter(|c| !c.passed).count();

    let fixture = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/synthetic_a0.json");
    let fixture_ok = SyntheticModel::load(&fixture)
        .and_then(|m| model_feasibility(&m, 1.0, 1e-3, Some(1.0 / 3.0)))
        .map(|r| r.feasible && r.a.abs() < 1e-12);
    match fixture_ok {
        Ok(true) => println!("PASS [11] fixture synthetic_a0.json feasible at c2 = 1, c3 = 1e-3, mu = 1/3"),
        other => {
            failed += 1;
            println!("FAIL [11] fixture synthetic_a0.json: {other:?}");
        }
    }

    println!("{} of {} criteria passed", checks.len() - checks.iter().filter(|c| !c.passed).count(), checks.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
