//! Eigenvalue levels of `A_θ` and the `P′` normalization table.

use std::fmt::Write;

use crdet::conformal::{conformal_spectrum, pprime_formula, ContactState};
use crdet::model::Model;
use crdet::sphere::{Monomial, PolyFn};
use serde::Serialize;
use serde_json::json;

use super::{sci, verdict, LoadedModel};
use crate::config::RunConfig;
use crate::error::CliResult;
use crate::output::{num, Report, Status, Table};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Level {
    pub j: usize,
    pub eigenvalue: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PprimeRow {
    pub j: u32,
    /// `P′z₁^j / z₁^j` from the symbolic operator.
    pub pprime: f64,
    /// `4j(j+1)`.
    pub formula: f64,
    /// Eigenvalue `κj(j+1)` of the model operator on degree `j`.
    pub a_theta: f64,
    pub ratio: f64,
    /// `‖P′z₁^j − 4j(j+1)z₁^j‖`; zero when `z₁^j` is an exact eigenfunction.
    pub symbolic_defect: f64,
}

/// Distinct eigenvalues of `A_θ` with multiplicities, kernel first.
pub fn spectrum_levels(model: &dyn Model) -> CliResult<Vec<Level>> {
    let values = conformal_spectrum(&ContactState::base(model))?;
    let scale = values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let mut levels: Vec<Level> = Vec::new();
    for v in values {
        match levels.last_mut() {
            Some(l) if (v - l.eigenvalue).abs() <= 1e-9 * scale => {
                // running mean keeps the level centred
                l.eigenvalue += (v - l.eigenvalue) / (l.multiplicity + 1) as f64;
                l.multiplicity += 1;
            }
            _ => levels.push(Level { j: levels.len(), eigenvalue: v, multiplicity: 1 }),
        }
    }
    Ok(levels)
}

pub fn pprime_table(max_j: u32, kappa: f64) -> CliResult<Vec<PprimeRow>> {
    (1..=max_j)
        .map(|j| {
            let f = PolyFn::monomial(j, 0, 0, 0);
            let p = pprime_formula(&f)?;
            let pprime = p.coeff(&Monomial::new(j, 0, 0, 0)).re;
            let formula = 4.0 * (j * (j + 1)) as f64;
            let a_theta = kappa * (j * (j + 1)) as f64;
            Ok(PprimeRow {
                j,
                pprime,
                formula,
                a_theta,
                ratio: pprime / a_theta,
                symbolic_defect: p.distance(&f.scale_real(formula)),
            })
        })
        .collect()
}

pub fn run(cfg: &RunConfig) -> CliResult<Report> {
    let loaded = LoadedModel::load(cfg)?;
    let model = loaded.model();
    let levels = spectrum_levels(model)?;
    let mut text = String::new();
    let mut table = Table::new(["j", "eigenvalue", "multiplicity"]);
    let kernel = levels.first().filter(|l| l.eigenvalue.abs() < 1e-9).map_or(0, |l| l.multiplicity);
    writeln!(text, "model: {}  dim = {}  kappa = {}", model.name(), model.dim(), cfg.kappa).unwrap();
    writeln!(text, "kernel dimension: {kernel}").unwrap();
    writeln!(text, "{:>4} {:>22} {:>6}", "j", "lambda_j", "m_j").unwrap();
    for l in levels.iter().filter(|l| l.eigenvalue.abs() >= 1e-9) {
        writeln!(text, "{:>4} {} {:>6}", l.j, sci(l.eigenvalue), l.multiplicity).unwrap();
        table.push(vec![l.j.to_string(), num(l.eigenvalue), l.multiplicity.to_string()]);
    }

    let mut result = json!({ "model": model.name(), "dim": model.dim(), "kernel_dim": kernel, "levels": levels });
    if loaded.sphere().is_some() {
        // compare the levels with κj(j+1) and 2(j+1)
        let defect = levels
            .iter()
            .skip(1)
            .map(|l| {
                let j = l.j as f64;
                let exact = cfg.kappa * j * (j + 1.0);
                if l.multiplicity != 2 * (l.j + 1) {
                    f64::INFINITY
                } else {
                    (l.eigenvalue - exact).abs() / exact
                }
            })
            .fold(0.0f64, f64::max);
        let ok = levels.len() == cfg.degree as usize + 1 && defect < 1e-10;
        writeln!(
            text,
            "levels match kappa j(j+1) with multiplicity 2(j+1): {} (max rel defect {defect:.3e})",
            verdict(ok)
        )
        .unwrap();

        let rows = pprime_table(cfg.degree, cfg.kappa)?;
        writeln!(text).unwrap();
        writeln!(text, "P' normalization on z1^j (kappa = 4 makes A_theta reproduce P'):").unwrap();
        writeln!(
            text,
            "{:>4} {:>22} {:>22} {:>22} {:>22}",
            "j", "P' eigenvalue", "4j(j+1)", "A_theta eigenvalue", "ratio"
        )
        .unwrap();
        for r in &rows {
            writeln!(text, "{:>4} {} {} {} {}", r.j, sci(r.pprime), sci(r.formula), sci(r.a_theta), sci(r.ratio))
                .unwrap();
        }
        writeln!(text, "ratio P'/A_theta = 4/kappa = {}", 4.0 / cfg.kappa).unwrap();
        result["level_defect"] = json!(defect);
        result["pprime"] = json!(rows);
    }
    Ok(Report { command: "spectrum", text, result, table: Some(table), status: Status::Success })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ConfigLayer, Defaults};

    fn cfg(degree: u32, kappa: f64) -> RunConfig {
        let layer = ConfigLayer { degree: Some(degree), kappa: Some(kappa), ..Default::default() };
        RunConfig::resolve(layer, Defaults::Listing).unwrap()
    }

    #[test]
    fn degree_three_levels() {
        let r = run(&cfg(3, 1.0)).unwrap();
        let t = r.table.unwrap();
        let rows: Vec<Vec<String>> = vec![
            vec!["1".into(), "2".into(), "4".into()],
            vec!["2".into(), "6".into(), "6".into()],
            vec!["3".into(), "12".into(), "8".into()],
        ];
        for (got, want) in t.rows.iter().zip(&rows) {
            assert_eq!(got[0], want[0]);
            assert!((got[1].parse::<f64>().unwrap() - want[1].parse::<f64>().unwrap()).abs() < 1e-10);
            assert_eq!(got[2], want[2]);
        }
        assert_eq!(t.rows.len(), 3);
        assert!(r.text.contains("PASS"));
    }

    #[test]
    fn kappa_scales_levels() {
        let one = spectrum_levels(LoadedModel::load(&cfg(2, 1.0)).unwrap().model()).unwrap();
        let four = spectrum_levels(LoadedModel::load(&cfg(2, 4.0)).unwrap().model()).unwrap();
        for (a, b) in one.iter().zip(&four) {
            assert!((4.0 * a.eigenvalue - b.eigenvalue).abs() < 1e-10);
        }
    }

    #[test]
    fn pprime_rows_are_exact() {
        for r in pprime_table(6, 1.0).unwrap() {
            assert_eq!(r.symbolic_defect, 0.0);
            assert_eq!(r.pprime, r.formula);
            assert_eq!(r.ratio, 4.0);
        }
    }
}
