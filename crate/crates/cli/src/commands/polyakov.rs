//! Polyakov-type functionals of a conformal factor, with optional cocycle defects.

use std::fmt::Write;
use std::path::{Path, PathBuf};

use crdet::conformal::ContactState;
use crdet::functionals::{cocycle_defect, functional_f, CocycleDefect, CocyclePart, VolumeMode};
use crdet::sample::{random_coeffs, seeded_rng, SeededRng};
use crdet::sphere::{Monomial, PolyFn};
use crdet::CrError;
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::{json, Value};

use super::{sci, LoadedModel};
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{num, Report, Status, Table};

#[derive(Debug, Clone, PartialEq)]
pub enum WSource {
    /// Real coefficients over the model basis.
    Inline(Vec<f64>),
    File(PathBuf),
    /// Seeded random pluriharmonic function with this sup norm bound.
    Random {
        sup: f64,
    },
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolyakovArgs {
    pub w: WSource,
    /// Second increment for the cocycle defects of `w₁ = w`, `w₂`.
    pub w2: Option<WSource>,
    pub normalize: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TermSpec {
    /// Exponents of `z₁, z₂, z̄₁, z̄₂`.
    monomial: [u32; 4],
    /// `[re, im]`.
    coeff: [f64; 2],
}

fn bad_input(path: &Path, msg: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("{}: {msg}", path.display()))
}

/// Real coefficients from a JSON document. Accepted shapes: a bare array or
/// `{"coeffs": [..]}` over the real frame, `{"complex": [[re, im], ..]}` over the
/// complex basis, and `{"terms": [{"monomial": [a, b, c, d], "coeff": [re, im]}]}`.
pub fn parse_w_document(text: &str, path: &Path, loaded: &LoadedModel) -> CliResult<Vec<f64>> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| bad_input(path, format!("line {}, column {}: {e}", e.line(), e.column())))?;
    let field = |v: &Value, key: &str| v.get(key).cloned();
    if value.is_array() {
        return serde_json::from_value(value).map_err(|e| bad_input(path, e));
    }
    if let Some(c) = field(&value, "coeffs") {
        return serde_json::from_value(c).map_err(|e| bad_input(path, e));
    }
    let sphere = loaded.sphere().ok_or_else(|| {
        CliError::from(CrError::Unsupported("complex and symbolic input need the sphere model".into()))
    })?;
    if let Some(c) = field(&value, "complex") {
        let pairs: Vec<[f64; 2]> = serde_json::from_value(c).map_err(|e| bad_input(path, e))?;
        let coeffs: Vec<Complex64> = pairs.iter().map(|p| Complex64::new(p[0], p[1])).collect();
        if coeffs.len() != sphere.basis.len() {
            return Err(CrError::Dimension { expected: sphere.basis.len(), found: coeffs.len() }.into());
        }
        // conjugate symmetry: imaginary constant, antiholomorphic = conj(holomorphic)
        let residue = coeffs[1..].chunks(2).map(|p| (p[0] - p[1].conj()).norm()).fold(coeffs[0].im.abs(), f64::max);
        let scale = coeffs.iter().fold(1.0f64, |a, c| a.max(c.norm()));
        return sphere
            .frame
            .from_complex(&sphere.basis, &coeffs, 1e-12 * scale)
            .ok_or_else(|| CrError::NotReal { residue }.into());
    }
    if let Some(t) = field(&value, "terms") {
        let terms: Vec<TermSpec> = serde_json::from_value(t).map_err(|e| bad_input(path, e))?;
        let f = PolyFn::from_terms(terms.iter().map(|t| {
            let [a, b, c, d] = t.monomial;
            (Monomial::new(a, b, c, d), Complex64::new(t.coeff[0], t.coeff[1]))
        }));
        return Ok(sphere.frame.from_poly(&f)?);
    }
    Err(bad_input(path, "expected an array or an object with `coeffs`, `complex` or `terms`"))
}

pub(crate) fn resolve(source: &WSource, loaded: &LoadedModel, rng: &mut SeededRng) -> CliResult<Vec<f64>> {
    let model = loaded.model();
    let w = match source {
        WSource::Inline(v) => v.clone(),
        WSource::File(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            parse_w_document(&text, path, loaded)?
        }
        WSource::Random { sup } => {
            if !(sup.is_finite() && *sup > 0.0) {
                return Err(CliError::Usage(format!("--sup must be positive, got {sup}")));
            }
            random_coeffs(model, rng, *sup, true)
        }
        WSource::Zero => vec![0.0; model.dim()],
    };
    if w.len() != model.dim() {
        return Err(CrError::Dimension { expected: model.dim(), found: w.len() }.into());
    }
    if w.iter().any(|x| !x.is_finite()) {
        return Err(CliError::Usage("coefficients must be finite".into()));
    }
    Ok(w)
}

pub fn run(cfg: &RunConfig, args: &PolyakovArgs) -> CliResult<Report> {
    let loaded = LoadedModel::load(cfg)?;
    let model = loaded.model();
    let mut rng = seeded_rng(cfg.seed);
    let w = resolve(&args.w, &loaded, &mut rng)?;
    let w2 = args.w2.as_ref().map(|s| resolve(s, &loaded, &mut rng)).transpose()?;

    let state = ContactState::new(model, w.clone())?;
    let mode = if args.normalize { VolumeMode::Normalized } else { VolumeMode::Free };
    let rep = functional_f(&state, cfg.c2, cfg.c3, mode)?;
    let cocycle: Option<Vec<CocycleDefect>> =
        w2.as_ref().map(|w2| cocycle_defect(model, &w, w2, &[CocyclePart::A1, CocyclePart::A2])).transpose()?;

    let named = [
        ("A1", rep.a1),
        ("A2", rep.a2),
        ("A3", rep.a3),
        ("II", rep.ii),
        ("III", rep.iii),
        ("IV", rep.iv),
        ("F", rep.f),
        ("log_det_ratio", rep.log_det_ratio),
    ];
    let mut text = String::new();
    writeln!(text, "model: {}  c1 = {:.15e}  c2 = {}  c3 = {}  a = {}", model.name(), rep.c1, rep.c2, rep.c3, rep.a)
        .unwrap();
    let mut table = Table::new(["quantity", "value"]);
    for (name, v) in named {
        writeln!(text, "{name:>14} = {}", sci(v)).unwrap();
        table.push(vec![name.to_string(), num(v)]);
    }
    if let Some(defects) = &cocycle {
        for d in defects {
            let name = format!("cocycle_{:?}", d.part);
            writeln!(text, "{name:>14} : defect {:.3e} (|A(w1+w2)| = {:.3e})", d.defect, d.scale).unwrap();
            table.push(vec![name, num(d.defect)]);
        }
    }
    let result = json!({
        "functionals": rep,
        "coeffs": w,
        "w2": w2,
        "cocycle": cocycle,
    });
    Ok(Report { command: "polyakov", text, result, table: Some(table), status: Status::Success })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ConfigLayer, Defaults};
    use std::f64::consts::PI;

    fn cfg() -> RunConfig {
        let layer = ConfigLayer { degree: Some(2), ..Default::default() };
        RunConfig::resolve(layer, Defaults::Geometric).unwrap()
    }

    fn args(w: WSource) -> PolyakovArgs {
        PolyakovArgs { w, w2: None, normalize: false }
    }

    #[test]
    fn zero_gives_zeros() {
        let r = run(&cfg(), &args(WSource::Inline(vec![0.0; 11]))).unwrap();
        for row in r.table.unwrap().rows {
            assert_eq!(row[1].parse::<f64>().unwrap(), 0.0, "{}", row[0]);
        }
    }

    #[test]
    fn constant_w_gives_the_a1_line() {
        let mut w = vec![0.0; 11];
        w[0] = 0.25;
        let r = run(&cfg(), &args(WSource::Inline(w))).unwrap();
        let a1 = r.result["functionals"]["A1"].as_f64().unwrap();
        assert!((a1 - 80.0 * PI * PI * 0.25).abs() < 1e-10);
    }

    #[test]
    fn document_shapes_agree() {
        let loaded = LoadedModel::load(&cfg()).unwrap();
        let p = Path::new("w.json");
        // 0.3 Re z1 as real coefficients, as complex coefficients and symbolically
        let mut real = vec![0.0; 11];
        real[1] = 0.3;
        let from_real = parse_w_document(&serde_json::to_string(&real).unwrap(), p, &loaded).unwrap();
        let mut complex = vec![[0.0, 0.0]; 11];
        complex[1] = [0.15, 0.0];
        complex[2] = [0.15, 0.0];
        let doc = json!({ "complex": complex }).to_string();
        let from_complex = parse_w_document(&doc, p, &loaded).unwrap();
        let doc =
            r#"{"terms": [{"monomial": [1,0,0,0], "coeff": [0.15, 0]}, {"monomial": [0,0,1,0], "coeff": [0.15, 0]}]}"#;
        let from_terms = parse_w_document(doc, p, &loaded).unwrap();
        assert_eq!(from_real, from_complex);
        assert_eq!(from_real, from_terms);
    }

    #[test]
    fn rejects_non_real_and_non_pluriharmonic() {
        let loaded = LoadedModel::load(&cfg()).unwrap();
        let p = Path::new("w.json");
        let mut complex = vec![[0.0, 0.0]; 11];
        complex[1] = [0.15, 0.0];
        let e = parse_w_document(&json!({ "complex": complex }).to_string(), p, &loaded).unwrap_err();
        assert!(matches!(e, CliError::Core(CrError::NotReal { .. })));
        let mixed = r#"{"terms": [{"monomial": [1,0,1,0], "coeff": [1, 0]}]}"#;
        let e = parse_w_document(mixed, p, &loaded).unwrap_err();
        assert!(matches!(e, CliError::Core(CrError::NotPluriharmonic(_))));
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn random_source_is_seeded() {
        let a = run(&cfg(), &args(WSource::Random { sup: 0.5 })).unwrap();
        let b = run(&cfg(), &args(WSource::Random { sup: 0.5 })).unwrap();
        assert_eq!(a, b);
    }
}
