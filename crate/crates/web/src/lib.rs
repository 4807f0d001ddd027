//! Browser bindings for exploring the catalog. Every export takes and
//! returns JSON strings; errors come back as `{"error": "..."}`.

use std::collections::BTreeMap;

use nrw::catalog::{self, Instance};
use nrw::extension::compute_s;
use nrw::io::terms_from_form;
use nrw::nomizu::{double_extension, presentation_basis, structure_checks};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const TOL: f64 = 1e-9;

fn error(e: impl std::fmt::Display) -> String {
    json!({ "error": e.to_string() }).to_string()
}

fn parse_params(params: &str) -> Result<BTreeMap<String, f64>, String> {
    if params.trim().is_empty() {
        return Ok(BTreeMap::new());
    }
    serde_json::from_str(params).map_err(|e| format!("params: {e}"))
}

fn instantiate(name: &str, params: &str) -> Result<Instance, String> {
    catalog::instantiate(name, &parse_params(params)?).map_err(|e| e.to_string())
}

/// Catalog entries with their parameters and defaults.
#[wasm_bindgen]
pub fn catalog_list() -> String {
    serde_json::to_string(&catalog::list()).expect("serializable")
}

fn run_value(inst: &Instance) -> Value {
    let rep = inst.model.verify(TOL);
    let structure = double_extension(&inst.data, TOL).map(|g| structure_checks(&g, TOL));
    let presentation = match presentation_basis(&inst.data, TOL) {
        Ok(p) => json!({
            "basis": (0..p.len()).map(|i| p.describe(i)).collect::<Vec<_>>(),
            "pass": p.report.pass(),
        }),
        Err(e) => json!({ "unavailable": e.to_string() }),
    };
    let frame = &inst.model.frame;
    json!({
        "entry": inst.entry.name,
        "params": inst.params,
        "dim": inst.model.dim(),
        "torsion": inst.model.torsion.display(frame),
        "checks": rep.checks,
        "pass": rep.pass(),
        "structure": match structure {
            Ok(s) => json!({ "checks": s.checks, "pass": s.pass() }),
            Err(e) => json!({ "error": e.to_string() }),
        },
        "presentation": presentation,
        "suspected_transcription_differences": inst.diff,
    })
}

/// Build, verify and diff one catalog entry. `params` is a JSON object of
/// overrides (may be empty).
#[wasm_bindgen]
pub fn catalog_run(name: &str, params: &str) -> String {
    match instantiate(name, params) {
        Ok(inst) => run_value(&inst).to_string(),
        Err(e) => error(e),
    }
}

/// Symmetry algebra s of the entry's base model (isotropy im R).
#[wasm_bindgen]
pub fn symmetry_algebra(name: &str, params: &str) -> String {
    let inst = match instantiate(name, params) {
        Ok(i) => i,
        Err(e) => return error(e),
    };
    let base = &inst.data.base;
    let s = compute_s(base, None);
    json!({
        "base_dim": base.dim(),
        "dim": s.len(),
        "k_dim": inst.data.l(),
        "generators": s.iter().map(|a| a.to_two_form().display(&base.frame)).collect::<Vec<_>>(),
        "terms": s.iter().map(|a| terms_from_form(&a.to_two_form())).collect::<Vec<_>>(),
    })
    .to_string()
}

/// Sweep one parameter over `steps` evenly spaced values in `[from, to]`,
/// holding the others at `params`. Points outside the domain are reported
/// with their error.
#[wasm_bindgen]
pub fn parameter_sweep(name: &str, param: &str, from: f64, to: f64, steps: u32, params: &str) -> String {
    let mut fixed = match parse_params(params) {
        Ok(p) => p,
        Err(e) => return error(e),
    };
    let steps = steps.clamp(1, 200);
    let mut points = Vec::new();
    for i in 0..steps {
        let t = if steps == 1 { 0.0 } else { i as f64 / (steps - 1) as f64 };
        let value = from + (to - from) * t;
        fixed.insert(param.to_string(), value);
        let point = match catalog::instantiate(name, &fixed) {
            Ok(inst) => {
                let rep = inst.model.verify(TOL);
                json!({
                    "value": value,
                    "pass": rep.pass(),
                    "max_residual": rep.max_residual(),
                    "torsion_norm": inst.model.torsion.norm_inf(),
                    "curvature_norm": inst.model.curvature.norm_inf(),
                    "differences": inst.diff.len(),
                })
            }
            Err(e) => json!({ "value": value, "error": e.to_string() }),
        };
        points.push(point);
    }
    json!({ "entry": name, "param": param, "points": points }).to_string()
}
