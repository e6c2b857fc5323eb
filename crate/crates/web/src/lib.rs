//! Browser bindings for three operations: class membership, backdoor search
//! and reduction generation. All inputs and outputs are JSON text in the
//! formats the CLI reads and writes.
//!
//! The `*_json` functions hold the logic and are plain Rust; the exported
//! wrappers only convert errors for JavaScript.

use backdoor_core::backdoor::{check_backdoor_naive, find_backdoor_bruteforce, find_backdoor_fpt};
use backdoor_core::reductions::{
    gen_boolean_sets, gen_single_constraint, gen_vertex_cover, sample_flags, sample_sets,
    single_constraint_flags,
};
use backdoor_core::{
    BackdoorLimits, ClassExpr, ClassOracle, CspInstance, Graph, HittingSetInstance, Language,
    SearchLimits,
};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn oracle(class_json: &str) -> Result<ClassOracle, String> {
    ClassOracle::new(
        ClassExpr::from_json(class_json).map_err(err)?,
        SearchLimits::default(),
    )
    .map_err(err)
}

pub fn member_json(language_json: &str, class_json: &str) -> Result<String, String> {
    let lang: Language = serde_json::from_str(language_json).map_err(err)?;
    let expr = ClassExpr::from_json(class_json).map_err(err)?;
    let report =
        backdoor_core::class::member(&expr, &lang, &SearchLimits::default()).map_err(err)?;
    serde_json::to_string_pretty(&report).map_err(err)
}

/// Uses the bounded search tree when the class has a Helly bound and brute
/// force otherwise. Found sets are re-verified with the naive checker.
pub fn find_backdoor_json(
    instance_json: &str,
    class_json: &str,
    k: usize,
) -> Result<String, String> {
    let inst = CspInstance::from_json(instance_json).map_err(err)?;
    let o = oracle(class_json)?;
    let limits = BackdoorLimits::default();
    let (out, mode) = match o.expr().helly_bound() {
        Some(h) => (
            find_backdoor_fpt(&inst, &o, k, h, &limits).map_err(err)?,
            "fpt",
        ),
        None => (
            find_backdoor_bruteforce(&inst, &o, k, &limits).map_err(err)?,
            "brute",
        ),
    };
    let verified = match &out.backdoor {
        Some(b) => Some(check_backdoor_naive(&inst, b, &o, &limits).map_err(err)?),
        None => None,
    };
    let report = json!({
        "found": out.backdoor.is_some(),
        "backdoor": out.backdoor,
        "nodes_expanded": out.nodes_expanded,
        "membership_tests": out.membership_tests,
        "mode": mode,
        "verified": verified,
    });
    serde_json::to_string_pretty(&report).map_err(err)
}

/// `construction` is one of `vertex-cover` (graph input), `single-constraint`, `boolean-sets`
/// (hitting-set input) or `sample` (no input).
pub fn generate_json(
    construction: &str,
    input_json: &str,
    class_json: &str,
) -> Result<String, String> {
    let generated = match construction {
        "sample" => gen_single_constraint(&sample_sets(), &sample_flags()),
        "vertex-cover" => {
            let g: Graph = serde_json::from_str(input_json).map_err(err)?;
            gen_vertex_cover(&g, &oracle(class_json)?)
        }
        "single-constraint" => {
            let hs: HittingSetInstance = serde_json::from_str(input_json).map_err(err)?;
            let flags =
                single_constraint_flags(hs.sets().len(), &oracle(class_json)?).map_err(err)?;
            gen_single_constraint(&hs, &flags)
        }
        "boolean-sets" => {
            let hs: HittingSetInstance = serde_json::from_str(input_json).map_err(err)?;
            gen_boolean_sets(&hs, &oracle(class_json)?)
        }
        other => return Err(format!("unknown construction {other:?}")),
    }
    .map_err(err)?;
    serde_json::to_string_pretty(&generated.to_file()).map_err(err)
}

#[wasm_bindgen]
pub fn member(language_json: &str, class_json: &str) -> Result<String, JsError> {
    member_json(language_json, class_json).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn find_backdoor(instance_json: &str, class_json: &str, k: usize) -> Result<String, JsError> {
    find_backdoor_json(instance_json, class_json, k).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn generate(construction: &str, input_json: &str, class_json: &str) -> Result<String, JsError> {
    generate_json(construction, input_json, class_json).map_err(|e| JsError::new(&e))
}
