//! Browser bindings: each operation takes text and returns JSON text.

use f2factor::apps::{decompose_dnf, decompose_table, DataTable, DnfFormula, DnfMode, MergeConstants};
use f2factor::factor::{factor_complete, Driver, FactorConfig};
use f2factor::poly::parse;
use serde_json::json;
use wasm_bindgen::prelude::*;

fn config() -> FactorConfig {
    // No worker threads in the browser.
    FactorConfig::default().with_parallel(false)
}

pub fn factor_json(text: &str) -> Result<String, String> {
    let f = parse(text.trim(), None).map_err(|e| e.to_string())?;
    let fz = factor_complete(&f, Driver::ModFd, &config()).map_err(|e| e.to_string())?;
    let factors: Vec<String> = fz.iter().map(ToString::to_string).collect();
    Ok(json!({
        "input": f.to_string(),
        "irreducible": !fz.is_factorable(),
        "factors": factors,
    })
    .to_string())
}

pub fn dnf_json(text: &str, mode: &str) -> Result<String, String> {
    let mode: DnfMode = mode.parse().map_err(|e: f2factor::Error| e.to_string())?;
    let f = DnfFormula::parse(text.trim(), mode).map_err(|e| e.to_string())?;
    let parts: Vec<String> = decompose_dnf(&f, &config())
        .map_err(|e| e.to_string())?
        .iter()
        .map(ToString::to_string)
        .collect();
    Ok(json!({ "components": parts }).to_string())
}

pub fn table_json(csv: &str, merge: &str) -> Result<String, String> {
    let merge: MergeConstants = merge.parse().map_err(|e: f2factor::Error| e.to_string())?;
    let t = DataTable::from_csv(csv.as_bytes(), false).map_err(|e| e.to_string())?;
    let d = decompose_table(&t, merge, &config()).map_err(|e| e.to_string())?;
    serde_json::to_string(&d).map_err(|e| e.to_string())
}

/// Factors a polynomial such as `x*u + x*v + y*u + y*v`.
#[wasm_bindgen]
pub fn factor(text: &str) -> Result<String, JsValue> {
    factor_json(text).map_err(|e| JsValue::from_str(&e))
}

/// Splits a DNF formula; `mode` is `monotone` or `full`.
#[wasm_bindgen]
pub fn dnf(text: &str, mode: &str) -> Result<String, JsValue> {
    dnf_json(text, mode).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn table(csv: &str, merge: &str) -> Result<String, JsValue> {
    table_json(csv, merge).map_err(|e| JsValue::from_str(&e))
}
