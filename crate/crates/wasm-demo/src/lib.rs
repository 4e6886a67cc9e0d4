//! Browser bindings for the construction toolkit. Three interactive
//! operations back the demo page in `www/`: run the full construction and
//! report per-u witness coverage, survey maximal prime gaps, and evaluate
//! the quadratic character sum over the exceptional set.
//!
//! Build with `cargo build --target wasm32-unknown-unknown --release` and
//! run `wasm-bindgen --target web` on the artifact (or use wasm-pack). The
//! `*_impl` functions hold all the logic and compile natively, so the JSON
//! surface stays testable off-browser.

use wasm_bindgen::prelude::*;

use num_rational::Ratio;
use powergap_core::analysis::{char_sum_s, max_gap};
use powergap_core::certify::{build_certificate, WitnessKind};
use powergap_core::construction::{construct, derive_params, exceptional_set, ConstructOptions};

/// Run the construction for (k, x) and return a JSON document with the
/// result header plus one witness record per u — enough to paint the
/// coverage map of the interval [-y, y].
pub fn construct_demo_impl(k: u32, x: u32) -> Result<String, String> {
    if !(1..=6).contains(&k) {
        return Err("k must be between 1 and 6".into());
    }
    if !(16..=600).contains(&x) {
        return Err("x must be between 16 and 600 for the demo".into());
    }
    let result = construct(k as u64, x as u64, &ConstructOptions::default())
        .map_err(|e| e.to_string())?;
    let cert = build_certificate(&result).map_err(|e| e.to_string())?;
    let witnesses: Vec<serde_json::Value> = cert
        .witnesses
        .iter()
        .map(|w| {
            let kind = match w.kind {
                WitnessKind::PrimeDivisor => "prime_divisor",
                WitnessKind::CompositePrp => "composite_prp",
            };
            serde_json::json!({"u": w.u, "kind": kind, "p": w.p})
        })
        .collect();
    let doc = serde_json::json!({
        "result": result.to_json(),
        "m_digits": result.m.to_string().len(),
        "p1": result.params.p1,
        "p2": result.params.p2,
        "p3": result.params.p3,
        "witnesses": witnesses,
    });
    Ok(doc.to_string())
}

/// Maximal prime gap records up to `limit` as JSON, with merit and (beyond
/// p ≈ 3.81e6) the Rankin-normalized ratio.
pub fn gap_survey_impl(limit: u32) -> Result<String, String> {
    if !(3..=100_000_000).contains(&limit) {
        return Err("limit must be between 3 and 1e8".into());
    }
    let records: Vec<serde_json::Value> = max_gap(limit as u64)
        .iter()
        .map(|r| {
            serde_json::json!({
                "p": r.p, "q": r.q, "gap": r.gap,
                "merit": r.merit, "rankin_ratio": r.rankin_ratio,
            })
        })
        .collect();
    Ok(serde_json::json!({ "limit": limit, "records": records }).to_string())
}

/// The character sum S = Σ_u |Σ_{p in P3} (-u/p)|² for even k, with every
/// inner sum, as JSON for the bar chart.
pub fn char_sum_demo_impl(k: u32, x: u32) -> Result<String, String> {
    if k % 2 != 0 || k == 0 {
        return Err("the character sum is defined for even k".into());
    }
    if !(16..=2000).contains(&x) {
        return Err("x must be between 16 and 2000 for the demo".into());
    }
    let params = derive_params(k as u64, x as u64, Ratio::new(1, 1), Ratio::new(1, 1))
        .map_err(|e| e.to_string())?;
    let u_set = exceptional_set(&params);
    let sum = char_sum_s(&u_set, &params.p3);
    let per_u: Vec<serde_json::Value> = sum
        .per_u
        .iter()
        .map(|&(u, inner)| serde_json::json!({"u": u, "inner": inner}))
        .collect();
    let doc = serde_json::json!({
        "k": k, "x": x, "y": params.y,
        "p3": params.p3,
        "s": sum.s as u64,
        "per_u": per_u,
    });
    Ok(doc.to_string())
}

#[wasm_bindgen]
pub fn construct_demo(k: u32, x: u32) -> Result<String, JsValue> {
    construct_demo_impl(k, x).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn gap_survey(limit: u32) -> Result<String, JsValue> {
    gap_survey_impl(limit).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn char_sum_demo(k: u32, x: u32) -> Result<String, JsValue> {
    char_sum_demo_impl(k, x).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construct_demo_reports_full_coverage() {
        let doc: serde_json::Value =
            serde_json::from_str(&construct_demo_impl(2, 50).unwrap()).unwrap();
        let y = doc["result"]["y_achieved"].as_u64().unwrap();
        let witnesses = doc["witnesses"].as_array().unwrap();
        assert_eq!(witnesses.len() as u64, 2 * y + 1);
        assert!(witnesses
            .iter()
            .all(|w| w["kind"] == "prime_divisor" || w["kind"] == "composite_prp"));
    }

    #[test]
    fn gap_survey_shape() {
        let doc: serde_json::Value =
            serde_json::from_str(&gap_survey_impl(100).unwrap()).unwrap();
        let records = doc["records"].as_array().unwrap();
        assert_eq!(records.last().unwrap()["gap"], 8);
        assert_eq!(records.last().unwrap()["p"], 89);
    }

    #[test]
    fn char_sum_demo_values() {
        let doc: serde_json::Value =
            serde_json::from_str(&char_sum_demo_impl(2, 50).unwrap()).unwrap();
        assert_eq!(doc["s"], 12);
        assert!(char_sum_demo_impl(3, 50).is_err());
        assert!(construct_demo_impl(1, 10).is_err());
    }
}
