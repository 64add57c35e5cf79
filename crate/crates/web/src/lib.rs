//! WebAssembly bindings for the demo page in `www/`. Each export takes plain
//! numbers or strings and returns a JSON document.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use weylgap::algebra::{decompose, curvature_of_form, SymForm};
use weylgap::gap::{classify_stratum, estimate_epsilon, gap_ratio, phi, universal_constants, EpsilonConfig};
use weylgap::models::{build_model, obstruction_report, threshold_radius, weyl_energy, Theorem};
use weylgap::morse::{tau_direction_side, tau_normal_bundle_side, DirectionConfig, HypersurfaceSpec, SampleConfig};

fn to_js(r: Result<Value, String>) -> Result<String, JsValue> {
    r.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e))
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn parse_list(text: &str) -> Result<Vec<f64>, String> {
    text.split([',', ' '])
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<f64>().map_err(|_| format!("not a number: `{s}`")))
        .collect()
}

/// Quick estimate for the page; the command-line tool certifies with far more samples.
fn quick_epsilon(n: usize) -> Result<f64, String> {
    let cfg = EpsilonConfig { starts_per_stratum: 16, certificate_samples: 20_000, ..EpsilonConfig::default() };
    estimate_epsilon(n, &cfg).map(|e| e.epsilon_hat).map_err(err)
}

/// `‖W‖²` of a diagonal shape operator two ways, plus its gap ratio.
pub fn spectrum_report(values: &str) -> Result<Value, String> {
    let lambda = parse_list(values)?;
    if lambda.len() < 4 {
        return Err("need at least four eigenvalues".into());
    }
    let t = curvature_of_form(&SymForm::diag(&lambda), 0.0);
    let pipeline = decompose(&t).map_err(err)?.weyl.norm_sq();
    let point = classify_stratum(&lambda).map_err(err)?;
    Ok(json!({
        "n": lambda.len(),
        "phi": phi(&lambda).map_err(err)?,
        "weyl_norm_sq": pipeline,
        "det": point.psi_value,
        "stratum": point.stratum,
        "neg_count": point.neg_count,
        "gap_ratio": gap_ratio(&lambda).map_err(err)?,
    }))
}

#[wasm_bindgen]
pub fn spectrum(values: &str) -> Result<String, JsValue> {
    to_js(spectrum_report(values))
}

/// Obstruction verdicts for a product model; `epsilon_hat <= 0` estimates it.
pub fn model_json(spec: &str, epsilon_hat: f64) -> Result<Value, String> {
    let spec: weylgap::models::ModelSpec = spec.parse().map_err(err)?;
    let geom = build_model(&spec).map_err(err)?;
    let eps = if epsilon_hat > 0.0 { epsilon_hat } else { quick_epsilon(geom.n)? };
    let consts = universal_constants(geom.n, eps).map_err(err)?;
    let main = obstruction_report(&geom, &consts, Theorem::Main).map_err(err)?;
    let threshold = (0..spec.factors.len()).find_map(|i| threshold_radius(&spec, i, consts.c_n).ok());
    Ok(json!({
        "spec": spec.to_string(),
        "n": geom.n,
        "betti": geom.betti,
        "weyl_energy": weyl_energy(&geom),
        "epsilon_hat": eps,
        "c_n": consts.c_n,
        "report": main,
        "threshold_radius": threshold,
    }))
}

#[wasm_bindgen]
pub fn model(spec: &str, epsilon_hat: f64) -> Result<String, JsValue> {
    to_js(model_json(spec, epsilon_hat))
}

/// Total curvature by index of a torus of revolution from both sides.
pub fn torus_json(big_r: f64, r: f64, samples: usize, seed: u64) -> Result<Value, String> {
    let spec = HypersurfaceSpec::tube(2, big_r, r).map_err(err)?;
    let dir = tau_direction_side(&spec, &DirectionConfig { num_directions: samples, seed, ..DirectionConfig::default() })
        .map_err(err)?;
    let nb = tau_normal_bundle_side(&spec, &SampleConfig { num_samples: samples, seed }).map_err(err)?;
    Ok(json!({ "direction_side": dir, "normal_bundle_side": nb }))
}

#[wasm_bindgen]
pub fn torus_tau(big_r: f64, r: f64, samples: u32, seed: u32) -> Result<String, JsValue> {
    to_js(torus_json(big_r, r, samples as usize, seed as u64))
}
