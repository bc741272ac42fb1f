//! Browser bindings for the demo page in `www/`.
//!
//! Exports take and return JSON strings. The logic lives in plain Rust
//! functions returning `Result<String, String>` so it can be tested natively;
//! the `#[wasm_bindgen]` wrappers only convert the error.

use rmdp_core::bellman::span_curve;
use rmdp_core::gain::{duality_report, solve_constant_gain, GainConfig};
use rmdp_core::model::StationaryAdversaryPolicy;
use rmdp_core::simulate::{run, AdversarySpec, LearnerConfig, PolicySpec};
use rmdp_core::{Orientation, RobustMdpInstance, StateAmbiguity};
use serde_json::json;
use wasm_bindgen::prelude::*;

const BUILTIN: &[(&str, &str)] = &[
    ("tv_ring", include_str!("tv_ring.json")),
    ("mp_loop", include_str!("../../../fixtures/mp_loop.json")),
    ("d2_toggle", include_str!("../../../fixtures/d2_toggle.json")),
    ("d4_transient", include_str!("../../../fixtures/d4_transient.json")),
    ("d6_overlap", include_str!("../../../fixtures/d6_overlap.json")),
    ("t1_single", include_str!("../../../fixtures/t1_single.json")),
];

/// Steps of the discount grid `1 − 2^{-k}` drawn by the span plot.
const SPAN_GRID: std::ops::RangeInclusive<i32> = 2..=14;

const SIM_TRAJECTORIES: usize = 4;
const MAX_SIM_STEPS: usize = 1_000_000;

fn parse(instance_json: &str) -> Result<RobustMdpInstance, String> {
    RobustMdpInstance::from_json(instance_json).map_err(|e| e.to_string())
}

fn to_string(v: serde_json::Value) -> String {
    serde_json::to_string(&v).expect("serializable")
}

pub fn builtin_names() -> Vec<&'static str> {
    BUILTIN.iter().map(|(n, _)| *n).collect()
}

pub fn builtin(name: &str) -> Result<String, String> {
    BUILTIN
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| text.to_string())
        .ok_or_else(|| format!("no built-in instance named '{name}'"))
}

/// Same instance with every TV radius replaced by `radius`.
pub fn with_radius(inst: &RobustMdpInstance, radius: f64) -> Result<RobustMdpInstance, String> {
    let ambiguity = inst
        .ambiguities()
        .iter()
        .map(|a| match a {
            StateAmbiguity::SaTvBalls { nominal, radius: r } => StateAmbiguity::SaTvBalls {
                nominal: nominal.clone(),
                radius: vec![radius; r.len()],
            },
            other => other.clone(),
        })
        .collect();
    let out = RobustMdpInstance::new(inst.rewards().to_vec(), inst.controller_set().clone(), ambiguity);
    match inst.labels() {
        Some(labels) => out.and_then(|i| i.with_labels(labels.clone())),
        None => out,
    }
    .map_err(|e| e.to_string())
}

/// Span curve and both gains after setting every TV radius to `radius`.
/// A negative radius keeps the instance's own radii.
pub fn span_sweep(instance_json: &str, radius: f64) -> Result<String, String> {
    let mut inst = parse(instance_json)?;
    if radius >= 0.0 {
        inst = with_radius(&inst, radius)?;
    }
    let grid: Vec<f64> = SPAN_GRID.map(|k| 1.0 - 2f64.powi(-k)).collect();
    let curve = span_curve(&grid, Orientation::SupInf, &inst, 1e-9).map_err(|e| e.to_string())?;
    let config = GainConfig::default();
    let sup = solve_constant_gain(Orientation::SupInf, &inst, &config).map_err(|e| e.to_string())?;
    let inf = solve_constant_gain(Orientation::InfSup, &inst, &config).map_err(|e| e.to_string())?;
    Ok(to_string(json!({
        "radius": radius,
        "curve": curve,
        "alpha_supinf": sup.alpha,
        "alpha_infsup": inf.alpha,
        "verdict_supinf": sup.verdict,
        "verdict_infsup": inf.verdict,
        "u_supinf": sup.u,
    })))
}

/// Both gains, the gap and the structure labels.
pub fn duality(instance_json: &str, tol: f64) -> Result<String, String> {
    let inst = parse(instance_json)?;
    let r = duality_report(&inst, tol).map_err(|e| e.to_string())?;
    let structure = r.structure.as_ref().map(|s| {
        json!({
            "controller_comm": s.controller_comm.label(),
            "adversary_comm": s.adversary_comm.label(),
            "all_unichain": s.all_unichain.value,
            "occcc_controller": s.occcc_controller.value,
            "occcc_adversary": s.occcc_adversary.value,
        })
    });
    Ok(to_string(json!({
        "alpha_supinf": r.alpha_supinf,
        "alpha_infsup": r.alpha_infsup,
        "gap": r.gap,
        "both_converged": r.both_converged,
        "stationary_optimal_hd_s": r.stationary_optimal_hd_s,
        "verdict_supinf": r.supinf.verdict,
        "verdict_infsup": r.infsup.verdict,
        "u_supinf": r.supinf.u,
        "u_infsup": r.infsup.u,
        "structure": structure,
    })))
}

/// The learner against the adversary that always plays kernel `kernel`
/// (the nominal rows on TV states), from the uniform distribution.
pub fn simulate_learner(instance_json: &str, kernel: usize, steps: usize, seed: u64) -> Result<String, String> {
    let inst = parse(instance_json)?;
    if steps == 0 || steps > MAX_SIM_STEPS {
        return Err(format!("steps must be in 1..={MAX_SIM_STEPS}"));
    }
    let choices: Vec<usize> = inst
        .ambiguities()
        .iter()
        .map(|a| match a {
            StateAmbiguity::FiniteKernels(k) => kernel.min(k.len() - 1),
            StateAmbiguity::SaTvBalls { .. } => 0,
        })
        .collect();
    let adversary = AdversarySpec::Stationary { policy: StationaryAdversaryPolicy::from_kernels(&choices) };
    let ns = inst.n_states();
    let mu = vec![1.0 / ns as f64; ns];
    let controller = PolicySpec::Learner(LearnerConfig::default());
    let stats = run(&inst, &mu, &controller, &adversary, steps, SIM_TRAJECTORIES, seed).map_err(|e| e.to_string())?;
    Ok(to_string(json!({
        "adversary": choices,
        "checkpoints": stats.checkpoints,
        "mean_series": stats.mean_series,
        "mean": stats.mean,
        "standard_error": stats.standard_error,
    })))
}

#[wasm_bindgen(js_name = builtinNames)]
pub fn builtin_names_js() -> String {
    serde_json::to_string(&builtin_names()).expect("serializable")
}

#[wasm_bindgen(js_name = builtin)]
pub fn builtin_js(name: &str) -> Result<String, JsValue> {
    builtin(name).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = spanSweep)]
pub fn span_sweep_js(instance_json: &str, radius: f64) -> Result<String, JsValue> {
    span_sweep(instance_json, radius).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = duality)]
pub fn duality_js(instance_json: &str, tol: f64) -> Result<String, JsValue> {
    duality(instance_json, tol).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = simulateLearner)]
pub fn simulate_learner_js(instance_json: &str, kernel: usize, steps: usize, seed: u64) -> Result<String, JsValue> {
    simulate_learner(instance_json, kernel, steps, seed).map_err(|e| JsValue::from_str(&e))
}
