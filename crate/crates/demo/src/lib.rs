//! Browser bindings. Every export takes and returns plain strings and
//! numbers, so the same functions are exercised natively by the tests.
//!
//! A trajectory travels between JS and Rust as the JSON of
//! [`trajclean::Trajectory`]; results add local-plane `x`/`y` meters for
//! drawing.

use serde_json::{json, Value};
use trajclean::detectors::{detect, DetectorConfig};
use trajclean::eval::{confusion, Scores};
use trajclean::geo::LocalPlane;
use trajclean::groundtruth::{label_trajectory, GroundTruthConfig};
use trajclean::synth::{generate_trajectory, SynthSpec};
use trajclean::{LabelSet, Trajectory};
use wasm_bindgen::prelude::*;

fn parse<T: serde::de::DeserializeOwned>(what: &str, src: &str) -> Result<T, String> {
    serde_json::from_str(src).map_err(|e| format!("invalid {what}: {e}"))
}

fn xy(traj: &Trajectory) -> Vec<[f64; 2]> {
    let plane = LocalPlane::centred_on(traj.points());
    traj.points()
        .iter()
        .map(|p| {
            let (x, y) = plane.project_point(p);
            [x, y]
        })
        .collect()
}

/// Generates one synthetic trajectory. `spec_json` may set any subset of the
/// synth parameters. Returns `{trajectory, xy, truth}`.
#[wasm_bindgen]
pub fn generate(spec_json: &str) -> Result<String, String> {
    let spec: SynthSpec = parse("synth parameters", spec_json)?;
    let (traj, truth) = generate_trajectory(&spec).map_err(|e| e.to_string())?;
    Ok(json!({ "xy": xy(&traj), "truth": truth, "trajectory": traj }).to_string())
}

/// Runs one detector. `config_json` uses the same keys as a `[[detector]]`
/// table, e.g. `{"detector": "hampel", "window_half": 5, "n_sigmas": 3}`.
/// `truth_json` is an index list or `null`; when given, scores are included.
#[wasm_bindgen]
pub fn run_detector(trajectory_json: &str, config_json: &str, truth_json: &str) -> Result<String, String> {
    let traj: Trajectory = parse("trajectory", trajectory_json)?;
    let cfg: DetectorConfig = parse("detector config", config_json)?;
    cfg.validate().map_err(|e| e.to_string())?;
    let truth: Option<LabelSet> = parse("truth", truth_json)?;
    let result = detect(&traj, &cfg).map_err(|e| e.to_string())?;

    let plane = LocalPlane::centred_on(traj.points());
    let replacements: Vec<Value> = result
        .replacements
        .iter()
        .map(|(&i, p)| {
            let (x, y) = plane.project_point(p);
            json!({ "index": i, "x": x, "y": y })
        })
        .collect();
    let scores = match truth {
        Some(truth) => {
            let cm = confusion(&result.flags, &truth, traj.len()).map_err(|e| e.to_string())?;
            json!({ "confusion": cm, "scores": Scores::from_confusion(&cm) })
        }
        None => Value::Null,
    };
    Ok(json!({
        "method": cfg.method_name(),
        "flags": result.flags,
        "replacements": replacements,
        "warnings": result.warnings,
        "evaluation": scores,
    })
    .to_string())
}

/// Sensor cross-check labels with speed threshold `ts` (m/s) and heading
/// threshold `th` (degrees).
#[wasm_bindgen]
pub fn label(trajectory_json: &str, ts: f64, th: f64) -> Result<String, String> {
    let traj: Trajectory = parse("trajectory", trajectory_json)?;
    let cfg = GroundTruthConfig::new(ts, th).map_err(|e| e.to_string())?;
    Ok(serde_json::to_string(&label_trajectory(&traj, &cfg)).expect("labels serialize"))
}
