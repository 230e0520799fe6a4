//! Browser bindings for the steady-state pipeline solver.
//!
//! Three interactive operations are exported, each taking a JSON
//! configuration string and returning a JSON result: single-pipe pressure
//! profiles, outlet-pressure sweeps over the inclination angle, and the
//! gravity-effect histogram of a synthetic network. The heavy lifting stays
//! in the `gasnet` crate; this layer only translates JSON.

use gasnet::eos::{EosKind, EosModel};
use gasnet::rk::StepControl;
use gasnet::solver::SolveOptions;
use gasnet::studies::{self, SinglePipeSpec};
use gasnet::synth::{generate, SynthConfig};
use gasnet::{NominalConfig, TermToggles};
use serde::Deserialize;
use wasm_bindgen::prelude::*;

fn parse_eos(kind: &str) -> Result<EosModel, String> {
    match kind {
        "ideal" => Ok(EosModel::with_defaults(EosKind::Ideal)),
        "cnga" => Ok(EosModel::with_defaults(EosKind::Cnga)),
        other => Err(format!("unknown eos '{other}'")),
    }
}

fn default_true() -> bool {
    true
}

#[derive(Deserialize)]
struct PipeConfig {
    /// km
    length: f64,
    /// m
    diameter: f64,
    friction: f64,
    /// MPa
    inlet_pressure: f64,
    /// kg/s
    flow: f64,
    #[serde(default)]
    angle_deg: f64,
    #[serde(default = "default_ideal")]
    eos: String,
    #[serde(default = "default_true")]
    gravity: bool,
    #[serde(default = "default_true")]
    inertia: bool,
}

fn default_ideal() -> String {
    "ideal".into()
}

impl PipeConfig {
    fn spec(&self) -> SinglePipeSpec {
        SinglePipeSpec {
            length: self.length * 1e3,
            diameter: self.diameter,
            friction: self.friction,
            inlet_pressure: self.inlet_pressure * 1e6,
            flow: self.flow,
        }
    }

    fn toggles(&self) -> TermToggles {
        TermToggles {
            gravity: self.gravity,
            inertia: self.inertia,
        }
    }
}

/// Integrates one pipe and returns `{x, pressure, sens_inlet, sens_flow}`
/// (SI units) as JSON.
#[wasm_bindgen]
pub fn pipe_profile(config: &str) -> Result<String, JsError> {
    pipe_profile_impl(config).map_err(|e| JsError::new(&e))
}

fn pipe_profile_impl(config: &str) -> Result<String, String> {
    let cfg: PipeConfig = serde_json::from_str(config).map_err(stringify)?;
    let model = parse_eos(&cfg.eos)?;
    let profile = studies::pipe_profile(
        &cfg.spec(),
        cfg.angle_deg,
        &model,
        cfg.toggles(),
        &StepControl::with_tolerance(1e-9, 1e-11),
    )
    .map_err(stringify)?;
    serde_json::to_string(&profile).map_err(stringify)
}

#[derive(Deserialize)]
struct SweepConfig {
    #[serde(flatten)]
    pipe: PipeConfig,
    angle_max: f64,
    angle_step: f64,
}

/// Sweeps the inclination for both equations of state and both inertia
/// settings; returns the rows of the sweep table as JSON.
#[wasm_bindgen]
pub fn incline_sweep(config: &str) -> Result<String, JsError> {
    incline_sweep_impl(config).map_err(|e| JsError::new(&e))
}

fn incline_sweep_impl(config: &str) -> Result<String, String> {
    let cfg: SweepConfig = serde_json::from_str(config).map_err(stringify)?;
    if cfg.angle_step <= 0.0 || cfg.angle_step.is_nan() {
        return Err("angle_step must be positive".into());
    }
    let steps = (cfg.angle_max / cfg.angle_step).round() as i64;
    if !(1..=200).contains(&steps) {
        return Err("angle grid must have between 1 and 200 steps per side".into());
    }
    let angles: Vec<f64> = (-steps..=steps)
        .map(|k| k as f64 * cfg.angle_step)
        .collect();
    let models = [
        EosModel::with_defaults(EosKind::Ideal),
        EosModel::with_defaults(EosKind::Cnga),
    ];
    let rows = studies::sweep_incline(
        &cfg.pipe.spec(),
        &angles,
        &models,
        &SolveOptions::default(),
    );
    serde_json::to_string(&rows).map_err(stringify)
}

#[derive(Deserialize)]
struct GravityConfig {
    nodes: usize,
    #[serde(default)]
    compressors: usize,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_bins")]
    bins: usize,
    /// m; node elevations are drawn from [0, elevation_max].
    #[serde(default = "default_elevation")]
    elevation_max: f64,
    #[serde(default = "default_ideal")]
    eos: String,
}

fn default_bins() -> usize {
    20
}

fn default_elevation() -> f64 {
    3000.0
}

/// Generates a synthetic elevated network, solves it with and without
/// gravity and returns the per-node differences with histogram and CDF.
#[wasm_bindgen]
pub fn gravity_histogram(config: &str) -> Result<String, JsError> {
    gravity_histogram_impl(config).map_err(|e| JsError::new(&e))
}

fn gravity_histogram_impl(config: &str) -> Result<String, String> {
    let cfg: GravityConfig = serde_json::from_str(config).map_err(stringify)?;
    if !(2..=2000).contains(&cfg.nodes) {
        return Err("nodes must be between 2 and 2000".into());
    }
    let model = parse_eos(&cfg.eos)?;
    let mut synth = SynthConfig::mountainous(cfg.nodes, cfg.compressors, cfg.seed);
    synth.elevation_range = (0.0, cfg.elevation_max.max(0.0));
    let net = generate(&synth);
    let effect = studies::gravity_effect(
        &net,
        &model,
        &NominalConfig::default(),
        &SolveOptions::default(),
        cfg.bins.clamp(1, 200),
    )
    .map_err(stringify)?;
    serde_json::to_string(&effect).map_err(stringify)
}

fn stringify<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

#[cfg(test)]
mod tests {
    // The exported functions are plain Rust on the host target; exercise
    // the JSON plumbing without a browser.
    use super::*;

    #[test]
    fn pipe_profile_round_trips_json() {
        let out = pipe_profile_impl(
            r#"{"length": 122, "diameter": 1.422, "friction": 0.03,
                "inlet_pressure": 8.8, "flow": 400, "angle_deg": 2.0}"#,
        )
        .unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!(v["x"].as_array().unwrap().len() > 2);
        assert_eq!(v["pressure"][0].as_f64().unwrap(), 8.8e6);
    }

    #[test]
    fn sweep_covers_the_angle_grid() {
        let out = incline_sweep_impl(
            r#"{"length": 122, "diameter": 1.422, "friction": 0.03,
                "inlet_pressure": 8.8, "flow": 400,
                "angle_max": 1.0, "angle_step": 0.5}"#,
        )
        .unwrap();
        let rows: serde_json::Value = serde_json::from_str(&out).unwrap();
        // 5 angles x 2 models x 2 inertia settings.
        assert_eq!(rows.as_array().unwrap().len(), 20);
    }

    #[test]
    fn gravity_histogram_is_normalized() {
        let out =
            gravity_histogram_impl(r#"{"nodes": 30, "compressors": 1, "seed": 7, "bins": 10}"#)
                .unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        let cdf = v["cdf"].as_array().unwrap();
        assert!((cdf.last().unwrap()[1].as_f64().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bad_input_is_an_error() {
        assert!(pipe_profile_impl("{").is_err());
        assert!(gravity_histogram_impl(r#"{"nodes": 1}"#).is_err());
    }
}
