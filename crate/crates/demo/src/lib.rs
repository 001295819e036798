//! WebAssembly bindings behind `www/index.html`: one engagement with its
//! planar trajectory, the orientation-gain bounds with the effort curve
//! over them, and surrogate gain queries from a model JSON file.
//!
//! Every export takes degrees and returns a JSON string; the plain-Rust
//! functions underneath are what the native tests exercise.

use ppn_gain::guidance::{gain_bounds, predict_terminal_angle, GainBounds, GainSchedule};
use ppn_gain::kinematics::{IntegratorConfig, VehicleParams};
use ppn_gain::mlp::{predict_gains, GainPrediction, MlpModel};
use ppn_gain::simulation::{simulate_with, Logging, SimOptions};
use ppn_gain::sweep::orientation_grid;
use serde::Serialize;
use wasm_bindgen::prelude::*;

pub const SPEED: f64 = 50.0;
pub const RANGE0: f64 = 2500.0;
const TRACE_EVERY: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePoint {
    pub t: f64,
    /// Pursuer position with the target at the origin (m).
    pub x: f64,
    pub y: f64,
    pub range: f64,
    pub heading_deg: f64,
    pub accel: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EngagementReport {
    pub verdict: String,
    pub effort: f64,
    pub t_final: f64,
    pub terminal_heading_deg: f64,
    pub desired_deg: f64,
    pub switch_t: Option<f64>,
    pub n_ori: Option<f64>,
    pub n_f: Option<f64>,
    pub trace: Vec<TracePoint>,
}

fn vehicle(heading0_deg: f64) -> Result<VehicleParams, String> {
    VehicleParams::new(SPEED, RANGE0, 0.0, heading0_deg.to_radians()).map_err(|e| e.to_string())
}

fn integrator(t_max: f64) -> IntegratorConfig {
    IntegratorConfig { t_max, ..IntegratorConfig::default() }
}

/// Simulate one engagement. `mode` is `shaped`, `baseline` or `single`
/// (`n_f` is the constant gain; `desired_deg` may be NaN to use the
/// closed-form terminal angle).
pub fn run_engagement(heading0_deg: f64, desired_deg: f64, mode: &str, n_ori: f64, n_f: f64, t_max: f64) -> Result<EngagementReport, String> {
    let v = vehicle(heading0_deg)?;
    let desired = desired_deg.to_radians();
    let schedule = match mode {
        "shaped" => GainSchedule::shaped(n_ori, n_f, desired),
        "baseline" => GainSchedule::baseline(desired),
        "single" => {
            let d = if desired.is_finite() { desired } else { predict_terminal_angle(n_f, v.los0, v.heading0).map_err(|e| e.to_string())? };
            GainSchedule::single(n_f, d)
        }
        other => return Err(format!("unknown mode {other:?}")),
    };
    let opts = SimOptions { logging: Logging::Every(TRACE_EVERY), ..SimOptions::default() };
    let out = simulate_with(&v, &schedule, &integrator(t_max), &opts).map_err(|e| e.to_string())?;
    let trace = out
        .trajectory
        .iter()
        .map(|s| {
            let st = s.state;
            TracePoint {
                t: st.t,
                x: -st.range * st.los.cos(),
                y: -st.range * st.los.sin(),
                range: st.range,
                heading_deg: st.heading.to_degrees(),
                accel: s.accel,
            }
        })
        .collect();
    let (n_ori, n_f) = match mode {
        "shaped" => (Some(n_ori), Some(n_f)),
        "single" => (None, Some(n_f)),
        _ => (None, out.switch.map(|s| s.gain)),
    };
    Ok(EngagementReport {
        verdict: out.verdict.to_string(),
        effort: out.effort,
        t_final: out.t_final,
        terminal_heading_deg: out.terminal_heading.to_degrees(),
        desired_deg: schedule.desired.to_degrees(),
        switch_t: out.switch.map(|s| s.t),
        n_ori,
        n_f,
        trace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostPoint {
    pub n_ori: f64,
    pub effort: f64,
    pub t_final: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostCurve {
    pub bounds: GainBounds,
    pub points: Vec<CostPoint>,
    /// Minimum-effort feasible point; ties go to the larger gain.
    pub best: Option<CostPoint>,
}

/// Effort over the orientation-gain grid for one final gain.
pub fn cost_curve(heading0_deg: f64, desired_deg: f64, n_f: f64, step: f64, t_max: f64) -> Result<CostCurve, String> {
    let v = vehicle(heading0_deg)?;
    let desired = desired_deg.to_radians();
    let bounds = gain_bounds(v.los0, v.heading0, desired, n_f).map_err(|e| e.to_string())?;
    if !(step >= 0.01) {
        return Err("step must be at least 0.01".into());
    }
    let cfg = integrator(t_max);
    let mut points = Vec::new();
    for n_ori in orientation_grid(&bounds, step) {
        let out = simulate_with(&v, &GainSchedule::shaped(n_ori, n_f, desired), &cfg, &SimOptions::quiet()).map_err(|e| e.to_string())?;
        points.push(CostPoint { n_ori, effort: out.effort, t_final: out.t_final, feasible: out.verdict.is_feasible() });
    }
    let best = points.iter().filter(|p| p.feasible).fold(None::<CostPoint>, |b, p| match b {
        Some(b) if b.effort < p.effort => Some(b),
        _ => Some(*p),
    });
    Ok(CostCurve { bounds, points, best })
}

fn to_json<T: Serialize>(value: &T) -> Result<String, JsError> {
    serde_json::to_string(value).map_err(|e| JsError::new(&e.to_string()))
}

fn js(e: String) -> JsError {
    JsError::new(&e)
}

#[wasm_bindgen]
pub fn simulate(heading0_deg: f64, desired_deg: f64, mode: &str, n_ori: f64, n_f: f64, t_max: f64) -> Result<String, JsError> {
    to_json(&run_engagement(heading0_deg, desired_deg, mode, n_ori, n_f, t_max).map_err(js)?)
}

#[wasm_bindgen(js_name = costCurve)]
pub fn cost_curve_json(heading0_deg: f64, desired_deg: f64, n_f: f64, step: f64, t_max: f64) -> Result<String, JsError> {
    to_json(&cost_curve(heading0_deg, desired_deg, n_f, step, t_max).map_err(js)?)
}

/// A trained gain surrogate loaded from its JSON model file.
#[wasm_bindgen]
pub struct Surrogate {
    model: MlpModel,
}

impl Surrogate {
    pub fn from_text(text: &str) -> Result<Self, String> {
        let model = MlpModel::from_json(text).map_err(|e| e.to_string())?;
        if model.problem.is_none() {
            return Err("model file does not record its problem".into());
        }
        Ok(Self { model })
    }

    /// `n_f` is required by problem A models and ignored by problem B models.
    pub fn query(&self, heading0_deg: f64, desired_deg: f64, n_f: f64) -> Result<GainPrediction, String> {
        let n_f = self.takes_final_gain().then_some(n_f);
        predict_gains(&self.model, heading0_deg, desired_deg, n_f).map_err(|e| e.to_string())
    }

    pub fn takes_final_gain(&self) -> bool {
        self.model.spec.inputs() == 3
    }
}

#[wasm_bindgen]
impl Surrogate {
    #[wasm_bindgen(constructor)]
    pub fn new(text: &str) -> Result<Surrogate, JsError> {
        Self::from_text(text).map_err(js)
    }

    #[wasm_bindgen(getter)]
    pub fn problem(&self) -> String {
        self.model.problem.map(|p| p.to_string()).unwrap_or_default()
    }

    pub fn predict(&self, heading0_deg: f64, desired_deg: f64, n_f: f64) -> Result<String, JsError> {
        to_json(&self.query(heading0_deg, desired_deg, n_f).map_err(js)?)
    }
}
