//! Exhaustive optimal-gain search over the engagement grid and the dataset
//! files it produces.
//!
//! One sweep simulates every `(heading0, desired, N_f, N_ori)` tuple once;
//! both optimal-gain problems are reductions over the same evaluations:
//! problem A keeps the best `N_ori` per `(heading0, desired, N_f)`, problem B
//! the best `(N_f, N_ori)` per `(heading0, desired)`.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{DatasetError, SimulationError};
use crate::guidance::{gain_bounds, requires_two_phase, GainBounds, GainSchedule};
use crate::kinematics::{IntegratorConfig, VehicleParams};
use crate::simulation::{simulate_with, SimOptions, Verdict};

const GRID_EPS: f64 = 1e-9;

/// Engagement and gain grid. Angles in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub heading0_deg: Vec<f64>,
    pub desired_deg: Vec<f64>,
    pub final_gains: Vec<f64>,
    pub orientation_step: f64,
    pub t_max: f64,
    /// Longer horizons tried in order for a pair that has a final gain with
    /// no feasible orientation gain within `t_max`. Values not above `t_max`
    /// are skipped.
    pub horizon_ladder: Vec<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            heading0_deg: (1..=17).map(|k| 10.0 * k as f64).collect(),
            desired_deg: (1..=17).rev().map(|k| -10.0 * k as f64).collect(),
            final_gains: (20..=50).map(|k| k as f64 / 10.0).collect(),
            orientation_step: 0.1,
            t_max: 200.0,
            horizon_ladder: vec![250.0, 300.0, 400.0, 500.0, 600.0, 800.0, 1000.0],
        }
    }
}

impl GridSpec {
    fn validate(&self) -> Result<(), DatasetError> {
        if self.heading0_deg.is_empty() {
            return Err(DatasetError::EmptyGrid("heading0_deg"));
        }
        if self.desired_deg.is_empty() {
            return Err(DatasetError::EmptyGrid("desired_deg"));
        }
        if self.final_gains.is_empty() {
            return Err(DatasetError::EmptyGrid("final_gains"));
        }
        if !(self.orientation_step > 0.0) {
            return Err(DatasetError::EmptyGrid("orientation_step"));
        }
        if !(self.t_max > 0.0) || self.horizon_ladder.iter().any(|t| !t.is_finite()) {
            return Err(DatasetError::EmptyGrid("t_max"));
        }
        Ok(())
    }
}

/// Everything a sweep needs: speed, range and LOS angle of the vehicle
/// (its heading is replaced per scenario), integrator settings (its `t_max`
/// is replaced by the grid's) and the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub vehicle: VehicleParams,
    pub integrator: IntegratorConfig,
    pub grid: GridSpec,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            vehicle: VehicleParams { speed: 50.0, range0: 2500.0, los0: 0.0, heading0: 0.0 },
            integrator: IntegratorConfig::default(),
            grid: GridSpec::default(),
        }
    }
}

impl SweepConfig {
    pub fn integrator(&self) -> IntegratorConfig {
        self.integrator_until(self.grid.t_max)
    }

    pub fn integrator_until(&self, t_max: f64) -> IntegratorConfig {
        IntegratorConfig { t_max, ..self.integrator }
    }

    pub fn vehicle_for(&self, heading0_deg: f64) -> VehicleParams {
        VehicleParams { heading0: heading0_deg.to_radians(), ..self.vehicle }
    }
}

/// Orientation-gain grid anchored at `n_min` rounded up to a multiple of
/// `step` (inclusive) and stopping before `n_max`.
pub fn orientation_grid(bounds: &GainBounds, step: f64) -> Vec<f64> {
    let mut k = (bounds.n_min / step - GRID_EPS).ceil() as i64;
    let mut out = Vec::new();
    loop {
        let g = k as f64 * step;
        if g >= bounds.n_max - GRID_EPS {
            break;
        }
        out.push(g);
        k += 1;
    }
    out
}

/// One `(heading0, desired, N_f)` optimisation problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub heading0_deg: f64,
    pub desired_deg: f64,
    pub n_f: f64,
    pub bounds: GainBounds,
    pub orientation_gains: Vec<f64>,
}

/// Engagement pairs that need the two-phase scheme, in canonical order
/// (heading0 ascending, then desired descending as listed in the grid).
pub fn two_phase_pairs(cfg: &SweepConfig) -> Vec<(f64, f64)> {
    let los0 = cfg.vehicle.los0;
    let mut out = Vec::new();
    for &h in &cfg.grid.heading0_deg {
        for &d in &cfg.grid.desired_deg {
            if h.to_radians() > los0 && requires_two_phase(los0, h.to_radians(), d.to_radians()) {
                out.push((h, d));
            }
        }
    }
    out
}

fn scenario(cfg: &SweepConfig, heading0_deg: f64, desired_deg: f64, n_f: f64) -> Option<Scenario> {
    let bounds = gain_bounds(cfg.vehicle.los0, heading0_deg.to_radians(), desired_deg.to_radians(), n_f).ok()?;
    Some(Scenario {
        heading0_deg,
        desired_deg,
        n_f,
        bounds,
        orientation_gains: orientation_grid(&bounds, cfg.grid.orientation_step),
    })
}

/// Every two-phase pair crossed with every final gain, each with its
/// orientation-gain grid.
pub fn enumerate_scenarios(cfg: &SweepConfig) -> Result<Vec<Scenario>, DatasetError> {
    cfg.grid.validate()?;
    let mut out = Vec::new();
    for (h, d) in two_phase_pairs(cfg) {
        for &n_f in &cfg.grid.final_gains {
            if let Some(s) = scenario(cfg, h, d, n_f) {
                out.push(s);
            }
        }
    }
    Ok(out)
}

/// Outcome of one simulated grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub n_ori: f64,
    pub effort: f64,
    pub t_final: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub scenario: Scenario,
    /// Horizon the scenario was simulated with.
    pub t_max: f64,
    pub evaluations: Vec<Evaluation>,
}

impl ScenarioResult {
    pub fn n_feasible(&self) -> usize {
        self.evaluations.iter().filter(|e| e.verdict.is_feasible()).count()
    }

    /// Minimum-effort feasible point; ties go to the larger `N_ori`.
    pub fn best(&self) -> Option<&Evaluation> {
        let mut best: Option<&Evaluation> = None;
        for e in self.evaluations.iter().filter(|e| e.verdict.is_feasible()) {
            best = match best {
                Some(b) if e.effort > b.effort || (e.effort == b.effort && e.n_ori < b.n_ori) => Some(b),
                _ => Some(e),
            };
        }
        best
    }
}

/// Simulate every orientation gain of one scenario with the grid's `t_max`.
pub fn evaluate_scenario(cfg: &SweepConfig, scenario: Scenario) -> Result<ScenarioResult, SimulationError> {
    evaluate_scenario_until(cfg, scenario, cfg.grid.t_max)
}

pub fn evaluate_scenario_until(cfg: &SweepConfig, scenario: Scenario, t_max: f64) -> Result<ScenarioResult, SimulationError> {
    let vehicle = cfg.vehicle_for(scenario.heading0_deg);
    let integrator = cfg.integrator_until(t_max);
    let desired = scenario.desired_deg.to_radians();
    let opts = SimOptions::quiet();
    let evaluations = scenario
        .orientation_gains
        .iter()
        .map(|&n_ori| {
            let out = simulate_with(&vehicle, &GainSchedule::shaped(n_ori, scenario.n_f, desired), &integrator, &opts)?;
            Ok(Evaluation { n_ori, effort: out.effort, t_final: out.t_final, verdict: out.verdict })
        })
        .collect::<Result<Vec<_>, SimulationError>>()?;
    Ok(ScenarioResult { scenario, t_max, evaluations })
}

fn evaluate_all(cfg: &SweepConfig, scenarios: Vec<Scenario>, t_max: f64) -> Result<Vec<ScenarioResult>, SimulationError> {
    #[cfg(feature = "parallel")]
    let it = scenarios.into_par_iter();
    #[cfg(not(feature = "parallel"))]
    let it = scenarios.into_iter();
    // Both iterators keep input order, so the result is in canonical order.
    it.map(|s| evaluate_scenario_until(cfg, s, t_max)).collect()
}

fn same_pair(a: &Scenario, b: &Scenario) -> bool {
    a.heading0_deg == b.heading0_deg && a.desired_deg == b.desired_deg
}

/// Re-simulate every pair that has a scenario without a feasible point on
/// the next horizon of the ladder until all its scenarios are feasible or
/// the ladder runs out.
fn extend_horizons(cfg: &SweepConfig, results: &mut [ScenarioResult]) -> Result<(), SimulationError> {
    let mut i = 0;
    while i < results.len() {
        let mut j = i + 1;
        while j < results.len() && same_pair(&results[i].scenario, &results[j].scenario) {
            j += 1;
        }
        let group = &mut results[i..j];
        for &t_max in cfg.grid.horizon_ladder.iter().filter(|&&t| t > cfg.grid.t_max) {
            if group.iter().all(|r| r.n_feasible() > 0) {
                break;
            }
            let scenarios = group.iter().map(|r| r.scenario.clone()).collect();
            for (slot, r) in group.iter_mut().zip(evaluate_all(cfg, scenarios, t_max)?) {
                *slot = r;
            }
        }
        i = j;
    }
    Ok(())
}

fn evaluate_with_ladder(cfg: &SweepConfig, scenarios: Vec<Scenario>) -> Result<SweepResult, SimulationError> {
    let mut results = evaluate_all(cfg, scenarios, cfg.grid.t_max)?;
    extend_horizons(cfg, &mut results)?;
    Ok(SweepResult { base_t_max: cfg.grid.t_max, results })
}

/// Complete set of evaluations in canonical scenario order.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// The grid's default horizon; pairs listed in [`SweepResult::horizons`] used a longer one.
    pub base_t_max: f64,
    pub results: Vec<ScenarioResult>,
}

/// A pair simulated beyond the default horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairHorizon {
    pub heading0_deg: f64,
    pub desired_deg: f64,
    pub t_max: f64,
}

/// Tuple counts of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct SweepStats {
    pub pairs: usize,
    pub scenarios: usize,
    pub tuples: usize,
    pub feasible: usize,
    pub timeout: usize,
    pub angle_miss: usize,
    pub no_switch: usize,
    pub extended_pairs: usize,
}

impl SweepResult {
    pub fn stats(&self) -> SweepStats {
        let mut st = SweepStats { scenarios: self.results.len(), ..SweepStats::default() };
        let mut last_pair = None;
        for r in &self.results {
            let pair = (r.scenario.heading0_deg.to_bits(), r.scenario.desired_deg.to_bits());
            if last_pair != Some(pair) {
                st.pairs += 1;
                last_pair = Some(pair);
            }
            for e in &r.evaluations {
                st.tuples += 1;
                match e.verdict {
                    Verdict::Feasible => st.feasible += 1,
                    Verdict::Timeout => st.timeout += 1,
                    Verdict::AngleMiss => st.angle_miss += 1,
                    Verdict::NoSwitch => st.no_switch += 1,
                }
            }
        }
        st.extended_pairs = self.horizons().len();
        st
    }

    /// Pairs whose horizon was extended beyond `base_t_max`, in canonical order.
    pub fn horizons(&self) -> Vec<PairHorizon> {
        let mut out: Vec<PairHorizon> = Vec::new();
        for r in self.results.iter().filter(|r| r.t_max > self.base_t_max) {
            let h = PairHorizon { heading0_deg: r.scenario.heading0_deg, desired_deg: r.scenario.desired_deg, t_max: r.t_max };
            if out.last() != Some(&h) {
                out.push(h);
            }
        }
        out
    }

    /// Problem A reduction: one record per scenario with a feasible point.
    pub fn problem_a(&self) -> Reduction {
        let mut reduction = Reduction { horizons: self.horizons(), ..Reduction::default() };
        for r in &self.results {
            let s = &r.scenario;
            match r.best() {
                Some(best) => reduction.records.push(DatasetRecord {
                    heading0_deg: s.heading0_deg,
                    desired_deg: s.desired_deg,
                    n_f: s.n_f,
                    n_ori_opt: best.n_ori,
                    effort_opt: best.effort,
                    n_feasible: r.n_feasible(),
                    clamped_low: s.bounds.clamped_low,
                }),
                None => reduction.infeasible.push(AuditRow::from_result(r)),
            }
        }
        reduction
    }

    /// Problem B reduction: one record per `(heading0, desired)` pair.
    /// Ties go to the smaller `N_f`, then the larger `N_ori`.
    pub fn problem_b(&self) -> Reduction {
        let mut reduction = Reduction { horizons: self.horizons(), ..Reduction::default() };
        let mut i = 0;
        while i < self.results.len() {
            let key = (self.results[i].scenario.heading0_deg, self.results[i].scenario.desired_deg);
            let mut j = i;
            while j < self.results.len() && same_pair(&self.results[i].scenario, &self.results[j].scenario) {
                j += 1;
            }
            let group = &self.results[i..j];
            let mut best: Option<(&ScenarioResult, &Evaluation)> = None;
            let mut n_feasible = 0;
            for r in group {
                n_feasible += r.n_feasible();
                if let Some(e) = r.best() {
                    let better = match best {
                        None => true,
                        Some((br, be)) => {
                            e.effort < be.effort
                                || (e.effort == be.effort
                                    && (r.scenario.n_f < br.scenario.n_f
                                        || (r.scenario.n_f == br.scenario.n_f && e.n_ori > be.n_ori)))
                        }
                    };
                    if better {
                        best = Some((r, e));
                    }
                }
            }
            match best {
                Some((r, e)) => reduction.records.push(DatasetRecord {
                    heading0_deg: key.0,
                    desired_deg: key.1,
                    n_f: r.scenario.n_f,
                    n_ori_opt: e.n_ori,
                    effort_opt: e.effort,
                    n_feasible,
                    clamped_low: r.scenario.bounds.clamped_low,
                }),
                None => reduction.infeasible.extend(group.iter().map(AuditRow::from_result)),
            }
            i = j;
        }
        reduction
    }

    pub fn reduce(&self, problem: Problem) -> Reduction {
        match problem {
            Problem::A => self.problem_a(),
            Problem::B => self.problem_b(),
        }
    }
}

/// Simulate the whole grid.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult, DatasetError> {
    let scenarios = enumerate_scenarios(cfg)?;
    Ok(evaluate_with_ladder(cfg, scenarios)?)
}

fn pair_scenarios(cfg: &SweepConfig, heading0_deg: f64, desired_deg: f64, extra_n_f: Option<f64>) -> Result<Vec<Scenario>, DatasetError> {
    cfg.grid.validate()?;
    let mut gains = cfg.grid.final_gains.clone();
    if let Some(n_f) = extra_n_f.filter(|g| !gains.contains(g)) {
        gains.push(n_f);
        gains.sort_by(f64::total_cmp);
    }
    let scenarios: Vec<_> = gains.iter().filter_map(|&n_f| scenario(cfg, heading0_deg, desired_deg, n_f)).collect();
    if scenarios.is_empty() {
        return Err(DatasetError::EmptyGrid("engagement is not a two-phase scenario"));
    }
    Ok(scenarios)
}

/// Optimal orientation gain for a fixed final gain.
///
/// The horizon is chosen as in [`run_sweep`]: the pair is simulated over the
/// grid's final gains (plus `n_f`), so the answer matches the full sweep.
/// Returns the audit row when no grid point is feasible.
pub fn optimize_n_ori(
    heading0_deg: f64,
    desired_deg: f64,
    n_f: f64,
    cfg: &SweepConfig,
) -> Result<Result<DatasetRecord, AuditRow>, DatasetError> {
    let s = scenario(cfg, heading0_deg, desired_deg, n_f).ok_or(DatasetError::EmptyGrid("engagement is not a two-phase scenario"))?;
    let mut result = evaluate_with_ladder(cfg, pair_scenarios(cfg, heading0_deg, desired_deg, Some(n_f))?)?;
    result.results.retain(|r| r.scenario.n_f == s.n_f);
    let mut red = result.problem_a();
    Ok(match red.records.pop() {
        Some(r) => Ok(r),
        None => Err(red.infeasible.remove(0)),
    })
}

/// Optimal `(N_f, N_ori)` pair over the grid's final gains.
pub fn optimize_pair(heading0_deg: f64, desired_deg: f64, cfg: &SweepConfig) -> Result<Result<DatasetRecord, Vec<AuditRow>>, DatasetError> {
    let result = evaluate_with_ladder(cfg, pair_scenarios(cfg, heading0_deg, desired_deg, None)?)?;
    let mut red = result.problem_b();
    Ok(match red.records.pop() {
        Some(r) => Ok(r),
        None => Err(red.infeasible),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Problem {
    /// `(heading0, desired, N_f) -> N_ori*`
    A,
    /// `(heading0, desired) -> (N_f*, N_ori*)`
    B,
}

impl Problem {
    pub fn header(self) -> [&'static str; 7] {
        match self {
            Problem::A => HEADER_A,
            Problem::B => HEADER_B,
        }
    }
}

impl std::str::FromStr for Problem {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "A" | "a" => Ok(Problem::A),
            "B" | "b" => Ok(Problem::B),
            _ => Err(format!("unknown problem {s:?} (expected A or B)")),
        }
    }
}

impl std::fmt::Display for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Problem::A => "A",
            Problem::B => "B",
        })
    }
}

pub const HEADER_A: [&str; 7] = ["alpha_p0_deg", "alpha_pf_des_deg", "N_f", "N_ori_opt", "J_opt", "n_feasible", "clamped_low"];
pub const HEADER_B: [&str; 7] = ["alpha_p0_deg", "alpha_pf_des_deg", "N_f_opt", "N_ori_opt", "J_opt", "n_feasible", "clamped_low"];
pub const HORIZON_HEADER: [&str; 3] = ["alpha_p0_deg", "alpha_pf_des_deg", "t_max_s"];
pub const AUDIT_HEADER: [&str; 10] =
    ["alpha_p0_deg", "alpha_pf_des_deg", "N_f", "n_min", "n_max", "n_grid", "n_timeout", "n_angle_miss", "n_no_switch", "clamped_low"];

/// One optimal-gain label. For problem B `n_f` is an output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub heading0_deg: f64,
    pub desired_deg: f64,
    pub n_f: f64,
    pub n_ori_opt: f64,
    pub effort_opt: f64,
    pub n_feasible: usize,
    pub clamped_low: bool,
}

/// A scenario with no feasible grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditRow {
    pub heading0_deg: f64,
    pub desired_deg: f64,
    pub n_f: f64,
    pub n_min: f64,
    pub n_max: f64,
    pub n_grid: usize,
    pub n_timeout: usize,
    pub n_angle_miss: usize,
    pub n_no_switch: usize,
    pub clamped_low: bool,
}

impl AuditRow {
    fn from_result(r: &ScenarioResult) -> Self {
        let count = |v: Verdict| r.evaluations.iter().filter(|e| e.verdict == v).count();
        Self {
            heading0_deg: r.scenario.heading0_deg,
            desired_deg: r.scenario.desired_deg,
            n_f: r.scenario.n_f,
            n_min: r.scenario.bounds.n_min,
            n_max: r.scenario.bounds.n_max,
            n_grid: r.evaluations.len(),
            n_timeout: count(Verdict::Timeout),
            n_angle_miss: count(Verdict::AngleMiss),
            n_no_switch: count(Verdict::NoSwitch),
            clamped_low: r.scenario.bounds.clamped_low,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Reduction {
    pub records: Vec<DatasetRecord>,
    pub infeasible: Vec<AuditRow>,
    pub horizons: Vec<PairHorizon>,
}

/// Largest `|N_ori*|` (and `|N_f*|`) jump between records whose
/// `(heading0, desired)` differ by one 10 degree step along one axis and share `N_f`
/// (problem A) or nothing else (problem B).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Smoothness {
    pub max_n_ori_jump: f64,
    pub max_n_f_jump: f64,
    pub neighbour_pairs: usize,
}

pub fn label_smoothness(records: &[DatasetRecord], problem: Problem, step_deg: f64) -> Smoothness {
    use std::collections::HashMap;
    let key = |h: f64, d: f64, nf: f64| -> (i64, i64, i64) {
        let nf_key = match problem {
            Problem::A => (nf * 1000.0).round() as i64,
            Problem::B => 0,
        };
        ((h * 1000.0).round() as i64, (d * 1000.0).round() as i64, nf_key)
    };
    let index: HashMap<_, _> = records.iter().map(|r| (key(r.heading0_deg, r.desired_deg, r.n_f), r)).collect();
    let mut out = Smoothness::default();
    for r in records {
        for (dh, dd) in [(step_deg, 0.0), (0.0, step_deg)] {
            if let Some(o) = index.get(&key(r.heading0_deg + dh, r.desired_deg + dd, r.n_f)) {
                out.neighbour_pairs += 1;
                out.max_n_ori_jump = out.max_n_ori_jump.max((o.n_ori_opt - r.n_ori_opt).abs());
                out.max_n_f_jump = out.max_n_f_jump.max((o.n_f - r.n_f).abs());
            }
        }
    }
    out
}

fn fmt_gain(g: f64) -> String {
    format!("{g:.2}")
}

fn fmt_angle(a: f64) -> String {
    format!("{a:.1}")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io { path: path.to_path_buf(), source }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> DatasetError + '_ {
    move |source| DatasetError::Csv { path: path.to_path_buf(), source }
}

/// Write dataset records in the problem's CSV schema.
pub fn write_dataset<W: Write>(out: W, problem: Problem, records: &[DatasetRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(problem.header())?;
    for r in records {
        w.write_record([
            fmt_angle(r.heading0_deg),
            fmt_angle(r.desired_deg),
            fmt_gain(r.n_f),
            fmt_gain(r.n_ori_opt),
            format!("{}", r.effort_opt),
            r.n_feasible.to_string(),
            r.clamped_low.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_audit<W: Write>(out: W, rows: &[AuditRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(AUDIT_HEADER)?;
    for r in rows {
        w.write_record([
            fmt_angle(r.heading0_deg),
            fmt_angle(r.desired_deg),
            fmt_gain(r.n_f),
            format!("{}", r.n_min),
            format!("{}", r.n_max),
            r.n_grid.to_string(),
            r.n_timeout.to_string(),
            r.n_angle_miss.to_string(),
            r.n_no_switch.to_string(),
            r.clamped_low.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_horizons<W: Write>(out: W, rows: &[PairHorizon]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HORIZON_HEADER)?;
    for r in rows {
        w.write_record([fmt_angle(r.heading0_deg), fmt_angle(r.desired_deg), format!("{}", r.t_max)])?;
    }
    w.flush()?;
    Ok(())
}

fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_stem().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(suffix);
    path.with_file_name(name)
}

/// Path of the infeasible-scenario sidecar for a dataset file.
pub fn audit_path(path: &Path) -> PathBuf {
    sidecar(path, ".audit.csv")
}

/// Path of the extended-horizon sidecar for a dataset file.
pub fn horizons_path(path: &Path) -> PathBuf {
    sidecar(path, ".horizons.csv")
}

/// Save a reduction: the dataset at `path` plus the audit and horizon sidecars beside it.
pub fn save_reduction(path: &Path, problem: Problem, reduction: &Reduction) -> Result<(), DatasetError> {
    let f = File::create(path).map_err(io_err(path))?;
    write_dataset(f, problem, &reduction.records).map_err(csv_err(path))?;
    let audit = audit_path(path);
    let f = File::create(&audit).map_err(io_err(&audit))?;
    write_audit(f, &reduction.infeasible).map_err(csv_err(&audit))?;
    let horizons = horizons_path(path);
    let f = File::create(&horizons).map_err(io_err(&horizons))?;
    write_horizons(f, &reduction.horizons).map_err(csv_err(&horizons))?;
    Ok(())
}

/// Sweep the grid and write the dataset for `problem`. Returns the record count.
pub fn generate_dataset(problem: Problem, cfg: &SweepConfig, path: &Path) -> Result<usize, DatasetError> {
    let reduction = run_sweep(cfg)?.reduce(problem);
    save_reduction(path, problem, &reduction)?;
    Ok(reduction.records.len())
}

#[derive(Debug, Deserialize)]
struct Row(f64, f64, f64, f64, f64, usize, bool);

/// Read a dataset written by [`write_dataset`]; the problem is taken from the header.
pub fn read_dataset_from<R: std::io::Read>(input: R, path: &Path) -> Result<(Problem, Vec<DatasetRecord>), DatasetError> {
    let mut rdr = csv::Reader::from_reader(input);
    let header: Vec<String> = rdr.headers().map_err(csv_err(path))?.iter().map(str::to_string).collect();
    let problem = if header == HEADER_A {
        Problem::A
    } else if header == HEADER_B {
        Problem::B
    } else {
        return Err(DatasetError::Schema {
            path: path.to_path_buf(),
            found: header,
            expected: HEADER_A.iter().map(|s| s.to_string()).collect(),
        });
    };
    let mut records = Vec::new();
    for row in rdr.deserialize() {
        let Row(h, d, nf, nori, j, nfeas, clamped) = row.map_err(csv_err(path))?;
        records.push(DatasetRecord {
            heading0_deg: h,
            desired_deg: d,
            n_f: nf,
            n_ori_opt: nori,
            effort_opt: j,
            n_feasible: nfeas,
            clamped_low: clamped,
        });
    }
    Ok((problem, records))
}

pub fn read_dataset(path: &Path) -> Result<(Problem, Vec<DatasetRecord>), DatasetError> {
    let f = File::open(path).map_err(io_err(path))?;
    read_dataset_from(f, path)
}
