//! Complete guided engagements: cost, terminal metrics and feasibility verdict.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::SimulationError;
use crate::guidance::{GainSchedule, SwitchRecord};
use crate::kinematics::{integrate, IntegratorConfig, Sample, Termination, VehicleParams};

/// Default terminal-angle tolerance for a feasible verdict (rad).
pub const ANGLE_TOLERANCE: f64 = 0.5 * PI / 180.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Feasible,
    Timeout,
    AngleMiss,
    NoSwitch,
}

impl Verdict {
    pub fn is_feasible(self) -> bool {
        self == Verdict::Feasible
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Feasible => "feasible",
            Verdict::Timeout => "timeout",
            Verdict::AngleMiss => "angle-miss",
            Verdict::NoSwitch => "no-switch",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which samples to keep in [`SimulationOutcome::trajectory`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Logging {
    /// Every integration step.
    Full,
    /// Every n-th step plus the terminal sample.
    Every(usize),
    /// Terminal sample only.
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub logging: Logging,
    pub angle_tolerance: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self { logging: Logging::Full, angle_tolerance: ANGLE_TOLERANCE }
    }
}

impl SimOptions {
    pub fn quiet() -> Self {
        Self { logging: Logging::Off, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutcome {
    /// Integrated squared lateral acceleration ((m/s^2)^2 s).
    pub effort: f64,
    pub t_final: f64,
    pub terminal_heading: f64,
    pub switch: Option<SwitchRecord>,
    pub trajectory: Vec<Sample>,
    pub termination: Termination,
    pub verdict: Verdict,
}

impl SimulationOutcome {
    /// Signed terminal heading error wrapped to (-pi, pi].
    pub fn angle_error(&self, desired: f64) -> f64 {
        wrap(self.terminal_heading - desired)
    }
}

fn wrap(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

/// Run one engagement with every step logged.
pub fn simulate(v: &VehicleParams, gains: &GainSchedule, cfg: &IntegratorConfig) -> Result<SimulationOutcome, SimulationError> {
    simulate_with(v, gains, cfg, &SimOptions::default())
}

/// Run one engagement. Runtime failures of the engagement itself (timeout,
/// missed angle, missing switch) are verdicts, not errors.
pub fn simulate_with(
    v: &VehicleParams,
    gains: &GainSchedule,
    cfg: &IntegratorConfig,
    opts: &SimOptions,
) -> Result<SimulationOutcome, SimulationError> {
    let mut rule = gains.rule(v.los0, v.heading0)?;
    let mut trajectory = Vec::new();
    let mut effort = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    let mut index = 0usize;
    let end = integrate(v.initial_state(), &mut rule, v, cfg, |s| {
        let a2 = s.accel * s.accel;
        if let Some((t, p)) = prev {
            effort += 0.5 * (p + a2) * (s.state.t - t);
        }
        prev = Some((s.state.t, a2));
        match opts.logging {
            Logging::Full => trajectory.push(*s),
            Logging::Every(n) if index.is_multiple_of(n.max(1)) => trajectory.push(*s),
            _ => {}
        }
        index += 1;
    })?;
    if trajectory.last() != Some(&end.last) {
        trajectory.push(end.last);
    }

    let terminal_heading = end.last.state.heading;
    let switch = rule.switch();
    let missing_switch = rule.is_two_phase() && switch.is_none();
    let verdict = match end.termination {
        Termination::TimedOut if missing_switch => Verdict::NoSwitch,
        Termination::TimedOut => Verdict::Timeout,
        Termination::Captured if missing_switch => Verdict::NoSwitch,
        Termination::Captured if wrap(terminal_heading - gains.desired).abs() > opts.angle_tolerance => Verdict::AngleMiss,
        Termination::Captured => Verdict::Feasible,
    };
    Ok(SimulationOutcome {
        effort,
        t_final: end.last.state.t,
        terminal_heading,
        switch,
        trajectory,
        termination: end.termination,
        verdict,
    })
}

/// Trapezoidal integral of `a^2` over time for `(t, a)` samples.
pub fn effort_integral(samples: &[(f64, f64)]) -> Result<f64, SimulationError> {
    if samples.len() < 2 {
        return Err(SimulationError::BadSamples);
    }
    let mut total = 0.0;
    for w in samples.windows(2) {
        let ((t0, a0), (t1, a1)) = (w[0], w[1]);
        if !(t1 >= t0) {
            return Err(SimulationError::BadSamples);
        }
        total += 0.5 * (a0 * a0 + a1 * a1) * (t1 - t0);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::guidance::GainSchedule;

    fn rad(d: f64) -> f64 {
        d.to_radians()
    }

    fn reference_vehicle() -> VehicleParams {
        VehicleParams::new(50.0, 2500.0, 0.0, rad(25.0)).unwrap()
    }

    #[test]
    fn effort_constant_and_zero() {
        let s: Vec<_> = (0..=100).map(|i| (i as f64 * 0.1, 2.0)).collect();
        assert!((effort_integral(&s).unwrap() - 40.0).abs() < 1e-9);
        let s: Vec<_> = (0..=100).map(|i| (i as f64 * 0.1, 0.0)).collect();
        assert_eq!(effort_integral(&s).unwrap(), 0.0);
    }

    #[test]
    fn effort_linear_ramp() {
        let s: Vec<_> = (0..=100).map(|i| (i as f64 * 0.01, i as f64 * 0.01)).collect();
        assert!((effort_integral(&s).unwrap() - 1.0 / 3.0).abs() < 1e-4);
    }

    #[test]
    fn effort_rejects_bad_samples() {
        assert!(effort_integral(&[(0.0, 1.0)]).is_err());
        assert!(effort_integral(&[(1.0, 1.0), (0.5, 1.0)]).is_err());
    }

    #[test]
    fn collision_course_costs_nothing() {
        let v = VehicleParams::new(50.0, 2500.0, 0.0, 0.0).unwrap();
        let out = simulate(&v, &GainSchedule::single(3.0, 0.0), &IntegratorConfig::default()).unwrap();
        assert_eq!(out.effort, 0.0);
        assert!((out.t_final - 49.98).abs() < 1e-9);
        assert_eq!(out.verdict, Verdict::Feasible);
    }

    #[test]
    fn reference_optimum_is_feasible() {
        let v = reference_vehicle();
        let out = simulate(&v, &GainSchedule::shaped(-0.2, 2.0, rad(-90.0)), &IntegratorConfig::default()).unwrap();
        assert_eq!(out.verdict, Verdict::Feasible, "{:?}", out.terminal_heading.to_degrees());
        assert!(out.switch.is_some());
        assert!((out.terminal_heading.to_degrees() + 90.0).abs() < 0.5);
        assert!(out.effort > 0.0);
    }

    #[test]
    fn running_effort_matches_quadrature_of_log() {
        let v = reference_vehicle();
        let out = simulate(&v, &GainSchedule::shaped(0.3, 2.5, rad(-90.0)), &IntegratorConfig::default()).unwrap();
        let pairs: Vec<_> = out.trajectory.iter().map(|s| (s.state.t, s.accel)).collect();
        let j = effort_integral(&pairs).unwrap();
        assert!((j - out.effort).abs() <= 1e-9 * j);
    }

    #[test]
    fn decimated_logging_keeps_effort() {
        let v = reference_vehicle();
        let g = GainSchedule::shaped(0.3, 2.5, rad(-90.0));
        let cfg = IntegratorConfig::default();
        let full = simulate(&v, &g, &cfg).unwrap();
        let dec = simulate_with(&v, &g, &cfg, &SimOptions { logging: Logging::Every(10), ..SimOptions::default() }).unwrap();
        let off = simulate_with(&v, &g, &cfg, &SimOptions::quiet()).unwrap();
        assert_eq!(full.effort, dec.effort);
        assert_eq!(full.effort, off.effort);
        assert_eq!(off.trajectory.len(), 1);
        assert_eq!(dec.trajectory.last(), full.trajectory.last());
        assert!(dec.trajectory.len() < full.trajectory.len() / 9);
    }

    #[test]
    fn short_horizon_flags_infeasible() {
        let v = reference_vehicle();
        let cfg = IntegratorConfig { t_max: 20.0, ..IntegratorConfig::default() };
        let out = simulate(&v, &GainSchedule::shaped(-1.9, 2.0, rad(-90.0)), &cfg).unwrap();
        assert!(matches!(out.verdict, Verdict::Timeout | Verdict::NoSwitch));
        assert!(out.effort > 0.0);
    }

    #[test]
    fn out_of_bounds_gain_is_an_error() {
        let v = reference_vehicle();
        assert!(simulate(&v, &GainSchedule::shaped(1.6, 2.0, rad(-90.0)), &IntegratorConfig::default()).is_err());
    }

    #[test]
    fn wrap_into_half_open_interval() {
        assert!((wrap(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap(-0.1) + 0.1).abs() < 1e-15);
    }
}
