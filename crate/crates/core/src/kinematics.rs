//! Planar pursuer vs. stationary-target engagement kinematics.
//!
//! The state is the polar description of the engagement seen from the
//! target: line-of-sight range `range`, line-of-sight angle `los` and the
//! pursuer heading `heading`. The pursuer flies at constant speed and the
//! only control is a lateral acceleration normal to its velocity.
//!
//! Integration uses a fixed-step classical Runge-Kutta scheme. The command
//! is re-evaluated at every sub-step, so any quantity that is a linear
//! combination of the state and conserved by the continuous dynamics (the
//! PPN invariant `heading - N * los`) is conserved by the discrete map up to
//! round-off.

use serde::{Deserialize, Serialize};

use crate::error::KinematicsError;

/// Instantaneous engagement state. Angles are radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngagementState {
    pub t: f64,
    pub range: f64,
    pub los: f64,
    pub heading: f64,
}

impl EngagementState {
    pub fn new(range: f64, los: f64, heading: f64) -> Self {
        Self { t: 0.0, range, los, heading }
    }

    /// Heading minus line-of-sight angle.
    pub fn lead_angle(&self) -> f64 {
        self.heading - self.los
    }

    fn is_finite(&self) -> bool {
        self.t.is_finite() && self.range.is_finite() && self.los.is_finite() && self.heading.is_finite()
    }
}

/// Pursuer speed and initial geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleParams {
    /// Pursuer speed (m/s).
    pub speed: f64,
    /// Initial range (m).
    pub range0: f64,
    /// Initial line-of-sight angle (rad).
    pub los0: f64,
    /// Initial heading (rad).
    pub heading0: f64,
}

impl VehicleParams {
    pub fn new(speed: f64, range0: f64, los0: f64, heading0: f64) -> Result<Self, KinematicsError> {
        let v = Self { speed, range0, los0, heading0 };
        v.validate()?;
        Ok(v)
    }

    pub fn validate(&self) -> Result<(), KinematicsError> {
        if !(self.speed.is_finite() && self.range0.is_finite() && self.los0.is_finite() && self.heading0.is_finite()) {
            return Err(KinematicsError::InvalidState("non-finite vehicle parameter".into()));
        }
        if self.speed <= 0.0 {
            return Err(KinematicsError::InvalidState(format!("speed must be positive, got {}", self.speed)));
        }
        if self.range0 <= 0.0 {
            return Err(KinematicsError::InvalidState(format!("initial range must be positive, got {}", self.range0)));
        }
        Ok(())
    }

    pub fn initial_state(&self) -> EngagementState {
        EngagementState::new(self.range0, self.los0, self.heading0)
    }
}

/// Fixed-step integrator settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    /// Step size (s).
    pub dt: f64,
    /// Range at which the engagement counts as captured (m).
    pub capture_radius: f64,
    /// Maximum engagement time (s).
    pub t_max: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { dt: 0.01, capture_radius: 1.0, t_max: 200.0 }
    }
}

impl IntegratorConfig {
    /// Default step and capture radius with `t_max = 4 * R0 / V`.
    pub fn for_vehicle(vehicle: &VehicleParams) -> Self {
        Self { t_max: 4.0 * vehicle.range0 / vehicle.speed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), KinematicsError> {
        let ok = self.dt.is_finite()
            && self.dt > 0.0
            && self.capture_radius.is_finite()
            && self.capture_radius > 0.0
            && self.t_max.is_finite()
            && self.t_max > 0.0;
        if ok {
            Ok(())
        } else {
            Err(KinematicsError::InvalidConfig(format!("{self:?}")))
        }
    }
}

/// Time derivatives of (range, los, heading).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivatives {
    pub range: f64,
    pub los: f64,
    pub heading: f64,
}

/// Right-hand side of the engagement equations for a given lateral
/// acceleration `accel` (m/s^2) and pursuer speed (m/s).
pub fn state_derivatives(s: &EngagementState, accel: f64, speed: f64) -> Result<Derivatives, KinematicsError> {
    if !s.is_finite() || !accel.is_finite() || !speed.is_finite() {
        return Err(KinematicsError::InvalidState(format!("non-finite input: {s:?}, a = {accel}")));
    }
    if s.range <= 0.0 {
        return Err(KinematicsError::SingularRange(s.range));
    }
    let (sin_lead, cos_lead) = s.lead_angle().sin_cos();
    Ok(Derivatives {
        range: -speed * cos_lead,
        los: -speed / s.range * sin_lead,
        heading: accel / speed,
    })
}

/// Line-of-sight rate of a state (rad/s).
pub fn los_rate(s: &EngagementState, speed: f64) -> f64 {
    -speed / s.range * s.lead_angle().sin()
}

/// Anything that produces a lateral acceleration command from the current state.
///
/// `at_step` is called exactly once at every step boundary before the step is
/// taken; stateful schedules latch their phase there. `command` is evaluated
/// at every Runge-Kutta sub-step and must not change the schedule.
pub trait Guidance {
    fn at_step(&mut self, _state: &EngagementState, _vehicle: &VehicleParams) {}

    fn command(&self, state: &EngagementState, vehicle: &VehicleParams) -> f64;
}

/// Zero lateral acceleration.
#[derive(Debug, Clone, Copy, Default)]
pub struct Coast;

impl Guidance for Coast {
    fn command(&self, _state: &EngagementState, _vehicle: &VehicleParams) -> f64 {
        0.0
    }
}

impl<G: Guidance + ?Sized> Guidance for &mut G {
    fn at_step(&mut self, state: &EngagementState, vehicle: &VehicleParams) {
        (**self).at_step(state, vehicle)
    }

    fn command(&self, state: &EngagementState, vehicle: &VehicleParams) -> f64 {
        (**self).command(state, vehicle)
    }
}

fn advance(s: &EngagementState, d: &Derivatives, h: f64) -> EngagementState {
    EngagementState {
        t: s.t + h,
        range: s.range + h * d.range,
        los: s.los + h * d.los,
        heading: s.heading + h * d.heading,
    }
}

fn eval<G: Guidance + ?Sized>(s: &EngagementState, guidance: &G, v: &VehicleParams) -> Result<Derivatives, KinematicsError> {
    let a = guidance.command(s, v);
    state_derivatives(s, a, v.speed)
}

/// One classical fourth-order Runge-Kutta step of length `dt`.
///
/// Fails with [`KinematicsError::SingularRange`] when any sub-step state has
/// non-positive range; the caller is expected to terminate at capture.
pub fn rk4_step<G: Guidance + ?Sized>(
    s: &EngagementState,
    guidance: &G,
    v: &VehicleParams,
    dt: f64,
) -> Result<EngagementState, KinematicsError> {
    let k1 = eval(s, guidance, v)?;
    let k2 = eval(&advance(s, &k1, 0.5 * dt), guidance, v)?;
    let k3 = eval(&advance(s, &k2, 0.5 * dt), guidance, v)?;
    let k4 = eval(&advance(s, &k3, dt), guidance, v)?;
    let w = dt / 6.0;
    let next = EngagementState {
        t: s.t + dt,
        range: s.range + w * (k1.range + 2.0 * k2.range + 2.0 * k3.range + k4.range),
        los: s.los + w * (k1.los + 2.0 * k2.los + 2.0 * k3.los + k4.los),
        heading: s.heading + w * (k1.heading + 2.0 * k2.heading + 2.0 * k3.heading + k4.heading),
    };
    if next.range <= 0.0 {
        return Err(KinematicsError::SingularRange(next.range));
    }
    if !next.is_finite() {
        return Err(KinematicsError::InvalidState(format!("non-finite state after step: {next:?}")));
    }
    Ok(next)
}

/// One logged trajectory point: state plus the command applied from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub state: EngagementState,
    pub accel: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    Captured,
    TimedOut,
}

/// Result of [`integrate`]: how the run ended and the last sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunEnd {
    pub termination: Termination,
    pub last: Sample,
    pub steps: usize,
}

fn lerp(a: &EngagementState, b: &EngagementState, frac: f64) -> EngagementState {
    EngagementState {
        t: a.t + frac * (b.t - a.t),
        range: a.range + frac * (b.range - a.range),
        los: a.los + frac * (b.los - a.los),
        heading: a.heading + frac * (b.heading - a.heading),
    }
}

/// Integrate from `s0` until capture or timeout, handing every sample
/// (including the initial and terminal ones) to `on_sample`.
///
/// The step that crosses the capture radius is cut short by linear
/// interpolation in time so the terminal sample sits at `range ≈ capture_radius`.
/// If the full step is rejected because a sub-step reaches zero range, the
/// cut is made along the derivative at the step start.
pub fn integrate<G, F>(
    s0: EngagementState,
    mut guidance: G,
    v: &VehicleParams,
    cfg: &IntegratorConfig,
    mut on_sample: F,
) -> Result<RunEnd, KinematicsError>
where
    G: Guidance,
    F: FnMut(&Sample),
{
    cfg.validate()?;
    v.validate()?;
    if !s0.is_finite() {
        return Err(KinematicsError::InvalidState(format!("non-finite initial state: {s0:?}")));
    }
    if s0.range <= cfg.capture_radius {
        return Err(KinematicsError::InvalidState(format!(
            "initial range {} inside capture radius {}",
            s0.range, cfg.capture_radius
        )));
    }

    let t0 = s0.t;
    let max_steps = (cfg.t_max / cfg.dt).ceil() as usize;
    let mut state = s0;
    let mut steps = 0usize;
    loop {
        guidance.at_step(&state, v);
        let accel = guidance.command(&state, v);
        if !accel.is_finite() {
            return Err(KinematicsError::InvalidState(format!("non-finite command at {state:?}")));
        }
        let sample = Sample { state, accel };
        on_sample(&sample);

        if steps >= max_steps {
            return Ok(RunEnd { termination: Termination::TimedOut, last: sample, steps });
        }

        let next = match rk4_step(&state, &guidance, v, cfg.dt) {
            Ok(mut next) => {
                next.t = t0 + (steps + 1) as f64 * cfg.dt;
                if next.range > cfg.capture_radius {
                    Some(next)
                } else {
                    let frac = (state.range - cfg.capture_radius) / (state.range - next.range);
                    let end = lerp(&state, &next, frac.clamp(0.0, 1.0));
                    return Ok(finish(end, &mut guidance, v, steps + 1, &mut on_sample));
                }
            }
            Err(KinematicsError::SingularRange(_)) => None,
            Err(e) => return Err(e),
        };
        match next {
            Some(next) => state = next,
            None => {
                let d = eval(&state, &guidance, v)?;
                if d.range >= 0.0 {
                    return Err(KinematicsError::InvalidState(format!("step rejected while opening range at {state:?}")));
                }
                let h = ((state.range - cfg.capture_radius) / -d.range).clamp(0.0, cfg.dt);
                let end = advance(&state, &d, h);
                return Ok(finish(end, &mut guidance, v, steps + 1, &mut on_sample));
            }
        }
        steps += 1;
    }
}

fn finish<G: Guidance, F: FnMut(&Sample)>(
    end: EngagementState,
    guidance: &mut G,
    v: &VehicleParams,
    steps: usize,
    on_sample: &mut F,
) -> RunEnd {
    // Keep the command of the phase in force; the terminal sample only closes
    // the last quadrature interval.
    let accel = guidance.command(&end, v);
    let accel = if accel.is_finite() { accel } else { 0.0 };
    let last = Sample { state: end, accel };
    on_sample(&last);
    RunEnd { termination: Termination::Captured, last, steps }
}

/// Full trajectory log of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub termination: Termination,
}

/// [`integrate`] with every sample retained.
pub fn run_until_capture<G: Guidance>(
    s0: EngagementState,
    guidance: G,
    v: &VehicleParams,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, KinematicsError> {
    let mut samples = Vec::new();
    let end = integrate(s0, guidance, v, cfg, |s| samples.push(*s))?;
    Ok(Trajectory { samples, termination: end.termination })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    struct Ppn(f64);

    impl Guidance for Ppn {
        fn command(&self, s: &EngagementState, v: &VehicleParams) -> f64 {
            self.0 * v.speed * los_rate(s, v.speed)
        }
    }

    fn vehicle(heading0: f64) -> VehicleParams {
        VehicleParams::new(50.0, 2500.0, 0.0, heading0).unwrap()
    }

    #[test]
    fn derivatives_collision_course() {
        let s = EngagementState::new(2500.0, 0.0, 0.0);
        let d = state_derivatives(&s, 0.0, 50.0).unwrap();
        assert_eq!((d.range, d.los, d.heading), (-50.0, 0.0, 0.0));
    }

    #[test]
    fn derivatives_beam() {
        let s = EngagementState::new(2500.0, 0.0, FRAC_PI_2);
        let d = state_derivatives(&s, 0.0, 50.0).unwrap();
        assert!(d.range.abs() < 1e-12);
        assert!((d.los + 0.02).abs() < 1e-15);
        assert_eq!(d.heading, 0.0);
    }

    #[test]
    fn derivatives_substitution() {
        let s = EngagementState::new(1000.0, 0.1, 0.6);
        let d = state_derivatives(&s, 5.0, 50.0).unwrap();
        assert!((d.range + 50.0 * 0.5f64.cos()).abs() < 1e-12);
        assert!((d.los + 0.05 * 0.5f64.sin()).abs() < 1e-15);
        assert!((d.heading - 0.1).abs() < 1e-15);
    }

    #[test]
    fn derivatives_errors() {
        let s = EngagementState::new(0.0, 0.0, 0.0);
        assert!(matches!(state_derivatives(&s, 0.0, 50.0), Err(KinematicsError::SingularRange(_))));
        let s = EngagementState::new(10.0, f64::NAN, 0.0);
        assert!(matches!(state_derivatives(&s, 0.0, 50.0), Err(KinematicsError::InvalidState(_))));
        let s = EngagementState::new(10.0, 0.0, 0.0);
        assert!(matches!(state_derivatives(&s, f64::INFINITY, 50.0), Err(KinematicsError::InvalidState(_))));
    }

    #[test]
    fn rk4_collision_step_is_exact() {
        let v = vehicle(0.0);
        let s = rk4_step(&v.initial_state(), &Coast, &v, 0.01).unwrap();
        assert!((s.range - 2499.5).abs() < 1e-12);
        assert_eq!(s.los, 0.0);
        assert_eq!(s.heading, 0.0);
        assert!((s.t - 0.01).abs() < 1e-15);
    }

    #[test]
    fn rk4_preserves_ppn_invariant() {
        let v = vehicle(0.4);
        let mut s = v.initial_state();
        for _ in 0..3000 {
            s = rk4_step(&s, &Ppn(3.0), &v, 0.01).unwrap();
            assert!((s.heading - 0.4 - 3.0 * s.los).abs() < 1e-6);
        }
    }

    #[test]
    fn rk4_rejects_step_through_origin() {
        let v = vehicle(0.0);
        let s = EngagementState::new(0.2, 0.0, 0.0);
        assert!(matches!(rk4_step(&s, &Coast, &v, 0.01), Err(KinematicsError::SingularRange(_))));
    }

    #[test]
    fn straight_line_run_is_exact() {
        let v = vehicle(0.0);
        let cfg = IntegratorConfig::default();
        let traj = run_until_capture(v.initial_state(), Coast, &v, &cfg).unwrap();
        for s in traj.samples.iter().take(1001) {
            let exact = 2500.0 - 50.0 * s.state.t;
            assert!((s.state.range - exact).abs() <= 1e-9 * exact);
            assert_eq!(s.state.los, 0.0);
        }
    }

    #[test]
    fn collision_course_capture_time() {
        let v = vehicle(0.0);
        let traj = run_until_capture(v.initial_state(), Coast, &v, &IntegratorConfig::default()).unwrap();
        assert_eq!(traj.termination, Termination::Captured);
        let last = traj.samples.last().unwrap().state;
        assert!((last.t - 49.98).abs() < 1e-9);
        assert!((last.range - 1.0).abs() < 1e-9);
    }

    #[test]
    fn beam_coast_times_out() {
        let v = vehicle(FRAC_PI_2);
        let cfg = IntegratorConfig::for_vehicle(&v);
        let traj = run_until_capture(v.initial_state(), Coast, &v, &cfg).unwrap();
        assert_eq!(traj.termination, Termination::TimedOut);
        let last = traj.samples.last().unwrap().state;
        assert!((last.t - 200.0).abs() < 1e-9);
    }

    #[test]
    fn ppn_capture_heading_matches_closed_form() {
        let v = vehicle(50f64.to_radians());
        let cfg = IntegratorConfig::for_vehicle(&v);
        let traj = run_until_capture(v.initial_state(), Ppn(3.0), &v, &cfg).unwrap();
        assert_eq!(traj.termination, Termination::Captured);
        let h = traj.samples.last().unwrap().state.heading.to_degrees();
        assert!((h + 25.0).abs() < 0.5, "terminal heading {h}");
    }

    #[test]
    fn ppn_captures_for_wide_initial_leads() {
        // Large leads with N = 2 need far longer than 4 R0 / V to turn around.
        for n in [2.0, 3.0, 5.0] {
            for lead in [10.0f64, 90.0, 175.0] {
                let v = vehicle(lead.to_radians());
                let cfg = IntegratorConfig { t_max: 40.0 * v.range0 / v.speed, ..IntegratorConfig::default() };
                let traj = run_until_capture(v.initial_state(), Ppn(n), &v, &cfg).unwrap();
                assert_eq!(traj.termination, Termination::Captured, "N={n} lead={lead}");
            }
        }
    }

    #[test]
    fn invalid_config_rejected() {
        let v = vehicle(0.0);
        let cfg = IntegratorConfig { dt: 0.0, ..IntegratorConfig::default() };
        assert!(matches!(
            run_until_capture(v.initial_state(), Coast, &v, &cfg),
            Err(KinematicsError::InvalidConfig(_))
        ));
        assert!(VehicleParams::new(-1.0, 2500.0, 0.0, 0.0).is_err());
    }
}
