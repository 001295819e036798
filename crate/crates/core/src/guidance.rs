//! Pure proportional navigation and the two-phase gain schedules.
//!
//! In the (los, heading) angular plane a constant-gain PPN trajectory is a
//! straight line of slope N, and interception happens on the collision line
//! `heading = los`. The two-phase scheme flies an orientation gain until the
//! line of slope `N_f` through the desired terminal point is reached, then
//! latches the final gain.
//!
//! Only engagements with `heading0 > los0` are handled; mirrored cases must be
//! reflected by the caller.

use std::f64::consts::{FRAC_2_PI, PI};

use serde::{Deserialize, Serialize};

use crate::error::GuidanceError;
use crate::kinematics::{los_rate, EngagementState, Guidance, VehicleParams};

pub const FINAL_GAIN_MIN: f64 = 2.0;
pub const FINAL_GAIN_MAX: f64 = 5.0;
/// Floor applied to the geometric lower orientation-gain bound.
pub const ORIENTATION_GAIN_FLOOR: f64 = -2.0;

const BOUND_SLACK: f64 = 1e-9;

/// Lateral acceleration `N * V * los_rate`.
pub fn ppn_command(gain: f64, speed: f64, los_rate: f64) -> f64 {
    gain * speed * los_rate
}

/// Terminal heading reached by single-phase PPN with gain `gain` from
/// `(los0, heading0)`.
pub fn predict_terminal_angle(gain: f64, los0: f64, heading0: f64) -> Result<f64, GuidanceError> {
    if gain == 1.0 {
        return Err(GuidanceError::SingularGain);
    }
    Ok((gain * los0 - heading0) / (gain - 1.0))
}

/// Half-open interval `[lo, hi)` of angles in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleBand {
    pub lo: f64,
    pub hi: f64,
}

impl AngleBand {
    pub fn contains(&self, angle: f64) -> bool {
        angle >= self.lo && angle < self.hi
    }
}

/// Terminal angles reachable by single-phase PPN with N >= 2, for `heading0 > los0`.
pub fn achievable_band(los0: f64, heading0: f64) -> AngleBand {
    AngleBand { lo: 2.0 * los0 - heading0, hi: los0 }
}

/// True when the desired terminal angle lies beyond the single-phase band.
pub fn requires_two_phase(los0: f64, heading0: f64, desired: f64) -> bool {
    desired < 2.0 * los0 - heading0
}

/// Gain that, flown from `(los, heading)`, ends exactly at `desired`.
pub fn required_gain(los: f64, heading: f64, desired: f64) -> Result<f64, GuidanceError> {
    if !(los.is_finite() && heading.is_finite() && desired.is_finite()) {
        return Err(GuidanceError::NonFinite);
    }
    if los == desired {
        return Err(GuidanceError::SingularGeometry);
    }
    Ok((desired - heading) / (desired - los))
}

// Unchecked form used inside the integration loop.
fn n_req(los: f64, heading: f64, desired: f64) -> f64 {
    (desired - heading) / (desired - los)
}

fn check_two_phase(los0: f64, heading0: f64, desired: f64) -> Result<(), GuidanceError> {
    if !(los0.is_finite() && heading0.is_finite() && desired.is_finite()) {
        return Err(GuidanceError::NonFinite);
    }
    if heading0 <= los0 {
        return Err(GuidanceError::UnsupportedSide);
    }
    if !requires_two_phase(los0, heading0, desired) {
        return Err(GuidanceError::SinglePhaseSuffices {
            desired_deg: desired.to_degrees(),
            band_edge_deg: (2.0 * los0 - heading0).to_degrees(),
        });
    }
    Ok(())
}

fn check_final_gain(n_f: f64) -> Result<(), GuidanceError> {
    if !(FINAL_GAIN_MIN..=FINAL_GAIN_MAX).contains(&n_f) {
        return Err(GuidanceError::FinalGainOutOfRange(n_f));
    }
    Ok(())
}

/// Admissible orientation-gain interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainBounds {
    pub n_min: f64,
    pub n_max: f64,
    /// The lower bound is the floor of -2 rather than the geometric bound.
    pub clamped_low: bool,
}

impl GainBounds {
    pub fn contains(&self, gain: f64) -> bool {
        gain >= self.n_min - BOUND_SLACK && gain <= self.n_max + BOUND_SLACK
    }
}

/// Orientation-gain bounds for a final gain `n_f`.
///
/// The upper bound is the slope from the initial point to the desired
/// terminal point on the collision line. The geometric lower bound is the
/// slope to the point where the `N_f` line meets the inverse collision line
/// `heading = los + pi`. That point lies at a smaller los angle only when
/// `desired - los0 + pi / (n_f - 1) < 0`; otherwise it is behind the start of
/// the (los-decreasing) orientation phase and only the floor applies.
pub fn gain_bounds(los0: f64, heading0: f64, desired: f64, n_f: f64) -> Result<GainBounds, GuidanceError> {
    check_two_phase(los0, heading0, desired)?;
    check_final_gain(n_f)?;
    let n_max = (desired - heading0) / (desired - los0);
    let denom = desired - los0 + PI / (n_f - 1.0);
    let (n_min, clamped_low) = if denom < 0.0 {
        let geometric = (desired - heading0 + PI * n_f / (n_f - 1.0)) / denom;
        if geometric > ORIENTATION_GAIN_FLOOR {
            (geometric, false)
        } else {
            (ORIENTATION_GAIN_FLOOR, true)
        }
    } else {
        (ORIENTATION_GAIN_FLOOR, true)
    };
    if n_min >= n_max {
        return Err(GuidanceError::InfeasibleEngagement { min: n_min, max: n_max });
    }
    Ok(GainBounds { n_min, n_max, clamped_low })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GuidanceMode {
    SinglePpn,
    TwoPhaseBaseline,
    TwoPhaseShaped,
}

/// Guidance mode, gain pair and desired terminal angle (rad).
///
/// `SinglePpn` uses `n_f` as its only gain; `TwoPhaseBaseline` ignores both
/// gains and derives them from the geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainSchedule {
    pub mode: GuidanceMode,
    pub n_ori: f64,
    pub n_f: f64,
    pub desired: f64,
}

impl GainSchedule {
    pub fn single(gain: f64, desired: f64) -> Self {
        Self { mode: GuidanceMode::SinglePpn, n_ori: gain, n_f: gain, desired }
    }

    pub fn baseline(desired: f64) -> Self {
        Self { mode: GuidanceMode::TwoPhaseBaseline, n_ori: f64::NAN, n_f: f64::NAN, desired }
    }

    pub fn shaped(n_ori: f64, n_f: f64, desired: f64) -> Self {
        Self { mode: GuidanceMode::TwoPhaseShaped, n_ori, n_f, desired }
    }

    /// Build the per-engagement gain rule for the given initial geometry.
    pub fn rule(&self, los0: f64, heading0: f64) -> Result<GainRule, GuidanceError> {
        match self.mode {
            GuidanceMode::SinglePpn => {
                if !self.n_f.is_finite() {
                    return Err(GuidanceError::NonFinite);
                }
                Ok(GainRule::single(self.n_f))
            }
            GuidanceMode::TwoPhaseBaseline => baseline_schedule(los0, heading0, self.desired),
            GuidanceMode::TwoPhaseShaped => shaped_schedule(self, los0, heading0),
        }
    }
}

/// Angular-plane point and gain at which the final phase was latched.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchRecord {
    pub t: f64,
    pub los: f64,
    pub heading: f64,
    pub gain: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Trigger {
    None,
    /// Switch to `gain` once `N_req >= gain`.
    Fixed { gain: f64 },
    /// Switch once `N_req >= threshold` and fly `N_req` itself.
    Required { threshold: f64 },
}

/// Per-engagement PPN gain rule with at most one latched switch.
#[derive(Debug, Clone, PartialEq)]
pub struct GainRule {
    gain: f64,
    desired: f64,
    trigger: Trigger,
    switch: Option<SwitchRecord>,
}

impl GainRule {
    pub fn single(gain: f64) -> Self {
        Self { gain, desired: f64::NAN, trigger: Trigger::None, switch: None }
    }

    /// Shaped two-phase rule without any bound checks.
    pub fn two_phase_unchecked(n_ori: f64, n_f: f64, desired: f64) -> Self {
        Self { gain: n_ori, desired, trigger: Trigger::Fixed { gain: n_f }, switch: None }
    }

    /// Gain currently in force.
    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn switch(&self) -> Option<SwitchRecord> {
        self.switch
    }

    pub fn is_two_phase(&self) -> bool {
        self.trigger != Trigger::None
    }
}

impl Guidance for GainRule {
    fn at_step(&mut self, s: &EngagementState, _vehicle: &VehicleParams) {
        if self.switch.is_some() {
            return;
        }
        let (threshold, fixed) = match self.trigger {
            Trigger::None => return,
            Trigger::Fixed { gain } => (gain, true),
            Trigger::Required { threshold } => (threshold, false),
        };
        let req = n_req(s.los, s.heading, self.desired);
        if req >= threshold {
            self.gain = if fixed { threshold } else { req };
            self.switch = Some(SwitchRecord { t: s.t, los: s.los, heading: s.heading, gain: self.gain });
        }
    }

    fn command(&self, s: &EngagementState, v: &VehicleParams) -> f64 {
        ppn_command(self.gain, v.speed, los_rate(s, v.speed))
    }
}

/// Orientation gain of the baseline schedule, `(2/pi) |heading0 - los0|`.
pub fn baseline_orientation_gain(los0: f64, heading0: f64) -> f64 {
    FRAC_2_PI * (heading0 - los0).abs()
}

/// Baseline two-phase rule: fixed orientation gain while `N_req < 2`, then
/// `N_req` at the first state where it reaches 2, held thereafter.
pub fn baseline_schedule(los0: f64, heading0: f64, desired: f64) -> Result<GainRule, GuidanceError> {
    check_two_phase(los0, heading0, desired)?;
    Ok(GainRule {
        gain: baseline_orientation_gain(los0, heading0),
        desired,
        trigger: Trigger::Required { threshold: FINAL_GAIN_MIN },
        switch: None,
    })
}

/// Shaped two-phase rule: `n_ori` until the first step with `N_req >= n_f`,
/// then `n_f` until capture.
pub fn shaped_schedule(gains: &GainSchedule, los0: f64, heading0: f64) -> Result<GainRule, GuidanceError> {
    if !gains.n_ori.is_finite() {
        return Err(GuidanceError::NonFinite);
    }
    let bounds = gain_bounds(los0, heading0, gains.desired, gains.n_f)?;
    if !bounds.contains(gains.n_ori) {
        return Err(GuidanceError::OrientationGainOutOfRange {
            gain: gains.n_ori,
            min: bounds.n_min,
            max: bounds.n_max,
        });
    }
    Ok(GainRule::two_phase_unchecked(gains.n_ori, gains.n_f, gains.desired))
}
