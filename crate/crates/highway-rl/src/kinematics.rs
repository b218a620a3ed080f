//! Kinematic bicycle model shared by the ego and all surrounding vehicles.
//!
//! The model has two control inputs (acceleration and front steering angle)
//! and four states (x, y, heading, speed). Dynamics are integrated with
//! explicit forward Euler at the simulation frequency (20 Hz by default);
//! speed is clamped to [0, v_max] and the heading re-wrapped after every
//! substep.

use std::f64::consts::{FRAC_PI_4, PI, TAU};

use crate::error::{Error, Result};

/// Geometry and command bounds of one vehicle body.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyParams {
    pub length: f64,
    pub width: f64,
    /// Distance from the center of mass to the front axle.
    pub l_f: f64,
    /// Distance from the center of mass to the rear axle.
    pub l_r: f64,
    pub v_max: f64,
    pub a_min: f64,
    pub a_max_cmd: f64,
    pub steer_max: f64,
}

impl Default for BodyParams {
    fn default() -> Self {
        Self {
            length: 5.0,
            width: 2.0,
            l_f: 2.5,
            l_r: 2.5,
            v_max: 30.0,
            a_min: -5.0,
            a_max_cmd: 5.0,
            steer_max: FRAC_PI_4,
        }
    }
}

impl BodyParams {
    pub fn wheelbase(&self) -> f64 {
        self.l_f + self.l_r
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.l_f > 0.0 && self.l_r > 0.0) {
            return Err(Error::Config("axle distances must be positive".into()));
        }
        if self.l_f + self.l_r > self.length {
            return Err(Error::Config(format!(
                "wheelbase {} exceeds body length {}",
                self.l_f + self.l_r,
                self.length
            )));
        }
        if !(self.v_max > 0.0 && self.steer_max > 0.0 && self.a_max_cmd > 0.0 && self.a_min < 0.0)
        {
            return Err(Error::Config("command bounds must bracket zero".into()));
        }
        Ok(())
    }
}

/// Pose and speed of one vehicle in the road frame.
///
/// `x` runs along the road, `y` grows toward the leftmost lane, `psi` is the
/// inertial heading and `v` the scalar speed (never negative).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    pub x: f64,
    pub y: f64,
    pub psi: f64,
    pub v: f64,
}

/// Acceleration and front steering command.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlInput {
    pub accel: f64,
    pub steer: f64,
}

impl ControlInput {
    /// Clamp both commands into the body's admissible ranges.
    pub fn clamped(self, body: &BodyParams) -> Self {
        Self {
            accel: self.accel.clamp(body.a_min, body.a_max_cmd),
            steer: self.steer.clamp(-body.steer_max, body.steer_max),
        }
    }
}

/// Time derivative of a [`VehicleState`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDerivative {
    pub dx: f64,
    pub dy: f64,
    pub dpsi: f64,
    pub dv: f64,
}

/// Wrap an angle into (-pi, pi]. Angles already in range pass through
/// bit-unchanged.
pub fn wrap_angle(angle: f64) -> f64 {
    if angle > -PI && angle <= PI {
        return angle;
    }
    let a = angle.rem_euclid(TAU);
    if a > PI {
        a - TAU
    } else {
        a
    }
}

/// Slip angle at the center of gravity for a given front steering angle.
pub fn slip_angle(steer: f64, body: &BodyParams) -> f64 {
    (body.l_r / (body.l_f + body.l_r) * steer.tan()).atan()
}

/// Continuous-time bicycle-model dynamics evaluated at `state`.
pub fn state_derivative(
    state: VehicleState,
    input: ControlInput,
    body: &BodyParams,
) -> StateDerivative {
    let beta = slip_angle(input.steer, body);
    StateDerivative {
        dx: state.v * (state.psi + beta).cos(),
        dy: state.v * (state.psi + beta).sin(),
        dpsi: state.v / body.l_r * beta.sin(),
        dv: input.accel,
    }
}

/// One explicit forward-Euler substep of length `dt`.
///
/// The derivative is evaluated at the current state; afterwards the speed is
/// clamped to [0, v_max] and the heading wrapped back into (-pi, pi].
pub fn integrate_step(
    state: VehicleState,
    input: ControlInput,
    body: &BodyParams,
    dt: f64,
) -> VehicleState {
    debug_assert!(dt > 0.0);
    let d = state_derivative(state, input, body);
    VehicleState {
        x: state.x + d.dx * dt,
        y: state.y + d.dy * dt,
        psi: wrap_angle(state.psi + d.dpsi * dt),
        v: (state.v + d.dv * dt).clamp(0.0, body.v_max),
    }
}
