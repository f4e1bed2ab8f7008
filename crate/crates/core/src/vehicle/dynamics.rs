//! Rigid-body hover dynamics, linearized about level flight and integrated
//! with forward Euler.
//!
//! State is position, velocity, attitude (roll, pitch, yaw) and body rates.
//! Near hover the lateral accelerations follow the tilt angles and the
//! vertical acceleration follows total thrust:
//!
//! ```text
//! ax = g * pitch      ay = -g * roll      az = thrust / m - g
//! ```
//!
//! Wind enters as an additive velocity disturbance on the position update,
//! so a hovering vehicle with zero velocity drifts with the wind.

use serde::{Deserialize, Serialize};

use super::VehicleError;

/// Airframe constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VehicleParams {
    /// Takeoff mass, kg.
    pub mass: f64,
    /// Gravitational acceleration, m/s^2.
    pub gravity: f64,
    /// Rotor arm length, m.
    pub arm_length: f64,
    /// Rotor thrust coefficient, N per (rad/s)^2.
    pub c_t: f64,
    /// Rotor drag-torque coefficient, N m per (rad/s)^2.
    pub c_q: f64,
    /// Roll inertia, kg m^2.
    pub ixx: f64,
    /// Pitch inertia, kg m^2.
    pub iyy: f64,
    /// Yaw inertia, kg m^2.
    pub izz: f64,
    /// Rotor speed ceiling, rad/s.
    pub omega_max: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self {
            mass: 2.5,
            gravity: 9.81,
            arm_length: 0.35,
            c_t: 2.0e-7,
            c_q: 4.0e-9,
            ixx: 0.035,
            iyy: 0.035,
            izz: 0.06,
            omega_max: 6500.0,
        }
    }
}

impl VehicleParams {
    pub fn validate(&self) -> Result<(), VehicleError> {
        for (name, v) in [
            ("mass", self.mass),
            ("gravity", self.gravity),
            ("arm_length", self.arm_length),
            ("c_t", self.c_t),
            ("c_q", self.c_q),
            ("ixx", self.ixx),
            ("iyy", self.iyy),
            ("izz", self.izz),
            ("omega_max", self.omega_max),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(VehicleError::InvalidParams(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Total thrust that balances weight, newtons.
    pub fn hover_thrust(&self) -> f64 {
        self.mass * self.gravity
    }

    /// Squared rotor speed at which six rotors balance weight.
    pub fn hover_speed_sq(&self) -> f64 {
        self.mass * self.gravity / (6.0 * self.c_t)
    }
}

/// Twelve-dimensional vehicle state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    /// Position, m (x east, y north, z up).
    pub pos: [f64; 3],
    /// Velocity, m/s.
    pub vel: [f64; 3],
    /// Attitude, rad (roll, pitch, yaw).
    pub att: [f64; 3],
    /// Body rates, rad/s.
    pub rate: [f64; 3],
}

impl VehicleState {
    pub fn at_rest(pos: [f64; 3]) -> Self {
        Self {
            pos,
            vel: [0.0; 3],
            att: [0.0; 3],
            rate: [0.0; 3],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.pos
            .iter()
            .chain(&self.vel)
            .chain(&self.att)
            .chain(&self.rate)
            .all(|v| v.is_finite())
    }

    /// Flat view in the order pos, vel, att, rate.
    pub fn as_vector(&self) -> [f64; 12] {
        let mut out = [0.0; 12];
        out[0..3].copy_from_slice(&self.pos);
        out[3..6].copy_from_slice(&self.vel);
        out[6..9].copy_from_slice(&self.att);
        out[9..12].copy_from_slice(&self.rate);
        out
    }
}

/// Advances the state by `dt` under total thrust and body torques
/// `[thrust, tau_roll, tau_pitch, tau_yaw]` and wind velocity `wind` (m/s,
/// world frame).
pub fn step_dynamics(
    state: &VehicleState,
    params: &VehicleParams,
    u: [f64; 4],
    wind: [f64; 3],
    dt: f64,
) -> Result<VehicleState, VehicleError> {
    if !state.is_finite() || u.iter().chain(&wind).any(|v| !v.is_finite()) {
        return Err(VehicleError::NonFinite);
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(VehicleError::InvalidParams(format!("dt must be > 0, got {dt}")));
    }
    let [thrust, tau_x, tau_y, tau_z] = u;
    let g = params.gravity;
    let acc = [
        g * state.att[1],
        -g * state.att[0],
        thrust / params.mass - g,
    ];
    let mut next = *state;
    for k in 0..3 {
        next.pos[k] += (state.vel[k] + wind[k]) * dt;
        next.vel[k] += acc[k] * dt;
        next.att[k] += state.rate[k] * dt;
    }
    next.rate[0] += tau_x / params.ixx * dt;
    next.rate[1] += tau_y / params.iyy * dt;
    next.rate[2] += tau_z / params.izz * dt;
    if !next.is_finite() {
        return Err(VehicleError::NonFinite);
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const DT: f64 = 0.005;

    #[test]
    fn hover_is_a_fixed_point() {
        let p = VehicleParams::default();
        let s0 = VehicleState::at_rest([1.0, -2.0, 10.0]);
        let mut s = s0;
        for _ in 0..2000 {
            s = step_dynamics(&s, &p, [p.hover_thrust(), 0.0, 0.0, 0.0], [0.0; 3], DT).unwrap();
        }
        // thrust/m - g can carry one rounding ulp, nothing more
        for (a, b) in s.as_vector().iter().zip(s0.as_vector()) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn zero_thrust_accelerates_down_at_g() {
        let p = VehicleParams::default();
        let mut s = VehicleState::at_rest([0.0; 3]);
        for _ in 0..200 {
            s = step_dynamics(&s, &p, [0.0; 4], [0.0; 3], DT).unwrap();
        }
        assert_abs_diff_eq!(s.vel[2], -p.gravity * 1.0, epsilon = 1e-12);
    }

    #[test]
    fn steady_wind_drifts_position_linearly() {
        let p = VehicleParams::default();
        let wind = [1.5, -0.5, 0.0];
        let mut s = VehicleState::at_rest([0.0; 3]);
        let n = 4000;
        for _ in 0..n {
            s = step_dynamics(&s, &p, [p.hover_thrust(), 0.0, 0.0, 0.0], wind, DT).unwrap();
        }
        let t = n as f64 * DT;
        assert_abs_diff_eq!(s.pos[0], wind[0] * t, epsilon = 1e-9);
        assert_abs_diff_eq!(s.pos[1], wind[1] * t, epsilon = 1e-9);
        assert_abs_diff_eq!(s.vel[0], 0.0);
    }

    #[test]
    fn pitch_couples_into_forward_acceleration() {
        let p = VehicleParams::default();
        let mut s = VehicleState::at_rest([0.0; 3]);
        s.att[1] = 0.1; // pitched forward
        let s1 = step_dynamics(&s, &p, [p.hover_thrust(), 0.0, 0.0, 0.0], [0.0; 3], DT).unwrap();
        assert_abs_diff_eq!(s1.vel[0], p.gravity * 0.1 * DT, epsilon = 1e-15);
        assert_abs_diff_eq!(s1.vel[1], 0.0);

        let mut r = VehicleState::at_rest([0.0; 3]);
        r.att[0] = 0.1; // rolled right pushes -y
        let r1 = step_dynamics(&r, &p, [p.hover_thrust(), 0.0, 0.0, 0.0], [0.0; 3], DT).unwrap();
        assert_abs_diff_eq!(r1.vel[1], -p.gravity * 0.1 * DT, epsilon = 1e-15);
    }

    #[test]
    fn torque_integrates_through_inertia() {
        let p = VehicleParams::default();
        let s = VehicleState::at_rest([0.0; 3]);
        let s1 = step_dynamics(&s, &p, [p.hover_thrust(), 0.007, 0.0, 0.012], [0.0; 3], DT).unwrap();
        assert_abs_diff_eq!(s1.rate[0], 0.007 / p.ixx * DT, epsilon = 1e-15);
        assert_abs_diff_eq!(s1.rate[2], 0.012 / p.izz * DT, epsilon = 1e-15);
    }

    #[test]
    fn rejects_non_finite_input() {
        let p = VehicleParams::default();
        let s = VehicleState::at_rest([0.0; 3]);
        assert!(step_dynamics(&s, &p, [f64::NAN, 0.0, 0.0, 0.0], [0.0; 3], DT).is_err());
        let mut bad = s;
        bad.vel[0] = f64::INFINITY;
        assert!(step_dynamics(&bad, &p, [p.hover_thrust(), 0.0, 0.0, 0.0], [0.0; 3], DT).is_err());
    }

    #[test]
    fn validates_params() {
        let mut p = VehicleParams::default();
        p.mass = 0.0;
        assert!(p.validate().is_err());
        assert!(VehicleParams::default().validate().is_ok());
    }
}
