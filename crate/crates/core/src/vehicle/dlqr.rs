//! Discrete-time LQR tracking gains.
//!
//! The Riccati equation is solved by fixed-point iteration
//!
//! ```text
//! P <- Q + A' P A - A' P B (R + B' P B)^-1 B' P A
//! ```
//!
//! which converges for a stabilizable, detectable plant. The gain is
//! `K = (R + B' P B)^-1 B' P A` and the control law is `u = -K x` about the
//! hover trim.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{VehicleError, VehicleParams};

/// Diagonal state and input weights, grouped by physical block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DlqrWeights {
    pub q_pos: f64,
    pub q_vel: f64,
    pub q_att: f64,
    pub q_rate: f64,
    pub r_thrust: f64,
    pub r_torque: f64,
}

impl Default for DlqrWeights {
    fn default() -> Self {
        Self {
            q_pos: 1.0,
            q_vel: 0.6,
            q_att: 4.0,
            q_rate: 0.05,
            r_thrust: 0.02,
            r_torque: 30.0,
        }
    }
}

impl DlqrWeights {
    pub fn validate(&self) -> Result<(), VehicleError> {
        for (name, v) in [
            ("q_pos", self.q_pos),
            ("q_vel", self.q_vel),
            ("q_att", self.q_att),
            ("q_rate", self.q_rate),
            ("r_thrust", self.r_thrust),
            ("r_torque", self.r_torque),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(VehicleError::InvalidParams(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// State transition and input matrices of the hover model discretized with
/// forward Euler at step `dt`. State order is position, velocity, attitude,
/// rate; inputs are thrust offset from hover and the three torques.
pub fn hover_linearization(params: &VehicleParams, dt: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut a = DMatrix::<f64>::identity(12, 12);
    for k in 0..3 {
        a[(k, 3 + k)] = dt; // position follows velocity
        a[(6 + k, 9 + k)] = dt; // attitude follows body rate
    }
    a[(3, 7)] = params.gravity * dt; // pitch tips thrust forward
    a[(4, 6)] = -params.gravity * dt; // roll tips thrust to -y
    let mut b = DMatrix::<f64>::zeros(12, 4);
    b[(5, 0)] = dt / params.mass;
    b[(9, 1)] = dt / params.ixx;
    b[(10, 2)] = dt / params.iyy;
    b[(11, 3)] = dt / params.izz;
    (a, b)
}

/// Feedback gain about hover trim.
#[derive(Debug, Clone, PartialEq)]
pub struct DlqrGains {
    /// 4 x 12 gain matrix.
    pub k: DMatrix<f64>,
}

impl DlqrGains {
    /// Control offset from trim for the given state error:
    /// `[delta_thrust, tau_x, tau_y, tau_z] = -K err`.
    pub fn control(&self, err: &[f64; 12]) -> [f64; 4] {
        let mut u = [0.0; 4];
        for i in 0..4 {
            let mut acc = 0.0;
            for j in 0..12 {
                acc += self.k[(i, j)] * err[j];
            }
            u[i] = -acc;
        }
        u
    }
}

/// Solves the discrete Riccati equation by fixed-point iteration.
pub fn dare_fixed_point(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<DMatrix<f64>, VehicleError> {
    let mut p = q.clone();
    for _ in 0..max_iter {
        let btp = b.transpose() * &p;
        let gain_denom = r + &btp * b;
        let inv = gain_denom.clone().try_inverse().ok_or_else(|| {
            VehicleError::NoConvergence("R + B'PB became singular".into())
        })?;
        let k = &inv * &btp * a;
        let next = q + a.transpose() * &p * (a - b * &k);
        let diff = (&next - &p).abs().max();
        p = next;
        if diff < tol {
            return Ok(p);
        }
    }
    Err(VehicleError::NoConvergence(format!(
        "no fixed point after {max_iter} iterations"
    )))
}

/// LQR gains for the hover model at step `dt`.
pub fn dlqr_gains(
    params: &VehicleParams,
    weights: &DlqrWeights,
    dt: f64,
) -> Result<DlqrGains, VehicleError> {
    params.validate()?;
    weights.validate()?;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(VehicleError::InvalidParams(format!("dt must be > 0, got {dt}")));
    }
    let (a, b) = hover_linearization(params, dt);
    let mut q = DMatrix::<f64>::zeros(12, 12);
    for k in 0..3 {
        q[(k, k)] = weights.q_pos;
        q[(3 + k, 3 + k)] = weights.q_vel;
        q[(6 + k, 6 + k)] = weights.q_att;
        q[(9 + k, 9 + k)] = weights.q_rate;
    }
    let mut r = DMatrix::<f64>::zeros(4, 4);
    r[(0, 0)] = weights.r_thrust;
    for k in 1..4 {
        r[(k, k)] = weights.r_torque;
    }
    let p = dare_fixed_point(&a, &b, &q, &r, 1e-11, 2_000_000)?;
    let btp = b.transpose() * &p;
    let k = (r + &btp * b)
        .try_inverse()
        .ok_or_else(|| VehicleError::NoConvergence("R + B'PB became singular".into()))?
        * btp
        * &a;
    Ok(DlqrGains { k })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn scalar_riccati_matches_the_golden_ratio() {
        // a = b = q = r = 1 gives p^2 = p + 1, so p is the golden ratio and
        // the gain is its reciprocal
        let one = DMatrix::<f64>::identity(1, 1);
        let p = dare_fixed_point(&one, &one, &one, &one, 1e-14, 10_000).unwrap();
        let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
        assert_abs_diff_eq!(p[(0, 0)], phi, epsilon = 1e-10);
        let k = p[(0, 0)] / (1.0 + p[(0, 0)]);
        assert_abs_diff_eq!(k, phi - 1.0, epsilon = 1e-10);
    }

    #[test]
    fn riccati_residual_vanishes_for_the_hover_plant() {
        let params = VehicleParams::default();
        let w = DlqrWeights::default();
        let dt = 0.005;
        let (a, b) = hover_linearization(&params, dt);
        let mut q = DMatrix::<f64>::zeros(12, 12);
        for k in 0..3 {
            q[(k, k)] = w.q_pos;
            q[(3 + k, 3 + k)] = w.q_vel;
            q[(6 + k, 6 + k)] = w.q_att;
            q[(9 + k, 9 + k)] = w.q_rate;
        }
        let mut r = DMatrix::<f64>::zeros(4, 4);
        r[(0, 0)] = w.r_thrust;
        for k in 1..4 {
            r[(k, k)] = w.r_torque;
        }
        let p = dare_fixed_point(&a, &b, &q, &r, 1e-12, 2_000_000).unwrap();
        let btp = b.transpose() * &p;
        let k = (&r + &btp * &b).try_inverse().unwrap() * &btp * &a;
        let residual = (&q + a.transpose() * &p * (&a - &b * &k)) - &p;
        assert!(residual.abs().max() < 1e-8, "residual {}", residual.abs().max());
    }

    #[test]
    fn closed_loop_is_strictly_stable() {
        let params = VehicleParams::default();
        let dt = 0.005;
        let gains = dlqr_gains(&params, &DlqrWeights::default(), dt).unwrap();
        let (a, b) = hover_linearization(&params, dt);
        let closed = a - b * &gains.k;
        let radius = closed
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(radius < 1.0, "spectral radius {radius}");
    }

    #[test]
    fn control_sign_opposes_position_error() {
        let gains = dlqr_gains(&VehicleParams::default(), &DlqrWeights::default(), 0.005).unwrap();
        // above the reference: push thrust down
        let mut err = [0.0; 12];
        err[2] = 1.0;
        let u = gains.control(&err);
        assert!(u[0] < 0.0);
        // east of the reference: pitch backward (negative pitch torque)
        let mut err = [0.0; 12];
        err[0] = 1.0;
        let u = gains.control(&err);
        assert!(u[2] < 0.0, "pitch torque {}", u[2]);
    }

    #[test]
    fn gains_match_across_identical_calls() {
        let a = dlqr_gains(&VehicleParams::default(), &DlqrWeights::default(), 0.005).unwrap();
        let b = dlqr_gains(&VehicleParams::default(), &DlqrWeights::default(), 0.005).unwrap();
        assert_eq!(a.k, b.k);
    }

    #[test]
    fn closed_loop_tracks_a_climb_and_step_under_noise_and_wind() {
        use crate::vehicle::allocation::MotorAllocator;
        use crate::vehicle::dynamics::{step_dynamics, VehicleState};
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;

        let params = VehicleParams::default();
        let dt = 0.005;
        let gains = dlqr_gains(&params, &DlqrWeights::default(), dt).unwrap();
        let alloc = MotorAllocator::new(&params).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let wind = [2.0, 0.0, 0.0];
        let reference = [5.0, -3.0, 10.0];
        let mut s = VehicleState::at_rest([0.0; 3]);
        for _ in 0..8000 {
            // measurement noise enters through the fed-back state only
            let mut fb = s.as_vector();
            for k in 0..3 {
                fb[k] += rng.random_range(-0.02..0.02);
                fb[3 + k] += rng.random_range(-0.05..0.05);
                fb[6 + k] += rng.random_range(-0.005..0.005);
                fb[9 + k] += rng.random_range(-0.01..0.01);
            }
            let mut err = fb;
            for k in 0..3 {
                err[k] -= reference[k];
            }
            let du = gains.control(&err);
            let u = [params.hover_thrust() + du[0], du[1], du[2], du[3]];
            let a = alloc.allocate(u).unwrap();
            let realized = alloc.realized_wrench(&a.omega_sq);
            // saturation may clip the initial step, never exceed the ceiling
            let ceiling = 6.0 * params.c_t * params.omega_max * params.omega_max;
            assert!(realized[0] >= 0.0 && realized[0] <= ceiling + 1e-9);
            s = step_dynamics(&s, &params, realized, wind, dt).unwrap();
        }
        // altitude is wind-free and should track tightly; the steady
        // crosswind leaves a bounded lateral offset since there is no
        // integral action
        assert!((s.pos[2] - reference[2]).abs() < 0.2, "z {}", s.pos[2]);
        assert!((s.pos[1] - reference[1]).abs() < 0.5, "y {}", s.pos[1]);
        assert!((s.pos[0] - reference[0]).abs() < 6.0, "x {}", s.pos[0]);
        assert!(s.att[0].abs() < 0.1 && s.att[1].abs() < 0.1);
    }

    #[test]
    fn euler_dynamics_agree_with_the_linearization() {
        use crate::vehicle::dynamics::{step_dynamics, VehicleState};
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;

        let params = VehicleParams::default();
        let dt = 0.005;
        let (a, b) = hover_linearization(&params, dt);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let mut s = VehicleState::at_rest([0.0; 3]);
            for k in 0..3 {
                s.pos[k] = rng.random_range(-5.0..5.0);
                s.vel[k] = rng.random_range(-2.0..2.0);
                s.att[k] = rng.random_range(-0.2..0.2);
                s.rate[k] = rng.random_range(-0.5..0.5);
            }
            let du = [
                rng.random_range(-3.0..3.0),
                rng.random_range(-0.2..0.2),
                rng.random_range(-0.2..0.2),
                rng.random_range(-0.05..0.05),
            ];
            let u = [
                params.hover_thrust() + du[0],
                du[1],
                du[2],
                du[3],
            ];
            let stepped = step_dynamics(&s, &params, u, [0.0; 3], dt).unwrap();
            let x = nalgebra::DVector::from_row_slice(&s.as_vector());
            let v = nalgebra::DVector::from_row_slice(&du);
            let lin = &a * x + &b * v;
            for (i, got) in stepped.as_vector().iter().enumerate() {
                assert_relative_eq!(*got, lin[i], max_relative = 1e-9, epsilon = 1e-12);
            }
        }
    }
}
