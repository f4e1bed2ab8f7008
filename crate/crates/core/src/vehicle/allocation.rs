//! Rotor allocation for a symmetric hexacopter.
//!
//! Six arms at 60 degree spacing, alternating spin directions. The mixing
//! matrix maps squared rotor speeds to total thrust and body torques; its
//! rows are mutually orthogonal, so the minimum-norm inverse is just the
//! scaled transpose and a pure thrust command loads all six rotors equally.

use nalgebra::{SMatrix, SVector};

use super::{VehicleError, VehicleParams};

type Mix = SMatrix<f64, 4, 6>;
type MixInv = SMatrix<f64, 6, 4>;

/// Result of one allocation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Allocation {
    /// Squared rotor speeds, (rad/s)^2, after clamping.
    pub omega_sq: [f64; 6],
    /// True when any rotor was clamped at zero or at the speed ceiling.
    pub saturated: bool,
}

impl Allocation {
    pub fn omegas(&self) -> [f64; 6] {
        self.omega_sq.map(f64::sqrt)
    }
}

/// Maps wrench commands to squared rotor speeds and back.
#[derive(Debug, Clone, PartialEq)]
pub struct MotorAllocator {
    mix: Mix,
    mix_pinv: MixInv,
    omega_sq_max: f64,
}

impl MotorAllocator {
    pub fn new(params: &VehicleParams) -> Result<Self, VehicleError> {
        params.validate()?;
        let ct = params.c_t;
        let cq = params.c_q;
        let l = params.arm_length;
        let s3 = 3.0_f64.sqrt() / 2.0;
        #[rustfmt::skip]
        let mix = Mix::from_row_slice(&[
            ct, ct, ct, ct, ct, ct,
            0.5 * l * ct, -0.5 * l * ct, -l * ct, -0.5 * l * ct, 0.5 * l * ct, l * ct,
            -s3 * l * ct, -s3 * l * ct, 0.0, s3 * l * ct, s3 * l * ct, 0.0,
            cq, -cq, cq, -cq, cq, -cq,
        ]);
        let gram = mix * mix.transpose();
        let gram_inv = gram.try_inverse().ok_or_else(|| {
            VehicleError::InvalidParams("mixing matrix is rank deficient".into())
        })?;
        Ok(Self {
            mix,
            mix_pinv: mix.transpose() * gram_inv,
            omega_sq_max: params.omega_max * params.omega_max,
        })
    }

    /// Minimum-norm squared rotor speeds for `[thrust, tau_x, tau_y, tau_z]`,
    /// clamped to the feasible range.
    pub fn allocate(&self, u: [f64; 4]) -> Result<Allocation, VehicleError> {
        if u.iter().any(|v| !v.is_finite()) {
            return Err(VehicleError::NonFinite);
        }
        let w = self.mix_pinv * SVector::<f64, 4>::from(u);
        let mut omega_sq = [0.0; 6];
        let mut saturated = false;
        for k in 0..6 {
            let raw = w[k];
            let clamped = raw.clamp(0.0, self.omega_sq_max);
            saturated |= clamped != raw;
            omega_sq[k] = clamped;
        }
        Ok(Allocation { omega_sq, saturated })
    }

    /// Thrust and torques actually produced by the given squared speeds.
    pub fn realized_wrench(&self, omega_sq: &[f64; 6]) -> [f64; 4] {
        let u = self.mix * SVector::<f64, 6>::from(*omega_sq);
        [u[0], u[1], u[2], u[3]]
    }
}
