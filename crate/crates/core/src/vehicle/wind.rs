//! Steady wind plus first-order colored gusts.
//!
//! Each horizontal axis carries an independent gust filter
//!
//! ```text
//! g' = a g + b n,   a = exp(-v dt / l),   b = sigma sqrt(1 - a^2)
//! ```
//!
//! with `n` standard normal. That discretization is exact for the underlying
//! first-order process, so the stationary standard deviation is `sigma`
//! regardless of step size.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::VehicleError;

/// Turbulence class: altitude band crossed with gust intensity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GustCategory {
    LowLight,
    LowModerate,
    MediumLight,
    MediumModerate,
}

impl GustCategory {
    pub const ALL: [GustCategory; 4] = [
        GustCategory::LowLight,
        GustCategory::LowModerate,
        GustCategory::MediumLight,
        GustCategory::MediumModerate,
    ];

    /// Correlation length scale, meters.
    pub fn length_scale(self) -> f64 {
        match self {
            GustCategory::LowLight | GustCategory::LowModerate => 200.0,
            GustCategory::MediumLight | GustCategory::MediumModerate => 533.0,
        }
    }

    /// Stationary gust standard deviation, m/s.
    pub fn sigma(self) -> f64 {
        match self {
            GustCategory::LowLight => 0.5,
            GustCategory::LowModerate => 1.2,
            GustCategory::MediumLight => 0.8,
            GustCategory::MediumModerate => 1.8,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            GustCategory::LowLight => "low_light",
            GustCategory::LowModerate => "low_moderate",
            GustCategory::MediumLight => "medium_light",
            GustCategory::MediumModerate => "medium_moderate",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.label() == s)
    }
}

/// Horizontal wind: constant mean plus per-axis colored gusts.
#[derive(Debug, Clone, PartialEq)]
pub struct WindModel {
    /// Mean wind, m/s, world x and y.
    pub steady: [f64; 2],
    decay: f64,
    drive: f64,
    gust: [f64; 2],
}

impl WindModel {
    /// `airspeed` sets the rate at which the vehicle flies through the gust
    /// field and must be positive.
    pub fn new(
        steady: [f64; 2],
        category: GustCategory,
        airspeed: f64,
        dt: f64,
    ) -> Result<Self, VehicleError> {
        if steady.iter().any(|v| !v.is_finite()) {
            return Err(VehicleError::NonFinite);
        }
        if !(airspeed > 0.0) || !(dt > 0.0) || !airspeed.is_finite() || !dt.is_finite() {
            return Err(VehicleError::InvalidParams(
                "airspeed and dt must be positive".into(),
            ));
        }
        let decay = (-airspeed * dt / category.length_scale()).exp();
        let drive = category.sigma() * (1.0 - decay * decay).sqrt();
        Ok(Self {
            steady,
            decay,
            drive,
            gust: [0.0; 2],
        })
    }

    /// Dead calm, no gusts.
    pub fn still() -> Self {
        Self {
            steady: [0.0; 2],
            decay: 0.0,
            drive: 0.0,
            gust: [0.0; 2],
        }
    }

    /// Advances the gust filters and returns total wind for this step.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> [f64; 2] {
        for g in &mut self.gust {
            let n: f64 = StandardNormal.sample(rng);
            *g = self.decay * *g + self.drive * n;
        }
        self.current()
    }

    /// Total wind without advancing.
    pub fn current(&self) -> [f64; 2] {
        [self.steady[0] + self.gust[0], self.steady[1] + self.gust[1]]
    }

    /// Wind as a 3-vector with no vertical component.
    pub fn current3(&self) -> [f64; 3] {
        let [x, y] = self.current();
        [x, y, 0.0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn discretization_preserves_stationary_variance_algebraically() {
        // var' = a^2 var + b^2; at var = sigma^2 both sides agree exactly
        for cat in GustCategory::ALL {
            let w = WindModel::new([0.0, 0.0], cat, 5.0, 0.005).unwrap();
            let var = cat.sigma() * cat.sigma();
            assert_relative_eq!(
                w.decay * w.decay * var + w.drive * w.drive,
                var,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn sampled_variance_approaches_sigma_squared() {
        // fast mixing setup so 100k samples give a tight estimate
        let mut w = WindModel::new([0.0, 0.0], GustCategory::LowModerate, 10.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..1000 {
            w.step(&mut rng); // burn in
        }
        let n = 100_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let [gx, _] = w.step(&mut rng);
            sum += gx;
            sum_sq += gx * gx;
        }
        let mean = sum / n as f64;
        let var = sum_sq / n as f64 - mean * mean;
        let sigma_sq = 1.2 * 1.2;
        assert!(
            (var - sigma_sq).abs() < 0.1 * sigma_sq,
            "sampled {var}, expected {sigma_sq}"
        );
    }

    #[test]
    fn mean_wind_passes_through() {
        // fast-mixing setup keeps the sample mean tight
        let mut w = WindModel::new([2.0, -1.0], GustCategory::LowLight, 10.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut acc = [0.0, 0.0];
        let n = 200_000;
        for _ in 0..n {
            let [x, y] = w.step(&mut rng);
            acc[0] += x;
            acc[1] += y;
        }
        assert_abs_diff_eq!(acc[0] / n as f64, 2.0, epsilon = 0.05);
        assert_abs_diff_eq!(acc[1] / n as f64, -1.0, epsilon = 0.05);
    }

    #[test]
    fn still_air_never_moves() {
        let mut w = WindModel::still();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            assert_eq!(w.step(&mut rng), [0.0, 0.0]);
        }
    }

    #[test]
    fn category_labels_round_trip() {
        for cat in GustCategory::ALL {
            assert_eq!(GustCategory::from_label(cat.label()), Some(cat));
        }
        assert_eq!(GustCategory::from_label("hurricane"), None);
    }

    #[test]
    fn rejects_bad_airspeed() {
        assert!(WindModel::new([0.0, 0.0], GustCategory::LowLight, 0.0, 0.005).is_err());
        assert!(WindModel::new([f64::NAN, 0.0], GustCategory::LowLight, 5.0, 0.005).is_err());
    }
}
