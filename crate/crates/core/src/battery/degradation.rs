//! Health and temperature transforms on cell parameters.
//!
//! Three health grades are modelled. A healthy cell is untouched. A
//! medium-health cell carries exactly one fade mode, capacity or power. An
//! unhealthy cell carries both. Cold ambient additionally raises series
//! resistance. All transforms compose multiplicatively:
//!
//! * capacity fade: `q -> 0.8 q`
//! * power fade: `r0 -> 2 r0`
//! * cold ambient: `r0 -> 1.5 r0` on top of whatever power fade applied

use serde::{Deserialize, Serialize};

use super::CellParams;

/// Battery health grade, best to worst.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HealthGrade {
    /// No fade.
    Healthy,
    /// Exactly one fade mode.
    Medium,
    /// Capacity and power fade together.
    Unhealthy,
}

impl HealthGrade {
    pub const ALL: [HealthGrade; 3] =
        [HealthGrade::Healthy, HealthGrade::Medium, HealthGrade::Unhealthy];

    /// Ordering index, 0 best. Used for relative-health reward scaling.
    pub fn rank(self) -> u8 {
        match self {
            HealthGrade::Healthy => 0,
            HealthGrade::Medium => 1,
            HealthGrade::Unhealthy => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            HealthGrade::Healthy => "F1",
            HealthGrade::Medium => "F2",
            HealthGrade::Unhealthy => "F3",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s {
            "F1" => Some(HealthGrade::Healthy),
            "F2" => Some(HealthGrade::Medium),
            "F3" => Some(HealthGrade::Unhealthy),
            _ => None,
        }
    }
}

/// Ambient temperature bucket. The boundary is 50 F; cold operation raises
/// series resistance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AmbientTemp {
    Warm,
    Cold,
}

impl AmbientTemp {
    pub const ALL: [AmbientTemp; 2] = [AmbientTemp::Warm, AmbientTemp::Cold];

    pub fn label(self) -> &'static str {
        match self {
            AmbientTemp::Warm => "TH",
            AmbientTemp::Cold => "TL",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s {
            "TH" => Some(AmbientTemp::Warm),
            "TL" => Some(AmbientTemp::Cold),
            _ => None,
        }
    }
}

/// Which single fade mode a medium-health cell carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FadeKind {
    Capacity,
    Power,
}

/// Health grade plus ambient temperature. `medium_fade` selects the fade mode
/// used when the grade is `Medium`; it is ignored otherwise, which keeps the
/// one-fade invariant for medium health by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HealthCondition {
    pub grade: HealthGrade,
    pub ambient: AmbientTemp,
    #[serde(default = "default_fade")]
    pub medium_fade: FadeKind,
}

fn default_fade() -> FadeKind {
    FadeKind::Capacity
}

impl HealthCondition {
    pub fn healthy(ambient: AmbientTemp) -> Self {
        Self {
            grade: HealthGrade::Healthy,
            ambient,
            medium_fade: FadeKind::Capacity,
        }
    }

    pub fn medium(medium_fade: FadeKind, ambient: AmbientTemp) -> Self {
        Self {
            grade: HealthGrade::Medium,
            ambient,
            medium_fade,
        }
    }

    pub fn unhealthy(ambient: AmbientTemp) -> Self {
        Self {
            grade: HealthGrade::Unhealthy,
            ambient,
            medium_fade: FadeKind::Capacity,
        }
    }

    pub fn with_grade(grade: HealthGrade, ambient: AmbientTemp) -> Self {
        Self {
            grade,
            ambient,
            medium_fade: FadeKind::Capacity,
        }
    }
}

const CAPACITY_FADE: f64 = 0.8;
const POWER_FADE: f64 = 2.0;
const COLD_R0: f64 = 1.5;

/// Returns a copy of `params` with the fades for `health` applied.
pub fn apply_degradation(params: &CellParams, health: &HealthCondition) -> CellParams {
    let mut out = params.clone();
    let (capacity, power) = match health.grade {
        HealthGrade::Healthy => (false, false),
        HealthGrade::Medium => match health.medium_fade {
            FadeKind::Capacity => (true, false),
            FadeKind::Power => (false, true),
        },
        HealthGrade::Unhealthy => (true, true),
    };
    if capacity {
        out.q *= CAPACITY_FADE;
    }
    if power {
        out.r0 *= POWER_FADE;
    }
    if health.ambient == AmbientTemp::Cold {
        out.r0 *= COLD_R0;
    }
    out
}
