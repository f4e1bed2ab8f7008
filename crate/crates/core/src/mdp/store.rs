//! Policies keyed by operating condition.
//!
//! A condition is the health grade of each battery plus the ambient
//! temperature band, eighteen combinations in all. Policies are solved per
//! condition offline and looked up at dispatch time; a missing entry is an
//! error rather than a silent fallback.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::battery::{AmbientTemp, HealthGrade};

use super::solve::Policy;
use super::MdpError;

/// Battery healths and temperature band a policy was estimated under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConditionKey {
    pub grades: [HealthGrade; 2],
    pub ambient: AmbientTemp,
}

impl ConditionKey {
    pub fn new(grades: [HealthGrade; 2], ambient: AmbientTemp) -> Self {
        Self { grades, ambient }
    }

    /// Stable text form, e.g. `F1_F3_TH`.
    pub fn label(&self) -> String {
        format!(
            "{}_{}_{}",
            self.grades[0].label(),
            self.grades[1].label(),
            self.ambient.label()
        )
    }

    pub fn from_label(s: &str) -> Option<Self> {
        let mut parts = s.split('_');
        let g1 = HealthGrade::from_label(parts.next()?)?;
        let g2 = HealthGrade::from_label(parts.next()?)?;
        let ambient = AmbientTemp::from_label(parts.next()?)?;
        if parts.next().is_some() {
            return None;
        }
        Some(Self::new([g1, g2], ambient))
    }

    /// Every condition, in stable order.
    pub fn all() -> Vec<ConditionKey> {
        let mut out = Vec::with_capacity(18);
        for g1 in HealthGrade::ALL {
            for g2 in HealthGrade::ALL {
                for ambient in AmbientTemp::ALL {
                    out.push(Self::new([g1, g2], ambient));
                }
            }
        }
        out
    }
}

/// Per-condition policy collection.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PolicyStore {
    policies: BTreeMap<String, Policy>,
}

impl PolicyStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: ConditionKey, policy: Policy) {
        self.policies.insert(key.label(), policy);
    }

    /// Policy for the condition; fails closed when absent.
    pub fn get(&self, key: &ConditionKey) -> Result<&Policy, MdpError> {
        self.policies
            .get(&key.label())
            .ok_or_else(|| MdpError::MissingPolicy(key.label()))
    }

    pub fn len(&self) -> usize {
        self.policies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.policies.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = &String> {
        self.policies.keys()
    }
}
