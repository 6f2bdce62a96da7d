//! Abstract travel-time model standing in for a road network.

use serde::{Deserialize, Serialize};

use crate::model::Location;
use crate::ConfigError;

/// Every trip costs `base_minutes` plus `minutes_per_unit` per unit of
/// straight-line distance. Trips to or from places outside the managed
/// areas take `off_system_minutes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TravelModel {
    pub base_minutes: u64,
    pub minutes_per_unit: f64,
    pub off_system_minutes: u64,
}

impl Default for TravelModel {
    fn default() -> Self {
        Self {
            base_minutes: 5,
            minutes_per_unit: 10.0,
            off_system_minutes: 30,
        }
    }
}

impl TravelModel {
    pub fn between(&self, from: &Location, to: &Location) -> u64 {
        self.base_minutes + (self.minutes_per_unit * from.distance(to)).round() as u64
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.minutes_per_unit.is_finite() && self.minutes_per_unit >= 0.0) {
            return Err(ConfigError::Invalid(
                "travel.minutes_per_unit must be a non-negative number".into(),
            ));
        }
        Ok(())
    }
}
