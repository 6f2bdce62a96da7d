//! Star-based reputation.
//!
//! On-time departures earn Benefits; every `benefits_per_star` Benefits
//! promote the user by one star. Overstays earn Warnings and wipe the
//! Benefit counter; every `warnings_per_star` Warnings demote by one star.
//! Overstaying while below the suspension threshold bars the user from the
//! next reservation attempt. Stars also scale the parking fee.

use serde::{Deserialize, Serialize};

use crate::model::{UserProfile, MAX_STARS, MINUTES_PER_HOUR};
use crate::ConfigError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardConfig {
    /// Benefits needed to gain one star.
    pub benefits_per_star: u32,
    /// Warnings that cost one star.
    pub warnings_per_star: u32,
    pub suspension_threshold_stars: u8,
    pub admission_min_stars: u8,
    /// Money per hour at the neutral (3-star) reputation.
    pub base_rate: f64,
    /// Fee multiplier change per star away from 3.
    pub star_fee_step: f64,
    /// Credit every user starts with.
    pub initial_credit: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            benefits_per_star: 3,
            warnings_per_star: 2,
            suspension_threshold_stars: 2,
            admission_min_stars: 1,
            base_rate: 2.0,
            star_fee_step: 0.1,
            initial_credit: 1000.0,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |msg: &str| Err(ConfigError::Invalid(msg.to_string()));
        if self.benefits_per_star == 0 || self.warnings_per_star == 0 {
            return invalid("benefits_per_star and warnings_per_star must be at least 1");
        }
        if self.suspension_threshold_stars > MAX_STARS || self.admission_min_stars > MAX_STARS {
            return invalid("star thresholds must be within 0..=5");
        }
        if !(self.base_rate.is_finite() && self.base_rate >= 0.0) {
            return invalid("base_rate must be a non-negative number");
        }
        if !(self.star_fee_step.is_finite() && self.star_fee_step >= 0.0) {
            return invalid("star_fee_step must be a non-negative number");
        }
        if !(self.initial_credit.is_finite() && self.initial_credit >= 0.0) {
            return invalid("initial_credit must be a non-negative number");
        }
        Ok(())
    }
}

/// Why a user may not reserve right now.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Inadmissible {
    LowReputation,
    NoCredit,
    Suspended,
}

pub fn record_on_time(p: &UserProfile, cfg: &RewardConfig) -> UserProfile {
    let mut next = p.clone();
    next.benefits += 1;
    if next.benefits >= cfg.benefits_per_star {
        next.stars = (next.stars + 1).min(MAX_STARS);
        next.benefits = 0;
    }
    next
}

pub fn record_overstay(p: &UserProfile, cfg: &RewardConfig) -> UserProfile {
    let mut next = p.clone();
    next.benefits = 0;
    next.warnings += 1;
    if next.warnings >= cfg.warnings_per_star {
        next.stars = next.stars.saturating_sub(1);
        next.warnings = 0;
    }
    if next.stars < cfg.suspension_threshold_stars {
        next.suspended_sessions += 1;
    }
    next
}

/// Checks whether `p` may place a reservation costing `estimated_fee`.
///
/// A pending suspension is consumed by the rejected attempt, so `p` is
/// mutated in that case only.
pub fn is_admissible(
    p: &mut UserProfile,
    estimated_fee: f64,
    cfg: &RewardConfig,
) -> Result<(), Inadmissible> {
    if p.suspended_sessions > 0 {
        p.suspended_sessions -= 1;
        return Err(Inadmissible::Suspended);
    }
    if p.stars < cfg.admission_min_stars {
        return Err(Inadmissible::LowReputation);
    }
    if p.credit < estimated_fee {
        return Err(Inadmissible::NoCredit);
    }
    Ok(())
}

/// Fee multiplier for a star rating; 1.0 at three stars.
pub fn fee_multiplier(stars: u8, cfg: &RewardConfig) -> f64 {
    1.0 + cfg.star_fee_step * (f64::from(UserProfile::INITIAL_STARS) - f64::from(stars))
}

pub fn compute_fee(p: &UserProfile, minutes_parked: u64, cfg: &RewardConfig) -> f64 {
    let hours = minutes_parked as f64 / MINUTES_PER_HOUR as f64;
    (cfg.base_rate * hours * fee_multiplier(p.stars, cfg)).max(0.0)
}
