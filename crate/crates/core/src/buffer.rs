//! Non-reservable buffer slots.
//!
//! Each area keeps a number of slots out of reservation admission. Under a
//! static policy the count is fixed. Under the dynamic policy the area keeps
//! a base size that grows by one on every late departure (up to a cap), is
//! periodically reset to its initial value, and is further enlarged by the
//! number of low-reputation vehicles currently parked in the area.

use serde::{Deserialize, Serialize};

use crate::model::{SimTime, UserProfile};
use crate::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BufferKind {
    /// A fixed number of slots.
    Static(u32),
    Dynamic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BufferPolicyConfig {
    pub kind: BufferKind,
    pub dynamic_init: u32,
    pub dynamic_max: u32,
    /// Minutes between resets of the dynamic base.
    pub reset_period: u64,
    pub reputation_threshold_stars: u8,
    /// Extra buffer slots per parked occupant below the star threshold.
    pub reputation_weight: f64,
}

impl Default for BufferPolicyConfig {
    fn default() -> Self {
        Self {
            kind: BufferKind::Dynamic,
            dynamic_init: 0,
            dynamic_max: 3,
            reset_period: 1440,
            reputation_threshold_stars: 2,
            reputation_weight: 1.0,
        }
    }
}

impl BufferPolicyConfig {
    pub fn fixed(size: u32) -> Self {
        Self {
            kind: BufferKind::Static(size),
            ..Self::default()
        }
    }

    pub fn dynamic() -> Self {
        Self::default()
    }

    pub fn is_dynamic(&self) -> bool {
        matches!(self.kind, BufferKind::Dynamic)
    }

    /// Short label used in result tables: `static-0`, `static-3`, `dynamic`.
    pub fn label(&self) -> String {
        match self.kind {
            BufferKind::Static(size) => format!("static-{size}"),
            BufferKind::Dynamic => "dynamic".to_string(),
        }
    }

    pub fn validate(&self, capacity: u32) -> Result<(), ConfigError> {
        let invalid = |msg: String| Err(ConfigError::Invalid(msg));
        match self.kind {
            BufferKind::Static(size) if size > capacity => {
                return invalid(format!(
                    "static buffer {size} exceeds area capacity {capacity}"
                ))
            }
            _ => {}
        }
        if self.is_dynamic() && self.dynamic_init > self.dynamic_max {
            return invalid(format!(
                "dynamic_init {} exceeds dynamic_max {}",
                self.dynamic_init, self.dynamic_max
            ));
        }
        if self.is_dynamic() && self.dynamic_max > capacity {
            return invalid(format!(
                "dynamic_max {} exceeds area capacity {capacity}",
                self.dynamic_max
            ));
        }
        if self.reset_period == 0 {
            return invalid("reset_period must be positive".into());
        }
        if self.reputation_threshold_stars > crate::model::MAX_STARS {
            return invalid("reputation_threshold_stars must be within 0..=5".into());
        }
        if !(self.reputation_weight.is_finite() && self.reputation_weight >= 0.0) {
            return invalid("reputation_weight must be a non-negative number".into());
        }
        Ok(())
    }

    /// Fresh per-area state for this policy.
    pub fn initial_state(&self) -> BufferState {
        BufferState {
            base: self.dynamic_init,
            last_reset: SimTime::ZERO,
        }
    }
}

/// Per-area dynamic buffer state. Unused (but harmless) under static policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BufferState {
    pub base: u32,
    pub last_reset: SimTime,
}

/// Buffer slots currently withheld from admission in an area of `capacity`
/// slots, given the profiles of the vehicles parked there.
pub fn effective_buffer<'a, I>(
    state: &BufferState,
    config: &BufferPolicyConfig,
    occupants: I,
    capacity: u32,
) -> u32
where
    I: IntoIterator<Item = &'a UserProfile>,
{
    let size = match config.kind {
        BufferKind::Static(size) => size,
        BufferKind::Dynamic => {
            let low = occupants
                .into_iter()
                .filter(|p| p.stars < config.reputation_threshold_stars)
                .count();
            let extra = (config.reputation_weight * low as f64).floor() as u32;
            config.dynamic_max.min(state.base.saturating_add(extra))
        }
    };
    size.min(capacity)
}

/// A vehicle left the area after its reservation ended.
pub fn on_late_departure(state: &BufferState, config: &BufferPolicyConfig) -> BufferState {
    if !config.is_dynamic() {
        return *state;
    }
    BufferState {
        base: (state.base + 1).min(config.dynamic_max),
        ..*state
    }
}

/// Periodic reset of the dynamic base. A tick arriving before a full period
/// has elapsed since the last reset leaves the state untouched.
pub fn on_reset_tick(
    state: &BufferState,
    config: &BufferPolicyConfig,
    now: SimTime,
) -> BufferState {
    if !config.is_dynamic() || now.since(state.last_reset) < config.reset_period {
        return *state;
    }
    BufferState {
        base: config.dynamic_init,
        last_reset: now,
    }
}
