//! Reservation-based parking management.
//!
//! The crate has two halves. The engine ([`admission`], [`buffer`],
//! [`reward`]) decides whether a reservation is accepted, where an arriving
//! vehicle parks, and how a user's star rating evolves. The simulator
//! ([`sim`], [`experiment`]) drives the engine with a synthetic vehicle
//! population and aggregates the two failure counts that matter to users:
//! *NO PARK* (a reserved vehicle could not park anywhere) and *NO
//! RESERVATION* (a request was turned away).
//!
//! ```
//! use slotguard::sim::{build_scenario, run, ScenarioConfig};
//!
//! let cfg = ScenarioConfig::default();
//! let scenario = build_scenario(&cfg, 0).unwrap();
//! let record = run(&scenario).unwrap();
//! assert_eq!(record.metrics.population, 80);
//! ```

pub mod admission;
pub mod buffer;
pub mod experiment;
pub mod model;
pub mod reward;
pub mod sim;
pub mod travel;

use std::path::PathBuf;

use thiserror::Error;

use crate::model::{AreaId, ReservationId, ReservationState, UserId};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("unsupported schema_version {found} (expected {expected})")]
    Schema { found: u32, expected: u32 },
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Contract violations inside the engine. These indicate a caller bug, not
/// a domain outcome.
#[derive(Debug, Error)]
pub enum EngineError {
    #[error("unknown area {0}")]
    UnknownArea(AreaId),
    #[error("unknown reservation {0}")]
    UnknownReservation(ReservationId),
    #[error("unknown user {0}")]
    UnknownUser(UserId),
    #[error("reservation {reservation} cannot go from {from:?} to {to:?}")]
    IllegalTransition {
        reservation: ReservationId,
        from: ReservationState,
        to: ReservationState,
    },
    #[error("invalid request: {0}")]
    Invalid(String),
    #[error("inconsistent engine state: {0}")]
    Corrupt(String),
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

// The guide's code samples run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/admission.md")]
    mod admission {}
    #[doc = include_str!("../../../book/src/buffers.md")]
    mod buffers {}
    #[doc = include_str!("../../../book/src/reputation.md")]
    mod reputation {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
