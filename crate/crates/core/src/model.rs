//! Shared domain types: time, identifiers, areas, reservations, user
//! profiles and per-run metrics.
//!
//! All times are whole minutes since the start of a simulation. One hour is
//! [`MINUTES_PER_HOUR`] minutes.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::buffer::BufferState;

pub const MINUTES_PER_HOUR: u64 = 60;

/// Minutes elapsed since simulation start.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct SimTime(pub u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);

    pub fn minutes(self) -> u64 {
        self.0
    }

    pub fn plus(self, minutes: u64) -> SimTime {
        SimTime(self.0 + minutes)
    }

    /// Minutes from `earlier` to `self`, zero if `earlier` is later.
    pub fn since(self, earlier: SimTime) -> u64 {
        self.0.saturating_sub(earlier.0)
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}h{:02}",
            self.0 / MINUTES_PER_HOUR,
            self.0 % MINUTES_PER_HOUR
        )
    }
}

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

id_type!(AreaId);
id_type!(
    /// Users and vehicles share identifiers: every vehicle belongs to
    /// exactly one user profile.
    UserId
);
id_type!(ReservationId);

/// A half-open window `[start, start + duration)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Window {
    pub start: SimTime,
    pub duration: u64,
}

impl Window {
    pub fn new(start: SimTime, duration: u64) -> Self {
        Self { start, duration }
    }

    pub fn end(&self) -> SimTime {
        self.start.plus(self.duration)
    }

    pub fn is_empty(&self) -> bool {
        self.duration == 0
    }

    pub fn contains(&self, t: SimTime) -> bool {
        self.start <= t && t < self.end()
    }

    pub fn overlaps(&self, other: &Window) -> bool {
        self.start < other.end() && other.start < self.end()
    }
}

/// Abstract planar position of a parking area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub x: f64,
    pub y: f64,
}

impl Location {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Euclidean distance.
    pub fn distance(&self, other: &Location) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// A gated parking area. Reservations are for the area as a whole; parked
/// vehicles take any free slot.
#[derive(Debug, Clone)]
pub struct ParkingArea {
    pub id: AreaId,
    pub capacity: u32,
    pub location: Location,
    /// Vehicles physically inside.
    pub occupied: BTreeSet<UserId>,
    /// Reservations in state `Accepted` or `Arrived` that belong to this area.
    pub ledger: BTreeSet<ReservationId>,
    pub buffer_state: BufferState,
}

impl ParkingArea {
    pub fn new(id: AreaId, capacity: u32, location: Location, buffer_state: BufferState) -> Self {
        Self {
            id,
            capacity,
            location,
            occupied: BTreeSet::new(),
            ledger: BTreeSet::new(),
            buffer_state,
        }
    }

    pub fn occupancy(&self) -> u32 {
        self.occupied.len() as u32
    }

    pub fn is_full(&self) -> bool {
        self.occupancy() >= self.capacity
    }
}

/// Distance between two areas' locations.
pub fn distance(a: &ParkingArea, b: &ParkingArea) -> f64 {
    a.location.distance(&b.location)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReservationState {
    Accepted,
    Arrived,
    Redirected,
    Departed,
    NoPark,
    Rejected,
}

impl ReservationState {
    /// Whether `self -> next` is a legal lifecycle step.
    pub fn can_transition_to(self, next: ReservationState) -> bool {
        use ReservationState::*;
        matches!(
            (self, next),
            (Accepted, Arrived)
                | (Accepted, Redirected)
                | (Accepted, NoPark)
                | (Redirected, Arrived)
                | (Redirected, NoPark)
                | (Arrived, Departed)
        )
    }

    pub fn is_terminal(self) -> bool {
        matches!(
            self,
            ReservationState::Departed | ReservationState::NoPark | ReservationState::Rejected
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reservation {
    pub id: ReservationId,
    pub user: UserId,
    pub area: AreaId,
    pub start: SimTime,
    pub duration: u64,
    pub state: ReservationState,
    pub actual_departure: Option<SimTime>,
    /// Set on a `Redirected` reservation: the auto-placed one at the
    /// alternative area.
    pub replacement: Option<ReservationId>,
    /// Set on an auto-placed replacement: the reservation it replaces.
    pub replaces: Option<ReservationId>,
    /// Fee held against the user's credit until departure.
    pub held_fee: f64,
}

impl Reservation {
    pub fn window(&self) -> Window {
        Window::new(self.start, self.duration)
    }

    pub fn end(&self) -> SimTime {
        self.start.plus(self.duration)
    }

    pub fn is_replacement(&self) -> bool {
        self.replaces.is_some()
    }
}

pub const MAX_STARS: u8 = 5;

/// Reputation and account state for one user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserProfile {
    pub id: UserId,
    pub stars: u8,
    pub benefits: u32,
    pub warnings: u32,
    pub credit: f64,
    pub suspended_sessions: u32,
}

impl UserProfile {
    pub const INITIAL_STARS: u8 = 3;

    /// A fresh user: 3 stars, no benefits, no warnings.
    pub fn new(id: UserId, credit: f64) -> Self {
        Self {
            id,
            stars: Self::INITIAL_STARS,
            benefits: 0,
            warnings: 0,
            credit,
            suspended_sessions: 0,
        }
    }
}

/// Outcome counters for one simulation run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RunMetrics {
    /// Arrivals that found neither the reserved nor the suggested area free.
    pub no_park: u64,
    /// Refused requests, whatever the reason.
    pub no_reservation: u64,
    /// The part of `no_reservation` refused by the reputation system (low
    /// stars, no credit, suspension) rather than for lack of room.
    pub refused_by_reputation: u64,
    pub completed_parks: u64,
    pub overstays: u64,
    pub redirects: u64,
    pub total_requests: u64,
    pub arrivals: u64,
    /// Legs never attempted because the vehicle reached the horizon first.
    pub unplayed_legs: u64,
    /// Population actually simulated (varies per run in randomised sweeps).
    pub population: u64,
    pub planned_legs: u64,
}

impl RunMetrics {
    /// Requests refused because the area would be full (capacity minus buffer).
    pub fn capacity_refusals(&self) -> u64 {
        self.no_reservation - self.refused_by_reputation
    }
}
