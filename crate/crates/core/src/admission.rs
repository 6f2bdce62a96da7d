//! Reservation admission, arrivals with a single redirect, departures and
//! stay extensions.
//!
//! A request for area `a` over window `w` is accepted when the user passes
//! the reputation checks and the peak number of reservations overlapping
//! `w` (plus vehicles already overstaying in `a`) is below
//! `capacity - buffer`. On arrival the vehicle parks in any free slot. If the
//! area is physically full, the nearest other area with a free slot gets an
//! automatic reservation that skips the buffer check; if that one is full too
//! when the vehicle gets there, the park fails.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::buffer::{self, BufferPolicyConfig};
use crate::model::{
    AreaId, ParkingArea, Reservation, ReservationId, ReservationState, RunMetrics, SimTime, UserId,
    UserProfile, Window,
};
use crate::reward::{self, Inadmissible, RewardConfig};
use crate::travel::TravelModel;
use crate::EngineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    CapacityFull,
    LowReputation,
    NoCredit,
    Suspended,
}

impl From<Inadmissible> for RejectReason {
    fn from(value: Inadmissible) -> Self {
        match value {
            Inadmissible::LowReputation => RejectReason::LowReputation,
            Inadmissible::NoCredit => RejectReason::NoCredit,
            Inadmissible::Suspended => RejectReason::Suspended,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReservationDecision {
    Accepted(ReservationId),
    Rejected(RejectReason),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArrivalOutcome {
    Parked(AreaId),
    Redirected {
        replacement: ReservationId,
        area: AreaId,
        /// When the vehicle reaches the alternative area.
        arrives_at: SimTime,
    },
    NoPark,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepartureRecord {
    pub on_time: bool,
    pub overstay_minutes: u64,
    pub fee: f64,
}

/// Peak number of intervals covering any minute of `window`, plus
/// `overstayers` who are assumed to hold a slot for the whole window.
///
/// Sweep over the clipped interval endpoints; ends sort before starts at the
/// same minute because windows are half-open.
pub fn overlap_count<I>(ledger: I, window: Window, overstayers: u32) -> u32
where
    I: IntoIterator<Item = Window>,
{
    if window.is_empty() {
        return overstayers;
    }
    let mut edges: Vec<(u64, i32)> = Vec::new();
    for w in ledger {
        if !w.overlaps(&window) {
            continue;
        }
        edges.push((w.start.max(window.start).0, 1));
        edges.push((w.end().min(window.end()).0, -1));
    }
    edges.sort_unstable();
    let mut live = 0i32;
    let mut peak = 0i32;
    for (_, delta) in edges {
        live += delta;
        peak = peak.max(live);
    }
    peak as u32 + overstayers
}

/// One admission event, kept for auditing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transition {
    pub reservation: ReservationId,
    pub from: Option<ReservationState>,
    pub to: ReservationState,
    pub at: SimTime,
}

/// Parking areas, reservations and user profiles for one run.
#[derive(Debug, Clone)]
pub struct Engine {
    areas: Vec<ParkingArea>,
    reservations: Vec<Reservation>,
    profiles: BTreeMap<UserId, UserProfile>,
    /// Reservation currently held by each parked vehicle.
    parked: BTreeMap<UserId, ReservationId>,
    buffer: BufferPolicyConfig,
    reward: RewardConfig,
    travel: TravelModel,
    metrics: RunMetrics,
    transitions: Vec<Transition>,
}

impl Engine {
    /// Areas must be given with ids `0..n` in order.
    pub fn new(
        areas: Vec<ParkingArea>,
        buffer: BufferPolicyConfig,
        reward: RewardConfig,
        travel: TravelModel,
    ) -> Result<Self, EngineError> {
        for (i, a) in areas.iter().enumerate() {
            if a.id.0 as usize != i {
                return Err(EngineError::Invalid(format!(
                    "area at index {i} has id {}",
                    a.id
                )));
            }
        }
        Ok(Self {
            areas,
            reservations: Vec::new(),
            profiles: BTreeMap::new(),
            parked: BTreeMap::new(),
            buffer,
            reward,
            travel,
            metrics: RunMetrics::default(),
            transitions: Vec::new(),
        })
    }

    pub fn add_user(&mut self, profile: UserProfile) {
        self.profiles.insert(profile.id, profile);
    }

    pub fn areas(&self) -> &[ParkingArea] {
        &self.areas
    }

    pub fn area(&self, id: AreaId) -> Result<&ParkingArea, EngineError> {
        self.areas
            .get(id.0 as usize)
            .ok_or(EngineError::UnknownArea(id))
    }

    fn area_mut(&mut self, id: AreaId) -> Result<&mut ParkingArea, EngineError> {
        self.areas
            .get_mut(id.0 as usize)
            .ok_or(EngineError::UnknownArea(id))
    }

    pub fn reservation(&self, id: ReservationId) -> Result<&Reservation, EngineError> {
        self.reservations
            .get(id.0 as usize)
            .ok_or(EngineError::UnknownReservation(id))
    }

    fn reservation_mut(&mut self, id: ReservationId) -> Result<&mut Reservation, EngineError> {
        self.reservations
            .get_mut(id.0 as usize)
            .ok_or(EngineError::UnknownReservation(id))
    }

    pub fn reservations(&self) -> &[Reservation] {
        &self.reservations
    }

    pub fn profile(&self, id: UserId) -> Result<&UserProfile, EngineError> {
        self.profiles.get(&id).ok_or(EngineError::UnknownUser(id))
    }

    pub fn profiles(&self) -> impl Iterator<Item = &UserProfile> {
        self.profiles.values()
    }

    pub fn metrics(&self) -> &RunMetrics {
        &self.metrics
    }

    pub fn metrics_mut(&mut self) -> &mut RunMetrics {
        &mut self.metrics
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn buffer_config(&self) -> &BufferPolicyConfig {
        &self.buffer
    }

    pub fn reward_config(&self) -> &RewardConfig {
        &self.reward
    }

    pub fn travel(&self) -> &TravelModel {
        &self.travel
    }

    /// Parked vehicles in `area` whose reservation ended before `now`.
    pub fn overstayers(&self, area: AreaId, now: SimTime) -> Result<u32, EngineError> {
        let a = self.area(area)?;
        let mut n = 0;
        for user in &a.occupied {
            let rid = self.parked.get(user).ok_or(EngineError::Corrupt(format!(
                "vehicle {user} parked in area {area} without a reservation"
            )))?;
            if self.reservation(*rid)?.end() < now {
                n += 1;
            }
        }
        Ok(n)
    }

    /// Peak demand in `area` over `window`: live ledger reservations plus
    /// current overstayers. `exclude` is left out of the ledger.
    pub fn area_overlap(
        &self,
        area: AreaId,
        window: Window,
        now: SimTime,
        exclude: Option<ReservationId>,
    ) -> Result<u32, EngineError> {
        let a = self.area(area)?;
        let windows = a
            .ledger
            .iter()
            .filter(|rid| Some(**rid) != exclude)
            .map(|rid| self.reservations[rid.0 as usize].window());
        Ok(overlap_count(windows, window, self.overstayers(area, now)?))
    }

    /// Slots currently withheld from admission in `area`.
    pub fn effective_buffer(&self, area: AreaId) -> Result<u32, EngineError> {
        let a = self.area(area)?;
        let occupants = a.occupied.iter().filter_map(|u| self.profiles.get(u));
        Ok(buffer::effective_buffer(
            &a.buffer_state,
            &self.buffer,
            occupants,
            a.capacity,
        ))
    }

    /// Reservable slots right now: capacity minus buffer.
    pub fn reservable(&self, area: AreaId) -> Result<u32, EngineError> {
        let cap = self.area(area)?.capacity;
        Ok(cap.saturating_sub(self.effective_buffer(area)?))
    }

    fn record(
        &mut self,
        rid: ReservationId,
        from: Option<ReservationState>,
        to: ReservationState,
        at: SimTime,
    ) {
        self.transitions.push(Transition {
            reservation: rid,
            from,
            to,
            at,
        });
    }

    fn transition(
        &mut self,
        rid: ReservationId,
        to: ReservationState,
        at: SimTime,
    ) -> Result<(), EngineError> {
        let r = self.reservation_mut(rid)?;
        let from = r.state;
        if !from.can_transition_to(to) {
            return Err(EngineError::IllegalTransition {
                reservation: rid,
                from,
                to,
            });
        }
        r.state = to;
        self.record(rid, Some(from), to, at);
        Ok(())
    }

    fn push_reservation(&mut self, mut r: Reservation, at: SimTime) -> ReservationId {
        let id = ReservationId(self.reservations.len() as u32);
        r.id = id;
        let state = r.state;
        self.reservations.push(r);
        self.record(id, None, state, at);
        id
    }

    /// Admission of a new request for `[start, start + duration)` in `area`.
    pub fn request_reservation(
        &mut self,
        user: UserId,
        area: AreaId,
        start: SimTime,
        duration: u64,
        now: SimTime,
    ) -> Result<ReservationDecision, EngineError> {
        if start < now || duration == 0 {
            return Err(EngineError::Invalid(format!(
                "request window [{start}, +{duration}) at {now}"
            )));
        }
        self.area(area)?;
        self.metrics.total_requests += 1;

        let mut profile = self.profile(user)?.clone();
        let fee = reward::compute_fee(&profile, duration, &self.reward);
        let admissible = reward::is_admissible(&mut profile, fee, &self.reward);
        self.profiles.insert(user, profile);

        let decision = match admissible {
            Err(why) => ReservationDecision::Rejected(why.into()),
            Ok(()) => {
                let window = Window::new(start, duration);
                let demand = self.area_overlap(area, window, now, None)?;
                if demand < self.reservable(area)? {
                    let id = self.push_reservation(
                        Reservation {
                            id: ReservationId(0),
                            user,
                            area,
                            start,
                            duration,
                            state: ReservationState::Accepted,
                            actual_departure: None,
                            replacement: None,
                            replaces: None,
                            held_fee: fee,
                        },
                        now,
                    );
                    self.area_mut(area)?.ledger.insert(id);
                    if let Some(p) = self.profiles.get_mut(&user) {
                        p.credit -= fee;
                    }
                    ReservationDecision::Accepted(id)
                } else {
                    ReservationDecision::Rejected(RejectReason::CapacityFull)
                }
            }
        };

        if let ReservationDecision::Rejected(reason) = decision {
            self.metrics.no_reservation += 1;
            if reason != RejectReason::CapacityFull {
                self.metrics.refused_by_reputation += 1;
            }
        }
        Ok(decision)
    }

    /// Nearest other area with a free slot right now, lowest id on ties.
    pub fn suggest_alternative(&self, origin: AreaId) -> Result<Option<AreaId>, EngineError> {
        let o = self.area(origin)?;
        Ok(self
            .areas
            .iter()
            .filter(|a| a.id != origin && !a.is_full())
            .map(|a| (o.location.distance(&a.location), a.id))
            .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)))
            .map(|(_, id)| id))
    }

    /// Vehicle for reservation `rid` shows up at its area.
    pub fn handle_arrival(
        &mut self,
        rid: ReservationId,
        now: SimTime,
    ) -> Result<ArrivalOutcome, EngineError> {
        let r = self.reservation(rid)?.clone();
        if r.state != ReservationState::Accepted {
            return Err(EngineError::IllegalTransition {
                reservation: rid,
                from: r.state,
                to: ReservationState::Arrived,
            });
        }
        self.metrics.arrivals += 1;

        if !self.area(r.area)?.is_full() {
            self.transition(rid, ReservationState::Arrived, now)?;
            self.area_mut(r.area)?.occupied.insert(r.user);
            self.parked.insert(r.user, rid);
            return Ok(ArrivalOutcome::Parked(r.area));
        }

        let alternative = if r.is_replacement() {
            None
        } else {
            self.suggest_alternative(r.area)?
        };

        self.area_mut(r.area)?.ledger.remove(&rid);
        match alternative {
            Some(alt) => {
                let origin_loc = self.area(r.area)?.location;
                let alt_loc = self.area(alt)?.location;
                let arrives_at = now.plus(self.travel.between(&origin_loc, &alt_loc));
                self.transition(rid, ReservationState::Redirected, now)?;
                let replacement = self.push_reservation(
                    Reservation {
                        id: ReservationId(0),
                        user: r.user,
                        area: alt,
                        start: arrives_at,
                        duration: r.duration,
                        state: ReservationState::Accepted,
                        actual_departure: None,
                        replacement: None,
                        replaces: Some(rid),
                        held_fee: r.held_fee,
                    },
                    now,
                );
                {
                    let orig = self.reservation_mut(rid)?;
                    orig.replacement = Some(replacement);
                    orig.held_fee = 0.0;
                }
                self.area_mut(alt)?.ledger.insert(replacement);
                self.metrics.redirects += 1;
                Ok(ArrivalOutcome::Redirected {
                    replacement,
                    area: alt,
                    arrives_at,
                })
            }
            None => {
                self.transition(rid, ReservationState::NoPark, now)?;
                let held = std::mem::take(&mut self.reservation_mut(rid)?.held_fee);
                if let Some(p) = self.profiles.get_mut(&r.user) {
                    p.credit += held;
                }
                self.metrics.no_park += 1;
                Ok(ArrivalOutcome::NoPark)
            }
        }
    }

    /// Parked vehicle for reservation `rid` leaves.
    pub fn handle_departure(
        &mut self,
        rid: ReservationId,
        now: SimTime,
    ) -> Result<DepartureRecord, EngineError> {
        let r = self.reservation(rid)?.clone();
        self.transition(rid, ReservationState::Departed, now)?;
        {
            let res = self.reservation_mut(rid)?;
            res.actual_departure = Some(now);
            res.held_fee = 0.0;
        }
        {
            let area = self.area_mut(r.area)?;
            area.occupied.remove(&r.user);
            area.ledger.remove(&rid);
        }
        self.parked.remove(&r.user);

        let end = r.end();
        let on_time = now <= end;
        let overstay_minutes = now.since(end);

        let profile = self.profile(r.user)?.clone();
        let fee = reward::compute_fee(&profile, now.since(r.start), &self.reward);
        let mut updated = if on_time {
            reward::record_on_time(&profile, &self.reward)
        } else {
            reward::record_overstay(&profile, &self.reward)
        };
        updated.credit = (updated.credit + r.held_fee - fee).max(0.0);
        self.profiles.insert(r.user, updated);

        if !on_time {
            let next = buffer::on_late_departure(&self.area(r.area)?.buffer_state, &self.buffer);
            self.area_mut(r.area)?.buffer_state = next;
            self.metrics.overstays += 1;
        }
        self.metrics.completed_parks += 1;

        Ok(DepartureRecord {
            on_time,
            overstay_minutes,
            fee,
        })
    }

    /// Asks to stay `extra` minutes past the end of `rid`. Granted when the
    /// extension window fits under capacity minus buffer with `rid` itself
    /// left out of the count.
    pub fn request_extension(
        &mut self,
        rid: ReservationId,
        extra: u64,
        now: SimTime,
    ) -> Result<bool, EngineError> {
        let r = self.reservation(rid)?.clone();
        if r.state != ReservationState::Arrived || extra == 0 || now >= r.end() {
            return Err(EngineError::Invalid(format!(
                "extension of {rid} ({:?}) by {extra} at {now}",
                r.state
            )));
        }
        let window = Window::new(r.end(), extra);
        let demand = self.area_overlap(r.area, window, now, Some(rid))?;
        if demand < self.reservable(r.area)? {
            self.reservation_mut(rid)?.duration += extra;
            Ok(true)
        } else {
            Ok(false)
        }
    }

    /// Dynamic-buffer reset tick for one area.
    pub fn reset_buffer(&mut self, area: AreaId, now: SimTime) -> Result<(), EngineError> {
        let cfg = self.buffer.clone();
        let a = self.area_mut(area)?;
        a.buffer_state = buffer::on_reset_tick(&a.buffer_state, &cfg, now);
        Ok(())
    }

    /// Structural checks: physical capacity, parked vehicles backed by an
    /// `Arrived` reservation, dynamic buffer bounds.
    pub fn audit(&self) -> Result<(), EngineError> {
        for a in &self.areas {
            if a.occupancy() > a.capacity {
                return Err(EngineError::Corrupt(format!(
                    "area {} holds {} vehicles over capacity {}",
                    a.id,
                    a.occupancy(),
                    a.capacity
                )));
            }
            for user in &a.occupied {
                let ok = self
                    .parked
                    .get(user)
                    .and_then(|rid| self.reservations.get(rid.0 as usize))
                    .is_some_and(|r| r.state == ReservationState::Arrived && r.area == a.id);
                if !ok {
                    return Err(EngineError::Corrupt(format!(
                        "vehicle {user} in area {} has no arrived reservation there",
                        a.id
                    )));
                }
            }
            if self.buffer.is_dynamic() {
                let b = a.buffer_state.base;
                if b < self.buffer.dynamic_init || b > self.buffer.dynamic_max {
                    return Err(EngineError::Corrupt(format!(
                        "area {} dynamic base {b} outside [{}, {}]",
                        a.id, self.buffer.dynamic_init, self.buffer.dynamic_max
                    )));
                }
            }
        }
        Ok(())
    }
}
