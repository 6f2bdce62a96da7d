//! Deterministic discrete-event simulation of a vehicle population using
//! the reservation engine.
//!
//! Each vehicle walks through a plan of park legs and off-system stops. For a
//! park leg it books the target area when it sets off (so the booking lead
//! time equals the travel time), arrives at the reservation start, and leaves
//! after the reserved duration, plus a fixed overstay for badly behaved
//! vehicles. A refused booking skips the leg: the vehicle waits out the
//! would-be stay and moves on. Off-system stops never touch the engine.
//!
//! Events are ordered by `(time, phase, sequence)`. The sequence number is
//! assigned at insertion, so a run is a pure function of its scenario. The
//! phase puts departures first within a minute, so a slot released at `t`
//! is free for a reservation starting at `t`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::admission::{ArrivalOutcome, Engine, ReservationDecision};
use crate::buffer::BufferPolicyConfig;
use crate::model::{
    AreaId, Location, ParkingArea, ReservationId, RunMetrics, SimTime, UserId, UserProfile,
};
use crate::reward::RewardConfig;
use crate::travel::TravelModel;
use crate::{ConfigError, SimError};

/// Name of the pseudo-random generator behind every run, recorded in outputs.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.9), stream = run index";

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub n_areas: u32,
    pub slots_per_area: u32,
    /// Minutes; vehicles start no new plan item after this.
    pub horizon: u64,
    pub population: u32,
    /// When set, each run draws its population uniformly from this closed
    /// range and `population` is ignored.
    pub population_range: Option<[u32; 2]>,
    pub bad_fraction: f64,
    pub parks_per_vehicle: u32,
    pub park_duration_range: [u64; 2],
    pub off_system_stops: u32,
    pub off_system_duration_range: [u64; 2],
    pub overstay_extra: u64,
    /// Latest minute at which a vehicle may begin its plan.
    pub start_spread: u64,
    /// Explicit area coordinates; a two-row unit grid when absent.
    pub area_locations: Option<Vec<[f64; 2]>>,
    pub travel: TravelModel,
    pub buffer: BufferPolicyConfig,
    pub reward: RewardConfig,
    pub seed: u64,
    pub runs: u32,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_areas: 8,
            slots_per_area: 10,
            horizon: 63 * 60,
            population: 80,
            population_range: None,
            bad_fraction: 0.25,
            parks_per_vehicle: 10,
            park_duration_range: [60, 180],
            off_system_stops: 2,
            off_system_duration_range: [480, 960],
            overstay_extra: 60,
            start_spread: 0,
            area_locations: None,
            travel: TravelModel::default(),
            buffer: BufferPolicyConfig::default(),
            reward: RewardConfig::default(),
            seed: 1,
            runs: 5,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |msg: String| Err(ConfigError::Invalid(msg));
        if self.n_areas == 0 || self.slots_per_area == 0 {
            return invalid("n_areas and slots_per_area must be positive".into());
        }
        if self.parks_per_vehicle == 0 {
            return invalid(
                "parks_per_vehicle must be positive: a plan without parks is degenerate".into(),
            );
        }
        match self.population_range {
            Some([lo, hi]) if lo == 0 || lo > hi => {
                return invalid(format!(
                    "population_range [{lo}, {hi}] is empty or starts at 0"
                ))
            }
            None if self.population == 0 => return invalid("population must be positive".into()),
            _ => {}
        }
        if !(0.0..=1.0).contains(&self.bad_fraction) {
            return invalid(format!("bad_fraction {} outside [0, 1]", self.bad_fraction));
        }
        let [lo, hi] = self.park_duration_range;
        if lo == 0 || lo > hi {
            return invalid(format!(
                "park_duration_range [{lo}, {hi}] must be positive and ordered"
            ));
        }
        let [lo, hi] = self.off_system_duration_range;
        if lo > hi {
            return invalid(format!(
                "off_system_duration_range [{lo}, {hi}] is not ordered"
            ));
        }
        if self.runs == 0 {
            return invalid("runs must be at least 1".into());
        }
        if let Some(locs) = &self.area_locations {
            if locs.len() != self.n_areas as usize {
                return invalid(format!(
                    "area_locations lists {} areas, n_areas is {}",
                    locs.len(),
                    self.n_areas
                ));
            }
            if locs.iter().flatten().any(|c| !c.is_finite()) {
                return invalid("area_locations must be finite".into());
            }
        }
        self.travel.validate()?;
        self.buffer.validate(self.slots_per_area)?;
        self.reward.validate()
    }

    /// Area coordinates in id order.
    pub fn locations(&self) -> Vec<Location> {
        match &self.area_locations {
            Some(locs) => locs.iter().map(|[x, y]| Location::new(*x, *y)).collect(),
            None => {
                let cols = self.n_areas.div_ceil(2).max(1);
                (0..self.n_areas)
                    .map(|i| Location::new((i % cols) as f64, (i / cols) as f64))
                    .collect()
            }
        }
    }

    pub fn total_slots(&self) -> u32 {
        self.n_areas * self.slots_per_area
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Behavior {
    /// Leaves exactly when the reservation ends.
    Good,
    /// Stays `overstay_extra` minutes past every reservation.
    Bad,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanItem {
    Park { area: AreaId, duration: u64 },
    OffSystem { duration: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct VehicleAgent {
    pub id: UserId,
    pub behavior: Behavior,
    pub start: SimTime,
    pub plan: Vec<PlanItem>,
    pub profile: UserProfile,
}

impl VehicleAgent {
    pub fn park_legs(&self) -> usize {
        self.plan
            .iter()
            .filter(|p| matches!(p, PlanItem::Park { .. }))
            .count()
    }

    pub fn actual_stay(&self, reserved: u64, overstay_extra: u64) -> u64 {
        match self.behavior {
            Behavior::Good => reserved,
            Behavior::Bad => reserved + overstay_extra,
        }
    }
}

/// A fully sampled run: configuration plus the vehicle population.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub run_index: u32,
    pub population: u32,
    pub vehicles: Vec<VehicleAgent>,
}

impl Scenario {
    pub fn bad_count(&self) -> usize {
        self.vehicles
            .iter()
            .filter(|v| v.behavior == Behavior::Bad)
            .count()
    }

    pub fn planned_legs(&self) -> u64 {
        self.vehicles.iter().map(|v| v.park_legs() as u64).sum()
    }
}

/// Generator for run `run_index`: the configured seed selects the key and
/// the run index selects the stream.
pub fn run_rng(seed: u64, run_index: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::from(run_index));
    rng
}

/// Exact number of badly behaved vehicles in a population.
pub fn bad_vehicle_count(population: u32, bad_fraction: f64) -> u32 {
    // nudge so that e.g. 0.3 * 80 lands on 24 despite binary rounding
    ((f64::from(population) * bad_fraction) + 1e-9).floor() as u32
}

pub fn build_scenario(cfg: &ScenarioConfig, run_index: u32) -> Result<Scenario, ConfigError> {
    cfg.validate()?;
    let mut rng = run_rng(cfg.seed, run_index);

    let population = match cfg.population_range {
        Some([lo, hi]) => rng.random_range(lo..=hi),
        None => cfg.population,
    };

    let n_bad = bad_vehicle_count(population, cfg.bad_fraction) as usize;
    let mut behaviors: Vec<Behavior> = (0..population as usize)
        .map(|i| {
            if i < n_bad {
                Behavior::Bad
            } else {
                Behavior::Good
            }
        })
        .collect();
    behaviors.shuffle(&mut rng);

    let items = (cfg.parks_per_vehicle + cfg.off_system_stops) as usize;
    let mut vehicles = Vec::with_capacity(population as usize);
    for (i, behavior) in behaviors.into_iter().enumerate() {
        let mut slots: Vec<usize> = (0..items).collect();
        slots.shuffle(&mut rng);
        let off_positions = &slots[..cfg.off_system_stops as usize];

        let mut plan = Vec::with_capacity(items);
        for pos in 0..items {
            if off_positions.contains(&pos) {
                let [lo, hi] = cfg.off_system_duration_range;
                plan.push(PlanItem::OffSystem {
                    duration: rng.random_range(lo..=hi),
                });
            } else {
                let [lo, hi] = cfg.park_duration_range;
                plan.push(PlanItem::Park {
                    area: AreaId(rng.random_range(0..cfg.n_areas)),
                    duration: rng.random_range(lo..=hi),
                });
            }
        }
        let start = SimTime(rng.random_range(0..=cfg.start_spread));
        let id = UserId(i as u32);
        vehicles.push(VehicleAgent {
            id,
            behavior,
            start,
            plan,
            profile: UserProfile::new(id, cfg.reward.initial_credit),
        });
    }

    Ok(Scenario {
        config: cfg.clone(),
        run_index,
        population,
        vehicles,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EventKind {
    PlaceReservation {
        vehicle: UserId,
        area: AreaId,
        start: SimTime,
        duration: u64,
    },
    Arrive {
        vehicle: UserId,
        reservation: ReservationId,
    },
    Depart {
        vehicle: UserId,
        reservation: ReservationId,
    },
    BufferResetTick {
        area: AreaId,
    },
    TripPlanAdvance {
        vehicle: UserId,
    },
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::PlaceReservation { .. } => "place_reservation",
            EventKind::Arrive { .. } => "arrive",
            EventKind::Depart { .. } => "depart",
            EventKind::BufferResetTick { .. } => "buffer_reset_tick",
            EventKind::TripPlanAdvance { .. } => "trip_plan_advance",
        }
    }

    /// Ordering class among events sharing a minute; lower runs first.
    pub fn phase(&self) -> u8 {
        match self {
            EventKind::Depart { .. } => 0,
            EventKind::BufferResetTick { .. } => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimEvent {
    pub time: SimTime,
    pub sequence: u64,
    pub kind: EventKind,
}

impl Ord for SimEvent {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (time, phase, sequence)
        (other.time, other.kind.phase(), other.sequence).cmp(&(
            self.time,
            self.kind.phase(),
            self.sequence,
        ))
    }
}

impl PartialOrd for SimEvent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Pending events, popped in `(time, phase, sequence)` order.
#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<SimEvent>,
    next_sequence: u64,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn schedule(&mut self, time: SimTime, kind: EventKind) -> u64 {
        let sequence = self.next_sequence;
        self.next_sequence += 1;
        self.heap.push(SimEvent {
            time,
            sequence,
            kind,
        });
        sequence
    }

    pub fn pop(&mut self) -> Option<SimEvent> {
        self.heap.pop()
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}

/// One line of the optional per-run event log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventRecord {
    pub time: SimTime,
    pub event: &'static str,
    pub vehicle: Option<UserId>,
    pub area: Option<AreaId>,
    pub outcome: String,
}

impl EventRecord {
    pub const CSV_HEADER: &'static str = "time,event,vehicle,area,outcome";
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub log_events: bool,
    /// Audit engine invariants after every event and fail on violation.
    pub check_invariants: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run_index: u32,
    pub metrics: RunMetrics,
    /// SHA-256 over the processed event trace, hex encoded.
    pub trace_digest: String,
    pub events: Vec<EventRecord>,
    /// Highest dynamic buffer base reached in any area.
    pub peak_buffer_base: u32,
}

#[derive(Debug, Clone, Copy)]
enum Position {
    Outside,
    At(AreaId),
}

struct VehicleState {
    next_item: usize,
    position: Position,
}

struct Runner<'a> {
    scenario: &'a Scenario,
    engine: Engine,
    queue: EventQueue,
    vehicles: Vec<VehicleState>,
    options: RunOptions,
    hasher: Sha256,
    log: Vec<EventRecord>,
    last_time: SimTime,
    prev_bases: Vec<u32>,
    peak_base: u32,
}

impl Runner<'_> {
    fn agent(&self, v: UserId) -> &VehicleAgent {
        &self.scenario.vehicles[v.0 as usize]
    }

    fn trace(
        &mut self,
        ev: &SimEvent,
        vehicle: Option<UserId>,
        area: Option<AreaId>,
        outcome: String,
    ) {
        let line = format!(
            "{}|{}|{}|{:?}|{:?}|{}\n",
            ev.time.0,
            ev.sequence,
            ev.kind.name(),
            vehicle.map(|v| v.0),
            area.map(|a| a.0),
            outcome
        );
        self.hasher.update(line.as_bytes());
        if self.options.log_events {
            self.log.push(EventRecord {
                time: ev.time,
                event: ev.kind.name(),
                vehicle,
                area,
                outcome,
            });
        }
    }

    fn advance(&mut self, vehicle: UserId, now: SimTime) {
        let cfg = &self.scenario.config;
        let horizon = SimTime(cfg.horizon);
        let idx = vehicle.0 as usize;
        let item = self
            .agent(vehicle)
            .plan
            .get(self.vehicles[idx].next_item)
            .copied();
        let Some(item) = item else { return };
        if now >= horizon {
            let remaining = self.agent(vehicle).plan[self.vehicles[idx].next_item..]
                .iter()
                .filter(|p| matches!(p, PlanItem::Park { .. }))
                .count() as u64;
            self.engine.metrics_mut().unplayed_legs += remaining;
            self.vehicles[idx].next_item = self.agent(vehicle).plan.len();
            return;
        }
        self.vehicles[idx].next_item += 1;
        match item {
            PlanItem::OffSystem { duration } => {
                let out = match self.vehicles[idx].position {
                    Position::At(_) => cfg.travel.off_system_minutes,
                    Position::Outside => 0,
                };
                self.vehicles[idx].position = Position::Outside;
                self.queue.schedule(
                    now.plus(out + duration),
                    EventKind::TripPlanAdvance { vehicle },
                );
            }
            PlanItem::Park { area, duration } => {
                let target = self.engine.areas()[area.0 as usize].location;
                let travel = match self.vehicles[idx].position {
                    Position::Outside => cfg.travel.off_system_minutes,
                    Position::At(from) => {
                        let from = self.engine.areas()[from.0 as usize].location;
                        cfg.travel.between(&from, &target)
                    }
                };
                self.queue.schedule(
                    now,
                    EventKind::PlaceReservation {
                        vehicle,
                        area,
                        start: now.plus(travel),
                        duration,
                    },
                );
            }
        }
    }

    fn step(&mut self, ev: SimEvent) -> Result<(), SimError> {
        let now = ev.time;
        let mut reset_area = None;
        match ev.kind {
            EventKind::TripPlanAdvance { vehicle } => {
                self.trace(&ev, Some(vehicle), None, String::new());
                self.advance(vehicle, now);
            }
            EventKind::PlaceReservation {
                vehicle,
                area,
                start,
                duration,
            } => {
                let decision = self
                    .engine
                    .request_reservation(vehicle, area, start, duration, now)?;
                match decision {
                    ReservationDecision::Accepted(rid) => {
                        self.trace(
                            &ev,
                            Some(vehicle),
                            Some(area),
                            format!("accepted:{}", rid.0),
                        );
                        self.queue.schedule(
                            start,
                            EventKind::Arrive {
                                vehicle,
                                reservation: rid,
                            },
                        );
                    }
                    ReservationDecision::Rejected(reason) => {
                        self.trace(
                            &ev,
                            Some(vehicle),
                            Some(area),
                            format!("rejected:{reason:?}"),
                        );
                        self.queue
                            .schedule(start.plus(duration), EventKind::TripPlanAdvance { vehicle });
                    }
                }
            }
            EventKind::Arrive {
                vehicle,
                reservation,
            } => {
                let area = self.engine.reservation(reservation)?.area;
                match self.engine.handle_arrival(reservation, now)? {
                    ArrivalOutcome::Parked(a) => {
                        self.trace(&ev, Some(vehicle), Some(a), "parked".into());
                        self.vehicles[vehicle.0 as usize].position = Position::At(a);
                        let reserved = self.engine.reservation(reservation)?.duration;
                        let stay = self
                            .agent(vehicle)
                            .actual_stay(reserved, self.scenario.config.overstay_extra);
                        self.queue.schedule(
                            now.plus(stay),
                            EventKind::Depart {
                                vehicle,
                                reservation,
                            },
                        );
                    }
                    ArrivalOutcome::Redirected {
                        replacement,
                        area: alt,
                        arrives_at,
                    } => {
                        self.trace(
                            &ev,
                            Some(vehicle),
                            Some(area),
                            format!("redirected:{}", alt.0),
                        );
                        self.queue.schedule(
                            arrives_at,
                            EventKind::Arrive {
                                vehicle,
                                reservation: replacement,
                            },
                        );
                    }
                    ArrivalOutcome::NoPark => {
                        self.trace(&ev, Some(vehicle), Some(area), "no_park".into());
                        self.vehicles[vehicle.0 as usize].position = Position::At(area);
                        self.queue
                            .schedule(now, EventKind::TripPlanAdvance { vehicle });
                    }
                }
            }
            EventKind::Depart {
                vehicle,
                reservation,
            } => {
                let area = self.engine.reservation(reservation)?.area;
                let rec = self.engine.handle_departure(reservation, now)?;
                let outcome = if rec.on_time {
                    "on_time".to_string()
                } else {
                    format!("overstay:{}", rec.overstay_minutes)
                };
                self.trace(&ev, Some(vehicle), Some(area), outcome);
                self.queue
                    .schedule(now, EventKind::TripPlanAdvance { vehicle });
            }
            EventKind::BufferResetTick { area } => {
                self.engine.reset_buffer(area, now)?;
                let base = self.engine.area(area)?.buffer_state.base;
                self.trace(&ev, None, Some(area), format!("base:{base}"));
                reset_area = Some(area);
                let next = now.plus(self.engine.buffer_config().reset_period);
                if next.0 <= self.scenario.config.horizon {
                    self.queue
                        .schedule(next, EventKind::BufferResetTick { area });
                }
            }
        }

        for (i, a) in self.engine.areas().iter().enumerate() {
            self.peak_base = self.peak_base.max(a.buffer_state.base);
            if self.options.check_invariants
                && reset_area != Some(a.id)
                && a.buffer_state.base < self.prev_bases[i]
            {
                return Err(SimError::Invariant(format!(
                    "area {} buffer base fell from {} to {} without a reset at {now}",
                    a.id, self.prev_bases[i], a.buffer_state.base
                )));
            }
            self.prev_bases[i] = a.buffer_state.base;
        }
        if self.options.check_invariants {
            if now < self.last_time {
                return Err(SimError::Invariant(format!(
                    "time went backwards from {} to {now}",
                    self.last_time
                )));
            }
            self.engine.audit()?;
        }
        self.last_time = now;
        Ok(())
    }
}

pub fn run(scenario: &Scenario) -> Result<RunRecord, SimError> {
    run_with(scenario, RunOptions::default())
}

pub fn run_with(scenario: &Scenario, options: RunOptions) -> Result<RunRecord, SimError> {
    let cfg = &scenario.config;
    let areas = cfg
        .locations()
        .into_iter()
        .enumerate()
        .map(|(i, loc)| {
            ParkingArea::new(
                AreaId(i as u32),
                cfg.slots_per_area,
                loc,
                cfg.buffer.initial_state(),
            )
        })
        .collect::<Vec<_>>();
    let n_areas = areas.len();
    let mut engine = Engine::new(
        areas,
        cfg.buffer.clone(),
        cfg.reward.clone(),
        cfg.travel.clone(),
    )?;
    for v in &scenario.vehicles {
        engine.add_user(v.profile.clone());
    }

    let mut queue = EventQueue::new();
    for v in &scenario.vehicles {
        queue.schedule(v.start, EventKind::TripPlanAdvance { vehicle: v.id });
    }
    if cfg.buffer.is_dynamic() && cfg.buffer.reset_period <= cfg.horizon {
        for a in 0..n_areas {
            queue.schedule(
                SimTime(cfg.buffer.reset_period),
                EventKind::BufferResetTick {
                    area: AreaId(a as u32),
                },
            );
        }
    }

    let prev_bases = engine.areas().iter().map(|a| a.buffer_state.base).collect();
    let mut runner = Runner {
        scenario,
        engine,
        queue,
        vehicles: scenario
            .vehicles
            .iter()
            .map(|_| VehicleState {
                next_item: 0,
                position: Position::Outside,
            })
            .collect(),
        options,
        hasher: Sha256::new(),
        log: Vec::new(),
        last_time: SimTime::ZERO,
        prev_bases,
        peak_base: 0,
    };

    while let Some(ev) = runner.queue.pop() {
        runner.step(ev)?;
    }

    let mut metrics = runner.engine.metrics().clone();
    metrics.population = u64::from(scenario.population);
    metrics.planned_legs = scenario.planned_legs();

    if options.check_invariants {
        let accounted = metrics.completed_parks
            + metrics.no_park
            + metrics.no_reservation
            + metrics.unplayed_legs;
        if accounted != metrics.planned_legs {
            return Err(SimError::Invariant(format!(
                "{accounted} legs accounted for, {} planned",
                metrics.planned_legs
            )));
        }
    }

    let trace_digest = format!("{:x}", runner.hasher.finalize());
    Ok(RunRecord {
        run_index: scenario.run_index,
        metrics,
        trace_digest,
        events: runner.log,
        peak_buffer_base: runner.peak_base,
    })
}

/// Mean and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub stddev: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        let n = values.len();
        if n == 0 {
            return Summary::default();
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let stddev = if n > 1 {
            let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
            (ss / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Summary { mean, stddev }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AveragedMetrics {
    /// Per-run records in run-index order.
    pub runs: Vec<RunRecord>,
    pub no_park: Summary,
    pub no_reservation: Summary,
}

impl AveragedMetrics {
    pub fn from_runs(runs: Vec<RunRecord>) -> Self {
        let no_park = Summary::of(
            &runs
                .iter()
                .map(|r| r.metrics.no_park as f64)
                .collect::<Vec<_>>(),
        );
        let no_reservation = Summary::of(
            &runs
                .iter()
                .map(|r| r.metrics.no_reservation as f64)
                .collect::<Vec<_>>(),
        );
        Self {
            runs,
            no_park,
            no_reservation,
        }
    }

    /// Summary of an arbitrary per-run quantity.
    pub fn summarize(&self, f: impl Fn(&RunMetrics) -> u64) -> Summary {
        Summary::of(
            &self
                .runs
                .iter()
                .map(|r| f(&r.metrics) as f64)
                .collect::<Vec<_>>(),
        )
    }
}

pub fn run_averaged(cfg: &ScenarioConfig) -> Result<AveragedMetrics, SimError> {
    run_averaged_with(cfg, RunOptions::default())
}

/// Runs `cfg.runs` independent replications (in parallel) and summarises
/// them in run-index order.
pub fn run_averaged_with(
    cfg: &ScenarioConfig,
    options: RunOptions,
) -> Result<AveragedMetrics, SimError> {
    cfg.validate()?;
    let runs = (0..cfg.runs)
        .into_par_iter()
        .map(|i| {
            let scenario = build_scenario(cfg, i)?;
            run_with(&scenario, options)
        })
        .collect::<Result<Vec<_>, SimError>>()?;
    Ok(AveragedMetrics::from_runs(runs))
}
