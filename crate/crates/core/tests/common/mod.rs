//! Brute-force oracles and fixtures shared by the integration tests.

#![allow(dead_code)]

use slotguard::admission::Engine;
use slotguard::buffer::BufferPolicyConfig;
use slotguard::model::{AreaId, Location, ParkingArea, SimTime, UserId, UserProfile, Window};
use slotguard::reward::RewardConfig;
use slotguard::travel::TravelModel;

/// Peak coverage over every minute of `window`, one minute at a time.
pub fn minute_sweep(ledger: &[Window], window: Window, overstayers: u32) -> u32 {
    let mut peak = 0;
    for t in window.start.0..window.end().0 {
        let live = ledger.iter().filter(|w| w.contains(SimTime(t))).count() as u32;
        peak = peak.max(live);
    }
    peak + overstayers
}

/// Nearest non-full area other than `origin` by checking every area.
pub fn nearest_free(areas: &[ParkingArea], origin: AreaId) -> Option<AreaId> {
    let o = areas[origin.0 as usize].location;
    let mut best: Option<(f64, AreaId)> = None;
    for a in areas {
        if a.id == origin || a.occupancy() >= a.capacity {
            continue;
        }
        let d = ((a.location.x - o.x).powi(2) + (a.location.y - o.y).powi(2)).sqrt();
        best = match best {
            Some((bd, bid)) if bd < d || (bd == d && bid < a.id) => Some((bd, bid)),
            _ => Some((d, a.id)),
        };
    }
    best.map(|(_, id)| id)
}

pub fn area(id: u32, capacity: u32, x: f64, y: f64) -> ParkingArea {
    ParkingArea::new(
        AreaId(id),
        capacity,
        Location::new(x, y),
        BufferPolicyConfig::default().initial_state(),
    )
}

/// Engine over `areas` with `users` rich users (no credit refusals).
pub fn engine(areas: Vec<ParkingArea>, buffer: BufferPolicyConfig, users: u32) -> Engine {
    let reward = RewardConfig {
        initial_credit: 1e12,
        ..RewardConfig::default()
    };
    let mut e = Engine::new(areas, buffer, reward, TravelModel::default()).unwrap();
    for u in 0..users {
        e.add_user(UserProfile::new(UserId(u), 1e12));
    }
    e
}

/// Windows of the reservations currently in an area's ledger.
pub fn ledger_windows(e: &Engine, a: AreaId) -> Vec<Window> {
    e.area(a)
        .unwrap()
        .ledger
        .iter()
        .map(|rid| e.reservation(*rid).unwrap().window())
        .collect()
}
