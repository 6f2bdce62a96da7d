use proptest::prelude::*;
use slotguard::model::{UserId, UserProfile};
use slotguard::reward::{compute_fee, record_on_time, record_overstay, RewardConfig};

fn cfg(b: u32, w: u32) -> RewardConfig {
    RewardConfig {
        benefits_per_star: b,
        warnings_per_star: w,
        ..RewardConfig::default()
    }
}

fn profile(stars: u8, benefits: u32, warnings: u32) -> UserProfile {
    UserProfile {
        stars,
        benefits,
        warnings,
        ..UserProfile::new(UserId(0), 0.0)
    }
}

/// Visits every reachable state from every initial state, for all event
/// sequences up to `depth`, deduplicating states per level.
fn explore(b: u32, w: u32, depth: usize) -> usize {
    let cfg = cfg(b, w);
    let mut frontier = std::collections::BTreeSet::new();
    for s in 0..=5u8 {
        for ben in 0..b {
            for war in 0..w {
                frontier.insert((s, ben, war));
            }
        }
    }
    let mut visited = frontier.len();
    for _ in 0..depth {
        let mut next = std::collections::BTreeSet::new();
        for &(s, ben, war) in &frontier {
            let p = profile(s, ben, war);
            let up = record_on_time(&p, &cfg);
            assert!(up.stars <= 5);
            assert!(up.benefits < b && up.warnings < w);
            assert_eq!(up.warnings, p.warnings);
            assert!(up.stars >= p.stars);
            let down = record_overstay(&p, &cfg);
            assert!(down.stars <= 5);
            assert!(down.benefits < b && down.warnings < w);
            assert_eq!(down.benefits, 0);
            assert!(down.stars <= p.stars);
            next.insert((up.stars, up.benefits, up.warnings));
            next.insert((down.stars, down.benefits, down.warnings));
        }
        visited += next.len();
        frontier = next;
    }
    visited
}

#[test]
fn exhaustive_state_space() {
    for b in 1..=5 {
        for w in 1..=5 {
            assert!(explore(b, w, 12) > 0);
        }
    }
}

/// Literal enumeration of all 2^12 sequences for the default thresholds,
/// as a cross-check on the deduplicated search above.
#[test]
fn all_sequences_default_thresholds() {
    let cfg = RewardConfig::default();
    for s in 0..=5u8 {
        for mask in 0u32..(1 << 12) {
            let mut p = profile(s, 0, 0);
            for i in 0..12 {
                p = if mask & (1 << i) == 0 {
                    record_on_time(&p, &cfg)
                } else {
                    record_overstay(&p, &cfg)
                };
                assert!(p.stars <= 5);
            }
        }
    }
}

#[test]
fn punctual_user_reaches_five_stars() {
    for b in 1..=5 {
        let cfg = cfg(b, 2);
        let mut p = UserProfile::new(UserId(0), 0.0);
        let mut n = 0;
        while p.stars < 5 {
            p = record_on_time(&p, &cfg);
            n += 1;
            assert_eq!(p.warnings, 0);
        }
        assert_eq!(n, (5 - 3) * b);
    }
}

proptest! {
    #[test]
    fn fee_monotone(stars in 0u8..5, minutes in 0u64..5000, more in 0u64..500, step in 0.0f64..0.5) {
        let cfg = RewardConfig { star_fee_step: step, ..RewardConfig::default() };
        let lo = compute_fee(&profile(stars + 1, 0, 0), minutes, &cfg);
        let hi = compute_fee(&profile(stars, 0, 0), minutes, &cfg);
        prop_assert!(lo <= hi);
        prop_assert!(lo >= 0.0);
        let longer = compute_fee(&profile(stars, 0, 0), minutes + more, &cfg);
        prop_assert!(longer >= hi);
    }
}
