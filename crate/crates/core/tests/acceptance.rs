//! Acceptance criteria, one PASS/FAIL line each. Runs the default
//! population and bad-fraction sweeps (5 runs per cell) with continuous
//! invariant checking, then the exhaustive and randomized oracle checks.
//! Exits non-zero if any criterion fails.

mod common;

use std::time::Instant;

use common::{area, engine, ledger_windows, minute_sweep};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slotguard::admission::{overlap_count, ArrivalOutcome, ReservationDecision};
use slotguard::buffer::BufferPolicyConfig;
use slotguard::experiment::{
    emit_csv, run_experiment_with, ExperimentSpec, ResultTable, SweepKind,
};
use slotguard::model::{AreaId, SimTime, UserId, UserProfile, Window};
use slotguard::reward::{record_on_time, record_overstay, RewardConfig};
use slotguard::sim::{build_scenario, run_with, RunOptions, ScenarioConfig, Summary};

const CHECKED: RunOptions = RunOptions {
    log_events: false,
    check_invariants: true,
};

type Verdict = Result<String, String>;
type Check<'a> = Box<dyn Fn() -> Verdict + 'a>;

struct Sweeps {
    population: Result<ResultTable, String>,
    bad_fraction: Result<ResultTable, String>,
}

fn sweep(kind: SweepKind) -> Result<ResultTable, String> {
    let spec = ExperimentSpec {
        kind,
        ..ExperimentSpec::default()
    };
    run_experiment_with(&spec, CHECKED).map_err(|e| e.to_string())
}

fn get(t: &ResultTable, v: f64, strategy: &str) -> (Summary, Summary, f64) {
    let c = t.cell(v, strategy).expect("cell present");
    let requests = c.result.summarize(|m| m.total_requests).mean;
    (c.result.no_park, c.result.no_reservation, requests)
}

fn fmt_point(t: &ResultTable, v: f64) -> String {
    let cells: Vec<String> = t
        .strategies
        .iter()
        .map(|s| {
            let (np, nr, _) = get(t, v, s);
            format!("{s} np={:.1} nr={:.1}", np.mean, nr.mean)
        })
        .collect();
    format!("{}={v}: {}", t.kind.name(), cells.join(", "))
}

fn table(r: &Result<ResultTable, String>) -> Result<&ResultTable, String> {
    r.as_ref().map_err(|e| format!("sweep failed: {e}"))
}

fn criterion_1(s: &Sweeps) -> Verdict {
    let t = table(&s.population)?;
    let mut failures = Vec::new();
    let mut notes = Vec::new();
    for v in t.sweep_values() {
        let (np0, nr0, req0) = get(t, v, "static-0");
        let max_np = t
            .strategies
            .iter()
            .map(|s| get(t, v, s).0.mean)
            .fold(f64::MIN, f64::max);
        let share = nr0.mean / req0;
        notes.push(format!(
            "pop {v}: static-0 np={:.1} (max {:.1}), nr={:.1}/{req0:.0} = {:.1}%",
            np0.mean,
            max_np,
            nr0.mean,
            100.0 * share
        ));
        if np0.mean < max_np {
            failures.push(format!(
                "pop {v}: static-0 no_park {:.1} below max {:.1}",
                np0.mean, max_np
            ));
        }
        if share > 0.05 {
            failures.push(format!(
                "pop {v}: no_reservation share {:.1}% > 5%",
                100.0 * share
            ));
        }
    }
    verdict(failures, notes)
}

fn criterion_2(s: &Sweeps) -> Verdict {
    let mut failures = Vec::new();
    let mut points = 0;
    for t in [table(&s.population)?, table(&s.bad_fraction)?] {
        for v in t.sweep_values() {
            points += 1;
            let (np0, nr0, _) = get(t, v, "static-0");
            let (np1, nr1, _) = get(t, v, "static-1");
            let (np3, nr3, _) = get(t, v, "static-3");
            if !(np0.mean >= np1.mean && np1.mean >= np3.mean) {
                failures.push(format!("{} no_park not decreasing", fmt_point(t, v)));
            }
            if !(nr0.mean <= nr1.mean && nr1.mean <= nr3.mean) {
                failures.push(format!("{} no_reservation not increasing", fmt_point(t, v)));
            }
        }
    }
    verdict(failures, vec![format!("{points} sweep points checked")])
}

fn criterion_3(s: &Sweeps) -> Verdict {
    let t = table(&s.population)?;
    let mut failures = Vec::new();
    let mut notes = Vec::new();
    for v in t.sweep_values() {
        let (np0, _, _) = get(t, v, "static-0");
        let (np3, nr3, _) = get(t, v, "static-3");
        let max_nr = t
            .strategies
            .iter()
            .map(|s| get(t, v, s).1.mean)
            .fold(f64::MIN, f64::max);
        notes.push(format!(
            "pop {v}: static-3 np={:.1} vs static-0 np={:.1}",
            np3.mean, np0.mean
        ));
        if np3.mean > 0.10 * np0.mean {
            failures.push(format!(
                "pop {v}: static-3 no_park {:.1} > 10% of {:.1}",
                np3.mean, np0.mean
            ));
        }
        if nr3.mean < max_nr {
            failures.push(format!(
                "pop {v}: static-3 no_reservation {:.1} below max {max_nr:.1}",
                nr3.mean
            ));
        }
    }
    verdict(failures, notes)
}

fn criterion_4(s: &Sweeps) -> Verdict {
    let mut failures = Vec::new();
    let mut points = 0;
    for t in [table(&s.population)?, table(&s.bad_fraction)?] {
        for v in t.sweep_values() {
            points += 1;
            let (np0, _, _) = get(t, v, "static-0");
            let (_, nr3, _) = get(t, v, "static-3");
            let (npd, nrd, _) = get(t, v, "dynamic");
            if npd.mean >= np0.mean {
                failures.push(format!(
                    "{}={v}: dynamic no_park {:.1} not below static-0 {:.1}",
                    t.kind.name(),
                    npd.mean,
                    np0.mean
                ));
            }
            if nrd.mean >= nr3.mean {
                failures.push(format!(
                    "{}={v}: dynamic no_reservation {:.1} not below static-3 {:.1}",
                    t.kind.name(),
                    nrd.mean,
                    nr3.mean
                ));
            }
        }
    }
    verdict(failures, vec![format!("{points} sweep points checked")])
}

fn criterion_5() -> Verdict {
    let mut failures = Vec::new();
    let mut notes = Vec::new();
    for seed in 1..=5 {
        let cfg = ScenarioConfig {
            bad_fraction: 0.0,
            buffer: BufferPolicyConfig::fixed(0),
            seed,
            ..ScenarioConfig::default()
        };
        let s = build_scenario(&cfg, 0).map_err(|e| e.to_string())?;
        let m = run_with(&s, CHECKED).map_err(|e| e.to_string())?.metrics;
        let want = u64::from(s.population) * u64::from(cfg.parks_per_vehicle);
        notes.push(format!(
            "seed {seed}: no_park={} completed={}/{want} (refused {})",
            m.no_park, m.completed_parks, m.no_reservation
        ));
        if m.no_park != 0 {
            failures.push(format!("seed {seed}: no_park = {}", m.no_park));
        }
        if m.completed_parks != want {
            failures.push(format!(
                "seed {seed}: completed_parks {} != {want} ({} capacity refusals, {} unplayed)",
                m.completed_parks, m.no_reservation, m.unplayed_legs
            ));
        }
    }
    verdict(failures, notes)
}

fn criterion_6() -> Verdict {
    let mut sequences = 0u64;
    for b in 1..=5u32 {
        for w in 1..=5u32 {
            let cfg = RewardConfig {
                benefits_per_star: b,
                warnings_per_star: w,
                ..RewardConfig::default()
            };
            for stars in 0..=5u8 {
                for benefits in 0..b {
                    for warnings in 0..w {
                        let p = UserProfile {
                            stars,
                            benefits,
                            warnings,
                            ..UserProfile::new(UserId(0), 0.0)
                        };
                        sequences += walk(&p, &cfg, 12)?;
                    }
                }
            }
        }
    }
    Ok(format!(
        "{sequences} event sequences of length <= 12 checked"
    ))
}

/// Depth-first over every event sequence starting at `p`; returns the
/// number of sequences visited.
fn walk(p: &UserProfile, cfg: &RewardConfig, depth: u32) -> Result<u64, String> {
    if depth == 0 {
        return Ok(1);
    }
    let mut n = 1;
    for overstay in [false, true] {
        let q = if overstay {
            record_overstay(p, cfg)
        } else {
            record_on_time(p, cfg)
        };
        if q.stars > 5 {
            return Err(format!("stars {} from {p:?}", q.stars));
        }
        if q.benefits >= cfg.benefits_per_star || q.warnings >= cfg.warnings_per_star {
            return Err(format!("counter overflow {q:?} from {p:?}"));
        }
        if overstay && q.benefits != 0 {
            return Err(format!("overstay kept benefits: {q:?}"));
        }
        n += walk(&q, cfg, depth - 1)?;
    }
    Ok(n)
}

fn criterion_7() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut decisions = 0;
    let mut extensions = 0;
    for i in 0..1000 {
        let n = rng.random_range(0..=100);
        let random_window = |rng: &mut ChaCha8Rng| {
            let start = rng.random_range(0..3779);
            let duration = rng.random_range(1..=(3780 - start).min(400));
            Window::new(SimTime(start), duration)
        };
        let ledger: Vec<Window> = (0..n).map(|_| random_window(&mut rng)).collect();
        let query = random_window(&mut rng);
        let over = rng.random_range(0..3);
        let fast = overlap_count(ledger.iter().copied(), query, over);
        let slow = minute_sweep(&ledger, query, over);
        if fast != slow {
            return Err(format!(
                "instance {i}: overlap_count {fast} != oracle {slow}"
            ));
        }

        // the same windows as admission requests, then one extension
        let cap = 10;
        let buffer = rng.random_range(0..4);
        let mut e = engine(
            vec![area(0, cap, 0.0, 0.0)],
            BufferPolicyConfig::fixed(buffer),
            101,
        );
        let a = AreaId(0);
        let mut accepted = Vec::new();
        for (u, w) in ledger.iter().enumerate() {
            let expect = minute_sweep(&ledger_windows(&e, a), *w, 0) < cap - buffer;
            let got = e
                .request_reservation(UserId(u as u32), a, w.start, w.duration, SimTime(0))
                .map_err(|e| e.to_string())?;
            decisions += 1;
            if matches!(got, ReservationDecision::Accepted(_)) != expect {
                return Err(format!(
                    "instance {i}: admission of {w:?} disagrees with oracle"
                ));
            }
            if let ReservationDecision::Accepted(rid) = got {
                accepted.push(rid);
            }
        }
        if accepted.is_empty() {
            continue;
        }
        let rid = accepted[rng.random_range(0..accepted.len())];
        let r = e.reservation(rid).map_err(|e| e.to_string())?.clone();
        if e.handle_arrival(rid, r.start).map_err(|e| e.to_string())? != ArrivalOutcome::Parked(a) {
            return Err(format!("instance {i}: arrival into an empty area failed"));
        }
        let others: Vec<Window> = e
            .area(a)
            .map_err(|e| e.to_string())?
            .ledger
            .iter()
            .filter(|id| **id != rid)
            .map(|id| {
                e.reservation(*id)
                    .map(|x| x.window())
                    .map_err(|e| e.to_string())
            })
            .collect::<Result<_, _>>()?;
        let extra = rng.random_range(1..=300);
        let expect = minute_sweep(&others, Window::new(r.end(), extra), 0) < cap - buffer;
        let got = e
            .request_extension(rid, extra, r.start)
            .map_err(|e| e.to_string())?;
        extensions += 1;
        if got != expect {
            return Err(format!(
                "instance {i}: extension by {extra} gave {got}, oracle {expect}"
            ));
        }
    }
    Ok(format!(
        "1000 ledgers: overlap counts, {decisions} admissions and {extensions} extensions match"
    ))
}

fn criterion_8(first: &Sweeps) -> Verdict {
    let a = table(&first.population)?;
    let b = sweep(SweepKind::Population)?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (pa, pb) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    emit_csv(a, &pa).map_err(|e| e.to_string())?;
    emit_csv(&b, &pb).map_err(|e| e.to_string())?;
    let (x, y) = (std::fs::read(&pa).unwrap(), std::fs::read(&pb).unwrap());
    if x == y {
        Ok(format!("{} bytes identical", x.len()))
    } else {
        Err("CSV files differ".into())
    }
}

fn criterion_9(s: &Sweeps) -> Verdict {
    // Both sweeps ran with invariant checking on, so any bound or
    // monotonicity violation would have failed them.
    let mut runs = 0;
    let mut peak = 0;
    let max = BufferPolicyConfig::dynamic().dynamic_max;
    for t in [table(&s.population)?, table(&s.bad_fraction)?] {
        for c in t.cells.iter().filter(|c| c.strategy == "dynamic") {
            for r in &c.result.runs {
                runs += 1;
                peak = peak.max(r.peak_buffer_base);
            }
        }
    }
    if peak > max {
        return Err(format!("peak base {peak} above {max}"));
    }
    Ok(format!(
        "{runs} dynamic runs checked after every event, peak base {peak}"
    ))
}

fn verdict(failures: Vec<String>, notes: Vec<String>) -> Verdict {
    if failures.is_empty() {
        Ok(notes.join("; "))
    } else {
        Err(failures.join("; "))
    }
}

fn main() {
    let started = Instant::now();
    let sweeps = Sweeps {
        population: sweep(SweepKind::Population),
        bad_fraction: sweep(SweepKind::BadFraction),
    };
    let sweep_time = started.elapsed();
    if let Ok(t) = &sweeps.population {
        for v in t.sweep_values() {
            println!("  {}", fmt_point(t, v));
        }
    }
    if let Ok(t) = &sweeps.bad_fraction {
        for v in t.sweep_values() {
            println!("  {}", fmt_point(t, v));
        }
    }
    println!("  sweeps took {:.1}s", sweep_time.as_secs_f64());

    let criteria: Vec<(&str, Check)> = vec![
        ("baseline ordering", Box::new(|| criterion_1(&sweeps))),
        ("static monotonicity", Box::new(|| criterion_2(&sweeps))),
        (
            "static-3 near-zero failures",
            Box::new(|| criterion_3(&sweeps)),
        ),
        ("dynamic trade-off", Box::new(|| criterion_4(&sweeps))),
        ("zero-noise sanity", Box::new(criterion_5)),
        ("reward state-machine exhaustion", Box::new(criterion_6)),
        ("admission oracle equivalence", Box::new(criterion_7)),
        ("determinism", Box::new(|| criterion_8(&sweeps))),
        ("buffer bounds", Box::new(|| criterion_9(&sweeps))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let result = check();
        let secs = t.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {}. {name} ({secs:.1}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {}. {name} ({secs:.1}s): {detail}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
