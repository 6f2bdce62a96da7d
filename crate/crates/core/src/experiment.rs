//! Parameter sweeps over buffer strategies, and their tabular output.
//!
//! An [`ExperimentSpec`] names a sweep (population size or fraction of
//! badly behaved vehicles), the values to visit, and the buffer strategies
//! to compare. [`run_experiment`] runs every (value, strategy) cell and
//! returns a [`ResultTable`], which the `emit_*` functions write out.
//!
//! Scenario and experiment files are TOML with a top-level
//! `schema_version`. Unknown keys are rejected.
//!
//! ```
//! use slotguard::experiment::{run_experiment, ExperimentSpec, SweepKind};
//!
//! let mut spec = ExperimentSpec::default();
//! spec.kind = SweepKind::Population;
//! spec.population_values = vec![20];
//! spec.base.runs = 2;
//! let table = run_experiment(&spec).unwrap();
//! assert_eq!(table.cells.len(), 4);
//! assert!(table.cells.iter().all(|c| c.result.runs.len() == 2));
//! ```

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::buffer::BufferPolicyConfig;
use crate::sim::{
    run_averaged_with, AveragedMetrics, EventRecord, RunOptions, RunRecord, ScenarioConfig,
    Summary, RNG_ALGORITHM, SCHEMA_VERSION,
};
use crate::{ConfigError, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    Population,
    BadFraction,
}

impl SweepKind {
    pub fn name(self) -> &'static str {
        match self {
            SweepKind::Population => "population",
            SweepKind::BadFraction => "bad_fraction",
        }
    }
}

/// A named buffer policy to compare.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Strategy {
    pub name: String,
    #[serde(default)]
    pub buffer: BufferPolicyConfig,
}

impl Strategy {
    pub fn new(buffer: BufferPolicyConfig) -> Self {
        Self {
            name: buffer.label(),
            buffer,
        }
    }
}

/// The four strategies compared by default: static buffers of 0, 1 and 3
/// slots, and the dynamic policy.
pub fn default_strategies() -> Vec<Strategy> {
    vec![
        Strategy::new(BufferPolicyConfig::fixed(0)),
        Strategy::new(BufferPolicyConfig::fixed(1)),
        Strategy::new(BufferPolicyConfig::fixed(3)),
        Strategy::new(BufferPolicyConfig::dynamic()),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSpec {
    pub schema_version: u32,
    pub kind: SweepKind,
    pub population_values: Vec<u32>,
    pub bad_fraction_values: Vec<f64>,
    /// Population range drawn per run in a bad-fraction sweep.
    pub bad_fraction_population_range: [u32; 2],
    pub strategies: Vec<Strategy>,
    pub base: ScenarioConfig,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            kind: SweepKind::Population,
            population_values: vec![80, 90, 100, 110],
            // 0.25, 0.30, ..., 0.50 built from integers to avoid drift
            bad_fraction_values: (5..=10).map(|i| f64::from(i) * 5.0 / 100.0).collect(),
            bad_fraction_population_range: [80, 110],
            strategies: default_strategies(),
            base: ScenarioConfig::default(),
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |msg: String| Err(ConfigError::Invalid(msg));
        if self.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::Schema {
                found: self.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        match self.kind {
            SweepKind::Population if self.population_values.is_empty() => {
                return invalid("population_values is empty".into())
            }
            SweepKind::BadFraction if self.bad_fraction_values.is_empty() => {
                return invalid("bad_fraction_values is empty".into())
            }
            _ => {}
        }
        if self.strategies.is_empty() {
            return invalid("no strategies to compare".into());
        }
        let mut names = BTreeSet::new();
        for s in &self.strategies {
            if s.name.trim().is_empty() {
                return invalid("strategy names must not be blank".into());
            }
            if !names.insert(s.name.as_str()) {
                return invalid(format!("duplicate strategy name {:?}", s.name));
            }
            s.buffer
                .validate(self.base.slots_per_area)
                .map_err(|e| ConfigError::Invalid(format!("strategy {:?}: {e}", s.name)))?;
        }
        // every cell config must be runnable; checking them all up front
        // means a sweep never dies half way through
        for value in self.sweep_values() {
            for s in &self.strategies {
                self.cell_config(value, s).validate().map_err(|e| {
                    ConfigError::Invalid(format!(
                        "{} = {value}, strategy {:?}: {e}",
                        self.kind.name(),
                        s.name
                    ))
                })?;
            }
        }
        Ok(())
    }

    /// The swept values in file order.
    pub fn sweep_values(&self) -> Vec<f64> {
        match self.kind {
            SweepKind::Population => self
                .population_values
                .iter()
                .map(|&p| f64::from(p))
                .collect(),
            SweepKind::BadFraction => self.bad_fraction_values.clone(),
        }
    }

    /// Scenario for one cell of the sweep.
    pub fn cell_config(&self, value: f64, strategy: &Strategy) -> ScenarioConfig {
        let mut cfg = self.base.clone();
        cfg.buffer = strategy.buffer.clone();
        match self.kind {
            SweepKind::Population => {
                cfg.population = value as u32;
                cfg.population_range = None;
            }
            SweepKind::BadFraction => {
                cfg.bad_fraction = value;
                cfg.population_range = Some(self.bad_fraction_population_range);
            }
        }
        cfg
    }

    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self, ConfigError> {
        let table = parse_versioned(text, origin)?;
        let spec: ExperimentSpec = table
            .try_into()
            .map_err(|e: toml::de::Error| parse_error(origin, e))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::from_toml_str(&read(path)?, path)
    }
}

/// A single-scenario file: `schema_version` plus [`ScenarioConfig`] fields.
pub fn scenario_from_toml_str(text: &str, origin: &Path) -> Result<ScenarioConfig, ConfigError> {
    let mut table = parse_versioned(text, origin)?;
    table.remove("schema_version");
    let cfg: ScenarioConfig = table
        .try_into()
        .map_err(|e: toml::de::Error| parse_error(origin, e))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_scenario(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    scenario_from_toml_str(&read(path)?, path)
}

fn read(path: &Path) -> Result<String, ConfigError> {
    fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_error(origin: &Path, e: impl std::fmt::Display) -> ConfigError {
    ConfigError::Parse {
        path: origin.to_path_buf(),
        message: e.to_string().trim_end().to_string(),
    }
}

fn parse_versioned(text: &str, origin: &Path) -> Result<toml::Table, ConfigError> {
    let table: toml::Table = text.parse().map_err(|e| parse_error(origin, e))?;
    let version = match table.get("schema_version") {
        Some(toml::Value::Integer(v)) => *v,
        Some(_) => return Err(parse_error(origin, "schema_version must be an integer")),
        None => return Err(parse_error(origin, "missing schema_version")),
    };
    if version != i64::from(SCHEMA_VERSION) {
        return Err(ConfigError::Schema {
            found: u32::try_from(version).unwrap_or(u32::MAX),
            expected: SCHEMA_VERSION,
        });
    }
    Ok(table)
}

/// Results for one (sweep value, strategy) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub sweep_value: f64,
    pub strategy: String,
    pub result: AveragedMetrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub kind: SweepKind,
    /// Strategy names in spec order.
    pub strategies: Vec<String>,
    /// Cells in sweep-value order, then spec strategy order.
    pub cells: Vec<Cell>,
    pub seed: u64,
    pub runs: u32,
}

/// The two reported metrics, in output order.
pub const METRICS: [&str; 2] = ["no_park", "no_reservation"];

impl Cell {
    pub fn metric(&self, name: &str) -> Option<Summary> {
        match name {
            "no_park" => Some(self.result.no_park),
            "no_reservation" => Some(self.result.no_reservation),
            _ => None,
        }
    }
}

impl ResultTable {
    pub fn cell(&self, sweep_value: f64, strategy: &str) -> Option<&Cell> {
        self.cells
            .iter()
            .find(|c| c.sweep_value == sweep_value && c.strategy == strategy)
    }

    /// Distinct sweep values, ascending.
    pub fn sweep_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.cells.iter().map(|c| c.sweep_value).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    fn format_value(&self, v: f64) -> String {
        match self.kind {
            SweepKind::Population => format!("{}", v as u32),
            SweepKind::BadFraction => format!("{v:.2}"),
        }
    }
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ResultTable, SimError> {
    run_experiment_with(spec, RunOptions::default())
}

pub fn run_experiment_with(
    spec: &ExperimentSpec,
    options: RunOptions,
) -> Result<ResultTable, SimError> {
    spec.validate()?;
    let jobs: Vec<(f64, &Strategy)> = spec
        .sweep_values()
        .into_iter()
        .flat_map(|v| spec.strategies.iter().map(move |s| (v, s)))
        .collect();
    let cells = jobs
        .into_par_iter()
        .map(|(value, strategy)| {
            let result = run_averaged_with(&spec.cell_config(value, strategy), options)?;
            Ok(Cell {
                sweep_value: value,
                strategy: strategy.name.clone(),
                result,
            })
        })
        .collect::<Result<Vec<_>, SimError>>()?;
    Ok(ResultTable {
        kind: spec.kind,
        strategies: spec.strategies.iter().map(|s| s.name.clone()).collect(),
        cells,
        seed: spec.base.seed,
        runs: spec.base.runs,
    })
}

fn output_error(path: &Path, source: std::io::Error) -> SimError {
    SimError::Output {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_error(path: &Path, e: csv::Error) -> SimError {
    output_error(path, std::io::Error::other(e))
}

fn ensure_nonempty(t: &ResultTable) -> Result<(), SimError> {
    if t.cells.is_empty() || t.strategies.is_empty() {
        return Err(SimError::Config(ConfigError::Invalid(
            "result table is empty".into(),
        )));
    }
    Ok(())
}

fn write_rows(path: &Path, rows: Vec<Vec<String>>) -> Result<(), SimError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| output_error(path, e))
}

/// Writes the long-format summary table:
/// `sweep_kind,sweep_value,strategy,metric,mean,stddev,runs`.
pub fn emit_csv(t: &ResultTable, path: &Path) -> Result<(), SimError> {
    ensure_nonempty(t)?;
    let mut keyed: Vec<(f64, &str, &str, Summary, usize)> = Vec::new();
    for c in &t.cells {
        for m in METRICS {
            let s = c.metric(m).expect("known metric");
            keyed.push((c.sweep_value, &c.strategy, m, s, c.result.runs.len()));
        }
    }
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(b.1)).then(a.2.cmp(b.2)));

    let mut rows = vec![[
        "sweep_kind",
        "sweep_value",
        "strategy",
        "metric",
        "mean",
        "stddev",
        "runs",
    ]
    .map(String::from)
    .to_vec()];
    for (v, strategy, metric, s, runs) in keyed {
        rows.push(vec![
            t.kind.name().to_string(),
            t.format_value(v),
            strategy.to_string(),
            metric.to_string(),
            format!("{:.4}", s.mean),
            format!("{:.4}", s.stddev),
            runs.to_string(),
        ]);
    }
    write_rows(path, rows)
}

/// Writes one wide series file per metric into `dir`
/// (`<metric>.csv`: the sweep value, then one mean column per strategy in
/// spec order). Returns the paths written.
pub fn emit_plot_data(t: &ResultTable, dir: &Path) -> Result<Vec<PathBuf>, SimError> {
    ensure_nonempty(t)?;
    fs::create_dir_all(dir).map_err(|e| output_error(dir, e))?;
    let mut written = Vec::new();
    for m in METRICS {
        let mut header = vec![t.kind.name().to_string()];
        header.extend(t.strategies.iter().cloned());
        let mut rows = vec![header];
        for v in t.sweep_values() {
            let mut row = vec![t.format_value(v)];
            for s in &t.strategies {
                let cell = t
                    .cell(v, s)
                    .ok_or_else(|| SimError::Invariant(format!("missing cell ({v}, {s})")))?;
                row.push(format!("{:.4}", cell.metric(m).expect("known metric").mean));
            }
            rows.push(row);
        }
        let path = dir.join(format!("{m}.csv"));
        write_rows(&path, rows)?;
        written.push(path);
    }
    Ok(written)
}

const RUN_COLUMNS: [&str; 12] = [
    "run",
    "population",
    "no_park",
    "no_reservation",
    "refused_by_reputation",
    "completed_parks",
    "overstays",
    "redirects",
    "total_requests",
    "unplayed_legs",
    "peak_buffer_base",
    "trace_digest",
];

fn run_row(r: &RunRecord) -> Vec<String> {
    let m = &r.metrics;
    vec![
        r.run_index.to_string(),
        m.population.to_string(),
        m.no_park.to_string(),
        m.no_reservation.to_string(),
        m.refused_by_reputation.to_string(),
        m.completed_parks.to_string(),
        m.overstays.to_string(),
        m.redirects.to_string(),
        m.total_requests.to_string(),
        m.unplayed_legs.to_string(),
        r.peak_buffer_base.to_string(),
        r.trace_digest.clone(),
    ]
}

/// Writes every individual run of a sweep: the sampled population, all
/// counters and the trace digest.
pub fn emit_runs_csv(t: &ResultTable, path: &Path) -> Result<(), SimError> {
    ensure_nonempty(t)?;
    let mut cells: Vec<&Cell> = t.cells.iter().collect();
    cells.sort_by(|a, b| {
        a.sweep_value
            .total_cmp(&b.sweep_value)
            .then(a.strategy.cmp(&b.strategy))
    });
    let mut header = vec!["sweep_value".to_string(), "strategy".to_string()];
    header.extend(RUN_COLUMNS.map(String::from));
    let mut rows = vec![header];
    for c in cells {
        for r in &c.result.runs {
            let mut row = vec![t.format_value(c.sweep_value), c.strategy.clone()];
            row.extend(run_row(r));
            rows.push(row);
        }
    }
    write_rows(path, rows)
}

/// Per-run counters for the replications of a single scenario.
pub fn emit_run_metrics(runs: &[RunRecord], path: &Path) -> Result<(), SimError> {
    let mut rows = vec![RUN_COLUMNS.map(String::from).to_vec()];
    rows.extend(runs.iter().map(run_row));
    write_rows(path, rows)
}

/// The event log of one run (empty unless it was run with `log_events`).
pub fn emit_event_log(record: &RunRecord, path: &Path) -> Result<(), SimError> {
    let mut rows = vec![EventRecord::CSV_HEADER
        .split(',')
        .map(String::from)
        .collect()];
    rows.extend(record.events.iter().map(|e| {
        let opt = |v: Option<u32>| v.map(|x| x.to_string()).unwrap_or_default();
        vec![
            e.time.0.to_string(),
            e.event.to_string(),
            opt(e.vehicle.map(|v| v.0)),
            opt(e.area.map(|a| a.0)),
            e.outcome.clone(),
        ]
    }));
    write_rows(path, rows)
}

#[derive(Serialize)]
struct Metadata<'a> {
    schema_version: u32,
    generator: &'a str,
    rng: &'a str,
    seed: u64,
    runs: u32,
    sweep_kind: &'a str,
    strategies: &'a [String],
}

/// Records what produced a result directory.
pub fn emit_metadata(t: &ResultTable, path: &Path) -> Result<(), SimError> {
    let meta = Metadata {
        schema_version: SCHEMA_VERSION,
        generator: concat!("slotguard ", env!("CARGO_PKG_VERSION")),
        rng: RNG_ALGORITHM,
        seed: t.seed,
        runs: t.runs,
        sweep_kind: t.kind.name(),
        strategies: &t.strategies,
    };
    let text = toml::to_string(&meta).map_err(|e| SimError::Invariant(e.to_string()))?;
    fs::write(path, text).map_err(|e| output_error(path, e))
}

/// Writes `summary.csv`, `runs.csv`, `metadata.toml` and the per-metric
/// series files into `dir`.
pub fn emit_all(t: &ResultTable, dir: &Path) -> Result<Vec<PathBuf>, SimError> {
    fs::create_dir_all(dir).map_err(|e| output_error(dir, e))?;
    let summary = dir.join("summary.csv");
    emit_csv(t, &summary)?;
    let runs = dir.join("runs.csv");
    emit_runs_csv(t, &runs)?;
    let meta = dir.join("metadata.toml");
    emit_metadata(t, &meta)?;
    let mut written = vec![summary, runs, meta];
    written.extend(emit_plot_data(t, dir)?);
    Ok(written)
}
