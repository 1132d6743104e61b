//! The four subcommands. Rows come out in (policy, sweep index) order no
//! matter how the work is scheduled.

use std::path::PathBuf;

use fogcache_core::bounds::{self, Sandwich};
use fogcache_core::ndt;
use fogcache_core::rng::GENERATOR_NAME;
use fogcache_core::sim::{run_trace, SimResult};
use fogcache_core::{Error as ModelError, Eviction, NdtPair, PolicyKind, SchemeKind, SystemParams};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, ExperimentConfig};
use crate::format::{g9, opt};

pub const META_SCHEMA_ID: &str = "fogcache.meta/v1";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for configuration problems, 3 for everything that fails later.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Analytic,
    Bounds,
    Simulate,
    SweepAll,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Analytic => "analytic",
            Command::Bounds => "bounds",
            Command::Simulate => "simulate",
            Command::SweepAll => "sweep-all",
        }
    }
}

/// One CSV row.
pub trait Row {
    const HEADER: &'static [&'static str];
    fn record(&self) -> Vec<String>;
}

fn param_cells(policy: Option<PolicyKind>, p: &SystemParams) -> Vec<String> {
    let mut cells = Vec::with_capacity(8);
    if let Some(policy) = policy {
        cells.push(policy.label());
    }
    cells.extend([p.m.to_string(), p.k.to_string(), p.n.to_string(), g9(p.mu), g9(p.r), g9(p.p), g9(p.alpha)]);
    cells
}

/// `Ok(None)` where the quantity needs fronthaul and `r = 0`.
fn defined<T>(value: Result<T, ModelError>) -> Result<Option<T>, ModelError> {
    match value {
        Ok(v) => Ok(Some(v)),
        Err(ModelError::FronthaulRequired(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticRow {
    pub policy: PolicyKind,
    pub params: SystemParams,
    /// Empty for policies without a closed form (LRU/FIFO eviction,
    /// pipelined reactive caching).
    pub ndt: Option<f64>,
    pub pair: Option<NdtPair>,
    pub cached_fraction: Option<f64>,
}

impl Row for AnalyticRow {
    const HEADER: &'static [&'static str] =
        &["policy", "M", "K", "N", "mu", "r", "p", "alpha", "ndt", "delta_F", "delta_E", "cached_fraction"];

    fn record(&self) -> Vec<String> {
        let mut cells = param_cells(Some(self.policy), &self.params);
        cells.push(opt(self.ndt));
        cells.push(opt(self.pair.map(|p| p.delta_f)));
        cells.push(opt(self.pair.map(|p| p.delta_e)));
        cells.push(opt(self.cached_fraction));
        cells
    }
}

fn analytic_point(policy: PolicyKind, params: SystemParams) -> Result<AnalyticRow, ModelError> {
    let mut row = AnalyticRow { policy, params, ndt: None, pair: None, cached_fraction: None };
    let with_pair = |row: &mut AnalyticRow, pair: Option<NdtPair>| {
        row.ndt = pair.map(|p| p.serial_total());
        row.pair = pair;
    };
    match policy {
        PolicyKind::CranOnly => {
            with_pair(&mut row, defined(ndt::scheme_ndt(SchemeKind::CranTransmission, &params))?)
        }
        PolicyKind::ReactiveKnown => {
            with_pair(&mut row, defined(ndt::reactive_known_decomposition(&params, params.mu))?)
        }
        PolicyKind::ReactiveAdaptiveKnown => {
            if let Some(a) = defined(ndt::adaptive_known_longterm(&params))? {
                with_pair(&mut row, Some(a.pair));
                row.cached_fraction = Some(a.cached_fraction);
            }
        }
        PolicyKind::ReactiveUnknown(Eviction::Random) => {
            with_pair(&mut row, defined(ndt::reactive_unknown_decomposition(&params))?)
        }
        PolicyKind::ProactivePipelined => {
            if let (Some(value), Some(placement)) = (
                defined(ndt::proactive_pipelined_longterm(&params))?,
                defined(ndt::proactive_placement(&params))?,
            ) {
                let push = if params.mu > 0.0 { params.p * params.mu / params.r } else { 0.0 };
                row.pair = Some(NdtPair::new(placement.delta_f + push, placement.delta_e));
                row.ndt = Some(value);
            }
        }
        PolicyKind::ReactiveUnknown(_) | PolicyKind::ReactivePipelined { .. } => {}
    }
    Ok(row)
}

/// Closed-form NDTs for every policy and sweep point.
pub fn cmd_analytic(config: &ExperimentConfig) -> Result<Vec<AnalyticRow>, CliError> {
    let points = config.points();
    let mut rows = Vec::with_capacity(points.len() * config.policies.len());
    for &policy in &config.policies {
        for &params in &points {
            rows.push(analytic_point(policy, params)?);
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsRow {
    pub params: SystemParams,
    pub offline_lb: f64,
    pub online_slot_lb: f64,
    pub longterm_lb: f64,
    pub offline_achievable: Option<f64>,
    pub reactive_known: Option<f64>,
    pub sandwich: Option<Sandwich>,
}

impl BoundsRow {
    /// Reactive caching with known popular set lies inside the envelope.
    pub fn certified(&self) -> Option<bool> {
        Some(self.sandwich?.contains(self.reactive_known?))
    }
}

impl Row for BoundsRow {
    const HEADER: &'static [&'static str] = &[
        "M",
        "K",
        "N",
        "mu",
        "r",
        "p",
        "alpha",
        "offline_lb",
        "online_slot_lb",
        "longterm_lb",
        "offline_achievable",
        "reactive_known",
        "sandwich_lower",
        "sandwich_upper",
        "claimed_range",
        "certified",
    ];

    fn record(&self) -> Vec<String> {
        let mut cells = param_cells(None, &self.params);
        cells.extend([g9(self.offline_lb), g9(self.online_slot_lb), g9(self.longterm_lb)]);
        cells.push(opt(self.offline_achievable));
        cells.push(opt(self.reactive_known));
        cells.push(opt(self.sandwich.map(|s| s.lower)));
        cells.push(opt(self.sandwich.map(|s| s.upper)));
        cells.push(self.sandwich.map(|s| s.in_claimed_range.to_string()).unwrap_or_default());
        cells.push(self.certified().map(|c| c.to_string()).unwrap_or_default());
        cells
    }
}

fn bounds_point(params: SystemParams) -> Result<BoundsRow, ModelError> {
    Ok(BoundsRow {
        params,
        offline_lb: bounds::offline_lower_bound(&params)?,
        online_slot_lb: bounds::online_slot_lower_bound(&params)?,
        longterm_lb: bounds::longterm_lower_bound(&params)?,
        offline_achievable: defined(ndt::offline_achievable(&params, params.mu))?.map(|p| p.serial_total()),
        reactive_known: defined(ndt::reactive_known_longterm(&params))?,
        sandwich: defined(bounds::sandwich_eval(&params))?,
    })
}

/// Converse bounds and the envelope; one row per sweep point.
pub fn cmd_bounds(config: &ExperimentConfig) -> Result<Vec<BoundsRow>, CliError> {
    Ok(config.points().into_iter().map(bounds_point).collect::<Result<_, _>>()?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimRow {
    pub policy: PolicyKind,
    pub params: SystemParams,
    pub result: SimResult,
}

impl Row for SimRow {
    const HEADER: &'static [&'static str] = &[
        "policy",
        "M",
        "K",
        "N",
        "mu",
        "r",
        "p",
        "alpha",
        "ndt_mean",
        "ndt_ci95",
        "miss_rate_mean",
        "delta_F_mean",
        "delta_E_mean",
        "T",
        "replications",
        "seed",
    ];

    fn record(&self) -> Vec<String> {
        let r = &self.result;
        let mut cells = param_cells(Some(self.policy), &self.params);
        cells.extend([
            g9(r.ndt_mean),
            g9(r.ndt_ci95_halfwidth),
            g9(r.miss_rate_mean),
            g9(r.delta_f_mean),
            g9(r.delta_e_mean),
            r.metadata.horizon.to_string(),
            r.metadata.replications.to_string(),
            r.metadata.master_seed.to_string(),
        ]);
        cells
    }
}

/// Monte Carlo estimates for every policy and sweep point. All points share
/// the configured master seed.
pub fn cmd_simulate(config: &ExperimentConfig) -> Result<Vec<SimRow>, CliError> {
    let points = config.points();
    let mut jobs = Vec::with_capacity(points.len() * config.policies.len());
    for &policy in &config.policies {
        for &params in &points {
            jobs.push((policy, config.sim_config(params, policy)?));
        }
    }
    let rows = jobs
        .into_par_iter()
        .map(|(policy, sim)| {
            run_trace(&sim).map(|result| SimRow { policy, params: sim.params, result })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(rows)
}

/// Contents of the `{prefix}_{command}.meta.json` sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub schema: String,
    pub command: String,
    pub version: String,
    pub generator: String,
    pub columns: Vec<String>,
    /// Warmup slots per row, in row order (simulate only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warmup_slots: Vec<u64>,
    pub config: ExperimentConfig,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Written {
    pub csv: PathBuf,
    pub meta: PathBuf,
}

fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

/// Serializes rows with the fixed header.
pub fn csv_bytes<R: Row>(rows: &[R]) -> Result<Vec<u8>, CliError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(R::HEADER)?;
    for row in rows {
        writer.write_record(row.record())?;
    }
    writer.into_inner().map_err(|e| CliError::Io {
        path: PathBuf::from("<buffer>"),
        source: std::io::Error::other(e.to_string()),
    })
}

fn write_table<R: Row>(
    config: &ExperimentConfig,
    command: Command,
    rows: &[R],
    warmup_slots: Vec<u64>,
) -> Result<Written, CliError> {
    let csv = config.output_path(command.name(), "csv");
    let meta = config.output_path(command.name(), "meta.json");
    if let Some(dir) = csv.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    std::fs::write(&csv, csv_bytes(rows)?).map_err(io_err(&csv))?;
    let metadata = Metadata {
        schema: META_SCHEMA_ID.into(),
        command: command.name().into(),
        version: env!("CARGO_PKG_VERSION").into(),
        generator: GENERATOR_NAME.into(),
        columns: R::HEADER.iter().map(|s| s.to_string()).collect(),
        warmup_slots,
        config: config.clone(),
    };
    let mut text = serde_json::to_string_pretty(&metadata)?;
    text.push('\n');
    std::fs::write(&meta, text).map_err(io_err(&meta))?;
    Ok(Written { csv, meta })
}

/// Runs `command` and writes its CSV and sidecar files.
pub fn run(config: &ExperimentConfig, command: Command) -> Result<Vec<Written>, CliError> {
    match command {
        Command::Analytic => Ok(vec![write_table(config, command, &cmd_analytic(config)?, Vec::new())?]),
        Command::Bounds => Ok(vec![write_table(config, command, &cmd_bounds(config)?, Vec::new())?]),
        Command::Simulate => {
            let rows = cmd_simulate(config)?;
            let warmups = rows.iter().map(|r| r.result.metadata.warmup_slots).collect();
            Ok(vec![write_table(config, command, &rows, warmups)?])
        }
        Command::SweepAll => {
            // Fail on a missing sim section before spending time on the rest.
            config.sim_config(config.base, config.policies[0])?;
            let mut out = Vec::new();
            for c in [Command::Analytic, Command::Bounds, Command::Simulate] {
                out.extend(run(config, c)?);
            }
            Ok(out)
        }
    }
}
