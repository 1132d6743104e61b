//! Per-slot Monte Carlo simulation of the online caching policies.
//!
//! Each slot runs, in order:
//!
//! 1. one popularity step;
//! 2. known-set policies drop the file that left the popular set, and the
//!    proactive policy pushes the file that entered it;
//! 3. `K` distinct requests are drawn from the popular set;
//! 4. `R_t`, the number of requested files absent from the cache, is counted;
//! 5. missing files are fetched at the per-file fraction, evicting if full;
//! 6. the slot NDT is the offline decomposition of the policy plus the
//!    fronthaul cost of the fetched (or pushed) fractions.
//!
//! The per-slot NDT depends only on `(R_t, pushed)`, so each replication
//! keeps a histogram over that pair and derives its means exactly from it.

mod cache;
mod oracle;

pub use cache::{CacheEntry, CacheState};
pub use oracle::{markov_oracle, markov_stationary_misses};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Eviction, NdtPair, PolicyKind, SchemeKind, SystemParams};
use crate::ndt;
use crate::popularity::{FileId, PopularSet, PopularityChange, RequestSampler};
use crate::rng::{self, SimRng};

/// z-value of the two-sided 95% normal interval.
const Z95: f64 = 1.959_963_984_540_054;

/// One simulated slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotRecord {
    pub t: u64,
    /// Requested files that were not cached at request time.
    pub misses: u32,
    /// Whether a new popular file was pushed proactively in this slot.
    pub pushed: bool,
    pub delta_f: f64,
    pub delta_e: f64,
    pub ndt_serial: f64,
    pub ndt_pipelined: f64,
}

/// Static per-policy quantities of the slot NDT.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotPlan {
    /// Offline decomposition used for delivery.
    pub base: NdtPair,
    /// Fraction of each file fetched on a miss (and cached).
    pub fraction: f64,
    pub capacity_files: usize,
    /// `None` for known-set eviction (drop files that left the popular set).
    pub eviction: Option<Eviction>,
    pub caches: bool,
    pub proactive: bool,
    pub pipelined: bool,
    /// Fronthaul cost of fetching one file at `fraction`.
    pub fetch_cost: f64,
    /// Fronthaul cost of one proactive push.
    pub push_cost: f64,
}

impl SlotPlan {
    /// Quantities of `policy` at `params`; fails if the policy needs
    /// fronthaul and `r = 0`.
    pub fn new(params: &SystemParams, policy: PolicyKind) -> Result<Self> {
        let params = params.validate()?;
        let n = params.n;
        let known = |fraction: f64, base: NdtPair| SlotPlan {
            base,
            fraction,
            capacity_files: n,
            eviction: None,
            caches: fraction > 0.0,
            proactive: false,
            pipelined: policy.is_pipelined(),
            fetch_cost: 0.0,
            push_cost: 0.0,
        };
        let unknown = |eviction: Eviction| -> Result<SlotPlan> {
            let capacity = effective_capacity(&params);
            let fraction = params.mu * n as f64 / capacity as f64;
            Ok(SlotPlan {
                capacity_files: capacity,
                eviction: Some(eviction),
                ..known(fraction, ndt::offline_achievable(&params, fraction)?)
            })
        };
        let mut plan = match policy {
            PolicyKind::CranOnly => SlotPlan {
                caches: false,
                ..known(0.0, ndt::scheme_ndt(SchemeKind::CranTransmission, &params)?)
            },
            PolicyKind::ReactiveKnown | PolicyKind::ReactivePipelined { known: true } => {
                known(params.mu, ndt::offline_achievable(&params, params.mu)?)
            }
            PolicyKind::ReactiveAdaptiveKnown => {
                let adaptive = ndt::adaptive_known_longterm(&params)?;
                let f = adaptive.cached_fraction;
                known(f, ndt::offline_achievable(&params, f)?)
            }
            PolicyKind::ReactiveUnknown(eviction) => unknown(eviction)?,
            PolicyKind::ReactivePipelined { known: false } => unknown(Eviction::Random)?,
            PolicyKind::ProactivePipelined => SlotPlan {
                proactive: params.mu > 0.0,
                ..known(params.mu, ndt::proactive_placement(&params)?)
            },
        };
        if plan.caches {
            let r = params.require_fronthaul("reactive cache refresh")?;
            plan.fetch_cost = plan.fraction / r;
            if plan.proactive {
                plan.push_cost = plan.fraction / r;
            }
        }
        Ok(plan)
    }

    /// NDT decomposition of a slot with `misses` fetches and an optional push.
    pub fn slot_pair(&self, misses: u32, pushed: bool) -> NdtPair {
        let fetch = if self.caches { self.fetch_cost * misses as f64 } else { 0.0 };
        let push = if pushed { self.push_cost } else { 0.0 };
        NdtPair::new(self.base.delta_f + fetch + push, self.base.delta_e)
    }

    fn reported(&self, pair: &NdtPair) -> f64 {
        if self.pipelined {
            pair.pipelined_total()
        } else {
            pair.serial_total()
        }
    }
}

/// `floor(alpha N)` files for the unknown-set policies.
pub fn effective_capacity(params: &SystemParams) -> usize {
    ((params.alpha * params.n as f64).floor() as usize).max(params.n)
}

/// `alpha' = floor(alpha N) / N`, the over-provisioning actually realized.
pub fn effective_alpha(params: &SystemParams) -> f64 {
    effective_capacity(params) as f64 / params.n as f64
}

/// State of one simulated trace.
#[derive(Debug, Clone)]
pub struct Trace {
    plan: SlotPlan,
    p: f64,
    k: usize,
    popular: PopularSet,
    cache: CacheState,
    sampler: RequestSampler,
    demands: Vec<FileId>,
    fetches: Vec<FileId>,
    slot: u64,
}

impl Trace {
    /// Empty caches and the initial popular set `{0, .., N-1}`.
    pub fn new(params: &SystemParams, policy: PolicyKind) -> Result<Self> {
        let plan = SlotPlan::new(params, policy)?;
        Ok(Self {
            plan,
            p: params.p,
            k: params.k,
            popular: PopularSet::new(params.n),
            cache: CacheState::new(plan.capacity_files, plan.fraction),
            sampler: RequestSampler::new(params.n),
            demands: Vec::with_capacity(params.k),
            fetches: Vec::with_capacity(params.k),
            slot: 0,
        })
    }

    pub fn plan(&self) -> &SlotPlan {
        &self.plan
    }

    pub fn cache(&self) -> &CacheState {
        &self.cache
    }

    pub fn popular(&self) -> &PopularSet {
        &self.popular
    }

    /// Files requested in the last slot.
    pub fn last_demands(&self) -> &[FileId] {
        &self.demands
    }

    /// Runs one slot.
    pub fn run_slot<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<SlotRecord> {
        self.slot += 1;
        let t = self.slot;
        let change = self.popular.step(self.p, rng);
        let pushed = self.refresh_known(change, t);

        self.sampler.draw(&self.popular, self.k, rng, &mut self.demands)?;
        self.fetches.clear();
        for &id in &self.demands {
            if !self.cache.touch(id, t) {
                self.fetches.push(id);
            }
        }
        let misses = self.fetches.len() as u32;
        if self.plan.caches {
            for &id in &self.fetches {
                if self.cache.is_full() {
                    // Known-set caches only hold popular files and never fill up here.
                    debug_assert!(self.plan.eviction.is_some());
                    let rule = self.plan.eviction.unwrap_or(Eviction::Lru);
                    // Files delivered in this slot stay put; one always remains
                    // eligible because capacity >= N >= K.
                    self.cache.evict(rule, rng, &self.demands)?;
                }
                self.cache.insert(id, t);
            }
        }
        debug_assert!(self.cache.len() <= self.cache.capacity_files());

        let pair = self.plan.slot_pair(misses, pushed);
        Ok(SlotRecord {
            t,
            misses,
            pushed,
            delta_f: pair.delta_f,
            delta_e: pair.delta_e,
            ndt_serial: pair.serial_total(),
            ndt_pipelined: pair.pipelined_total(),
        })
    }

    /// Known-set bookkeeping after a popularity step; returns whether a push
    /// happened.
    fn refresh_known(&mut self, change: PopularityChange, t: u64) -> bool {
        if self.plan.eviction.is_some() || !self.plan.caches {
            return false;
        }
        if let Some(old) = change.replaced {
            self.cache.remove(old);
        }
        match change.inserted {
            Some(new) if self.plan.proactive => {
                // The cache only holds popular files, so there is room.
                self.cache.insert(new, t);
                true
            }
            _ => false,
        }
    }
}

/// Monte Carlo configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub params: SystemParams,
    pub policy: PolicyKind,
    pub horizon: u64,
    pub replications: u32,
    pub master_seed: u64,
    /// Slots excluded from the averages; `None` picks [`SimConfig::default_warmup`].
    pub warmup_slots: Option<u64>,
}

impl SimConfig {
    pub fn new(params: SystemParams, policy: PolicyKind, horizon: u64, replications: u32, master_seed: u64) -> Self {
        Self {
            params,
            policy,
            horizon,
            replications,
            master_seed,
            warmup_slots: None,
        }
    }

    /// `min(10 N / max(p, 1/T), T / 10)`, rounded.
    pub fn default_warmup(&self) -> u64 {
        let t = self.horizon as f64;
        let churn = self.params.p.max(1.0 / t);
        (10.0 * self.params.n as f64 / churn).min(t / 10.0).round() as u64
    }

    pub fn warmup(&self) -> u64 {
        self.warmup_slots.unwrap_or_else(|| self.default_warmup())
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.horizon < 1 {
            return Err(Error::InvalidParams("horizon must be at least 1".into()));
        }
        if self.replications < 1 {
            return Err(Error::InvalidParams("replications must be at least 1".into()));
        }
        if self.warmup() >= self.horizon {
            return Err(Error::InvalidParams("warmup must be shorter than the horizon".into()));
        }
        Ok(())
    }
}

/// Averages of one replication over the post-warmup slots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicationStats {
    pub ndt: f64,
    pub ndt_serial: f64,
    pub ndt_pipelined: f64,
    pub misses: f64,
    pub delta_f: f64,
    pub delta_e: f64,
    pub slots: u64,
}

/// Run metadata echoed next to every result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimMetadata {
    pub master_seed: u64,
    pub generator: String,
    pub horizon: u64,
    pub replications: u32,
    pub warmup_slots: u64,
    pub policy: PolicyKind,
    pub params: SystemParams,
}

/// Aggregate over replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    /// Serial or pipelined long-term NDT, according to the policy.
    pub ndt_mean: f64,
    pub ndt_ci95_halfwidth: f64,
    /// Standard error of `ndt_mean` across replications.
    pub ndt_std_error: f64,
    /// Mean `R_t` per slot.
    pub miss_rate_mean: f64,
    pub miss_rate_std_error: f64,
    pub delta_f_mean: f64,
    pub delta_e_mean: f64,
    pub ndt_serial_mean: f64,
    pub ndt_pipelined_mean: f64,
    pub replications: Vec<ReplicationStats>,
    pub metadata: SimMetadata,
}

/// Runs one replication, calling `visit` on every slot (warmup included).
pub fn run_replication_with<F>(config: &SimConfig, index: u32, mut visit: F) -> Result<ReplicationStats>
where
    F: FnMut(&SlotRecord),
{
    let mut rng: SimRng = rng::substream(config.master_seed, index as u64);
    let mut trace = Trace::new(&config.params, config.policy)?;
    let warmup = config.warmup();
    let k = config.params.k;
    // counts[pushed][misses]
    let mut counts = vec![[0u64; 2]; k + 1];
    for _ in 0..config.horizon {
        let record = trace.run_slot(&mut rng)?;
        visit(&record);
        if record.t > warmup {
            counts[record.misses as usize][record.pushed as usize] += 1;
        }
    }
    Ok(histogram_stats(trace.plan(), &counts))
}

/// Runs one replication.
pub fn run_replication(config: &SimConfig, index: u32) -> Result<ReplicationStats> {
    run_replication_with(config, index, |_| {})
}

fn histogram_stats(plan: &SlotPlan, counts: &[[u64; 2]]) -> ReplicationStats {
    let slots: u64 = counts.iter().flatten().sum();
    let total = slots as f64;
    let mut stats = ReplicationStats {
        ndt: 0.0,
        ndt_serial: 0.0,
        ndt_pipelined: 0.0,
        misses: 0.0,
        delta_f: 0.0,
        delta_e: 0.0,
        slots,
    };
    for (misses, row) in counts.iter().enumerate() {
        for (pushed, &count) in row.iter().enumerate() {
            if count == 0 {
                continue;
            }
            let w = count as f64 / total;
            let pair = plan.slot_pair(misses as u32, pushed == 1);
            stats.ndt += w * plan.reported(&pair);
            stats.ndt_serial += w * pair.serial_total();
            stats.ndt_pipelined += w * pair.pipelined_total();
            stats.misses += w * misses as f64;
            stats.delta_f += w * pair.delta_f;
            stats.delta_e += w * pair.delta_e;
        }
    }
    stats
}

/// Mean shifted by the first sample, so identical samples average exactly.
fn mean(xs: &[f64]) -> f64 {
    let Some(&first) = xs.first() else { return f64::NAN };
    first + xs.iter().map(|x| x - first).sum::<f64>() / xs.len() as f64
}

fn std_error(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let mu = mean(xs);
    let var = xs.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    (var / xs.len() as f64).sqrt()
}

/// Runs every replication (in parallel on the current rayon pool) and
/// aggregates in replication order.
pub fn run_trace(config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let replications = (0..config.replications)
        .into_par_iter()
        .map(|i| run_replication(config, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(config, replications))
}

fn aggregate(config: &SimConfig, replications: Vec<ReplicationStats>) -> SimResult {
    let column = |f: fn(&ReplicationStats) -> f64| replications.iter().map(f).collect::<Vec<_>>();
    let ndt = column(|r| r.ndt);
    let misses = column(|r| r.misses);
    let ndt_std_error = std_error(&ndt);
    SimResult {
        ndt_mean: mean(&ndt),
        ndt_ci95_halfwidth: Z95 * ndt_std_error,
        ndt_std_error,
        miss_rate_mean: mean(&misses),
        miss_rate_std_error: std_error(&misses),
        delta_f_mean: mean(&column(|r| r.delta_f)),
        delta_e_mean: mean(&column(|r| r.delta_e)),
        ndt_serial_mean: mean(&column(|r| r.ndt_serial)),
        ndt_pipelined_mean: mean(&column(|r| r.ndt_pipelined)),
        metadata: SimMetadata {
            master_seed: config.master_seed,
            generator: rng::GENERATOR_NAME.to_string(),
            horizon: config.horizon,
            replications: config.replications,
            warmup_slots: config.warmup(),
            policy: config.policy,
            params: config.params,
        },
        replications,
    }
}
