//! Closed-form normalized delivery times (NDTs).
//!
//! Offline constituent schemes, the three-regime offline achievable NDT and its
//! pipelined counterpart, and the long-term NDTs of the online policies:
//! C-RAN delivery, reactive caching with known popular set (fixed and
//! adaptive fraction), reactive caching with unknown popular set, and
//! proactive caching under pipelined delivery.
//!
//! Where a parameter sits exactly on a regime boundary (`mu = 1/M` or
//! `r = r_th`) every adjacent formula is evaluated and the smallest NDT is
//! returned. All candidates are achievable, so the minimum is too.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{NdtPair, SchemeKind, SystemParams};

const BOUNDARY_RTOL: f64 = 1e-12;

fn on_boundary(a: f64, b: f64) -> bool {
    (a - b).abs() <= BOUNDARY_RTOL * a.abs().max(b.abs()).max(1.0)
}

/// Fronthaul-rate threshold separating the low- and high-fronthaul placements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FronthaulThreshold {
    Finite(f64),
    /// `min(M, K) = 1`: every rate is "low fronthaul".
    Unbounded,
}

impl FronthaulThreshold {
    pub fn value(&self) -> f64 {
        match *self {
            FronthaulThreshold::Finite(t) => t,
            FronthaulThreshold::Unbounded => f64::INFINITY,
        }
    }
}

/// Offline caching regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// `r <= r_th`, `mu <= 1/M`: disjoint fractions at the ENs, rest via C-RAN.
    LowFronthaulSmallCache,
    /// `r <= r_th`, `mu >= 1/M`: disjoint fractions plus a part shared by all ENs.
    LowFronthaulLargeCache,
    /// `r >= r_th`: a common `mu`-fraction at all ENs, rest via C-RAN.
    HighFronthaul,
}

/// Thresholds on `p` of the adaptive reactive policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveThresholds {
    pub p0: f64,
    pub p1: f64,
}

/// Long-term NDT of the adaptive reactive policy together with the fraction
/// it actually caches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveNdt {
    pub ndt: f64,
    pub cached_fraction: f64,
    pub pair: NdtPair,
}

fn coop_edge(params: &SystemParams) -> f64 {
    params.k as f64 / params.streams() as f64
}

fn coor_edge(params: &SystemParams) -> f64 {
    (params.m + params.k - 1) as f64 / params.m as f64
}

/// Fronthaul NDT of delivering a `share` of each requested file by C-RAN.
fn cran_fronthaul(params: &SystemParams, share: f64, what: &'static str) -> Result<f64> {
    if share <= 0.0 {
        return Ok(0.0);
    }
    let r = params.require_fronthaul(what)?;
    Ok(share * params.k as f64 / (params.m as f64 * r))
}

/// Fronthaul NDT of sending a `fraction` of `files` files, zero-safe in `r`.
fn transfer_ndt(fraction: f64, files: f64, r: f64, what: &'static str) -> Result<f64> {
    let bits = fraction * files;
    if bits == 0.0 {
        Ok(0.0)
    } else if r > 0.0 {
        Ok(bits / r)
    } else {
        Err(Error::FronthaulRequired(what))
    }
}

fn check_fraction(mu: f64) -> Result<()> {
    if (0.0..=1.0).contains(&mu) {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("cache fraction {mu} outside [0, 1]")))
    }
}

/// Fronthaul and edge NDT of one constituent scheme.
pub fn scheme_ndt(kind: SchemeKind, params: &SystemParams) -> Result<NdtPair> {
    match kind {
        SchemeKind::EnCooperation => Ok(NdtPair::new(0.0, coop_edge(params))),
        SchemeKind::EnCoordination => Ok(NdtPair::new(0.0, coor_edge(params))),
        SchemeKind::CranTransmission => {
            let r = params.require_fronthaul("C-RAN transmission")?;
            Ok(NdtPair::new(
                params.k as f64 / (params.m as f64 * r),
                coop_edge(params),
            ))
        }
    }
}

/// `r_th = K(M-1) / (M(min(M,K)-1))`.
pub fn fronthaul_threshold(params: &SystemParams) -> FronthaulThreshold {
    let streams = params.streams();
    if streams == 1 {
        return FronthaulThreshold::Unbounded;
    }
    let (m, k) = (params.m as f64, params.k as f64);
    FronthaulThreshold::Finite(k * (m - 1.0) / (m * (streams as f64 - 1.0)))
}

/// Serial decomposition of the offline policy when forced into `regime`.
pub fn regime_decomposition(params: &SystemParams, regime: Regime, mu: f64) -> Result<NdtPair> {
    check_fraction(mu)?;
    let m = params.m as f64;
    let (coop, coor) = (coop_edge(params), coor_edge(params));
    match regime {
        Regime::LowFronthaulSmallCache => {
            let spread = (mu * m).min(1.0);
            let delta_e = spread * coor + (1.0 - spread) * coop;
            let delta_f = cran_fronthaul(params, 1.0 - spread, "offline small-cache placement")?;
            Ok(NdtPair::new(delta_f, delta_e))
        }
        Regime::LowFronthaulLargeCache => {
            if params.m < 2 {
                return Err(Error::InvalidParams(
                    "the shared-fraction placement needs M >= 2".into(),
                ));
            }
            let shared = ((mu * m - 1.0) / (m - 1.0)).max(0.0);
            let disjoint = m * (1.0 - mu) / (m - 1.0);
            Ok(NdtPair::new(0.0, shared * coop + disjoint.min(1.0) * coor))
        }
        Regime::HighFronthaul => {
            let delta_e = mu * coop + (1.0 - mu) * coop;
            let delta_f = cran_fronthaul(params, 1.0 - mu, "offline high-fronthaul placement")?;
            Ok(NdtPair::new(delta_f, delta_e))
        }
    }
}

/// Low-fronthaul regimes applicable at cache fraction `mu`.
fn low_fronthaul_regimes(params: &SystemParams, mu: f64) -> Vec<Regime> {
    let spread = mu * params.m as f64;
    if params.m == 1 || spread < 1.0 && !on_boundary(spread, 1.0) {
        vec![Regime::LowFronthaulSmallCache]
    } else if spread > 1.0 && !on_boundary(spread, 1.0) {
        vec![Regime::LowFronthaulLargeCache]
    } else {
        vec![Regime::LowFronthaulSmallCache, Regime::LowFronthaulLargeCache]
    }
}

/// Regimes whose formulas apply at `(mu, r)`, boundaries included.
pub fn applicable_regimes(params: &SystemParams, mu: f64) -> Vec<Regime> {
    match fronthaul_threshold(params) {
        FronthaulThreshold::Unbounded => low_fronthaul_regimes(params, mu),
        FronthaulThreshold::Finite(t) if on_boundary(params.r, t) => {
            let mut regimes = low_fronthaul_regimes(params, mu);
            regimes.push(Regime::HighFronthaul);
            regimes
        }
        FronthaulThreshold::Finite(t) if params.r < t => low_fronthaul_regimes(params, mu),
        FronthaulThreshold::Finite(_) => vec![Regime::HighFronthaul],
    }
}

/// Evaluates every candidate and keeps the one minimizing `key`. Candidates
/// that fail are skipped as long as one succeeds.
fn best_of<F>(params: &SystemParams, regimes: &[Regime], mu: f64, key: F) -> Result<(Regime, NdtPair)>
where
    F: Fn(&NdtPair) -> f64,
{
    let mut best: Option<(Regime, NdtPair)> = None;
    let mut first_err = None;
    for &regime in regimes {
        match regime_decomposition(params, regime, mu) {
            Ok(pair) => {
                if best.is_none_or(|(_, b)| key(&pair) < key(&b)) {
                    best = Some((regime, pair));
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    best.ok_or_else(|| first_err.unwrap_or(Error::Infeasible))
}

/// Offline achievable decomposition at effective cache fraction `mu_eff`,
/// with the regime that produced it.
pub fn offline_decomposition(params: &SystemParams, mu_eff: f64) -> Result<(Regime, NdtPair)> {
    check_fraction(mu_eff)?;
    best_of(params, &applicable_regimes(params, mu_eff), mu_eff, NdtPair::serial_total)
}

/// Offline achievable `(delta_F, delta_E)` at effective cache fraction `mu_eff`.
pub fn offline_achievable(params: &SystemParams, mu_eff: f64) -> Result<NdtPair> {
    offline_decomposition(params, mu_eff).map(|(_, pair)| pair)
}

/// Offline achievable NDT under pipelined delivery: the best of the
/// low-fronthaul and high-fronthaul placements after block-Markov combining.
pub fn offline_achievable_pipelined(params: &SystemParams, mu_eff: f64) -> Result<f64> {
    check_fraction(mu_eff)?;
    let mut regimes = low_fronthaul_regimes(params, mu_eff);
    regimes.push(Regime::HighFronthaul);
    best_of(params, &regimes, mu_eff, NdtPair::pipelined_total).map(|(_, p)| p.pipelined_total())
}

/// Long-term NDT of C-RAN delivery, serial mode.
pub fn cran_longterm_serial(params: &SystemParams) -> Result<f64> {
    scheme_ndt(SchemeKind::CranTransmission, params).map(|p| p.serial_total())
}

/// Long-term NDT of C-RAN delivery, pipelined mode.
pub fn cran_longterm_pipelined(params: &SystemParams) -> Result<f64> {
    scheme_ndt(SchemeKind::CranTransmission, params).map(|p| p.pipelined_total())
}

/// Steady-state mean number of requested-but-uncached files per slot under
/// reactive caching with known popular set: `Kp / (K(1 - p/N) + p)`.
pub fn steady_state_misses(params: &SystemParams) -> f64 {
    let (k, n, p) = (params.k as f64, params.n as f64, params.p);
    k * p / (k * (1.0 - p / n) + p)
}

/// Long-term decomposition of reactive known-set caching of a fraction `mu`.
/// The refresh overhead `mu E[R_t] / r` is charged to the fronthaul.
pub fn reactive_known_decomposition(params: &SystemParams, mu: f64) -> Result<NdtPair> {
    let base = offline_achievable(params, mu)?;
    let refresh = transfer_ndt(mu, steady_state_misses(params), params.r, "reactive cache refresh")?;
    Ok(NdtPair::new(base.delta_f + refresh, base.delta_e))
}

/// Long-term NDT of reactive caching with known popular set.
pub fn reactive_known_longterm(params: &SystemParams) -> Result<f64> {
    reactive_known_decomposition(params, params.mu).map(|p| p.serial_total())
}

/// Thresholds `p0 <= p1` of the adaptive reactive policy, clamped to `[0, 1]`.
pub fn adaptive_thresholds(params: &SystemParams) -> Result<AdaptiveThresholds> {
    let r = params.require_fronthaul("adaptive thresholds")?;
    let (m, k, n) = (params.m as f64, params.k as f64, params.n as f64);
    let s = params.streams() as f64 - 1.0;

    let high = fronthaul_threshold(params).value() < r;
    let (p0, p1) = if high {
        let p = k / (m + k / n - 1.0);
        (p, p)
    } else {
        let slack = k - r * s;
        let p1 = slack / (1.0 + slack * (1.0 / n - 1.0 / k));
        // With M = 1 there is no shared-fraction placement, hence no middle band.
        let p0 = if params.m == 1 {
            p1
        } else {
            k * r * s / (k * (m - 1.0) + r * s * (k / n - 1.0))
        };
        (p0, p1)
    };
    let clamp = |x: f64| if x.is_nan() { 1.0 } else { x.clamp(0.0, 1.0) };
    let p0 = clamp(p0);
    let p1 = clamp(p1).max(p0);
    Ok(AdaptiveThresholds { p0, p1 })
}

/// Long-term NDT of reactive caching with adaptive fractional caching.
///
/// Caches `mu` when `p <= p0`, `1/M` when `p0 < p <= p1` and nothing
/// (pure C-RAN) above `p1`. The middle band never caches more than `mu`.
pub fn adaptive_known_longterm(params: &SystemParams) -> Result<AdaptiveNdt> {
    let th = adaptive_thresholds(params)?;
    // A threshold itself belongs to the band below it, up to rounding.
    let below = |t: f64| params.p <= t || on_boundary(params.p, t);
    let cached_fraction = if below(th.p0) {
        params.mu
    } else if below(th.p1) {
        params.mu.min(1.0 / params.m as f64)
    } else {
        0.0
    };
    let pair = reactive_known_decomposition(params, cached_fraction)?;
    Ok(AdaptiveNdt {
        ndt: pair.serial_total(),
        cached_fraction,
        pair,
    })
}

/// Upper bound on the long-term decomposition of reactive caching with
/// unknown popular set and random eviction, caching `alpha N` files at
/// fraction `mu / alpha`.
pub fn reactive_unknown_decomposition(params: &SystemParams) -> Result<NdtPair> {
    let (alpha, p, n) = (params.alpha, params.p, params.n as f64);
    if alpha.is_nan() || alpha <= 1.0 {
        return Err(Error::InvalidParams("alpha must be greater than 1".into()));
    }
    if p >= n {
        return Err(Error::InvalidParams("p < N required".into()));
    }
    let base = offline_achievable(params, params.mu / alpha)?;
    let misses_bound = p / ((1.0 - p / n) * (1.0 - 1.0 / alpha));
    let refresh = transfer_ndt(params.mu / alpha, misses_bound, params.r, "reactive cache refresh")?;
    Ok(NdtPair::new(base.delta_f + refresh, base.delta_e))
}

/// Upper bound on the long-term NDT of reactive caching with unknown
/// popular set: `delta_off,ach(mu/alpha) + p mu / (r (1 - p/N)(alpha - 1))`.
pub fn reactive_unknown_upper(params: &SystemParams) -> Result<f64> {
    reactive_unknown_decomposition(params).map(|p| p.serial_total())
}

fn proactive_value(params: &SystemParams, pair: &NdtPair, r: f64) -> f64 {
    let pushed = NdtPair::new(pair.delta_f + params.mu / r, pair.delta_e);
    params.p * pushed.pipelined_total() + (1.0 - params.p) * pair.pipelined_total()
}

/// Placement used by proactive caching: disjoint fractions (coordination)
/// for `mu <= 1/M`, a common fraction (cooperation) for `mu >= 1/M`. The
/// returned pair excludes the push overhead.
pub fn proactive_placement(params: &SystemParams) -> Result<NdtPair> {
    let r = params.require_fronthaul("proactive caching")?;
    let spread = params.mu * params.m as f64;
    let regimes: &[Regime] = if on_boundary(spread, 1.0) {
        &[Regime::LowFronthaulSmallCache, Regime::HighFronthaul]
    } else if spread < 1.0 {
        &[Regime::LowFronthaulSmallCache]
    } else {
        &[Regime::HighFronthaul]
    };
    best_of(params, regimes, params.mu, |pair| proactive_value(params, pair, r)).map(|(_, p)| p)
}

/// Long-term NDT of proactive online caching under pipelined delivery.
pub fn proactive_pipelined_longterm(params: &SystemParams) -> Result<f64> {
    let r = params.require_fronthaul("proactive caching")?;
    let pair = proactive_placement(params)?;
    Ok(proactive_value(params, &pair, r))
}

/// Additive gap `f(alpha) = 1/r + (1/alpha)(1 - 1/r) + N p (mu/r) / ((N - p)(alpha - 1))`.
pub fn gap_f(params: &SystemParams, alpha: f64) -> Result<f64> {
    let r = params.require_fronthaul("gap function")?;
    if alpha.is_nan() || alpha <= 1.0 {
        return Err(Error::InvalidParams("alpha must be greater than 1".into()));
    }
    let (n, p, mu) = (params.n as f64, params.p, params.mu);
    if n <= p {
        return Err(Error::InvalidParams("p < N required".into()));
    }
    Ok(1.0 / r + (1.0 - 1.0 / r) / alpha + n * p * (mu / r) / ((n - p) * (alpha - 1.0)))
}
