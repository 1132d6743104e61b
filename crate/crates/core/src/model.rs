//! Parameter and result types shared by every other module.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance used when comparing closed-form values.
pub const CLOSED_FORM_TOL: f64 = 1e-9;

/// System parameters of an `M x K` fog radio access network with online caching.
///
/// * `m` edge nodes (ENs), `k` users per slot, `n` files in the popular set;
/// * `mu` fractional cache capacity of each EN;
/// * `r` fronthaul-to-wireless capacity ratio at high SNR;
/// * `p` probability that a new file enters the popular set in a slot;
/// * `alpha` over-provisioning factor of the unknown-popular-set policies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub mu: f64,
    pub r: f64,
    pub p: f64,
    pub alpha: f64,
}

impl SystemParams {
    /// Returns `self` unchanged if every invariant holds, otherwise the first
    /// violated constraint.
    pub fn validate(self) -> Result<Self> {
        let fail = |what: &str| Err(Error::InvalidParams(what.to_string()));
        if self.m < 1 {
            return fail("M must be at least 1");
        }
        if self.k < 1 {
            return fail("K must be at least 1");
        }
        if self.k > self.n {
            return fail("K > N (the popular set must hold at least K files)");
        }
        if !(0.0..=1.0).contains(&self.mu) {
            return fail("mu must lie in [0, 1]");
        }
        if !(self.r.is_finite() && self.r >= 0.0) {
            return fail("r must be finite and non-negative");
        }
        if !(0.0..=1.0).contains(&self.p) {
            return fail("p must lie in [0, 1]");
        }
        if !(self.alpha.is_finite() && self.alpha > 1.0) {
            return fail("alpha must be finite and greater than 1");
        }
        Ok(self)
    }

    /// `min(M, K)`, the number of interference-free streams.
    pub fn streams(&self) -> usize {
        self.m.min(self.k)
    }

    /// Copy with the cache fraction replaced.
    pub fn with_mu(self, mu: f64) -> Self {
        Self { mu, ..self }
    }

    pub(crate) fn require_fronthaul(&self, what: &'static str) -> Result<f64> {
        if self.r > 0.0 {
            Ok(self.r)
        } else {
            Err(Error::FronthaulRequired(what))
        }
    }
}

/// Fronthaul/edge decomposition of a normalized delivery time.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NdtPair {
    pub delta_f: f64,
    pub delta_e: f64,
}

impl NdtPair {
    pub fn new(delta_f: f64, delta_e: f64) -> Self {
        Self { delta_f, delta_e }
    }

    /// Fronthaul followed by edge transmission.
    pub fn serial_total(&self) -> f64 {
        self.delta_f + self.delta_e
    }

    /// Simultaneous fronthaul and edge transmission (block-Markov encoding).
    pub fn pipelined_total(&self) -> f64 {
        self.delta_f.max(self.delta_e)
    }
}

/// Offline constituent delivery schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    /// Every EN holds the requested content; joint zero-forcing at the ENs.
    EnCooperation,
    /// ENs hold disjoint fractions; interference alignment on the X-channel.
    EnCoordination,
    /// Cloud precodes and quantizes; ENs relay over the fronthaul.
    CranTransmission,
}

/// Eviction rule of the unknown-popular-set policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Eviction {
    Random,
    Lru,
    Fifo,
}

impl Eviction {
    pub const ALL: [Eviction; 3] = [Eviction::Random, Eviction::Lru, Eviction::Fifo];

    fn label(self) -> &'static str {
        match self {
            Eviction::Random => "random",
            Eviction::Lru => "lru",
            Eviction::Fifo => "fifo",
        }
    }
}

/// Online caching and delivery policy.
///
/// Serialized as a flat snake_case label, e.g. `reactive_unknown_lru` or
/// `reactive_pipelined_known`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum PolicyKind {
    /// Ignore caches; C-RAN transmission in every slot.
    CranOnly,
    /// Reactive caching of a `mu`-fraction, popular set known at the cloud.
    ReactiveKnown,
    /// Reactive caching with the cached fraction adapted to `p`.
    ReactiveAdaptiveKnown,
    /// Reactive caching of `alpha * N` files at fraction `mu / alpha`.
    ReactiveUnknown(Eviction),
    /// Reactive caching with pipelined fronthaul-edge delivery. The unknown
    /// variant uses random eviction.
    ReactivePipelined { known: bool },
    /// Push a `mu`-fraction of every new popular file, pipelined delivery.
    ProactivePipelined,
}

impl PolicyKind {
    /// Whether the policy's NDT is the pipelined (max) rather than the serial
    /// (sum) combination of fronthaul and edge latencies.
    pub fn is_pipelined(&self) -> bool {
        matches!(
            self,
            PolicyKind::ReactivePipelined { .. } | PolicyKind::ProactivePipelined
        )
    }

    /// Whether the policy caches for an unknown popular set (`alpha * N` files).
    pub fn is_unknown_set(&self) -> bool {
        matches!(
            self,
            PolicyKind::ReactiveUnknown(_) | PolicyKind::ReactivePipelined { known: false }
        )
    }

    pub fn label(&self) -> String {
        match self {
            PolicyKind::CranOnly => "cran_only".into(),
            PolicyKind::ReactiveKnown => "reactive_known".into(),
            PolicyKind::ReactiveAdaptiveKnown => "reactive_adaptive_known".into(),
            PolicyKind::ReactiveUnknown(ev) => format!("reactive_unknown_{}", ev.label()),
            PolicyKind::ReactivePipelined { known: true } => "reactive_pipelined_known".into(),
            PolicyKind::ReactivePipelined { known: false } => "reactive_pipelined_unknown".into(),
            PolicyKind::ProactivePipelined => "proactive_pipelined".into(),
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let policy = match s {
            "cran_only" => PolicyKind::CranOnly,
            "reactive_known" => PolicyKind::ReactiveKnown,
            "reactive_adaptive_known" => PolicyKind::ReactiveAdaptiveKnown,
            "reactive_unknown_random" => PolicyKind::ReactiveUnknown(Eviction::Random),
            "reactive_unknown_lru" => PolicyKind::ReactiveUnknown(Eviction::Lru),
            "reactive_unknown_fifo" => PolicyKind::ReactiveUnknown(Eviction::Fifo),
            "reactive_pipelined_known" => PolicyKind::ReactivePipelined { known: true },
            "reactive_pipelined_unknown" => PolicyKind::ReactivePipelined { known: false },
            "proactive_pipelined" => PolicyKind::ProactivePipelined,
            other => {
                return Err(Error::InvalidParams(format!("unknown policy `{other}`")));
            }
        };
        Ok(policy)
    }
}

impl TryFrom<String> for PolicyKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<PolicyKind> for String {
    fn from(p: PolicyKind) -> String {
        p.label()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn reference() -> SystemParams {
        SystemParams { m: 10, k: 5, n: 20, mu: 0.1, r: 0.2, p: 0.5, alpha: 2.0 }
    }

    #[test]
    fn accepts_reference_parameters() {
        assert_eq!(reference().validate(), Ok(reference()));
    }

    #[test]
    fn rejects_more_users_than_files() {
        let p = SystemParams { m: 2, k: 3, n: 2, ..reference() };
        match p.validate() {
            Err(Error::InvalidParams(msg)) => assert!(msg.contains("K > N"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_alpha_of_one() {
        let p = SystemParams { alpha: 1.0, ..reference() };
        match p.validate() {
            Err(Error::InvalidParams(msg)) => assert!(msg.contains("alpha")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_negative_rate_and_bad_probabilities() {
        assert!(SystemParams { r: -0.1, ..reference() }.validate().is_err());
        assert!(SystemParams { r: f64::INFINITY, ..reference() }.validate().is_err());
        assert!(SystemParams { p: 1.5, ..reference() }.validate().is_err());
        assert!(SystemParams { mu: -0.01, ..reference() }.validate().is_err());
        assert!(SystemParams { m: 0, ..reference() }.validate().is_err());
        // r = 0 is admitted at construction.
        assert!(SystemParams { r: 0.0, ..reference() }.validate().is_ok());
    }

    #[test]
    fn policy_labels_round_trip() {
        let all = [
            PolicyKind::CranOnly,
            PolicyKind::ReactiveKnown,
            PolicyKind::ReactiveAdaptiveKnown,
            PolicyKind::ReactiveUnknown(Eviction::Random),
            PolicyKind::ReactiveUnknown(Eviction::Lru),
            PolicyKind::ReactiveUnknown(Eviction::Fifo),
            PolicyKind::ReactivePipelined { known: true },
            PolicyKind::ReactivePipelined { known: false },
            PolicyKind::ProactivePipelined,
        ];
        for p in all {
            assert_eq!(p.label().parse::<PolicyKind>(), Ok(p));
        }
        assert!("reactive_unknown_mru".parse::<PolicyKind>().is_err());
    }

    proptest! {
        #[test]
        fn validate_is_idempotent(
            m in 1usize..20, k in 1usize..10, extra in 0usize..10,
            mu in 0.0f64..=1.0, r in 0.0f64..50.0, p in 0.0f64..=1.0, alpha in 1.001f64..10.0,
        ) {
            let params = SystemParams { m, k, n: k + extra, mu, r, p, alpha };
            let once = params.validate().unwrap();
            prop_assert_eq!(once.validate().unwrap(), once);
        }

        #[test]
        fn pair_totals_are_ordered(a in 0.0f64..1e3, b in 0.0f64..1e3) {
            let pair = NdtPair::new(a, b);
            prop_assert!(pair.pipelined_total() <= pair.serial_total());
            prop_assert!(pair.serial_total() <= 2.0 * pair.pipelined_total());
        }
    }
}
