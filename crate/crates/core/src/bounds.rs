//! Converse bounds on the offline and long-term NDT.
//!
//! Both bounds are two-variable linear programs in `(delta_E, delta_F)`:
//!
//! ```text
//! minimize    delta_E + delta_F
//! subject to  l delta_E + (M - l) r delta_F >= rhs(l)   for each l
//!             delta_E >= 1,  delta_F >= 0
//! ```
//!
//! They are solved exactly by enumerating the pairwise intersections of the
//! constraint boundaries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::ndt::offline_achievable;

/// Feasibility slack used when filtering candidate vertices.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// `a delta_E + b delta_F >= c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpConstraint {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl LpConstraint {
    fn slack(&self, delta_e: f64, delta_f: f64) -> f64 {
        self.a * delta_e + self.b * delta_f - self.c
    }
}

/// Family of constraints; the box `delta_E >= 1`, `delta_F >= 0` is implicit.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LpInstance {
    pub constraints: Vec<LpConstraint>,
}

impl LpInstance {
    /// True if `(delta_e, delta_f)` satisfies every constraint within `tol`.
    pub fn is_feasible(&self, delta_e: f64, delta_f: f64, tol: f64) -> bool {
        delta_e >= 1.0 - tol
            && delta_f >= -tol
            && self.constraints.iter().all(|c| c.slack(delta_e, delta_f) >= -tol * c.c.abs().max(1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub delta_e: f64,
    pub delta_f: f64,
    pub objective: f64,
}

fn cut_constraint(params: &SystemParams, l: usize, uncached: usize) -> LpConstraint {
    let (m, k) = (params.m, params.k);
    let cacheable = (k - l - uncached) as f64;
    let stored = (m - l) as f64 * cacheable * params.mu;
    LpConstraint {
        a: l as f64,
        b: (m - l) as f64 * params.r,
        c: k as f64 - cacheable.min(stored),
    }
}

/// Offline converse: one constraint per `l` in `0..=min(M, K)` with
/// right-hand side `K - min(K - l, (M - l)(K - l) mu)`.
pub fn build_offline_lp(params: &SystemParams) -> LpInstance {
    LpInstance {
        constraints: (0..=params.streams()).map(|l| cut_constraint(params, l, 0)).collect(),
    }
}

/// Per-slot converse when one requested file cannot be cached: one
/// constraint per `l` in `0..=min(M, K - 1)` with right-hand side
/// `K - min(K - l - 1, (M - l)(K - l - 1) mu)`.
pub fn build_online_slot_lp(params: &SystemParams) -> LpInstance {
    let top = params.m.min(params.k - 1);
    LpInstance {
        constraints: (0..=top).map(|l| cut_constraint(params, l, 1)).collect(),
    }
}

/// Exact minimum of `delta_E + delta_F` by vertex enumeration.
pub fn solve_min_sum(lp: &LpInstance) -> Result<LpSolution> {
    let mut lines: Vec<LpConstraint> = Vec::with_capacity(lp.constraints.len() + 2);
    for c in &lp.constraints {
        if c.a == 0.0 && c.b == 0.0 {
            if c.c > FEASIBILITY_TOL {
                return Err(Error::Infeasible);
            }
            continue;
        }
        lines.push(*c);
    }
    lines.push(LpConstraint { a: 1.0, b: 0.0, c: 1.0 });
    lines.push(LpConstraint { a: 0.0, b: 1.0, c: 0.0 });

    let mut best: Option<LpSolution> = None;
    for (i, u) in lines.iter().enumerate() {
        for v in &lines[i + 1..] {
            let det = u.a * v.b - u.b * v.a;
            if det.abs() < 1e-14 {
                continue;
            }
            let delta_e = (u.c * v.b - u.b * v.c) / det;
            let delta_f = (u.a * v.c - u.c * v.a) / det;
            if !lp.is_feasible(delta_e, delta_f, FEASIBILITY_TOL) {
                continue;
            }
            let objective = delta_e + delta_f;
            if best.is_none_or(|b| objective < b.objective) {
                best = Some(LpSolution { delta_e, delta_f, objective });
            }
        }
    }
    best.ok_or(Error::Infeasible)
}

/// Lower bound on the minimum offline NDT.
pub fn offline_lower_bound(params: &SystemParams) -> Result<f64> {
    solve_min_sum(&build_offline_lp(params)).map(|s| s.objective)
}

/// Lower bound on the NDT of a slot in which one requested file is uncached.
pub fn online_slot_lower_bound(params: &SystemParams) -> Result<f64> {
    solve_min_sum(&build_online_slot_lp(params)).map(|s| s.objective)
}

/// Lower bound on the long-term NDT of any online policy:
/// `(1 - Kp/N) offline_lb + (Kp/N) online_slot_lb`.
pub fn longterm_lower_bound(params: &SystemParams) -> Result<f64> {
    let q = new_request_probability(params);
    Ok((1.0 - q) * offline_lower_bound(params)? + q * online_slot_lower_bound(params)?)
}

/// Probability `Kp/N` that some user requests the newly popular file.
pub fn new_request_probability(params: &SystemParams) -> f64 {
    params.k as f64 * params.p / params.n as f64
}

/// Computable envelope around the minimum long-term NDT.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    pub lower: f64,
    pub upper: f64,
    /// `N > M >= K >= 2`, the range in which the envelope is claimed.
    pub in_claimed_range: bool,
}

impl Sandwich {
    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value + FEASIBILITY_TOL && value <= self.upper + FEASIBILITY_TOL
    }
}

/// Envelope `((1 - Kp/N)/2) d + (Kp/N)(1 + mu/r) <= long-term NDT <= 2 D + 4/r`.
///
/// The unknown minimum offline NDT is replaced by the LP bound `d` on the
/// left and by the offline achievable NDT `D` on the right; both
/// substitutions only widen the envelope.
pub fn sandwich_eval(params: &SystemParams) -> Result<Sandwich> {
    let r = params.require_fronthaul("sandwich envelope")?;
    let q = new_request_probability(params);
    let lower = 0.5 * (1.0 - q) * offline_lower_bound(params)? + q * (1.0 + params.mu / r);
    let upper = 2.0 * offline_achievable(params, params.mu)?.serial_total() + 4.0 / r;
    let (m, k, n) = (params.m, params.k, params.n);
    Ok(Sandwich {
        lower,
        upper,
        in_claimed_range: n > m && m >= k && k >= 2,
    })
}
