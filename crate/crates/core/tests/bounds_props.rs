use fogcache_core::bounds::*;
use fogcache_core::ndt::{adaptive_known_longterm, offline_achievable, reactive_known_longterm};
use fogcache_core::rng::substream;
use fogcache_core::SystemParams;
use rand::Rng;

fn params(m: usize, k: usize, mu: f64, r: f64, p: f64) -> SystemParams {
    SystemParams { m, k, n: 2 * k, mu, r, p, alpha: 2.0 }
}

const RATES: [f64; 5] = [0.1, 0.5, 1.0, 2.0, 10.0];

fn grid() -> impl Iterator<Item = SystemParams> {
    (1..=6).flat_map(|m| {
        (1..=6).flat_map(move |k| {
            (0..=20).flat_map(move |i| RATES.into_iter().map(move |r| params(m, k, i as f64 * 0.05, r, 0.5)))
        })
    })
}

/// Dense-grid scan of `min dE + dF` over the box `[1, 1 + w] x [0, w]` with
/// step `h`. The smallest feasible `dF` is non-increasing in `dE`, so one
/// staircase pass suffices.
fn brute_force(lp: &LpInstance, w: f64, h: f64) -> f64 {
    let steps = (w / h).round() as i64;
    let feasible = |i: i64, j: i64| {
        let (de, df) = (1.0 + i as f64 * h, j as f64 * h);
        lp.constraints.iter().all(|c| c.a * de + c.b * df >= c.c - 1e-12)
    };
    let mut best = f64::INFINITY;
    let mut j = steps;
    for i in 0..=steps {
        if !feasible(i, j) {
            continue;
        }
        while j > 0 && feasible(i, j - 1) {
            j -= 1;
        }
        best = best.min(2.0 + (i + j) as f64 * h - 1.0);
    }
    best
}

#[test]
fn exact_solver_matches_brute_force() {
    let mut rng = substream(2024, 0);
    for case in 0..100 {
        let count = rng.random_range(1..=5);
        let constraints = (0..count)
            .map(|_| LpConstraint {
                a: rng.random_range(0.0..4.0),
                b: rng.random_range(0.05..4.0),
                c: rng.random_range(-1.0..6.0),
            })
            .collect();
        let lp = LpInstance { constraints };
        let exact = solve_min_sum(&lp).unwrap();
        // Every constraint is met at dE = 1, dF = max c / min b, so the
        // optimum lies inside a box of that width.
        let w = lp.constraints.iter().map(|c| c.c.max(0.0) / c.b).fold(0.0, f64::max) + 0.01;
        let scan = brute_force(&lp, w, 1e-3);
        assert!(
            (scan - exact.objective).abs() <= 2e-3,
            "case {case}: exact {} scan {scan} {lp:?}",
            exact.objective
        );
    }
}

#[test]
fn achievable_within_factor_two_of_offline_bound() {
    for p in grid() {
        let lb = offline_lower_bound(&p).unwrap();
        let ach = offline_achievable(&p, p.mu).unwrap().serial_total();
        assert!(ach <= 2.0 * lb + 1e-9, "{p:?}: {ach} > 2 * {lb}");
        assert!(ach >= lb - 1e-9, "{p:?}: {ach} < {lb}");
    }
}

#[test]
fn reactive_policies_respect_longterm_bound() {
    for p in grid() {
        let lb = longterm_lower_bound(&p).unwrap();
        let reactive = reactive_known_longterm(&p).unwrap();
        let adaptive = adaptive_known_longterm(&p).unwrap().ndt;
        assert!(reactive >= lb - 1e-9, "{p:?}: {reactive} < {lb}");
        assert!(adaptive >= lb - 1e-9, "{p:?}: {adaptive} < {lb}");
    }
}

#[test]
fn online_slot_bound_dominates_offline_bound() {
    for p in grid().filter(|p| p.k >= 2) {
        let on = online_slot_lower_bound(&p).unwrap();
        let off = offline_lower_bound(&p).unwrap();
        assert!(on >= off - 1e-9, "{p:?}: {on} < {off}");
    }
}

#[test]
fn online_slot_solution_pays_fronthaul_for_the_new_file() {
    for p in grid() {
        let sol = solve_min_sum(&build_online_slot_lp(&p)).unwrap();
        let need = p.mu.min(1.0 / p.m as f64) / p.r;
        assert!(sol.delta_f >= need - 1e-9, "{p:?}: {sol:?} below {need}");
    }
}

#[test]
fn solutions_are_feasible() {
    for p in grid() {
        for lp in [build_offline_lp(&p), build_online_slot_lp(&p)] {
            let sol = solve_min_sum(&lp).unwrap();
            assert!(lp.is_feasible(sol.delta_e, sol.delta_f, 1e-9));
            assert!((sol.objective - sol.delta_e - sol.delta_f).abs() < 1e-12);
        }
    }
}

#[test]
fn full_cache_offline_bound_is_cooperation_edge_time() {
    for m in 1..=6 {
        for k in 1..=6 {
            for r in RATES {
                let v = offline_lower_bound(&params(m, k, 1.0, r, 0.0)).unwrap();
                let coop = k as f64 / m.min(k) as f64;
                assert!((v - coop).abs() < 1e-12, "M={m} K={k} r={r}: {v}");
            }
        }
    }
}

#[test]
fn sandwich_holds_in_claimed_range() {
    for n_extra in [1, 5] {
        for m in 2..=8 {
            for k in 2..=m {
                for i in 0..=10 {
                    for r in [0.05, 0.2, 1.0, 5.0] {
                        for p in [0.0, 0.3, 1.0] {
                            let q = SystemParams { m, k, n: m + n_extra, mu: i as f64 / 10.0, r, p, alpha: 2.0 };
                            let s = sandwich_eval(&q).unwrap();
                            assert!(s.in_claimed_range);
                            let v = reactive_known_longterm(&q).unwrap();
                            assert!(s.contains(v), "{q:?}: {v} outside {s:?}");
                        }
                    }
                }
            }
        }
    }
}
