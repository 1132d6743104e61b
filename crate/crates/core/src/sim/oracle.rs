//! Scalar Markov chain of the number of cached popular files.
//!
//! `X_t` counts popular files cached at the start of slot `t`. Given `X_t`,
//! the misses `R_t` are hypergeometric (K draws from N files, N - X_t of
//! them uncached); after fetching, `X'_t = X_t + R_t`, and the next
//! popularity step evicts one of them with probability `p X'_t / N`.
//! These routines never touch the file-level simulator.

use rand::Rng;

use crate::model::SystemParams;
use crate::rng::substream;

/// Long-run mean of `R_t` from a direct simulation of the chain over
/// `steps` slots (the first tenth is discarded).
pub fn markov_oracle(params: &SystemParams, steps: u64, seed: u64) -> f64 {
    let (n, k, p) = (params.n, params.k, params.p);
    let mut rng = substream(seed, u64::MAX);
    let burn_in = steps / 10;
    let mut cached = 0usize;
    let mut total = 0u64;
    for step in 0..steps {
        let mut uncached = n - cached;
        let mut misses = 0usize;
        for drawn in 0..k {
            if rng.random_range(0..(n - drawn) as u64) < uncached as u64 {
                misses += 1;
                uncached -= 1;
            }
        }
        if step >= burn_in {
            total += misses as u64;
        }
        cached += misses;
        if rng.random_bool(p * cached as f64 / n as f64) {
            cached -= 1;
        }
    }
    total as f64 / (steps - burn_in) as f64
}

/// `P(R = j | X = x)`: hypergeometric over the `n - x` uncached files.
fn miss_distribution(n: usize, k: usize, x: usize) -> Vec<f64> {
    let uncached = n - x;
    (0..=k)
        .map(|j| {
            if j > uncached || k - j > x {
                0.0
            } else {
                choose(uncached, j) * choose(x, k - j) / choose(n, k)
            }
        })
        .collect()
}

fn choose(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Exact steady-state mean of `R_t` from the stationary distribution of the
/// chain, found by power iteration from `X_0 = 0`.
pub fn markov_stationary_misses(params: &SystemParams) -> f64 {
    let (n, k, p) = (params.n, params.k, params.p);
    let rows: Vec<Vec<f64>> = (0..=n).map(|x| miss_distribution(n, k, x)).collect();

    let mut dist = vec![0.0; n + 1];
    dist[0] = 1.0;
    let mut next = vec![0.0; n + 1];
    for _ in 0..200_000 {
        next.iter_mut().for_each(|v| *v = 0.0);
        for (x, &mass) in dist.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            for (j, &pr) in rows[x].iter().enumerate() {
                if pr == 0.0 {
                    continue;
                }
                let after = x + j;
                let drop = p * after as f64 / n as f64;
                next[after] += mass * pr * (1.0 - drop);
                if after > 0 {
                    next[after - 1] += mass * pr * drop;
                }
            }
        }
        let change: f64 = dist.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut dist, &mut next);
        if change < 1e-15 {
            break;
        }
    }
    dist.iter()
        .enumerate()
        .map(|(x, &mass)| mass * k as f64 * (1.0 - x as f64 / n as f64))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(k: usize, n: usize, p: f64) -> SystemParams {
        SystemParams { m: 10, k, n, mu: 0.1, r: 0.2, p, alpha: 2.0 }
    }

    #[test]
    fn hypergeometric_rows_sum_to_one() {
        for x in 0..=20 {
            let s: f64 = miss_distribution(20, 5, x).iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn stationary_mean_matches_closed_form() {
        for (k, n, p) in [(5, 20, 0.5), (5, 5, 1.0), (3, 10, 0.9), (1, 4, 0.2), (4, 7, 0.05)] {
            let exact = markov_stationary_misses(&params(k, n, p));
            let closed = crate::ndt::steady_state_misses(&params(k, n, p));
            assert!((exact - closed).abs() < 1e-9, "{k} {n} {p}: {exact} vs {closed}");
        }
    }

    #[test]
    fn static_popularity_has_no_misses() {
        assert!(markov_stationary_misses(&params(5, 20, 0.0)).abs() < 1e-12);
        assert!(markov_oracle(&params(5, 20, 0.0), 100_000, 1) == 0.0);
    }

    #[test]
    fn full_request_set_misses_once_per_slot() {
        let v = markov_oracle(&params(5, 5, 1.0), 200_000, 2);
        assert!((v - 1.0).abs() <= 0.005, "{v}");
    }
}
