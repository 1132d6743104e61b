use thiserror::Error;

/// Errors raised by the analytic evaluators, the LP solver and the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter tuple violates one of its validity constraints.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// The formula needs fronthaul capacity (it divides by `r`) but `r = 0`.
    #[error("{0} requires a positive fronthaul rate r")]
    FronthaulRequired(&'static str),

    /// The linear program has no feasible point.
    #[error("linear program is infeasible")]
    Infeasible,

    /// Eviction was requested but every cached file is protected or the cache is empty.
    #[error("no evictable file in the cache")]
    EmptyCache,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
