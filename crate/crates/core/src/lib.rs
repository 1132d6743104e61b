//! Online edge caching in fog radio access networks.
//!
//! * [`model`]: validated system parameters and NDT decompositions;
//! * [`popularity`]: the Markov popular-set process and request sampling;
//! * [`ndt`]: closed-form long-term normalized delivery times;
//! * [`bounds`]: LP converse bounds and the online/offline envelope;
//! * [`sim`]: per-slot Monte Carlo simulation of the caching policies.

pub mod bounds;
pub mod error;
pub mod model;
pub mod ndt;
pub mod popularity;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
pub use model::{Eviction, NdtPair, PolicyKind, SchemeKind, SystemParams};
