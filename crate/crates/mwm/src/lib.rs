//! Scaling (1−ε)-approximate maximum weight matching on minor-free networks.
//!
//! Each scale runs iterations of augmentation, blossom shrinking, dual
//! adjustment and blossom dissolution on the eligible graph, with expander
//! decompositions and the `Cut` procedure keeping every step local to a
//! cluster. Duals live in dyadic fixed point, see [`config::Q`].

use thiserror::Error;

use congest_core::expander::DecompError;
use congest_core::routing::RoutingError;
use congest_core::sim::SimError;

pub mod config;
pub mod forest;
pub mod rcs;
pub mod run;
pub mod search;
pub mod state;
pub mod steps;

pub use config::{MwmConfig, Q};
pub use forest::{Blossom, Child, LaminarForest};
pub use rcs::{check_rcs, RcsReport};
pub use run::{run_mwm, run_mwm_with, run_scale, Diagnostics, MwmOptions, MwmOutcome, RoutingChoice, TraceRecord};
pub use state::{init_state, EdgeMetrics, MwmState};

#[derive(Debug, Error, PartialEq)]
pub enum MwmError {
    #[error("epsilon must be positive and finite, got {0}")]
    BadEpsilon(f64),
    #[error("edge {edge} has weight 0; weights must be positive integers")]
    NonPositiveWeight { edge: usize },
    #[error("max weight {w} exceeds the polynomial cap {cap}")]
    WeightTooLarge { w: u64, cap: u64 },
    #[error("unknown edge {0}")]
    UnknownEdge(usize),
    #[error("blossom {blossom} would get a negative z")]
    NegativeZ { blossom: usize },
    #[error("scale {scale} exceeded {guard} iterations")]
    IterationOverflow { scale: u32, guard: u64 },
    #[error(transparent)]
    Decomposition(#[from] DecompError),
    #[error(transparent)]
    Routing(#[from] RoutingError),
    #[error(transparent)]
    Sim(#[from] SimError),
}
