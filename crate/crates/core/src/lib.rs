//! Simulation core: graphs, the round engine, expander decomposition,
//! in-cluster routing, the partition-and-solve combinator, its applications
//! and exact oracles.

pub mod apps;
pub mod conductance;
pub mod expander;
pub mod framework;
pub mod generators;
pub mod graph;
pub mod oracles;
pub mod planarity;
pub mod routing;
pub mod sim;

pub use graph::{Graph, GraphError, GraphFormat};
