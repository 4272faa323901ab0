//! Applications built on partition-and-solve.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expander::DecompError;
use crate::framework::FailureReason;
use crate::graph::Graph;
use crate::sim::{
    run_protocol, Envelope, Message, Network, NodeRng, NodeView, Protocol, RoundLog, SimConfig, SimError,
};

pub mod cc;
pub mod ldd;
pub mod matching;
pub mod mis;
pub mod proptest;
pub mod stars;

pub use cc::correlation_clustering;
pub use ldd::{low_diameter_decomposition, LddConfig};
pub use matching::{edmonds_matching, mcm_planar};
pub use mis::max_independent_set;
pub use proptest::{property_test, Property};
pub use stars::{eliminate_stars, StarElimination};

#[derive(Debug, Error, PartialEq)]
pub enum AppError {
    #[error(transparent)]
    Decomposition(#[from] DecompError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("input graph is not planar")]
    NotPlanar,
    #[error("expected one label per edge ({expected}), got {got}")]
    Labels { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solution {
    Vertices(Vec<usize>),
    Edges(Vec<(usize, usize)>),
    Partition(Vec<Vec<usize>>),
    /// `true` is Accept.
    Verdicts(Vec<bool>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppReport {
    pub problem: String,
    pub solution: Solution,
    pub objective: u64,
    pub oracle: Option<u64>,
    pub ratio: Option<f64>,
    /// Some cluster was solved by a heuristic instead of exactly.
    pub heuristic: bool,
    pub failures: Vec<(usize, FailureReason)>,
    pub metrics: BTreeMap<String, f64>,
    pub round_log: RoundLog,
}

impl AppReport {
    pub fn new(problem: &str, solution: Solution, objective: u64, round_log: RoundLog) -> AppReport {
        AppReport {
            problem: problem.to_string(),
            solution,
            objective,
            oracle: None,
            ratio: None,
            heuristic: false,
            failures: Vec::new(),
            metrics: BTreeMap::new(),
            round_log,
        }
    }

    /// Records the exact optimum and the achieved ratio (1 when both are 0).
    pub fn with_oracle(mut self, value: u64) -> AppReport {
        self.oracle = Some(value);
        self.ratio = Some(if value == 0 { 1.0 } else { self.objective as f64 / value as f64 });
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Every vertex sends its queued messages in one round; returns what each
/// vertex received, as (sender, message) pairs.
struct OneShot<'a> {
    outgoing: &'a BTreeMap<usize, Vec<(usize, Message)>>,
}

impl Protocol for OneShot<'_> {
    type State = (bool, Vec<(usize, Message)>);
    type Output = Vec<(usize, Message)>;
    fn init(&self, _: &NodeView) -> Self::State {
        (false, Vec::new())
    }
    fn step(&self, node: &NodeView, s: &mut Self::State, inbox: &[Envelope], _: &mut NodeRng, out: &mut Vec<Envelope>) {
        s.1.extend(inbox.iter().map(|e| (e.peer, e.msg.clone())));
        if !std::mem::replace(&mut s.0, true) {
            if let Some(list) = self.outgoing.get(&node.id) {
                out.extend(list.iter().map(|(peer, msg)| Envelope { peer: *peer, msg: msg.clone() }));
            }
        }
    }
    fn halted(&self, _: &NodeView, s: &Self::State) -> bool {
        s.0
    }
    fn output(&self, _: &NodeView, s: Self::State) -> Self::Output {
        s.1
    }
}

pub(crate) fn one_round(
    g: &Graph,
    outgoing: &BTreeMap<usize, Vec<(usize, Message)>>,
    label: &str,
) -> Result<(BTreeMap<usize, Vec<(usize, Message)>>, RoundLog), SimError> {
    let net = Network::whole(g);
    let res = run_protocol(&net, &OneShot { outgoing }, 0, 3, &SimConfig::default(), label)?;
    let inbox = res.outputs.into_iter().filter(|(_, l)| !l.is_empty()).collect();
    Ok((inbox, res.log))
}

/// Partition into the successful clusters' local parts plus singletons for
/// failed clusters' vertices.
pub(crate) fn flatten_parts(parts: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    let mut parts: Vec<Vec<usize>> = parts
        .into_iter()
        .filter(|p| !p.is_empty())
        .map(|mut p| {
            p.sort_unstable();
            p
        })
        .collect();
    parts.sort();
    parts
}
