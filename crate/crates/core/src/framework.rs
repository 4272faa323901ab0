//! Partition-and-solve: decompose, route each cluster to its leader, solve
//! locally, and send the replies back. Per-cluster failures are recorded and
//! the affected vertices fall back to singleton clusters.

use std::collections::BTreeMap;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conductance::Rational;
use crate::expander::{decompose_with, to_f64, DecompError, DecomposeConfig, Decomposition};
use crate::graph::{ceil_log2, id_bits, Graph};
use crate::routing::{
    broadcast_from_leader, density_parameter, elect_leader, gather_topology, orient_low_outdegree, EdgeRecord,
    GatherInput, RoutingConfig, TopologyAtLeader,
};
use crate::sim::{
    derive_seed, message_budget, run_protocol, Envelope, Message, Network, NodeRng, NodeView, Protocol, RoundLog,
    SimConfig,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameworkConfig {
    pub decompose: DecomposeConfig,
    pub routing: RoutingConfig,
    pub c_sep: Rational,
    /// Multiplier in the diameter bound `b = ⌈c_diam·φ⁻¹·log₂ n⌉`.
    pub c_diam: u64,
    pub diameter_bound: Option<u64>,
    pub routing_mode: RoutingMode,
}

/// `Charged` hands the leader the exact cluster topology and charges the
/// gather and broadcast as synthetic rounds (walk budget times ⌈log₂ n⌉ each)
/// instead of simulating the walks; meant for very large clusters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RoutingMode {
    Simulated,
    Charged,
}

impl Default for FrameworkConfig {
    fn default() -> FrameworkConfig {
        FrameworkConfig {
            decompose: DecomposeConfig::default(),
            routing: RoutingConfig::default(),
            c_sep: Rational::new(1, 64),
            c_diam: 4,
            diameter_bound: None,
            routing_mode: RoutingMode::Simulated,
        }
    }
}

impl FrameworkConfig {
    pub fn diameter_b(&self, phi: Rational, n: usize) -> u64 {
        self.diameter_bound.unwrap_or_else(|| {
            let l = ceil_log2(n as u64).max(1) as f64;
            let b = (self.c_diam as f64 * l / to_f64(phi)).ceil();
            if b >= u64::MAX as f64 {
                u64::MAX
            } else {
                b as u64
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiameterOutcome {
    Ok,
    AllMarked,
    /// Some but not all vertices marked; never expected, reported as failure.
    Mixed,
}

/// Iterated neighbourhood maximum of IDs for `b` rounds, sent only on change.
/// Messages carry the send round so nodes woken by mail know the time.
struct LocalMax {
    b: u64,
}

struct LocalMaxState {
    value: usize,
    /// Last value heard from each neighbour, aligned with `node.neighbors`.
    nbr: Vec<usize>,
    send: bool,
}

fn diam_widths(node: &NodeView) -> (usize, usize) {
    (id_bits(node.n), id_bits(node.n) + 1)
}

impl Protocol for LocalMax {
    type State = LocalMaxState;
    type Output = (usize, bool);
    fn init(&self, node: &NodeView) -> LocalMaxState {
        LocalMaxState { value: node.id, nbr: node.neighbors.to_vec(), send: self.b > 0 }
    }
    fn step(
        &self,
        node: &NodeView,
        s: &mut LocalMaxState,
        inbox: &[Envelope],
        _: &mut NodeRng,
        out: &mut Vec<Envelope>,
    ) {
        let (wv, wr) = diam_widths(node);
        let mut round = 1u64;
        let mut best = s.value;
        for env in inbox {
            let mut r = env.msg.reader();
            let v = r.read(wv) as usize;
            round = r.read(wr) + 1;
            let k = node.neighbors.binary_search(&env.peer).unwrap();
            s.nbr[k] = v;
            best = best.max(v);
        }
        // Values received at step r are x^(r-2); folding them yields x^(r-1),
        // which only matters while r - 1 ≤ b.
        if !inbox.is_empty() && round - 1 <= self.b && best != s.value {
            s.value = best;
            s.send = round <= self.b + 1;
        }
        if !std::mem::take(&mut s.send) {
            return;
        }
        let msg = Message::new().with(s.value as u64, wv).with(round, wr);
        out.extend(node.neighbors.iter().map(|&peer| Envelope { peer, msg: msg.clone() }));
    }
    fn halted(&self, _: &NodeView, s: &LocalMaxState) -> bool {
        !s.send
    }
    fn output(&self, _: &NodeView, s: LocalMaxState) -> (usize, bool) {
        let disagree = s.nbr.iter().any(|&x| x != s.value);
        (s.value, disagree)
    }
}

/// Marks spread `ttl` hops from the initially marked vertices.
struct MarkFlood {
    ttl: u64,
    initial: BTreeMap<usize, bool>,
}

struct MarkState {
    marked: bool,
    send: Option<u64>,
}

impl Protocol for MarkFlood {
    type State = MarkState;
    type Output = bool;
    fn init(&self, node: &NodeView) -> MarkState {
        let m = self.initial[&node.id];
        MarkState { marked: m, send: (m && self.ttl > 0).then_some(1) }
    }
    fn step(&self, node: &NodeView, s: &mut MarkState, inbox: &[Envelope], _: &mut NodeRng, out: &mut Vec<Envelope>) {
        let w = id_bits(node.n) + 1;
        if !s.marked {
            if let Some(h) = inbox.iter().map(|e| e.msg.reader().read(w)).min() {
                s.marked = true;
                if h < self.ttl {
                    s.send = Some(h + 1);
                }
            }
        }
        if let Some(h) = s.send.take() {
            out.extend(node.neighbors.iter().map(|&peer| Envelope { peer, msg: Message::new().with(h, w) }));
        }
    }
    fn halted(&self, _: &NodeView, s: &MarkState) -> bool {
        s.send.is_none()
    }
    fn output(&self, _: &NodeView, s: MarkState) -> bool {
        s.marked
    }
}

/// Two-outcome diameter test: every vertex computes the largest ID within
/// distance `b`, marks itself on disagreement with a neighbour, and marks
/// spread `2b + 1` hops. Diameter ≤ b leaves everyone unmarked; diameter
/// ≥ 2b + 1 marks everyone.
pub fn check_cluster_diameter(g: &Graph, cluster: &[usize], b: u64, seed: u64) -> (DiameterOutcome, RoundLog) {
    assert!(b >= 1, "diameter bound must be positive");
    if cluster.len() == 1 {
        return (DiameterOutcome::Ok, RoundLog::new());
    }
    let net = Network::induced(g, cluster);
    let cap = 2 * cluster.len() as u64 + 4;
    let cfg = SimConfig::default();
    let a = run_protocol(&net, &LocalMax { b }, seed, cap, &cfg, "diameter-max").expect("bounded protocol");
    let initial: BTreeMap<usize, bool> = a.outputs.iter().map(|&(v, (_, d))| (v, d)).collect();
    let ttl = b.saturating_mul(2).saturating_add(1);
    let m =
        run_protocol(&net, &MarkFlood { ttl, initial }, seed, cap, &cfg, "diameter-marks").expect("bounded protocol");
    let mut log = a.log;
    log.absorb(m.log);
    let marked = m.outputs.iter().filter(|(_, x)| *x).count();
    let outcome = match marked {
        0 => DiameterOutcome::Ok,
        k if k == cluster.len() => DiameterOutcome::AllMarked,
        _ => DiameterOutcome::Mixed,
    };
    (outcome, log)
}

/// deg(v*) ≥ c_sep·φ²·|E_i|.
pub fn check_degree_condition(leader_degree: usize, cluster_edges: usize, phi: Rational, c_sep: Rational) -> bool {
    // φ² overflows i64 for the smallest targets in use.
    let wide = |r: Rational| Ratio::<i128>::new(*r.numer() as i128, *r.denom() as i128);
    let p = wide(phi);
    Ratio::from_integer(leader_degree as i128) >= wide(c_sep) * p * p * Ratio::from_integer(cluster_edges as i128)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum FailureReason {
    DegreeCondition,
    Routing(String),
    DiameterCheck,
    ReplyTooLarge { vertex: usize, bits: usize },
}

/// What the leader sees: the gathered topology and the same cluster as a
/// standalone graph on `0..k` following `topology.vertices`.
pub struct ClusterView<'a> {
    pub index: usize,
    pub topology: &'a TopologyAtLeader,
    pub graph: Graph,
}

impl ClusterView<'_> {
    pub fn vertices(&self) -> &[usize] {
        &self.topology.vertices
    }
}

pub struct LocalSolution<O> {
    pub output: O,
    /// Keyed by global vertex id; each must fit in one message.
    pub replies: BTreeMap<usize, Message>,
}

impl<O> LocalSolution<O> {
    pub fn silent(output: O) -> LocalSolution<O> {
        LocalSolution { output, replies: BTreeMap::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterStats {
    pub size: usize,
    pub edges: usize,
    pub leader_degree: usize,
    /// deg(v*) / (φ²·|V_i|).
    pub separator_ratio: f64,
    pub max_tokens_per_edge: usize,
    pub tokens_per_edge_cap: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterResult<O> {
    pub cluster: usize,
    pub vertices: Vec<usize>,
    pub leader: Option<usize>,
    pub output: Option<O>,
    pub replies: BTreeMap<usize, Message>,
    pub topology: Option<TopologyAtLeader>,
    pub failure: Option<FailureReason>,
    pub stats: ClusterStats,
    pub log: RoundLog,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSolveResult<O> {
    pub decomposition: Decomposition,
    pub per_cluster: Vec<ClusterResult<O>>,
    /// The decomposition's clusters with failed ones split into singletons.
    pub final_clusters: Vec<Vec<usize>>,
    pub failures: Vec<(usize, FailureReason)>,
    pub round_log: RoundLog,
}

impl<O> ClusterSolveResult<O> {
    pub fn min_separator_ratio(&self) -> Option<f64> {
        self.per_cluster
            .iter()
            .filter(|c| c.stats.size > 1)
            .map(|c| c.stats.separator_ratio)
            .min_by(|a, b| a.partial_cmp(b).unwrap())
    }
}

pub fn partition_and_solve<O, F>(
    g: &Graph,
    epsilon: f64,
    solver: F,
    seed: u64,
    cfg: &FrameworkConfig,
) -> Result<ClusterSolveResult<O>, DecompError>
where
    O: Send,
    F: Fn(&ClusterView) -> LocalSolution<O> + Sync,
{
    let d = decompose_with(g, epsilon, derive_seed(seed, "decompose", 0), &cfg.decompose)?;
    let w = id_bits(g.n());
    let input = GatherInput::plain(w);
    Ok(solve_on_decomposition(g, d, &input, solver, seed, cfg))
}

/// Routing, solving and replying on an existing decomposition; the round
/// log starts from the decomposition's own charge.
pub fn solve_on_decomposition<O, F>(
    g: &Graph,
    d: Decomposition,
    input: &GatherInput,
    solver: F,
    seed: u64,
    cfg: &FrameworkConfig,
) -> ClusterSolveResult<O>
where
    O: Send,
    F: Fn(&ClusterView) -> LocalSolution<O> + Sync,
{
    let phi = d.phi_target;
    let per_cluster: Vec<ClusterResult<O>> = d
        .clusters
        .par_iter()
        .enumerate()
        .map(|(i, c)| run_cluster(g, i, c, phi, input, &solver, derive_seed(seed, "cluster", i as u64), cfg))
        .collect();
    let mut round_log = d.round_log.clone();
    round_log.absorb_parallel("clusters", per_cluster.iter().map(|c| c.log.clone()).collect());
    let mut final_clusters = Vec::new();
    let mut failures = Vec::new();
    for c in &per_cluster {
        match &c.failure {
            Some(f) => {
                failures.push((c.cluster, f.clone()));
                final_clusters.extend(c.vertices.iter().map(|&v| vec![v]));
            }
            None => final_clusters.push(c.vertices.clone()),
        }
    }
    final_clusters.sort();
    ClusterSolveResult { decomposition: d, per_cluster, final_clusters, failures, round_log }
}

#[allow(clippy::too_many_arguments)]
fn run_cluster<O, F>(
    g: &Graph,
    index: usize,
    cluster: &[usize],
    phi: Rational,
    input: &GatherInput,
    solver: &F,
    seed: u64,
    cfg: &FrameworkConfig,
) -> ClusterResult<O>
where
    F: Fn(&ClusterView) -> LocalSolution<O>,
{
    let n = g.n();
    let params = cfg.routing.params(phi, n);
    let (sub, _) = g.induced(cluster);
    let mut result = ClusterResult {
        cluster: index,
        vertices: cluster.to_vec(),
        leader: None,
        output: None,
        replies: BTreeMap::new(),
        topology: None,
        failure: None,
        stats: ClusterStats {
            size: cluster.len(),
            edges: sub.m(),
            leader_degree: 0,
            separator_ratio: f64::INFINITY,
            max_tokens_per_edge: 0,
            tokens_per_edge_cap: params.tokens_per_edge,
        },
        log: RoundLog::new(),
    };
    let b = cfg.diameter_b(phi, n);
    let (outcome, dlog) = check_cluster_diameter(g, cluster, b, seed);
    result.log.absorb(dlog);
    if outcome != DiameterOutcome::Ok {
        result.failure = Some(FailureReason::DiameterCheck);
        return result;
    }
    let leader = match elect_leader(g, cluster, seed) {
        Ok((l, log)) => {
            result.log.absorb(log);
            l
        }
        Err(e) => {
            result.failure = Some(FailureReason::Routing(e.to_string()));
            return result;
        }
    };
    result.leader = Some(leader);
    let pos = cluster.binary_search(&leader).unwrap();
    let deg = sub.degree(pos);
    result.stats.leader_degree = deg;
    let f = to_f64(phi);
    result.stats.separator_ratio = deg as f64 / (f * f * cluster.len() as f64);
    if cluster.len() > 1 {
        result.log.charge_synthetic("degree-check", b);
    }
    if !check_degree_condition(deg, sub.m(), phi, cfg.c_sep) {
        result.failure = Some(FailureReason::DegreeCondition);
        return result;
    }
    let orient = match orient_low_outdegree(g, cluster, density_parameter(g), seed) {
        Ok(o) => o,
        Err(e) => {
            result.failure = Some(FailureReason::Routing(e.to_string()));
            return result;
        }
    };
    result.log.absorb(orient.log.clone());
    if cfg.routing_mode == RoutingMode::Charged {
        let topology = exact_topology(g, cluster, leader, input);
        let view = ClusterView { index, graph: topology.local_graph(g.is_weighted()), topology: &topology };
        let sol = solver(&view);
        if let Some(f) = oversized_reply(&sol, n, cfg) {
            result.failure = Some(f);
            return result;
        }
        let charge = params.walk_budget.saturating_mul(ceil_log2(n as u64).max(1) as u64);
        result.log.charge_synthetic("gather-charged", charge);
        result.log.charge_synthetic("broadcast-charged", charge);
        result.topology = Some(topology);
        result.output = Some(sol.output);
        result.replies = sol.replies;
        return result;
    }
    let gathered = gather_topology(g, cluster, leader, &orient, &params, input, seed);
    let topology = match &gathered {
        Ok(o) => {
            result.log.absorb(o.log.clone());
            result.stats.max_tokens_per_edge = o.max_tokens_per_edge;
            o.topology.clone()
        }
        Err(e) => {
            result.failure = Some(FailureReason::Routing(e.to_string()));
            return result;
        }
    };
    let view = ClusterView { index, graph: topology.local_graph(g.is_weighted()), topology: &topology };
    let sol = solver(&view);
    if let Some(f) = oversized_reply(&sol, n, cfg) {
        result.failure = Some(f);
        return result;
    }
    let reply_bits: BTreeMap<usize, usize> = sol.replies.iter().map(|(&v, m)| (v, m.bit_length())).collect();
    match broadcast_from_leader(&gathered, &reply_bits, n, &params) {
        Ok(b) => result.log.absorb(b.log),
        Err(e) => {
            result.failure = Some(FailureReason::Routing(e.to_string()));
            return result;
        }
    }
    result.topology = Some(topology);
    result.output = Some(sol.output);
    result.replies = sol.replies;
    result
}

fn oversized_reply<O>(sol: &LocalSolution<O>, n: usize, cfg: &FrameworkConfig) -> Option<FailureReason> {
    let budget = message_budget(n, cfg.routing.c_msg);
    sol.replies
        .iter()
        .find(|(_, m)| m.bit_length() > budget)
        .map(|(&vertex, m)| FailureReason::ReplyTooLarge { vertex, bits: m.bit_length() })
}

/// What a successful gather delivers, read directly off the host graph.
pub fn exact_topology(g: &Graph, cluster: &[usize], leader: usize, input: &GatherInput) -> TopologyAtLeader {
    let (_, back) = g.induced(cluster);
    let mut eids = back;
    eids.sort_unstable();
    let edges = eids
        .into_iter()
        .map(|e| {
            let (u, v) = g.edge(e);
            EdgeRecord { u, v, eid: e, weight: g.weight(e), annotation: (input.edge_annotation)(e) }
        })
        .collect();
    let mut vertices = cluster.to_vec();
    vertices.sort_unstable();
    let payloads = vertices.iter().map(|&v| (v, (input.vertex_payload)(v))).collect();
    TopologyAtLeader { leader, vertices, edges, payloads }
}
