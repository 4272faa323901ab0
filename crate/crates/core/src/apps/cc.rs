use std::collections::BTreeMap;

use crate::expander::decompose_with;
use crate::framework::{solve_on_decomposition, ClusterView, FrameworkConfig, LocalSolution};
use crate::graph::{id_bits, Graph};
use crate::oracles;
use crate::routing::GatherInput;
use crate::sim::{derive_seed, Message, RoundLog};

use super::{flatten_parts, AppError, AppReport, Solution};

/// Largest cluster clustered exactly by partition enumeration.
pub const EXACT_CC_LIMIT: usize = 12;

/// Single-vertex moves to the best adjacent cluster (or a fresh one) until
/// nothing improves. Starts from singletons.
pub fn local_search_clustering(g: &Graph, plus: &[bool]) -> Vec<usize> {
    let n = g.n();
    let mut label: Vec<usize> = (0..n).collect();
    loop {
        let mut improved = false;
        for v in 0..n {
            // Agreement with each neighbouring cluster: +1 per plus edge into it, -1 per minus edge.
            let mut gain: BTreeMap<usize, i64> = BTreeMap::new();
            for &(u, e) in g.neighbors(v) {
                *gain.entry(label[u]).or_default() += if plus[e] { 1 } else { -1 };
            }
            let here = gain.get(&label[v]).copied().unwrap_or(0);
            let (best, best_gain) = gain
                .iter()
                .map(|(&c, &s)| (c, s))
                .max_by_key(|&(c, s)| (s, std::cmp::Reverse(c)))
                .unwrap_or((label[v], 0));
            if best_gain > here && best != label[v] {
                label[v] = best;
                improved = true;
            } else if here < 0 {
                // A fresh singleton; the vertex's own id is free when unused.
                let fresh = if label.iter().any(|&l| l == v) { (0..).find(|c| !label.contains(c)).unwrap() } else { v };
                label[v] = fresh;
                improved = true;
            }
        }
        if !improved {
            return label;
        }
    }
}

/// Per-cluster optimal clusterings joined; `plus[e]` is the label of edge `e`.
pub fn correlation_clustering(
    g: &Graph,
    plus: &[bool],
    epsilon: f64,
    seed: u64,
    cfg: &FrameworkConfig,
) -> Result<AppReport, AppError> {
    if plus.len() != g.m() {
        return Err(AppError::Labels { expected: g.m(), got: plus.len() });
    }
    let d = decompose_with(g, epsilon / 2.0, derive_seed(seed, "decompose", 0), &cfg.decompose)?;
    let annotate = |e: usize| u64::from(plus[e]);
    let input = GatherInput { vertex_payload: &|_| 0, edge_annotation: &annotate, payload_bits: 1 };
    let w = id_bits(g.n());
    let res = solve_on_decomposition(
        g,
        d,
        &input,
        |v: &ClusterView| {
            let local_plus: Vec<bool> = v.topology.edges.iter().map(|r| r.annotation == 1).collect();
            let exact = v.graph.n() <= EXACT_CC_LIMIT;
            let label = if exact {
                oracles::correlation_clustering(&v.graph, &local_plus).1
            } else {
                local_search_clustering(&v.graph, &local_plus)
            };
            let mut parts: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            let mut replies = BTreeMap::new();
            for (i, &x) in v.vertices().iter().enumerate() {
                parts.entry(label[i]).or_default().push(x);
                replies.insert(x, Message::new().with(label[i] as u64, w));
            }
            LocalSolution { output: (parts.into_values().collect::<Vec<_>>(), !exact), replies }
        },
        seed,
        cfg,
    );
    let mut parts = Vec::new();
    let mut heuristic = false;
    for c in &res.per_cluster {
        match &c.output {
            Some((p, h)) => {
                heuristic |= *h;
                parts.extend(p.iter().cloned());
            }
            None => parts.extend(c.vertices.iter().map(|&v| vec![v])),
        }
    }
    let parts = flatten_parts(parts);
    let mut label = vec![0; g.n()];
    for (i, p) in parts.iter().enumerate() {
        for &v in p {
            label[v] = i;
        }
    }
    let score = oracles::clustering_score(g, plus, &label);
    let mut log = RoundLog::new();
    log.absorb(res.round_log);
    let mut report = AppReport::new("cc", Solution::Partition(parts), score, log);
    report.heuristic = heuristic;
    report.failures = res.failures;
    Ok(report)
}
