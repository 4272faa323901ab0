use std::collections::BTreeMap;

use crate::framework::{partition_and_solve, ClusterView, FrameworkConfig, LocalSolution};
use crate::graph::Graph;
use crate::oracles;
use crate::routing::density_parameter;
use crate::sim::{Message, RoundLog};

use super::{one_round, AppError, AppReport, Solution};

/// Largest cluster solved exactly at its leader.
pub const EXACT_MIS_LIMIT: usize = 40;

/// Repeatedly take a minimum-degree vertex and drop its neighbours.
pub fn greedy_mis(g: &Graph) -> Vec<usize> {
    let n = g.n();
    let mut alive = vec![true; n];
    let mut deg: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut out = Vec::new();
    loop {
        let Some(v) = (0..n).filter(|&v| alive[v]).min_by_key(|&v| (deg[v], v)) else { break };
        out.push(v);
        alive[v] = false;
        for &(u, _) in g.neighbors(v) {
            if alive[u] {
                alive[u] = false;
                for &(w, _) in g.neighbors(u) {
                    deg[w] = deg[w].saturating_sub(1);
                }
            }
        }
    }
    out.sort_unstable();
    out
}

/// Per-cluster maximum independent sets joined together; where an
/// inter-cluster edge has both ends chosen the smaller ID drops out.
pub fn max_independent_set(g: &Graph, epsilon: f64, seed: u64, cfg: &FrameworkConfig) -> Result<AppReport, AppError> {
    let d = density_parameter(g);
    let eps = epsilon / (2 * d + 1) as f64;
    let res = partition_and_solve(
        g,
        eps,
        |v: &ClusterView| {
            let exact = v.graph.n() <= EXACT_MIS_LIMIT;
            let local = if exact { oracles::max_independent_set(&v.graph) } else { greedy_mis(&v.graph) };
            let chosen: Vec<usize> = local.iter().map(|&i| v.vertices()[i]).collect();
            let replies =
                v.vertices().iter().map(|&x| (x, Message::new().with(u64::from(chosen.contains(&x)), 1))).collect();
            LocalSolution { output: (chosen, !exact), replies }
        },
        seed,
        cfg,
    )?;
    let mut in_set = vec![false; g.n()];
    let mut heuristic = false;
    for c in &res.per_cluster {
        match &c.output {
            Some((chosen, h)) => {
                heuristic |= *h;
                for &v in chosen {
                    in_set[v] = true;
                }
            }
            // A failed cluster falls back to singletons, each its own MIS.
            None => {
                for &v in &c.vertices {
                    in_set[v] = true;
                }
            }
        }
    }
    let mut outgoing: BTreeMap<usize, Vec<(usize, Message)>> = BTreeMap::new();
    for v in 0..g.n() {
        if in_set[v] {
            for &(u, _) in g.neighbors(v) {
                outgoing.entry(v).or_default().push((u, Message::new().with(1, 1)));
            }
        }
    }
    let (inbox, log) = one_round(g, &outgoing, "mis-conflicts")?;
    for (v, got) in inbox {
        if in_set[v] && got.iter().any(|&(u, _)| in_set[u] && u > v) {
            in_set[v] = false;
        }
    }
    let set: Vec<usize> = (0..g.n()).filter(|&v| in_set[v]).collect();
    let mut round_log = RoundLog::new();
    round_log.absorb(res.round_log);
    round_log.absorb(log);
    let mut report = AppReport::new("mis", Solution::Vertices(set.clone()), set.len() as u64, round_log);
    report.heuristic = heuristic;
    report.failures = res.failures;
    Ok(report)
}

pub fn is_independent(g: &Graph, set: &[usize]) -> bool {
    let mut s = vec![false; g.n()];
    for &v in set {
        s[v] = true;
    }
    g.edges().iter().all(|&(u, v)| !(s[u] && s[v]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(g: &Graph, eps: f64) -> AppReport {
        max_independent_set(g, eps, 0, &FrameworkConfig::default()).unwrap()
    }

    #[test]
    fn small_examples() {
        let t = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(run(&t, 0.3).objective, 1);
        let tt = Graph::from_edges(6, &[(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (4, 5), (3, 5)]).unwrap();
        let r = run(&tt, 0.3);
        assert_eq!(r.objective, 2);
        let Solution::Vertices(s) = &r.solution else { panic!() };
        assert!(is_independent(&tt, s));
        let e = Graph::empty(5);
        assert_eq!(run(&e, 0.3).objective, 5);
    }

    #[test]
    fn greedy_is_independent() {
        let g = crate::generators::generate(&crate::generators::Family::RandomPlanar { n: 60 }, 2).unwrap();
        assert!(is_independent(&g, &greedy_mis(&g)));
    }
}
