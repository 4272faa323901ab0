use std::collections::VecDeque;

use num_rational::Ratio;

use crate::framework::{partition_and_solve, ClusterView, FrameworkConfig, LocalSolution};
use crate::graph::{id_bits, Graph};
use crate::planarity::planar;
use crate::sim::{Message, RoundLog};

use super::{eliminate_stars, AppError, AppReport, Solution};

/// Maximum cardinality matching by Edmonds' blossom algorithm; returns the
/// mate of each vertex.
pub fn edmonds_matching(g: &Graph) -> Vec<Option<usize>> {
    let n = g.n();
    const NONE: usize = usize::MAX;
    let mut mate = vec![NONE; n];
    let mut parent = vec![NONE; n];
    let mut base: Vec<usize> = (0..n).collect();
    let mut used = vec![false; n];
    let mut blossom = vec![false; n];

    fn lca(mate: &[usize], base: &[usize], parent: &[usize], mut a: usize, mut b: usize) -> usize {
        let mut seen = vec![false; mate.len()];
        loop {
            a = base[a];
            seen[a] = true;
            if mate[a] == usize::MAX {
                break;
            }
            a = parent[mate[a]];
        }
        loop {
            b = base[b];
            if seen[b] {
                return b;
            }
            b = parent[mate[b]];
        }
    }

    fn mark_path(
        mate: &[usize],
        base: &[usize],
        parent: &mut [usize],
        blossom: &mut [bool],
        mut v: usize,
        b: usize,
        mut child: usize,
    ) {
        while base[v] != b {
            blossom[base[v]] = true;
            blossom[base[mate[v]]] = true;
            parent[v] = child;
            child = mate[v];
            v = parent[mate[v]];
        }
    }

    for root in 0..n {
        if mate[root] != NONE {
            continue;
        }
        used.iter_mut().for_each(|x| *x = false);
        parent.iter_mut().for_each(|x| *x = NONE);
        for (i, b) in base.iter_mut().enumerate() {
            *b = i;
        }
        used[root] = true;
        let mut q = VecDeque::from([root]);
        let mut end = NONE;
        'search: while let Some(v) = q.pop_front() {
            for &(to, _) in g.neighbors(v) {
                if base[v] == base[to] || mate[v] == to {
                    continue;
                }
                if to == root || (mate[to] != NONE && parent[mate[to]] != NONE) {
                    let cur = lca(&mate, &base, &parent, v, to);
                    blossom.iter_mut().for_each(|x| *x = false);
                    mark_path(&mate, &base, &mut parent, &mut blossom, v, cur, to);
                    mark_path(&mate, &base, &mut parent, &mut blossom, to, cur, v);
                    for i in 0..n {
                        if blossom[base[i]] {
                            base[i] = cur;
                            if !used[i] {
                                used[i] = true;
                                q.push_back(i);
                            }
                        }
                    }
                } else if parent[to] == NONE {
                    parent[to] = v;
                    if mate[to] == NONE {
                        end = to;
                        break 'search;
                    }
                    used[mate[to]] = true;
                    q.push_back(mate[to]);
                }
            }
        }
        let mut v = end;
        while v != NONE {
            let pv = parent[v];
            let ppv = mate[pv];
            mate[v] = pv;
            mate[pv] = v;
            v = ppv;
        }
    }
    mate.into_iter().map(|m| (m != NONE).then_some(m)).collect()
}

pub fn matching_edges(mate: &[Option<usize>]) -> Vec<(usize, usize)> {
    mate.iter().enumerate().filter_map(|(v, m)| m.filter(|&u| v < u).map(|u| (v, u))).collect()
}

pub fn is_matching(g: &Graph, edges: &[(usize, usize)]) -> bool {
    let mut used = vec![false; g.n()];
    edges.iter().all(|&(u, v)| {
        let ok = g.has_edge(u, v) && !used[u] && !used[v];
        used[u] = true;
        used[v] = true;
        ok
    })
}

/// Star elimination, then per-cluster maximum matchings with internal
/// accuracy `c·ε`.
pub fn mcm_planar(
    g: &Graph,
    epsilon: f64,
    seed: u64,
    c: Ratio<i64>,
    cfg: &FrameworkConfig,
) -> Result<AppReport, AppError> {
    if !planar(g) {
        return Err(AppError::NotPlanar);
    }
    let stars = eliminate_stars(g)?;
    let eps = epsilon * (*c.numer() as f64) / (*c.denom() as f64);
    let w = id_bits(g.n());
    let res = partition_and_solve(
        &stars.reduced,
        eps,
        |v: &ClusterView| {
            let local = matching_edges(&edmonds_matching(&v.graph));
            let verts = v.vertices();
            let edges: Vec<(usize, usize)> = local.iter().map(|&(a, b)| (verts[a], verts[b])).collect();
            let mut replies = std::collections::BTreeMap::new();
            for &(a, b) in &edges {
                replies.insert(a, Message::new().with(b as u64, w));
                replies.insert(b, Message::new().with(a as u64, w));
            }
            LocalSolution { output: edges, replies }
        },
        seed,
        cfg,
    )?;
    let mut edges: Vec<(usize, usize)> = res.per_cluster.iter().filter_map(|c| c.output.clone()).flatten().collect();
    edges.sort_unstable();
    let mut log = RoundLog::new();
    log.absorb(stars.log);
    log.absorb(res.round_log);
    let mut report = AppReport::new("mcm", Solution::Edges(edges.clone()), edges.len() as u64, log);
    report.failures = res.failures;
    report.metrics.insert("star_removed".into(), stars.removed.len() as f64);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{generate, Family};
    use crate::oracles::max_cardinality_matching;

    #[test]
    fn edmonds_matches_oracle() {
        for seed in 0..40 {
            let n = 6 + seed as usize % 10;
            let g = generate(&Family::RandomPlanar { n }, seed).unwrap();
            let m = matching_edges(&edmonds_matching(&g));
            assert!(is_matching(&g, &m));
            assert_eq!(m.len() as u64, max_cardinality_matching(&g).0);
        }
        // Odd cycle with a pendant needs a blossom.
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (4, 5)]).unwrap();
        assert_eq!(matching_edges(&edmonds_matching(&g)).len(), 3);
    }

    #[test]
    fn examples() {
        let cfg = FrameworkConfig::default();
        let c = Ratio::new(1, 8);
        let e = Graph::from_edges(2, &[(0, 1)]).unwrap();
        assert_eq!(mcm_planar(&e, 0.5, 0, c, &cfg).unwrap().objective, 1);
        let p4 = generate(&Family::Path { n: 4 }, 0).unwrap();
        assert_eq!(mcm_planar(&p4, 0.5, 0, c, &cfg).unwrap().objective, 2);
        let grid = generate(&Family::Grid { w: 3, h: 3 }, 0).unwrap();
        let r = mcm_planar(&grid, 0.25, 0, c, &cfg).unwrap();
        let Solution::Edges(m) = &r.solution else { panic!() };
        assert!(is_matching(&grid, m));
        assert!(r.objective as f64 >= 0.75 * 4.0);
        let mut k5 = Vec::new();
        for a in 0..5 {
            for b in a + 1..5 {
                k5.push((a, b));
            }
        }
        let k5 = Graph::from_edges(5, &k5).unwrap();
        assert_eq!(mcm_planar(&k5, 0.5, 0, c, &cfg), Err(AppError::NotPlanar));
    }
}
