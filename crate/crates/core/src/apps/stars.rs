use std::collections::BTreeMap;

use crate::graph::{id_bits, Graph};
use crate::sim::{Message, RoundLog};

use super::{one_round, AppError};

#[derive(Debug, Clone, PartialEq)]
pub struct StarElimination {
    /// Same vertex set; removed vertices are isolated.
    pub reduced: Graph,
    pub removed: Vec<usize>,
    pub log: RoundLog,
}

fn without(g: &Graph, removed: &[bool]) -> Graph {
    let keep: Vec<(usize, usize)> = g.edges().iter().copied().filter(|&(u, v)| !removed[u] && !removed[v]).collect();
    let mut h = Graph::from_edges(g.n(), &keep).expect("subgraph of a simple graph");
    if let Some(c) = g.density_bound() {
        h = h.with_density_bound(c);
    }
    h
}

/// Two protocol phases. First every degree-1 vertex tokens its neighbour,
/// which keeps the smallest token and bounces the rest. Then every degree-2
/// vertex tokens its smaller neighbour with the pair of neighbours; tokens
/// are grouped by pair, the two smallest kept and the rest bounced. Bounced
/// vertices are removed.
pub fn eliminate_stars(g: &Graph) -> Result<StarElimination, AppError> {
    let w = id_bits(g.n());
    let mut removed = vec![false; g.n()];
    let mut log = RoundLog::new();

    let mut tokens: BTreeMap<usize, Vec<(usize, Message)>> = BTreeMap::new();
    for v in 0..g.n() {
        if g.degree(v) == 1 {
            let u = g.neighbors(v)[0].0;
            tokens.entry(v).or_default().push((u, Message::new().with(v as u64, w)));
        }
    }
    let (inbox, l) = one_round(g, &tokens, "two-stars-tokens")?;
    log.absorb(l);
    let mut bounces: BTreeMap<usize, Vec<(usize, Message)>> = BTreeMap::new();
    for (c, got) in &inbox {
        let mut leaves: Vec<usize> = got.iter().map(|(p, _)| *p).collect();
        leaves.sort_unstable();
        for &leaf in leaves.iter().skip(1) {
            bounces.entry(*c).or_default().push((leaf, Message::new().with(1, 1)));
        }
    }
    let (inbox, l) = one_round(g, &bounces, "two-stars-bounce")?;
    log.absorb(l);
    for v in inbox.keys() {
        removed[*v] = true;
    }
    let mid = without(g, &removed);

    let mut tokens: BTreeMap<usize, Vec<(usize, Message)>> = BTreeMap::new();
    for v in 0..mid.n() {
        if mid.degree(v) == 2 {
            let (a, b) = (mid.neighbors(v)[0].0, mid.neighbors(v)[1].0);
            let (lo, hi) = (a.min(b), a.max(b));
            tokens.entry(v).or_default().push((lo, Message::new().with(hi as u64, w)));
        }
    }
    let (inbox, l) = one_round(&mid, &tokens, "double-stars-tokens")?;
    log.absorb(l);
    let mut bounces: BTreeMap<usize, Vec<(usize, Message)>> = BTreeMap::new();
    for (x, got) in &inbox {
        let mut groups: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        for (p, m) in got {
            groups.entry(m.reader().read(w)).or_default().push(*p);
        }
        for (_, mut mids) in groups {
            mids.sort_unstable();
            for &m in mids.iter().skip(2) {
                bounces.entry(*x).or_default().push((m, Message::new().with(1, 1)));
            }
        }
    }
    let (inbox, l) = one_round(&mid, &bounces, "double-stars-bounce")?;
    log.absorb(l);
    for v in inbox.keys() {
        removed[*v] = true;
    }
    let reduced = without(g, &removed);
    let removed = (0..g.n()).filter(|&v| removed[v]).collect();
    Ok(StarElimination { reduced, removed, log })
}

/// A vertex with at least two degree-1 neighbours.
pub fn has_two_star(g: &Graph) -> bool {
    (0..g.n()).any(|v| g.neighbors(v).iter().filter(|&&(u, _)| g.degree(u) == 1).count() >= 2)
}

/// A pair with at least three common degree-2 neighbours.
pub fn has_three_double_star(g: &Graph) -> bool {
    let mut count: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for v in 0..g.n() {
        if g.degree(v) == 2 {
            let (a, b) = (g.neighbors(v)[0].0, g.neighbors(v)[1].0);
            *count.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    count.values().any(|&c| c >= 3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::max_cardinality_matching;

    #[test]
    fn star_keeps_one_leaf() {
        let g = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let s = eliminate_stars(&g).unwrap();
        assert_eq!(s.removed, vec![2, 3]);
        assert_eq!(s.reduced.m(), 1);
    }

    #[test]
    fn double_star_keeps_two_middles() {
        // x = 0, y = 1, middles 2..=5.
        let e: Vec<(usize, usize)> = (2..6).flat_map(|m| [(0, m), (1, m)]).collect();
        let g = Graph::from_edges(6, &e).unwrap();
        let s = eliminate_stars(&g).unwrap();
        assert_eq!(s.removed, vec![4, 5]);
        assert!(!has_three_double_star(&s.reduced));
    }

    #[test]
    fn path_of_three() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let s = eliminate_stars(&g).unwrap();
        assert_eq!(s.removed, vec![2]);
        assert_eq!(max_cardinality_matching(&s.reduced).0, 1);
        assert!(s.log.true_rounds <= 4);
    }

    #[test]
    fn idempotent_and_value_preserving() {
        for seed in 0..30 {
            let g = crate::generators::generate(&crate::generators::Family::RandomPlanar { n: 14 }, seed).unwrap();
            let s = eliminate_stars(&g).unwrap();
            assert!(!has_two_star(&s.reduced) && !has_three_double_star(&s.reduced));
            assert_eq!(max_cardinality_matching(&s.reduced).0, max_cardinality_matching(&g).0);
            let again = eliminate_stars(&s.reduced).unwrap();
            assert!(again.removed.is_empty());
        }
    }
}
