use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;

pub type Rational = Ratio<i64>;

pub const EXACT_CONDUCTANCE_LIMIT: usize = 20;

#[derive(Debug, Error, PartialEq)]
#[error("exact conductance limited to {limit} vertices, got {n}")]
pub struct SizeGuard {
    pub n: usize,
    pub limit: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutView {
    pub s: Vec<usize>,
    pub boundary_size: usize,
    pub vol_s: usize,
    pub vol_rest: usize,
    pub conductance: Rational,
}

pub fn volume(g: &Graph, s: &[usize]) -> usize {
    s.iter().map(|&v| g.degree(v)).sum()
}

/// Ratio of boundary to the smaller side volume. Empty and full cuts have
/// conductance 0; so does any cut whose smaller side has zero volume.
pub fn cut_ratio(boundary: usize, vol_s: usize, vol_rest: usize) -> Rational {
    let den = vol_s.min(vol_rest);
    if den == 0 {
        Rational::from_integer(0)
    } else {
        Rational::new(boundary as i64, den as i64)
    }
}

pub fn conductance(g: &Graph, s: &[usize]) -> CutView {
    let mut inside = vec![false; g.n()];
    let mut set = Vec::new();
    for &v in s {
        if !inside[v] {
            inside[v] = true;
            set.push(v);
        }
    }
    set.sort_unstable();
    let boundary = set.iter().flat_map(|&v| g.neighbors(v).iter()).filter(|&&(u, _)| !inside[u]).count();
    let vol_s = volume(g, &set);
    let vol_rest = 2 * g.m() - vol_s;
    let conductance = if set.is_empty() || set.len() == g.n() {
        Rational::from_integer(0)
    } else {
        cut_ratio(boundary, vol_s, vol_rest)
    };
    CutView { s: set, boundary_size: boundary, vol_s, vol_rest, conductance }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactConductance {
    pub value: Rational,
    /// A minimizing side (never contains the highest-numbered vertex).
    pub argmin: Vec<usize>,
}

/// Minimum conductance over all nontrivial cuts, by Gray-code enumeration.
/// Graphs with at most one vertex have no nontrivial cut; they report 1.
pub fn exact_graph_conductance(g: &Graph) -> Result<ExactConductance, SizeGuard> {
    let n = g.n();
    if n > EXACT_CONDUCTANCE_LIMIT {
        return Err(SizeGuard { n, limit: EXACT_CONDUCTANCE_LIMIT });
    }
    if n <= 1 {
        return Ok(ExactConductance { value: Rational::from_integer(1), argmin: Vec::new() });
    }
    let total = 2 * g.m();
    let mut inside = vec![false; n];
    let (mut boundary, mut vol) = (0usize, 0usize);
    let mut best: Option<(Rational, u32)> = None;
    let mut mask: u32 = 0;
    // The top vertex stays outside; complements cover the rest.
    for k in 1u32..(1u32 << (n - 1)) {
        let v = k.trailing_zeros() as usize;
        let entering = !inside[v];
        for &(u, _) in g.neighbors(v) {
            if inside[u] == entering {
                boundary -= 1;
            } else {
                boundary += 1;
            }
        }
        inside[v] = entering;
        mask ^= 1 << v;
        if entering {
            vol += g.degree(v);
        } else {
            vol -= g.degree(v);
        }
        let phi = cut_ratio(boundary, vol, total - vol);
        if best.map_or(true, |(b, _)| phi < b) {
            best = Some((phi, mask));
        }
    }
    let (value, m) = best.unwrap();
    let argmin = (0..n).filter(|&v| m >> v & 1 == 1).collect();
    Ok(ExactConductance { value, argmin })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: i64, b: i64) -> Rational {
        Rational::new(a, b)
    }

    fn k(n: usize) -> Graph {
        let mut e = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                e.push((a, b));
            }
        }
        Graph::from_edges(n, &e).unwrap()
    }

    fn cycle(n: usize) -> Graph {
        Graph::from_edges(n, &(0..n).map(|i| (i, (i + 1) % n)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn definition_cases() {
        assert_eq!(conductance(&cycle(4), &[0, 1]).conductance, r(1, 2));
        assert_eq!(conductance(&k(4), &[]).conductance, r(0, 1));
        assert_eq!(conductance(&k(4), &[0, 1, 2, 3]).conductance, r(0, 1));
        let c = conductance(&k(4), &[2]);
        assert_eq!(c.conductance, r(1, 1));
        assert_eq!(c.vol_s + c.vol_rest, 12);
    }

    #[test]
    fn exact_values() {
        // Frozen from full cut enumeration.
        assert_eq!(exact_graph_conductance(&k(4)).unwrap().value, r(2, 3));
        assert_eq!(exact_graph_conductance(&cycle(6)).unwrap().value, r(1, 3));
        let e = Graph::from_edges(2, &[(0, 1)]).unwrap();
        assert_eq!(exact_graph_conductance(&e).unwrap().value, r(1, 1));
        assert!(exact_graph_conductance(&cycle(21)).is_err());
    }

    #[test]
    fn argmin_attains_value() {
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (4, 5), (3, 5)]).unwrap();
        let ex = exact_graph_conductance(&g).unwrap();
        assert_eq!(ex.value, r(1, 7));
        assert_eq!(conductance(&g, &ex.argmin).conductance, ex.value);
    }

    #[test]
    fn matches_direct_enumeration() {
        for seed in 0..20u64 {
            let n = 3 + (seed as usize % 8);
            let mut e = Vec::new();
            let mut x = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            for a in 0..n {
                for b in a + 1..n {
                    x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    if x >> 61 < 3 {
                        e.push((a, b));
                    }
                }
            }
            let g = Graph::from_edges(n, &e).unwrap();
            let mut best = None::<Rational>;
            for mask in 1u32..(1 << n) - 1 {
                let s: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
                let c = conductance(&g, &s);
                let comp: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 0).collect();
                assert_eq!(c.conductance, conductance(&g, &comp).conductance);
                best = Some(best.map_or(c.conductance, |b: Rational| b.min(c.conductance)));
            }
            assert_eq!(exact_graph_conductance(&g).unwrap().value, best.unwrap());
        }
    }
}
