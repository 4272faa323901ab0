//! Exhaustive exact solvers used as ground truth in tests and reports.
//!
//! These deliberately share no code with the algorithms they check.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conductance::{cut_ratio, Rational};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Problem {
    Mwm,
    Mcm,
    Mis,
    CorrClustering,
    Conductance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleBudget {
    pub problem: Problem,
    pub max_n: usize,
}

impl OracleBudget {
    pub fn of(problem: Problem) -> OracleBudget {
        let max_n = match problem {
            Problem::Mwm | Problem::Mcm => 18,
            Problem::Mis => 40,
            Problem::CorrClustering => 10,
            Problem::Conductance => 20,
        };
        OracleBudget { problem, max_n }
    }

    pub fn admits(&self, g: &Graph) -> bool {
        g.n() <= self.max_n
    }

    fn check(&self, g: &Graph) -> Result<(), OracleError> {
        if self.admits(g) {
            Ok(())
        } else {
            Err(OracleError::BudgetExceeded { problem: self.problem, n: g.n(), limit: self.max_n })
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("{problem:?} oracle limited to {limit} vertices, got {n}")]
    BudgetExceeded { problem: Problem, n: usize, limit: usize },
    #[error("correlation clustering needs one label per edge")]
    MissingLabels,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Witness {
    /// Edge ids of a matching.
    Edges(Vec<usize>),
    /// Sorted vertex set.
    Vertices(Vec<usize>),
    /// Cluster label per vertex.
    Partition(Vec<usize>),
    /// One side of a cut.
    Cut(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum OracleValue {
    Int(u64),
    Ratio(Rational),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub value: OracleValue,
    pub witness: Witness,
}

/// `labels[e]` is true for a `+` edge.
pub fn exact_solve(problem: Problem, g: &Graph, labels: Option<&[bool]>) -> Result<OracleResult, OracleError> {
    OracleBudget::of(problem).check(g)?;
    Ok(match problem {
        Problem::Mwm => {
            let (v, m) = max_weight_matching(g);
            OracleResult { value: OracleValue::Int(v), witness: Witness::Edges(m) }
        }
        Problem::Mcm => {
            let (v, m) = max_cardinality_matching(g);
            OracleResult { value: OracleValue::Int(v), witness: Witness::Edges(m) }
        }
        Problem::Mis => {
            let s = max_independent_set(g);
            OracleResult { value: OracleValue::Int(s.len() as u64), witness: Witness::Vertices(s) }
        }
        Problem::CorrClustering => {
            let labels = labels.filter(|l| l.len() == g.m()).ok_or(OracleError::MissingLabels)?;
            let (v, p) = correlation_clustering(g, labels);
            OracleResult { value: OracleValue::Int(v), witness: Witness::Partition(p) }
        }
        Problem::Conductance => {
            let (v, s) = min_conductance(g);
            OracleResult { value: OracleValue::Ratio(v), witness: Witness::Cut(s) }
        }
    })
}

/// Maximum weight matching: the lowest remaining vertex is either left
/// unmatched or matched to one of its remaining neighbors. Memoized on the
/// remaining-vertex mask.
pub fn max_weight_matching(g: &Graph) -> (u64, Vec<usize>) {
    assert!(g.n() <= 24, "matching oracle is exponential");
    let full: u32 = if g.n() == 32 { u32::MAX } else { (1u32 << g.n()) - 1 };
    let mut memo: HashMap<u32, u64> = HashMap::new();
    fn best(g: &Graph, mask: u32, memo: &mut HashMap<u32, u64>) -> u64 {
        if mask == 0 {
            return 0;
        }
        if let Some(&v) = memo.get(&mask) {
            return v;
        }
        let v = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << v);
        let mut b = best(g, rest, memo);
        for &(u, e) in g.neighbors(v) {
            if rest >> u & 1 == 1 {
                b = b.max(g.weight(e) + best(g, rest & !(1 << u), memo));
            }
        }
        memo.insert(mask, b);
        b
    }
    let value = best(g, full, &mut memo);
    let mut witness = Vec::new();
    let mut mask = full;
    while mask != 0 {
        let v = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << v);
        let here = best(g, mask, &mut memo);
        if best(g, rest, &mut memo) == here {
            mask = rest;
            continue;
        }
        for &(u, e) in g.neighbors(v) {
            if rest >> u & 1 == 1 && g.weight(e) + best(g, rest & !(1 << u), &mut memo) == here {
                witness.push(e);
                mask = rest & !(1 << u);
                break;
            }
        }
    }
    witness.sort_unstable();
    (value, witness)
}

pub fn max_cardinality_matching(g: &Graph) -> (u64, Vec<usize>) {
    let unit = Graph::from_edges(g.n(), g.edges()).expect("same simple graph");
    max_weight_matching(&unit)
}

/// Branch and bound over 64-bit vertex masks. Branches on the closed
/// neighborhood of a minimum-degree candidate (some vertex of it lies in
/// every maximal independent set) and prunes with a greedy clique cover.
pub fn max_independent_set(g: &Graph) -> Vec<usize> {
    let n = g.n();
    assert!(n <= 64, "independent set oracle works on 64-bit masks");
    let nb: Vec<u64> = (0..n).map(|v| g.neighbors(v).iter().fold(0u64, |m, &(u, _)| m | 1 << u)).collect();
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut best = 0u64;
    let mut best_size = 0u32;
    // Degeneracy order fixes the candidate scan order for the bound.
    let order = degeneracy_order(&nb, all);
    fn cover_bound(cand: u64, nb: &[u64], order: &[usize]) -> u32 {
        let mut cliques: Vec<u64> = Vec::new();
        for &v in order {
            if cand >> v & 1 == 0 {
                continue;
            }
            match cliques.iter_mut().find(|c| **c & !nb[v] == 0) {
                Some(c) => *c |= 1 << v,
                None => cliques.push(1 << v),
            }
        }
        cliques.len() as u32
    }
    fn go(cand: u64, cur: u64, nb: &[u64], order: &[usize], best: &mut u64, best_size: &mut u32) {
        let size = cur.count_ones();
        if cand == 0 {
            if size > *best_size {
                *best_size = size;
                *best = cur;
            }
            return;
        }
        if size + cover_bound(cand, nb, order) <= *best_size {
            return;
        }
        let mut pick = usize::MAX;
        let mut pick_deg = u32::MAX;
        let mut c = cand;
        while c != 0 {
            let v = c.trailing_zeros() as usize;
            c &= c - 1;
            let d = (nb[v] & cand).count_ones();
            if d < pick_deg {
                pick_deg = d;
                pick = v;
            }
        }
        let mut branch = (nb[pick] & cand) | 1 << pick;
        while branch != 0 {
            let u = branch.trailing_zeros() as usize;
            branch &= branch - 1;
            go(cand & !nb[u] & !(1 << u), cur | 1 << u, nb, order, best, best_size);
        }
    }
    go(all, 0, &nb, &order, &mut best, &mut best_size);
    (0..n).filter(|&v| best >> v & 1 == 1).collect()
}

fn degeneracy_order(nb: &[u64], all: u64) -> Vec<usize> {
    let mut left = all;
    let mut order = Vec::new();
    while left != 0 {
        let mut c = left;
        let mut pick = 0;
        let mut pick_deg = u32::MAX;
        while c != 0 {
            let v = c.trailing_zeros() as usize;
            c &= c - 1;
            let d = (nb[v] & left).count_ones();
            if d < pick_deg {
                pick_deg = d;
                pick = v;
            }
        }
        order.push(pick);
        left &= !(1 << pick);
    }
    order
}

/// Plain enumeration of all vertex subsets; used to cross-check
/// [`max_independent_set`].
pub fn max_independent_set_naive(g: &Graph) -> usize {
    let n = g.n();
    assert!(n <= 24);
    let mut best = 0;
    for mask in 0u32..(1u32 << n) {
        if g.edges().iter().all(|&(u, v)| mask >> u & 1 == 0 || mask >> v & 1 == 0) {
            best = best.max(mask.count_ones() as usize);
        }
    }
    best
}

/// Agreements maximized over all set partitions (restricted growth strings).
pub fn correlation_clustering(g: &Graph, plus: &[bool]) -> (u64, Vec<usize>) {
    let n = g.n();
    // Edges to lower-numbered vertices, so a vertex's assignment fixes them.
    let mut back: Vec<Vec<(usize, bool)>> = vec![Vec::new(); n];
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        back[v.max(u)].push((u.min(v), plus[e]));
    }
    let mut suffix = vec![0u64; n + 1];
    for v in (0..n).rev() {
        suffix[v] = suffix[v + 1] + back[v].len() as u64;
    }
    struct St<'a> {
        back: &'a [Vec<(usize, bool)>],
        suffix: &'a [u64],
        label: Vec<usize>,
        best: Option<(u64, Vec<usize>)>,
    }
    fn go(st: &mut St, v: usize, blocks: usize, score: u64) {
        if let Some((b, _)) = &st.best {
            if score + st.suffix[v] <= *b {
                return;
            }
        }
        if v == st.label.len() {
            st.best = Some((score, st.label.clone()));
            return;
        }
        for b in 0..=blocks {
            let gain = st.back[v].iter().filter(|&&(u, p)| (st.label[u] == b) == p).count() as u64;
            st.label[v] = b;
            go(st, v + 1, blocks.max(b + 1), score + gain);
        }
    }
    let mut st = St { back: &back, suffix: &suffix, label: vec![0; n], best: None };
    go(&mut st, 0, 0, 0);
    st.best.expect("at least one partition")
}

/// Agreement count of a partition under the given labels.
pub fn clustering_score(g: &Graph, plus: &[bool], label: &[usize]) -> u64 {
    g.edges().iter().enumerate().filter(|&(e, &(u, v))| (label[u] == label[v]) == plus[e]).count() as u64
}

/// Every nontrivial cut, recomputed from the edge list for each mask.
pub fn min_conductance(g: &Graph) -> (Rational, Vec<usize>) {
    let n = g.n();
    if n <= 1 {
        return (Rational::from_integer(1), Vec::new());
    }
    let deg: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let total: usize = deg.iter().sum();
    let mut best: Option<(Rational, u32)> = None;
    for mask in 1u32..(1u32 << (n - 1)) {
        let mut boundary = 0;
        for &(u, v) in g.edges() {
            if (mask >> u & 1) != (mask >> v & 1) {
                boundary += 1;
            }
        }
        let vol: usize = (0..n).filter(|&v| mask >> v & 1 == 1).map(|v| deg[v]).sum();
        let phi = cut_ratio(boundary, vol, total - vol);
        if best.map_or(true, |(b, _)| phi < b) {
            best = Some((phi, mask));
        }
    }
    let (v, m) = best.unwrap();
    (v, (0..n).filter(|&x| m >> x & 1 == 1).collect())
}
