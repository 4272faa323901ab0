//! Left-right planarity test with Kuratowski witness extraction.

use serde::{Deserialize, Serialize};

use crate::graph::Graph;

const NONE: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KuratowskiKind {
    K5,
    K33,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KuratowskiWitness {
    pub kind: KuratowskiKind,
    pub branch_vertices: Vec<usize>,
    /// Edges of the subdivision, as vertex pairs of the input graph.
    pub edges: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Planarity {
    Planar,
    NonPlanar(KuratowskiWitness),
}

impl Planarity {
    pub fn is_planar(&self) -> bool {
        matches!(self, Planarity::Planar)
    }
}

/// Full test; nonplanar inputs come back with a K5 or K3,3 subdivision.
pub fn is_planar(g: &Graph) -> Planarity {
    let edges: Vec<(usize, usize)> = g.edges().to_vec();
    if lr_planar(g.n(), &edges) {
        return Planarity::Planar;
    }
    Planarity::NonPlanar(extract_witness(g.n(), edges))
}

/// Boolean-only test.
pub fn planar(g: &Graph) -> bool {
    lr_planar(g.n(), g.edges())
}

fn extract_witness(n: usize, mut edges: Vec<(usize, usize)>) -> KuratowskiWitness {
    // Drop every edge whose removal keeps the graph nonplanar; what remains is
    // edge-minimal nonplanar, hence a Kuratowski subdivision.
    let mut i = 0;
    while i < edges.len() {
        let e = edges.remove(i);
        if lr_planar(n, &edges) {
            edges.insert(i, e);
            i += 1;
        }
    }
    let mut deg = vec![0usize; n];
    for &(u, v) in &edges {
        deg[u] += 1;
        deg[v] += 1;
    }
    let branch: Vec<usize> = (0..n).filter(|&v| deg[v] >= 3).collect();
    let kind = if branch.len() == 5 { KuratowskiKind::K5 } else { KuratowskiKind::K33 };
    KuratowskiWitness { kind, branch_vertices: branch, edges }
}

#[derive(Clone, Copy)]
struct Interval {
    low: usize,
    high: usize,
}

impl Interval {
    const EMPTY: Interval = Interval { low: NONE, high: NONE };

    fn empty(&self) -> bool {
        self.low == NONE && self.high == NONE
    }
}

#[derive(Clone, Copy)]
struct ConflictPair {
    left: Interval,
    right: Interval,
}

impl ConflictPair {
    fn swap(&mut self) {
        std::mem::swap(&mut self.left, &mut self.right);
    }
}

struct Lr {
    adj: Vec<Vec<(usize, usize)>>,
    tail: Vec<usize>,
    head: Vec<usize>,
    height: Vec<usize>,
    parent_edge: Vec<usize>,
    lowpt: Vec<usize>,
    lowpt2: Vec<usize>,
    nesting: Vec<usize>,
    ordered: Vec<Vec<usize>>,
    refs: Vec<usize>,
    lowpt_edge: Vec<usize>,
    stack_bottom: Vec<usize>,
    s: Vec<ConflictPair>,
}

fn lr_planar(n: usize, edges: &[(usize, usize)]) -> bool {
    let m = edges.len();
    if n > 2 && m > 3 * n - 6 {
        return false;
    }
    let mut adj = vec![Vec::new(); n];
    for (e, &(u, v)) in edges.iter().enumerate() {
        adj[u].push((v, e));
        adj[v].push((u, e));
    }
    let mut lr = Lr {
        adj,
        tail: vec![NONE; m],
        head: vec![NONE; m],
        height: vec![NONE; n],
        parent_edge: vec![NONE; n],
        lowpt: vec![0; m],
        lowpt2: vec![0; m],
        nesting: vec![0; m],
        ordered: vec![Vec::new(); n],
        refs: vec![NONE; m],
        lowpt_edge: vec![NONE; m],
        stack_bottom: vec![0; m],
        s: Vec::new(),
    };
    let mut roots = Vec::new();
    for v in 0..n {
        if lr.height[v] == NONE {
            lr.height[v] = 0;
            roots.push(v);
            lr.orient(v);
        }
    }
    for v in 0..n {
        let mut out: Vec<usize> = lr.adj[v].iter().map(|&(_, e)| e).filter(|&e| lr.tail[e] == v).collect();
        out.sort_by_key(|&e| lr.nesting[e]);
        lr.ordered[v] = out;
    }
    roots.iter().all(|&r| lr.test(r))
}

impl Lr {
    fn orient(&mut self, root: usize) {
        let n = self.adj.len();
        let mut ind = vec![0usize; n];
        let mut skip_init = vec![false; self.tail.len()];
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            let e = self.parent_edge[v];
            while ind[v] < self.adj[v].len() {
                let (w, ei) = self.adj[v][ind[v]];
                if !skip_init[ei] {
                    if self.tail[ei] != NONE {
                        ind[v] += 1;
                        continue;
                    }
                    self.tail[ei] = v;
                    self.head[ei] = w;
                    self.lowpt[ei] = self.height[v];
                    self.lowpt2[ei] = self.height[v];
                    if self.height[w] == NONE {
                        self.parent_edge[w] = ei;
                        self.height[w] = self.height[v] + 1;
                        stack.push(v);
                        stack.push(w);
                        skip_init[ei] = true;
                        break;
                    } else {
                        self.lowpt[ei] = self.height[w];
                    }
                }
                self.nesting[ei] = 2 * self.lowpt[ei];
                if self.lowpt2[ei] < self.height[v] {
                    self.nesting[ei] += 1;
                }
                if e != NONE {
                    if self.lowpt[ei] < self.lowpt[e] {
                        self.lowpt2[e] = self.lowpt[e].min(self.lowpt2[ei]);
                        self.lowpt[e] = self.lowpt[ei];
                    } else if self.lowpt[ei] > self.lowpt[e] {
                        self.lowpt2[e] = self.lowpt2[e].min(self.lowpt[ei]);
                    } else {
                        self.lowpt2[e] = self.lowpt2[e].min(self.lowpt2[ei]);
                    }
                }
                ind[v] += 1;
            }
        }
    }

    fn test(&mut self, root: usize) -> bool {
        let n = self.adj.len();
        let mut ind = vec![0usize; n];
        let mut skip_init = vec![false; self.tail.len()];
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            let e = self.parent_edge[v];
            let mut descended = false;
            while ind[v] < self.ordered[v].len() {
                let ei = self.ordered[v][ind[v]];
                let w = self.head[ei];
                if !skip_init[ei] {
                    self.stack_bottom[ei] = self.s.len();
                    if ei == self.parent_edge[w] {
                        stack.push(v);
                        stack.push(w);
                        skip_init[ei] = true;
                        descended = true;
                        break;
                    } else {
                        self.lowpt_edge[ei] = ei;
                        self.s.push(ConflictPair { left: Interval::EMPTY, right: Interval { low: ei, high: ei } });
                    }
                }
                if self.lowpt[ei] < self.height[v] {
                    if ei == self.ordered[v][0] {
                        self.lowpt_edge[e] = self.lowpt_edge[ei];
                    } else if !self.add_constraints(ei, e) {
                        return false;
                    }
                }
                ind[v] += 1;
            }
            if !descended && e != NONE {
                self.remove_back_edges(e);
            }
        }
        true
    }

    fn conflicting(&self, i: &Interval, b: usize) -> bool {
        !i.empty() && i.high != NONE && self.lowpt[i.high] > self.lowpt[b]
    }

    fn lowest(&self, p: &ConflictPair) -> usize {
        if p.left.empty() {
            return self.lowpt[p.right.low];
        }
        if p.right.empty() {
            return self.lowpt[p.left.low];
        }
        self.lowpt[p.left.low].min(self.lowpt[p.right.low])
    }

    fn add_constraints(&mut self, ei: usize, e: usize) -> bool {
        let mut p = ConflictPair { left: Interval::EMPTY, right: Interval::EMPTY };
        loop {
            let mut q = self.s.pop().expect("return edge pushed a pair");
            if !q.left.empty() {
                q.swap();
            }
            if !q.left.empty() {
                return false;
            }
            if self.lowpt[q.right.low] > self.lowpt[e] {
                if p.right.empty() {
                    p.right = q.right;
                } else {
                    self.refs[p.right.low] = q.right.high;
                }
                p.right.low = q.right.low;
            } else {
                self.refs[q.right.low] = self.lowpt_edge[e];
            }
            if self.s.len() == self.stack_bottom[ei] {
                break;
            }
        }
        while let Some(top) = self.s.last() {
            if !(self.conflicting(&top.left, ei) || self.conflicting(&top.right, ei)) {
                break;
            }
            let mut q = self.s.pop().unwrap();
            if self.conflicting(&q.right, ei) {
                q.swap();
            }
            if self.conflicting(&q.right, ei) {
                return false;
            }
            if p.right.low != NONE {
                self.refs[p.right.low] = q.right.high;
            }
            if q.right.low != NONE {
                p.right.low = q.right.low;
            }
            if p.left.empty() {
                p.left = q.left;
            } else {
                self.refs[p.left.low] = q.left.high;
            }
            p.left.low = q.left.low;
        }
        if !(p.left.empty() && p.right.empty()) {
            self.s.push(p);
        }
        true
    }

    fn remove_back_edges(&mut self, e: usize) {
        let u = self.tail[e];
        while let Some(top) = self.s.last() {
            if self.lowest(top) == self.height[u] {
                self.s.pop();
            } else {
                break;
            }
        }
        if let Some(mut p) = self.s.pop() {
            while p.left.high != NONE && self.head[p.left.high] == u {
                p.left.high = self.refs[p.left.high];
            }
            if p.left.high == NONE && p.left.low != NONE {
                self.refs[p.left.low] = p.right.low;
                p.left.low = NONE;
            }
            while p.right.high != NONE && self.head[p.right.high] == u {
                p.right.high = self.refs[p.right.high];
            }
            if p.right.high == NONE && p.right.low != NONE {
                self.refs[p.right.low] = p.left.low;
                p.right.low = NONE;
            }
            self.s.push(p);
        }
        if self.lowpt[e] < self.height[u] {
            let top = self.s.last().expect("return edge keeps a pair on the stack");
            let (hl, hr) = (top.left.high, top.right.high);
            self.refs[e] = if hl != NONE && (hr == NONE || self.lowpt[hl] > self.lowpt[hr]) { hl } else { hr };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{generate, Family};

    fn complete(n: usize) -> Graph {
        let mut e = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                e.push((a, b));
            }
        }
        Graph::from_edges(n, &e).unwrap()
    }

    fn k33() -> Graph {
        let mut e = Vec::new();
        for a in 0..3 {
            for b in 3..6 {
                e.push((a, b));
            }
        }
        Graph::from_edges(6, &e).unwrap()
    }

    /// Suppress degree-2 vertices and check the result is K5 or K3,3.
    fn valid_witness(g: &Graph, w: &KuratowskiWitness) -> bool {
        let n = g.n();
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &w.edges {
            if !g.has_edge(u, v) {
                return false;
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        let branch: Vec<usize> = (0..n).filter(|&v| adj[v].len() >= 3).collect();
        if branch != w.branch_vertices {
            return false;
        }
        if (0..n).any(|v| !adj[v].is_empty() && adj[v].len() != 2 && !branch.contains(&v)) {
            return false;
        }
        let mut pairs = Vec::new();
        for &b in &branch {
            for &first in &adj[b] {
                let (mut prev, mut cur) = (b, first);
                while !branch.contains(&cur) {
                    let next = if adj[cur][0] == prev { adj[cur][1] } else { adj[cur][0] };
                    prev = cur;
                    cur = next;
                }
                if b < cur {
                    pairs.push((b, cur));
                }
            }
        }
        pairs.sort_unstable();
        let distinct = pairs.windows(2).all(|p| p[0] != p[1]);
        match w.kind {
            KuratowskiKind::K5 => branch.len() == 5 && pairs.len() == 10 && distinct,
            KuratowskiKind::K33 => {
                if branch.len() != 6 || pairs.len() != 9 || !distinct {
                    return false;
                }
                // Two-colour the branch vertices along the contracted edges.
                let mut side = vec![None; n];
                side[branch[0]] = Some(false);
                for _ in 0..6 {
                    for &(a, b) in &pairs {
                        if let Some(s) = side[a] {
                            side[b].get_or_insert(!s);
                        }
                        if let Some(s) = side[b] {
                            side[a].get_or_insert(!s);
                        }
                    }
                }
                pairs.iter().all(|&(a, b)| side[a].is_some() && side[a] != side[b])
            }
        }
    }

    #[test]
    fn kuratowski_graphs() {
        let g = complete(5);
        match is_planar(&g) {
            Planarity::NonPlanar(w) => {
                assert_eq!(w.kind, KuratowskiKind::K5);
                assert!(valid_witness(&g, &w));
            }
            _ => panic!("K5 reported planar"),
        }
        let h = k33();
        match is_planar(&h) {
            Planarity::NonPlanar(w) => {
                assert_eq!(w.kind, KuratowskiKind::K33);
                assert!(valid_witness(&h, &w));
            }
            _ => panic!("K3,3 reported planar"),
        }
    }

    #[test]
    fn planar_families() {
        assert!(is_planar(&generate(&Family::Grid { w: 4, h: 4 }, 0).unwrap()).is_planar());
        assert!(is_planar(&complete(4)).is_planar());
        assert!(is_planar(&Graph::empty(0)).is_planar());
        for t in 1..3 {
            assert!(planar(&generate(&Family::TesterGadget { t, i: 1, j: 2 }, 0).unwrap()));
        }
        // K5 minus one edge is planar.
        let e: Vec<_> = complete(5).edges().iter().copied().filter(|&p| p != (0, 1)).collect();
        assert!(planar(&Graph::from_edges(5, &e).unwrap()));
    }

    #[test]
    fn subdivisions_and_petersen() {
        // K3,3 with every edge subdivided once, plus a pendant tree.
        let mut e = Vec::new();
        let mut next = 6;
        for a in 0..3 {
            for b in 3..6 {
                e.push((a, next));
                e.push((next, b));
                next += 1;
            }
        }
        e.push((0, next));
        let g = Graph::from_edges(next + 1, &e).unwrap();
        match is_planar(&g) {
            Planarity::NonPlanar(w) => assert!(valid_witness(&g, &w)),
            _ => panic!(),
        }
        let outer: Vec<_> = (0..5).map(|i| (i, (i + 1) % 5)).collect();
        let inner: Vec<_> = (0..5).map(|i| (5 + i, 5 + (i + 2) % 5)).collect();
        let spokes: Vec<_> = (0..5).map(|i| (i, i + 5)).collect();
        let all: Vec<_> = outer.into_iter().chain(inner).chain(spokes).collect();
        let p = Graph::from_edges(10, &all).unwrap();
        match is_planar(&p) {
            Planarity::NonPlanar(w) => assert!(valid_witness(&p, &w)),
            _ => panic!("Petersen reported planar"),
        }
    }

    #[test]
    fn random_dense_graphs_agree_with_witness() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let n = rng.gen_range(5..11);
            let mut e = Vec::new();
            for a in 0..n {
                for b in a + 1..n {
                    if rng.gen_bool(0.45) {
                        e.push((a, b));
                    }
                }
            }
            let g = Graph::from_edges(n, &e).unwrap();
            if let Planarity::NonPlanar(w) = is_planar(&g) {
                assert!(valid_witness(&g, &w));
            }
        }
    }

    #[test]
    fn stacked_triangulations_stay_planar() {
        // Maximal planar graphs sit exactly at 3n - 6 edges.
        for seed in 0..50 {
            let g = generate(&Family::RandomPlanar { n: 30 }, seed).unwrap();
            assert!(planar(&g));
            let mut e = g.edges().to_vec();
            // Adding all edges of some K5 on 5 vertices makes it nonplanar.
            for a in 0..5 {
                for b in a + 1..5 {
                    if !g.has_edge(a, b) {
                        e.push((a, b));
                    }
                }
            }
            assert!(!planar(&Graph::from_edges(30, &e).unwrap()));
        }
    }
}
