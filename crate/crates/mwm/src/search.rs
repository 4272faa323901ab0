//! Leader-local searches on a contracted eligible component: maximal sets of
//! disjoint augmenting paths and maximal nested blossom sets.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

/// `(x, y, e)`: edge `e` of the host graph with `x` on the near side.
pub type Arc = (usize, usize, usize);

fn flip(a: Arc) -> Arc {
    (a.1, a.0, a.2)
}

/// A simple graph over contracted nodes with the matching restricted to it.
#[derive(Debug, Clone, Default)]
pub struct LocalGraph {
    /// Contracted node names (base vertices).
    pub nodes: Vec<usize>,
    pub adj: Vec<Vec<(usize, Arc)>>,
    pub mate: Vec<Option<(usize, Arc)>>,
}

impl LocalGraph {
    /// `rep` maps host vertices to node names. `arcs` lists `(x, y, e,
    /// matched)`; arcs with an end outside `nodes` or inside one node are
    /// dropped, parallel arcs collapse with a matched one preferred.
    pub fn build(nodes: Vec<usize>, rep: &[usize], arcs: &[(usize, usize, usize, bool)]) -> LocalGraph {
        let index: BTreeMap<usize, usize> = nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut best: BTreeMap<(usize, usize), (bool, Arc)> = BTreeMap::new();
        let mut mate = vec![None; nodes.len()];
        for &(x, y, e, matched) in arcs {
            let (Some(&a), Some(&b)) = (index.get(&rep[x]), index.get(&rep[y])) else { continue };
            if a == b {
                continue;
            }
            let (key, arc) = if a < b { ((a, b), (x, y, e)) } else { ((b, a), (y, x, e)) };
            if matched {
                mate[key.0] = Some((key.1, arc));
                mate[key.1] = Some((key.0, flip(arc)));
            }
            match best.get(&key) {
                Some(&(m, old)) if m || (!matched && old.2 < e) => {}
                _ => {
                    best.insert(key, (matched, arc));
                }
            }
        }
        let mut adj = vec![Vec::new(); nodes.len()];
        for (&(a, b), &(_, arc)) in &best {
            adj[a].push((b, arc));
            adj[b].push((a, flip(arc)));
        }
        LocalGraph { nodes, adj, mate }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_free(&self, i: usize) -> bool {
        self.mate[i].is_none()
    }

    fn arc(&self, a: usize, b: usize) -> Arc {
        self.adj[a].iter().find(|&&(w, _)| w == b).map(|&(_, arc)| arc).expect("adjacent nodes")
    }

    fn mate_of(&self, i: usize) -> Option<usize> {
        self.mate[i].map(|(m, _)| m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugPath {
    /// Local nodes from one free end to the other.
    pub nodes: Vec<usize>,
    /// Arcs that become matched, oriented along the path.
    pub new_arcs: Vec<Arc>,
    /// Arcs that stop being matched.
    pub old_arcs: Vec<Arc>,
}

struct PathSearch<'a> {
    lg: &'a LocalGraph,
    deleted: &'a [bool],
    p: Vec<Option<usize>>,
    base: Vec<usize>,
    used: Vec<bool>,
    blossom: Vec<bool>,
}

impl PathSearch<'_> {
    fn lca(&self, mut a: usize, mut b: usize) -> usize {
        let mut seen = vec![false; self.lg.len()];
        loop {
            a = self.base[a];
            seen[a] = true;
            match self.lg.mate_of(a) {
                None => break,
                Some(m) => a = self.p[m].expect("tree parent"),
            }
        }
        loop {
            b = self.base[b];
            if seen[b] {
                return b;
            }
            b = self.p[self.lg.mate_of(b).expect("matched")].expect("tree parent");
        }
    }

    fn mark_path(&mut self, mut v: usize, b: usize, mut child: usize) {
        while self.base[v] != b {
            let m = self.lg.mate_of(v).expect("matched");
            self.blossom[self.base[v]] = true;
            self.blossom[self.base[m]] = true;
            self.p[v] = Some(child);
            child = m;
            v = self.p[m].expect("tree parent");
        }
    }

    /// Edmonds search from `root` with temporary contraction; returns the
    /// free endpoint reached.
    fn find(&mut self, root: usize) -> Option<usize> {
        let k = self.lg.len();
        self.p = vec![None; k];
        self.base = (0..k).collect();
        self.used = vec![false; k];
        self.used[root] = true;
        let mut q = VecDeque::from([root]);
        while let Some(v) = q.pop_front() {
            for &(to, _) in &self.lg.adj[v] {
                if self.deleted[to] || self.base[v] == self.base[to] || self.lg.mate_of(v) == Some(to) {
                    continue;
                }
                let to_outer = to == root || self.lg.mate_of(to).is_some_and(|m| self.p[m].is_some());
                if to_outer {
                    let cur = self.lca(v, to);
                    self.blossom = vec![false; k];
                    self.mark_path(v, cur, to);
                    self.mark_path(to, cur, v);
                    for i in 0..k {
                        if self.blossom[self.base[i]] {
                            self.base[i] = cur;
                            if !self.used[i] {
                                self.used[i] = true;
                                q.push_back(i);
                            }
                        }
                    }
                } else if self.p[to].is_none() {
                    self.p[to] = Some(v);
                    match self.lg.mate_of(to) {
                        None => return Some(to),
                        Some(m) => {
                            self.used[m] = true;
                            q.push_back(m);
                        }
                    }
                }
            }
        }
        None
    }

    fn extract(&self, end: usize) -> AugPath {
        let mut nodes = vec![end];
        let mut new_arcs = Vec::new();
        let mut old_arcs = Vec::new();
        let mut v = end;
        loop {
            let pv = self.p[v].expect("tree parent");
            new_arcs.push(self.lg.arc(v, pv));
            nodes.push(pv);
            match self.lg.mate[pv] {
                None => break,
                Some((m, arc)) => {
                    old_arcs.push(arc);
                    nodes.push(m);
                    v = m;
                }
            }
        }
        AugPath { nodes, new_arcs, old_arcs }
    }
}

/// Repeatedly finds an augmenting path from a free node and deletes its
/// nodes, giving a maximal set of vertex-disjoint augmenting paths.
pub fn maximal_augmenting_paths(lg: &LocalGraph) -> Vec<AugPath> {
    let mut deleted = vec![false; lg.len()];
    let mut out = Vec::new();
    for root in 0..lg.len() {
        if deleted[root] || !lg.is_free(root) || lg.adj[root].is_empty() {
            continue;
        }
        let mut s = PathSearch {
            lg,
            deleted: &deleted,
            p: Vec::new(),
            base: Vec::new(),
            used: Vec::new(),
            blossom: Vec::new(),
        };
        if let Some(end) = s.find(root) {
            let path = s.extract(end);
            for &v in &path.nodes {
                deleted[v] = true;
            }
            out.push(path);
        }
    }
    out
}

pub fn has_augmenting_path(lg: &LocalGraph) -> bool {
    let deleted = vec![false; lg.len()];
    let free: Vec<usize> = (0..lg.len()).filter(|&v| lg.is_free(v) && !lg.adj[v].is_empty()).collect();
    if free.len() < 2 {
        return false;
    }
    free.into_iter().any(|root| {
        let mut s = PathSearch {
            lg,
            deleted: &deleted,
            p: Vec::new(),
            base: Vec::new(),
            used: Vec::new(),
            blossom: Vec::new(),
        };
        s.find(root).is_some()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LChild {
    Node(usize),
    /// Index into [`ShrinkOutcome::blossoms`].
    New(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewBlossom {
    /// Odd cycle; `children[0]` holds the base.
    pub children: Vec<LChild>,
    /// `edges[i]` runs from `children[i]` to `children[i+1]`.
    pub edges: Vec<Arc>,
    /// Edge that closed the cycle.
    pub name: usize,
    pub leaves: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ShrinkOutcome {
    /// In creation order; later blossoms may contain earlier ones.
    pub blossoms: Vec<NewBlossom>,
    /// Outer-outer edges across trees: augmenting paths the search skipped.
    pub unexpected_paths: usize,
    /// Cycles skipped because they would contain a forbidden node.
    pub forbidden_hits: usize,
}

const S: u8 = 1;
const T: u8 = 2;
const MARK: u8 = 4;

struct Forest<'a> {
    lg: &'a LocalGraph,
    k: usize,
    inblossom: Vec<usize>,
    parent: Vec<Option<usize>>,
    base: Vec<usize>,
    label: Vec<u8>,
    labeledge: Vec<Option<(usize, usize, Arc)>>,
    leaves: Vec<Vec<usize>>,
    queue: VecDeque<usize>,
    made: Vec<NewBlossom>,
}

impl Forest<'_> {
    fn assign_label(&mut self, w: usize, t: u8, from: Option<(usize, Arc)>) {
        let b = self.inblossom[w];
        self.label[w] = t;
        self.label[b] = t;
        let le = from.map(|(v, a)| (v, w, a));
        self.labeledge[w] = le;
        self.labeledge[b] = le;
        if t == S {
            self.queue.extend(self.leaves[b].iter().copied());
        } else {
            let base = self.base[b];
            let (m, arc) = self.lg.mate[base].expect("inner blossoms are matched");
            self.assign_label(m, S, Some((base, arc)));
        }
    }

    fn scan(&mut self, mut v: usize, mut w: Option<usize>) -> Option<usize> {
        let mut path = Vec::new();
        let mut found = None;
        let mut cur = Some(v);
        while let Some(x) = cur {
            v = x;
            let b = self.inblossom[v];
            if self.label[b] & MARK != 0 {
                found = Some(self.base[b]);
                break;
            }
            path.push(b);
            self.label[b] = S | MARK;
            cur = match self.labeledge[b] {
                None => None,
                Some((t, _, _)) => {
                    let tb = self.inblossom[t];
                    Some(self.labeledge[tb].expect("inner blossom has a label edge").0)
                }
            };
            if let Some(other) = w {
                w = cur;
                cur = Some(other);
            }
        }
        for b in path {
            self.label[b] = S;
        }
        found
    }

    /// Top-level blossoms on the cycle through `(v, w)` and `base`, in child
    /// order, plus the connecting arcs.
    fn cycle(&self, base: usize, v: usize, w: usize, arc: Arc) -> (Vec<usize>, Vec<Arc>) {
        let bb = self.inblossom[base];
        let mut bv = self.inblossom[v];
        let mut bw = self.inblossom[w];
        let mut path = Vec::new();
        let mut edges = vec![arc];
        while bv != bb {
            path.push(bv);
            let (x, _, a) = self.labeledge[bv].expect("label edge");
            edges.push(a);
            bv = self.inblossom[x];
        }
        path.push(bb);
        path.reverse();
        edges.reverse();
        while bw != bb {
            path.push(bw);
            let (x, _, a) = self.labeledge[bw].expect("label edge");
            edges.push(flip(a));
            bw = self.inblossom[x];
        }
        (path, edges)
    }

    fn add_blossom(&mut self, base: usize, path: Vec<usize>, edges: Vec<Arc>, name: usize) {
        let id = self.k + self.made.len();
        let bb = self.inblossom[base];
        let mut leaves = Vec::new();
        for &c in &path {
            self.parent[c] = Some(id);
            leaves.extend(self.leaves[c].iter().copied());
        }
        self.parent.push(None);
        self.base.push(base);
        self.label.push(S);
        self.labeledge.push(self.labeledge[bb]);
        for &x in &leaves {
            if self.label[self.inblossom[x]] == T {
                self.queue.push_back(x);
            }
            self.inblossom[x] = id;
        }
        let children =
            path.iter().map(|&c| if c < self.k { LChild::Node(c) } else { LChild::New(c - self.k) }).collect();
        leaves.sort_unstable();
        self.leaves.push(leaves.clone());
        self.made.push(NewBlossom { children, edges, name, leaves });
    }
}

/// Alternating forest grown from every free node, contracting each odd
/// cycle found inside one tree. Cycles that would absorb a `forbidden` node
/// are skipped and counted.
pub fn shrink_blossoms(lg: &LocalGraph, forbidden: &[bool]) -> ShrinkOutcome {
    let k = lg.len();
    let mut f = Forest {
        lg,
        k,
        inblossom: (0..k).collect(),
        parent: vec![None; k],
        base: (0..k).collect(),
        label: vec![0; k],
        labeledge: vec![None; k],
        leaves: (0..k).map(|i| vec![i]).collect(),
        queue: VecDeque::new(),
        made: Vec::new(),
    };
    for v in 0..k {
        if lg.is_free(v) && f.label[v] == 0 {
            f.assign_label(v, S, None);
        }
    }
    let mut unexpected = 0;
    let mut forbidden_hits = 0;
    let mut reported: BTreeSet<(usize, usize)> = BTreeSet::new();
    while let Some(v) = f.queue.pop_front() {
        for &(w, arc) in &lg.adj[v] {
            let bv = f.inblossom[v];
            let bw = f.inblossom[w];
            if bv == bw {
                continue;
            }
            match f.label[bw] {
                0 => {
                    if lg.mate[w].is_none() {
                        if reported.insert((v.min(w), v.max(w))) {
                            unexpected += 1;
                        }
                        continue;
                    }
                    f.assign_label(w, T, Some((v, arc)));
                }
                S => match f.scan(v, Some(w)) {
                    Some(base) => {
                        let (path, edges) = f.cycle(base, v, w, arc);
                        if path.iter().any(|&c| f.leaves[c].iter().any(|&x| forbidden[x])) {
                            if reported.insert((v.min(w), v.max(w))) {
                                forbidden_hits += 1;
                            }
                            continue;
                        }
                        f.add_blossom(base, path, edges, arc.2);
                    }
                    None => {
                        if reported.insert((v.min(w), v.max(w))) {
                            unexpected += 1;
                        }
                    }
                },
                _ => {}
            }
        }
    }
    ShrinkOutcome { blossoms: f.made, unexpected_paths: unexpected, forbidden_hits }
}
