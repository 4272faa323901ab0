use serde::{Deserialize, Serialize};

use congest_core::expander::RegistryKey;

use crate::config::Q;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Child {
    Vertex(usize),
    Blossom(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Blossom {
    /// Edge id of the edge whose two outer ends closed the cycle.
    pub name: usize,
    pub parent: Option<usize>,
    /// Odd cycle of children; `children[0]` holds the base.
    pub children: Vec<Child>,
    /// `edges[i] = (x, y, e)` joins `x ∈ children[i]` to `y ∈ children[i+1]`.
    pub edges: Vec<(usize, usize, usize)>,
    pub z: Q,
    /// Decomposition the blossom was formed in.
    pub key: RegistryKey,
    pub alive: bool,
}

/// Active blossoms Ω as an arena of laminar trees over the vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaminarForest {
    pub blossoms: Vec<Blossom>,
    /// Innermost blossom of each vertex.
    pub vertex_parent: Vec<Option<usize>>,
    /// Blossom whose cycle uses the edge, for blossom edges.
    pub edge_label: Vec<Option<usize>>,
}

impl LaminarForest {
    pub fn new(n: usize, m: usize) -> LaminarForest {
        LaminarForest { blossoms: Vec::new(), vertex_parent: vec![None; n], edge_label: vec![None; m] }
    }

    pub fn parent_of(&self, c: Child) -> Option<usize> {
        match c {
            Child::Vertex(v) => self.vertex_parent[v],
            Child::Blossom(b) => self.blossoms[b].parent,
        }
    }

    /// Chain of blossoms containing `v`, innermost first.
    pub fn chain(&self, v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut b = self.vertex_parent[v];
        while let Some(x) = b {
            out.push(x);
            b = self.blossoms[x].parent;
        }
        out
    }

    pub fn root_of(&self, v: usize) -> Option<usize> {
        let mut b = self.vertex_parent[v]?;
        while let Some(p) = self.blossoms[b].parent {
            b = p;
        }
        Some(b)
    }

    /// Child of `b` that contains vertex `v`.
    pub fn child_containing(&self, b: usize, v: usize) -> Child {
        let mut c = Child::Vertex(v);
        while self.parent_of(c) != Some(b) {
            c = Child::Blossom(self.parent_of(c).expect("vertex lies inside the blossom"));
        }
        c
    }

    /// Sum of z over the blossoms containing both `u` and `v`.
    pub fn shared_z(&self, u: usize, v: usize) -> Q {
        if self.vertex_parent[u].is_none() || self.vertex_parent[v].is_none() {
            return 0;
        }
        let cu = self.chain(u);
        let cv = self.chain(v);
        cu.iter().rev().zip(cv.iter().rev()).take_while(|(a, b)| a == b).map(|(a, _)| self.blossoms[*a].z).sum()
    }

    pub fn members(&self, b: usize) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect(Child::Blossom(b), &mut out);
        out.sort_unstable();
        out
    }

    fn collect(&self, c: Child, out: &mut Vec<usize>) {
        match c {
            Child::Vertex(v) => out.push(v),
            Child::Blossom(b) => {
                for &ch in &self.blossoms[b].children {
                    self.collect(ch, out);
                }
            }
        }
    }

    pub fn base(&self, c: Child) -> usize {
        match c {
            Child::Vertex(v) => v,
            Child::Blossom(b) => self.base(self.blossoms[b].children[0]),
        }
    }

    pub fn roots(&self) -> Vec<usize> {
        (0..self.blossoms.len()).filter(|&b| self.blossoms[b].alive && self.blossoms[b].parent.is_none()).collect()
    }

    pub fn alive(&self) -> Vec<usize> {
        (0..self.blossoms.len()).filter(|&b| self.blossoms[b].alive).collect()
    }

    /// Edges of E_B: the cycle edges of `b` and of every blossom below it.
    pub fn blossom_edges(&self, b: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![b];
        while let Some(x) = stack.pop() {
            out.extend(self.blossoms[x].edges.iter().map(|&(_, _, e)| e));
            for &c in &self.blossoms[x].children {
                if let Child::Blossom(y) = c {
                    stack.push(y);
                }
            }
        }
        out
    }

    /// Adds a blossom over existing roots; returns its id.
    pub fn add(
        &mut self,
        name: usize,
        children: Vec<Child>,
        edges: Vec<(usize, usize, usize)>,
        key: RegistryKey,
    ) -> usize {
        let id = self.blossoms.len();
        for &c in &children {
            match c {
                Child::Vertex(v) => self.vertex_parent[v] = Some(id),
                Child::Blossom(b) => self.blossoms[b].parent = Some(id),
            }
        }
        for &(_, _, e) in &edges {
            self.edge_label[e] = Some(id);
        }
        self.blossoms.push(Blossom { name, parent: None, children, edges, z: 0, key, alive: true });
        id
    }

    /// Removes root `b`; its children become roots.
    pub fn dissolve(&mut self, b: usize) {
        debug_assert!(self.blossoms[b].parent.is_none());
        let children = self.blossoms[b].children.clone();
        for c in children {
            match c {
                Child::Vertex(v) => self.vertex_parent[v] = None,
                Child::Blossom(x) => self.blossoms[x].parent = None,
            }
        }
        for &(_, _, e) in &self.blossoms[b].edges {
            self.edge_label[e] = None;
        }
        self.blossoms[b].alive = false;
    }

    /// Flips matched status along the even path from `v` to the base of `b`
    /// and rotates `b` so that `v` becomes its base. `set_mate(x, y, e)`
    /// records the new matched pairs.
    pub fn augment_blossom(&mut self, b: usize, v: usize, set_mate: &mut impl FnMut(usize, usize, usize)) {
        let t = self.child_containing(b, v);
        if let Child::Blossom(tb) = t {
            self.augment_blossom(tb, v, set_mate);
        }
        let k = self.blossoms[b].children.len() as isize;
        let i = self.blossoms[b].children.iter().position(|&c| c == t).unwrap() as isize;
        let (mut j, step) = if i % 2 == 1 { (i - k, 1) } else { (i, -1) };
        while j != 0 {
            j += step;
            let idx = j.rem_euclid(k) as usize;
            let (w, x, e) = if step == 1 {
                let (a, b2, e) = self.blossoms[b].edges[idx];
                (a, b2, e)
            } else {
                let (a, b2, e) = self.blossoms[b].edges[(j - 1).rem_euclid(k) as usize];
                (b2, a, e)
            };
            let tc = self.blossoms[b].children[idx];
            if let Child::Blossom(tb) = tc {
                self.augment_blossom(tb, w, set_mate);
            }
            j += step;
            let tc = self.blossoms[b].children[j.rem_euclid(k) as usize];
            if let Child::Blossom(tb) = tc {
                self.augment_blossom(tb, x, set_mate);
            }
            set_mate(w, x, e);
        }
        let i = i as usize;
        let bl = &mut self.blossoms[b];
        bl.children.rotate_left(i);
        bl.edges.rotate_left(i);
    }
}
