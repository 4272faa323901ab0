use std::collections::BTreeSet;
use std::io::Read;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("duplicate edge {{{u}, {v}}}")]
    DuplicateEdge { u: usize, v: usize },
    #[error("self-loop at vertex {v}")]
    SelfLoop { v: usize },
    #[error("edge {{{u}, {v}}} has weight {w} < 1")]
    BadWeight { u: usize, v: usize, w: i64 },
    #[error("vertex {v} out of range for n = {n}")]
    VertexOutOfRange { v: usize, n: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("i/o error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GraphFormat {
    EdgeList,
    Json,
}

/// Undirected simple graph on vertices `0..n`.
///
/// Edges are stored once with `u < v`, sorted, and addressed by their index
/// (the edge id). Adjacency lists are sorted and carry the edge id alongside
/// each neighbor.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<(usize, usize)>>,
    weights: Option<Vec<u64>>,
    family_tag: Option<String>,
    density_bound: Option<Ratio<i64>>,
}

impl Graph {
    pub fn empty(n: usize) -> Graph {
        Graph { n, edges: Vec::new(), adj: vec![Vec::new(); n], weights: None, family_tag: None, density_bound: None }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Graph, GraphError> {
        Self::build(n, edges.iter().map(|&(u, v)| (u, v, None)).collect())
    }

    pub fn from_weighted_edges(n: usize, edges: &[(usize, usize, i64)]) -> Result<Graph, GraphError> {
        Self::build(n, edges.iter().map(|&(u, v, w)| (u, v, Some(w))).collect())
    }

    fn build(n: usize, raw: Vec<(usize, usize, Option<i64>)>) -> Result<Graph, GraphError> {
        let weighted = raw.iter().any(|e| e.2.is_some());
        let mut seen = BTreeSet::new();
        let mut list = Vec::with_capacity(raw.len());
        for (u, v, w) in raw {
            for x in [u, v] {
                if x >= n {
                    return Err(GraphError::VertexOutOfRange { v: x, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop { v: u });
            }
            let (a, b) = if u < v { (u, v) } else { (v, u) };
            if !seen.insert((a, b)) {
                return Err(GraphError::DuplicateEdge { u: a, v: b });
            }
            let w = match (weighted, w) {
                (false, _) => 1,
                (true, Some(w)) if w >= 1 => w,
                (true, Some(w)) => return Err(GraphError::BadWeight { u: a, v: b, w }),
                (true, None) => return Err(GraphError::BadWeight { u: a, v: b, w: 0 }),
            };
            list.push((a, b, w as u64));
        }
        list.sort_unstable();
        let mut adj = vec![Vec::new(); n];
        for (id, &(a, b, _)) in list.iter().enumerate() {
            adj[a].push((b, id));
            adj[b].push((a, id));
        }
        for l in adj.iter_mut() {
            l.sort_unstable();
        }
        Ok(Graph {
            n,
            edges: list.iter().map(|&(a, b, _)| (a, b)).collect(),
            adj,
            weights: weighted.then(|| list.iter().map(|e| e.2).collect()),
            family_tag: None,
            density_bound: None,
        })
    }

    pub fn with_family(mut self, tag: &str) -> Graph {
        self.family_tag = Some(tag.to_string());
        self
    }

    pub fn with_density_bound(mut self, c: Ratio<i64>) -> Graph {
        self.density_bound = Some(c);
        self
    }

    /// Attach weights (one per edge id). Every weight must be at least 1.
    pub fn with_weights(mut self, w: Vec<u64>) -> Result<Graph, GraphError> {
        if w.len() != self.edges.len() {
            return Err(GraphError::InvalidParameter(format!(
                "expected {} weights, got {}",
                self.edges.len(),
                w.len()
            )));
        }
        if let Some(e) = w.iter().position(|&x| x == 0) {
            let (u, v) = self.edges[e];
            return Err(GraphError::BadWeight { u, v, w: 0 });
        }
        self.weights = Some(w);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    /// Neighbors of `v` with the connecting edge id, sorted by neighbor.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn edge_id(&self, u: usize, v: usize) -> Option<usize> {
        let l = self.adj.get(u)?;
        l.binary_search_by_key(&v, |&(x, _)| x).ok().map(|i| l[i].1)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edge_id(u, v).is_some()
    }

    pub fn is_weighted(&self) -> bool {
        self.weights.is_some()
    }

    /// Weight of edge `e`; unweighted graphs report 1.
    pub fn weight(&self, e: usize) -> u64 {
        self.weights.as_ref().map_or(1, |w| w[e])
    }

    pub fn max_weight(&self) -> u64 {
        (0..self.m()).map(|e| self.weight(e)).max().unwrap_or(1)
    }

    pub fn family_tag(&self) -> Option<&str> {
        self.family_tag.as_deref()
    }

    pub fn density_bound(&self) -> Option<Ratio<i64>> {
        self.density_bound
    }

    /// Subgraph induced by `vertices`, relabelled to `0..k` in the given order.
    /// Returns the subgraph and, for each subgraph edge, the original edge id.
    pub fn induced(&self, vertices: &[usize]) -> (Graph, Vec<usize>) {
        let mut local = vec![usize::MAX; self.n];
        for (i, &v) in vertices.iter().enumerate() {
            local[v] = i;
        }
        let mut list = Vec::new();
        for &v in vertices {
            for &(u, e) in &self.adj[v] {
                if local[u] != usize::MAX && v < u {
                    list.push((local[v], local[u], e));
                }
            }
        }
        let pairs: Vec<(usize, usize, i64)> = list.iter().map(|&(a, b, e)| (a, b, self.weight(e) as i64)).collect();
        let mut g = if self.is_weighted() {
            Graph::from_weighted_edges(vertices.len(), &pairs)
        } else {
            Graph::from_edges(vertices.len(), &pairs.iter().map(|p| (p.0, p.1)).collect::<Vec<_>>())
        }
        .expect("induced subgraph of a simple graph is simple");
        g.density_bound = self.density_bound;
        let back = g.edges.iter().map(|&(a, b)| self.edge_id(vertices[a], vertices[b]).unwrap()).collect();
        (g, back)
    }

    /// Connected components, each sorted, ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut i = 0;
            while i < comp.len() {
                let v = comp[i];
                i += 1;
                for &(u, _) in &self.adj[v] {
                    if !seen[u] {
                        seen[u] = true;
                        comp.push(u);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn to_edge_list(&self) -> String {
        let mut s = format!("{} {}", self.n, self.m());
        if self.is_weighted() {
            s.push_str(" weighted");
        }
        s.push('\n');
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            if self.is_weighted() {
                s.push_str(&format!("{} {} {}\n", u, v, self.weight(e)));
            } else {
                s.push_str(&format!("{} {}\n", u, v));
            }
        }
        s
    }

    pub fn to_json(&self) -> String {
        let edges: Vec<Vec<u64>> =
            self.edges
                .iter()
                .enumerate()
                .map(|(e, &(u, v))| {
                    if self.is_weighted() {
                        vec![u as u64, v as u64, self.weight(e)]
                    } else {
                        vec![u as u64, v as u64]
                    }
                })
                .collect();
        serde_json::json!({ "n": self.n, "edges": edges }).to_string()
    }
}

/// Number of bits needed to write an ID in `0..=n`.
pub fn id_bits(n: usize) -> usize {
    ceil_log2(n as u64 + 1).max(1)
}

pub fn ceil_log2(x: u64) -> usize {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros() as usize
    }
}

pub fn load_graph<R: Read>(mut source: R, format: GraphFormat) -> Result<Graph, GraphError> {
    let mut text = String::new();
    source.read_to_string(&mut text).map_err(|e| GraphError::Io(e.to_string()))?;
    match format {
        GraphFormat::EdgeList => parse_edge_list(&text),
        GraphFormat::Json => parse_json(&text),
    }
}

fn parse_edge_list(text: &str) -> Result<Graph, GraphError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (hl, header) = lines.next().ok_or(GraphError::Parse { line: 1, msg: "missing header".into() })?;
    let hdr: Vec<&str> = header.split_whitespace().collect();
    let perr = |line: usize, msg: &str| GraphError::Parse { line: line + 1, msg: msg.to_string() };
    if hdr.len() < 2 || hdr.len() > 3 {
        return Err(perr(hl, "header must be `n m [weighted]`"));
    }
    let n: usize = hdr[0].parse().map_err(|_| perr(hl, "bad vertex count"))?;
    let m: usize = hdr[1].parse().map_err(|_| perr(hl, "bad edge count"))?;
    let weighted = match hdr.get(2) {
        None => false,
        Some(&"weighted") => true,
        Some(_) => return Err(perr(hl, "third header field must be `weighted`")),
    };
    let mut raw = Vec::with_capacity(m);
    for (ln, line) in lines {
        let f: Vec<&str> = line.split_whitespace().collect();
        let want = if weighted { 3 } else { 2 };
        if f.len() != want {
            return Err(perr(ln, &format!("expected {} fields", want)));
        }
        let u: usize = f[0].parse().map_err(|_| perr(ln, "bad vertex id"))?;
        let v: usize = f[1].parse().map_err(|_| perr(ln, "bad vertex id"))?;
        let w = if weighted { Some(f[2].parse::<i64>().map_err(|_| perr(ln, "bad weight"))?) } else { None };
        raw.push((u, v, w));
    }
    if raw.len() != m {
        return Err(GraphError::Parse {
            line: text.lines().count(),
            msg: format!("header declares {} edges, found {}", m, raw.len()),
        });
    }
    Graph::build(n, raw)
}

#[derive(Deserialize)]
struct JsonGraph {
    n: usize,
    edges: Vec<Vec<i64>>,
}

fn parse_json(text: &str) -> Result<Graph, GraphError> {
    let j: JsonGraph =
        serde_json::from_str(text).map_err(|e| GraphError::Parse { line: e.line(), msg: e.to_string() })?;
    let mut raw = Vec::with_capacity(j.edges.len());
    for e in &j.edges {
        if e.len() != 2 && e.len() != 3 {
            return Err(GraphError::Parse { line: 1, msg: "edge must be [u,v] or [u,v,w]".into() });
        }
        if e[0] < 0 || e[1] < 0 {
            return Err(GraphError::Parse { line: 1, msg: "negative vertex id".into() });
        }
        raw.push((e[0] as usize, e[1] as usize, e.get(2).copied()));
    }
    let mixed = raw.iter().any(|e| e.2.is_some()) && raw.iter().any(|e| e.2.is_none());
    if mixed {
        return Err(GraphError::Parse { line: 1, msg: "mixed weighted and unweighted edges".into() });
    }
    Graph::build(j.n, raw)
}
