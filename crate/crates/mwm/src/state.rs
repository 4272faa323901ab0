use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use congest_core::conductance::Rational;
use congest_core::expander::RegistryKey;
use congest_core::routing::Registry;
use congest_core::sim::RoundLog;
use congest_core::Graph;

use crate::config::{MwmConfig, Q};
use crate::forest::LaminarForest;
use crate::MwmError;

/// Global mirror of the distributed state. Vertices hold their own row of
/// each vector; blossom data lives at the naming edge.
#[derive(Debug, Clone)]
pub struct MwmState {
    pub g: Graph,
    pub cfg: MwmConfig,
    /// Matched edge per vertex.
    pub mate: Vec<Option<usize>>,
    pub y: Vec<Q>,
    pub omega: LaminarForest,
    pub delta_w: Vec<Q>,
    pub tau: Q,
    pub scale: u32,
    /// Iteration within the current scale.
    pub iteration: u32,
    /// Scale at which a matched or blossom edge last became one.
    pub type_of: Vec<Option<u32>>,
    /// Free vertices matched to a temporary dummy by `Cut` this iteration.
    pub frozen: Vec<bool>,
    pub registry: Registry,
    pub phis: BTreeMap<RegistryKey, Rational>,
    pub round_log: RoundLog,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeMetrics {
    pub w: Q,
    pub w_i: Q,
    pub yz: Q,
    pub type_of: Option<u32>,
    pub matched: bool,
    pub blossom_edge: bool,
    pub eligible: bool,
}

/// M = Ω = ∅, Δw = 0, τ = W/2 − δ₀/2 and y ≡ τ.
pub fn init_state(g: &Graph, epsilon: f64, k_iter: usize) -> Result<MwmState, MwmError> {
    let cfg = MwmConfig::new(g, epsilon, k_iter)?;
    Ok(MwmState::new(g, cfg))
}

impl MwmState {
    pub fn new(g: &Graph, cfg: MwmConfig) -> MwmState {
        let tau = cfg.from_int(cfg.w) / 2 - cfg.delta(0) / 2;
        MwmState {
            g: g.clone(),
            mate: vec![None; g.n()],
            y: vec![tau; g.n()],
            omega: LaminarForest::new(g.n(), g.m()),
            delta_w: vec![0; g.m()],
            tau,
            scale: 0,
            iteration: 0,
            type_of: vec![None; g.m()],
            frozen: vec![false; g.n()],
            registry: Registry::new(),
            phis: BTreeMap::new(),
            round_log: RoundLog::new(),
            cfg,
        }
    }

    pub fn n(&self) -> usize {
        self.g.n()
    }

    pub fn delta(&self) -> Q {
        self.cfg.delta(self.scale)
    }

    pub fn w(&self, e: usize) -> Q {
        self.cfg.from_int(self.g.weight(e)) + self.delta_w[e]
    }

    pub fn w_i(&self, e: usize) -> Q {
        let d = self.delta();
        d * self.w(e).div_euclid(d)
    }

    pub fn yz(&self, e: usize) -> Q {
        let (u, v) = self.g.edge(e);
        self.y[u] + self.y[v] + self.omega.shared_z(u, v)
    }

    pub fn is_matched(&self, e: usize) -> bool {
        let (u, _) = self.g.edge(e);
        self.mate[u] == Some(e)
    }

    pub fn is_blossom_edge(&self, e: usize) -> bool {
        self.omega.edge_label[e].is_some()
    }

    /// Free in the real matching; frozen vertices count as free here.
    pub fn is_free(&self, v: usize) -> bool {
        self.mate[v].is_none()
    }

    /// Free and not dummy-matched.
    pub fn is_open(&self, v: usize) -> bool {
        self.mate[v].is_none() && !self.frozen[v]
    }

    pub fn mate_vertex(&self, v: usize) -> Option<usize> {
        self.mate[v].map(|e| {
            let (a, b) = self.g.edge(e);
            if a == v {
                b
            } else {
                a
            }
        })
    }

    pub fn eligible(&self, e: usize) -> bool {
        if self.is_blossom_edge(e) {
            return true;
        }
        let yz = self.yz(e);
        let wi = self.w_i(e);
        let d = self.delta();
        if self.is_matched(e) {
            let dj = self.cfg.delta(self.type_of[e].unwrap_or(self.scale));
            yz >= wi + 3 * (dj - d) - d / 2
        } else {
            yz <= wi - d
        }
    }

    pub fn eligibility(&self) -> Vec<bool> {
        (0..self.g.m()).map(|e| self.eligible(e)).collect()
    }

    pub fn edge_metrics(&self, e: usize) -> Result<EdgeMetrics, MwmError> {
        if e >= self.g.m() {
            return Err(MwmError::UnknownEdge(e));
        }
        Ok(EdgeMetrics {
            w: self.w(e),
            w_i: self.w_i(e),
            yz: self.yz(e),
            type_of: self.type_of[e],
            matched: self.is_matched(e),
            blossom_edge: self.is_blossom_edge(e),
            eligible: self.eligible(e),
        })
    }

    pub fn matching(&self) -> Vec<usize> {
        (0..self.g.m()).filter(|&e| self.is_matched(e)).collect()
    }

    pub fn matching_weight(&self) -> u64 {
        self.matching().iter().map(|&e| self.g.weight(e)).sum()
    }

    /// Contracted node of each vertex in G/Ω, named by the base of its root
    /// blossom (the vertex itself for singletons).
    pub fn reps(&self) -> Vec<usize> {
        let mut rep: Vec<usize> = (0..self.n()).collect();
        for b in self.omega.roots() {
            let base = self.omega.base(crate::forest::Child::Blossom(b));
            for v in self.omega.members(b) {
                rep[v] = base;
            }
        }
        rep
    }

    /// Free singletons, excluding frozen vertices.
    pub fn free_singletons(&self) -> Vec<usize> {
        (0..self.n()).filter(|&v| self.is_open(v) && self.omega.vertex_parent[v].is_none()).collect()
    }

    pub fn set_match(&mut self, u: usize, v: usize, e: usize) {
        self.mate[u] = Some(e);
        self.mate[v] = Some(e);
    }

    pub fn sum_abs_delta_w(&self) -> Q {
        self.delta_w.iter().map(|d| d.abs()).sum()
    }
}
