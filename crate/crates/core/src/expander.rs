//! (ε, φ) expander decomposition by recursive low-conductance cutting, and an
//! independent verifier.

use nalgebra::{DMatrix, SymmetricEigen};
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conductance::{conductance, cut_ratio, exact_graph_conductance, Rational, EXACT_CONDUCTANCE_LIMIT};
use crate::graph::{ceil_log2, Graph};
use crate::oracles;
use crate::sim::{derive_seed, RoundLog};

pub const NO_CLUSTER: usize = usize::MAX;

/// Pieces this small always get an exact conductance certificate; larger
/// ones up to the exact limit only when connectivity alone does not clear φ.
pub const CHEAP_EXACT_LIMIT: usize = 10;

#[derive(Debug, Error, PartialEq)]
pub enum DecompError {
    #[error("epsilon must lie in (0, 1), got {0}")]
    BadEpsilon(f64),
    #[error("removing {removed} edges would exceed the budget of {budget}")]
    EdgeBudgetExceeded { removed: usize, budget: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecomposeConfig {
    pub c_phi: i64,
    /// Replaces the formula for the target conductance when set.
    pub phi_override: Option<Rational>,
    /// Multiplier of the synthetic construction charge `⌈ε⁻³ log³ n⌉`.
    pub charge_factor: u64,
    pub power_iteration_factor: usize,
}

impl Default for DecomposeConfig {
    fn default() -> DecomposeConfig {
        DecomposeConfig { c_phi: 16, phi_override: None, charge_factor: 1, power_iteration_factor: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// One vertex; conductance holds vacuously.
    Singleton,
    Exact {
        conductance: Rational,
    },
    /// Estimated λ₂ of the normalized Laplacian; Cheeger gives Φ ≥ λ₂/2.
    Spectral {
        lambda2: f64,
    },
    /// Connected with `edges` edges, so every cut has Φ ≥ 1/edges.
    Connectivity {
        edges: usize,
    },
    Unverified,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RegistryKey {
    pub label: String,
    pub scale: u32,
    pub iteration: u32,
}

impl RegistryKey {
    pub fn new(label: &str, scale: u32, iteration: u32) -> RegistryKey {
        RegistryKey { label: label.to_string(), scale, iteration }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub n: usize,
    /// Clusters sorted internally and ordered by smallest vertex.
    pub clusters: Vec<Vec<usize>>,
    /// Cluster index per vertex; [`NO_CLUSTER`] for vertices left out.
    pub membership: Vec<usize>,
    pub removed_edges: Vec<(usize, usize)>,
    pub phi_target: Rational,
    pub epsilon: Rational,
    pub certificates: Vec<Certificate>,
    pub registry_key: Option<RegistryKey>,
    pub round_log: RoundLog,
    /// Set when the first attempt ran out of edge budget and φ was halved.
    pub retried: bool,
}

impl Decomposition {
    pub fn cluster_of(&self, v: usize) -> Option<usize> {
        let c = self.membership[v];
        (c != NO_CLUSTER).then_some(c)
    }

    /// Partition from explicit clusters, with the crossing edges removed and
    /// no certificates; used for hand-built partitions and resets.
    pub fn from_clusters(g: &Graph, clusters: Vec<Vec<usize>>, epsilon: Rational, phi: Rational) -> Decomposition {
        let mut membership = vec![NO_CLUSTER; g.n()];
        let mut clusters: Vec<Vec<usize>> = clusters
            .into_iter()
            .map(|mut c| {
                c.sort_unstable();
                c
            })
            .filter(|c| !c.is_empty())
            .collect();
        clusters.sort();
        for (i, c) in clusters.iter().enumerate() {
            for &v in c {
                membership[v] = i;
            }
        }
        let removed_edges = g
            .edges()
            .iter()
            .copied()
            .filter(|&(u, v)| {
                membership[u] != NO_CLUSTER && membership[v] != NO_CLUSTER && membership[u] != membership[v]
            })
            .collect();
        let certificates = vec![Certificate::Unverified; clusters.len()];
        Decomposition {
            n: g.n(),
            clusters,
            membership,
            removed_edges,
            phi_target: phi,
            epsilon,
            certificates,
            registry_key: None,
            round_log: RoundLog::new(),
            retried: false,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("decomposition serializes")
    }
}

/// Closest fraction with denominator at most 10⁶ (continued fractions), so
/// later squaring stays within i64.
pub fn rational_of(x: f64) -> Rational {
    assert!(x.is_finite(), "finite value expected");
    const MAX_DEN: i64 = 1_000_000;
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1i64, 1i64, 0i64);
    let mut r = x.abs();
    loop {
        let a = r.floor();
        if a > 1e12 {
            break;
        }
        let a = a as i64;
        let (p2, q2) = (a * p1 + p0, a * q1 + q0);
        if q2 > MAX_DEN {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = r - a as f64;
        if frac < 1e-12 {
            break;
        }
        r = 1.0 / frac;
    }
    let v = if q1 == 0 { Rational::from_integer(p1) } else { Rational::new(p1, q1) };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

pub fn to_f64(r: Rational) -> f64 {
    r.to_f64().unwrap_or(0.0)
}

/// φ = ε² / (c_φ · max(1, ⌈log₂ n⌉)).
pub fn phi_for(epsilon: Rational, n: usize, c_phi: i64) -> Rational {
    let l = ceil_log2(n as u64).max(1) as i64;
    epsilon * epsilon / Rational::from_integer(c_phi * l)
}

/// Synthetic construction charge `c · ⌈ε⁻³ log³ n⌉`.
pub fn construction_charge(epsilon: Rational, n: usize, factor: u64) -> u64 {
    let l = ceil_log2(n as u64).max(1) as f64;
    let e = to_f64(epsilon);
    let v = (l * l * l / (e * e * e)).ceil() * factor as f64;
    if v >= u64::MAX as f64 {
        u64::MAX
    } else {
        v as u64
    }
}

pub fn decompose(g: &Graph, epsilon: f64, seed: u64) -> Result<Decomposition, DecompError> {
    decompose_with(g, epsilon, seed, &DecomposeConfig::default())
}

pub fn decompose_with(g: &Graph, epsilon: f64, seed: u64, cfg: &DecomposeConfig) -> Result<Decomposition, DecompError> {
    let all: Vec<usize> = (0..g.n()).collect();
    decompose_members(g, &all, epsilon, seed, cfg)
}

/// Decompose `G[members]`; other vertices get [`NO_CLUSTER`]. The edge budget
/// is ε′·|E(G[members])| with ε′ = ε/C_H when `g` declares a density bound.
pub fn decompose_members(
    g: &Graph,
    members: &[usize],
    epsilon: f64,
    seed: u64,
    cfg: &DecomposeConfig,
) -> Result<Decomposition, DecompError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(DecompError::BadEpsilon(epsilon));
    }
    decompose_members_exact(g, members, rational_of(epsilon), seed, cfg)
}

pub fn decompose_members_exact(
    g: &Graph,
    members: &[usize],
    eps: Rational,
    seed: u64,
    cfg: &DecomposeConfig,
) -> Result<Decomposition, DecompError> {
    if !(eps > Rational::from_integer(0) && eps < Rational::from_integer(1)) {
        return Err(DecompError::BadEpsilon(to_f64(eps)));
    }
    let eps_eff = match g.density_bound() {
        Some(c) if c > Rational::from_integer(1) => eps / c,
        _ => eps,
    };
    let mut inside = vec![false; g.n()];
    for &v in members {
        inside[v] = true;
    }
    let m_members = g.edges().iter().filter(|&&(u, v)| inside[u] && inside[v]).count();
    let budget = (eps_eff * Rational::from_integer(m_members as i64)).floor().to_integer() as usize;
    let phi = cfg.phi_override.unwrap_or_else(|| phi_for(eps_eff, g.n(), cfg.c_phi));
    let mut d = match cut_recursively(g, &inside, phi, budget, seed, cfg) {
        Ok(d) => d,
        Err(DecompError::EdgeBudgetExceeded { .. }) => {
            let mut d = cut_recursively(g, &inside, phi / 2, budget, seed, cfg)?;
            d.retried = true;
            d
        }
        Err(e) => return Err(e),
    };
    d.epsilon = eps;
    d.round_log.charge_synthetic("expander-decomposition", construction_charge(eps_eff, g.n(), cfg.charge_factor));
    Ok(d)
}

fn cut_recursively(
    g: &Graph,
    inside: &[bool],
    phi: Rational,
    budget: usize,
    seed: u64,
    cfg: &DecomposeConfig,
) -> Result<Decomposition, DecompError> {
    let n = g.n();
    // piece[v]: current piece id; pieces only ever split.
    let mut piece = vec![NO_CLUSTER; n];
    let mut removed = vec![false; g.m()];
    let mut removed_count = 0usize;
    let mut stack: Vec<Vec<usize>> = Vec::new();
    let mut next_id = 0;
    let member_list: Vec<usize> = (0..n).filter(|&v| inside[v]).collect();
    for comp in split_components(g, &member_list, inside, &removed) {
        for &v in &comp {
            piece[v] = next_id;
        }
        next_id += 1;
        stack.push(comp);
    }
    let mut done: Vec<(Vec<usize>, Certificate)> = Vec::new();
    let iters = cfg.power_iteration_factor * ceil_log2(n as u64).max(1);
    while let Some(comp) = stack.pop() {
        if comp.len() == 1 {
            done.push((comp, Certificate::Singleton));
            continue;
        }
        let (sub, _) = g.induced(&comp);
        let connected_suffices = Rational::new(1, sub.m() as i64) >= phi;
        let outcome =
            if comp.len() <= CHEAP_EXACT_LIMIT || (comp.len() <= EXACT_CONDUCTANCE_LIMIT && !connected_suffices) {
                let ex = exact_graph_conductance(&sub).expect("size checked");
                if ex.value >= phi {
                    Err(Certificate::Exact { conductance: ex.value })
                } else {
                    Ok(ex.argmin)
                }
            } else if connected_suffices {
                Err(Certificate::Connectivity { edges: sub.m() })
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "power-iteration", comp[0] as u64));
                let (lambda2, vec) = spectral_estimate(&sub, iters, &mut rng);
                if lambda2 / 2.0 >= to_f64(phi) {
                    Err(Certificate::Spectral { lambda2 })
                } else {
                    let (s, val) = sweep_cut(&sub, &vec);
                    if val < phi {
                        Ok(s)
                    } else {
                        Err(Certificate::Unverified)
                    }
                }
            };
        let s: Vec<usize> = match outcome {
            Ok(local) => local.iter().map(|&i| comp[i]).collect(),
            Err(cert) => {
                done.push((comp, cert));
                continue;
            }
        };
        let mut in_s = vec![false; n];
        for &v in &s {
            in_s[v] = true;
        }
        for &v in &s {
            for &(u, e) in g.neighbors(v) {
                if inside[u] && piece[u] == piece[v] && !in_s[u] && !removed[e] {
                    removed[e] = true;
                    removed_count += 1;
                }
            }
        }
        if removed_count > budget {
            return Err(DecompError::EdgeBudgetExceeded { removed: removed_count, budget });
        }
        let rest: Vec<usize> = comp.iter().copied().filter(|&v| !in_s[v]).collect();
        for part in [s, rest] {
            let mut mark = vec![false; n];
            for &v in &part {
                mark[v] = true;
            }
            for c in split_components(g, &part, &mark, &removed) {
                for &v in &c {
                    piece[v] = next_id;
                }
                next_id += 1;
                stack.push(c);
            }
        }
    }
    done.sort_by(|a, b| a.0.cmp(&b.0));
    let mut membership = vec![NO_CLUSTER; n];
    for (i, (c, _)) in done.iter().enumerate() {
        for &v in c {
            membership[v] = i;
        }
    }
    let removed_edges = (0..g.m()).filter(|&e| removed[e]).map(|e| g.edge(e)).collect();
    let (clusters, certificates) = done.into_iter().unzip();
    Ok(Decomposition {
        n,
        clusters,
        membership,
        removed_edges,
        phi_target: phi,
        epsilon: Rational::from_integer(0),
        certificates,
        registry_key: None,
        round_log: RoundLog::new(),
        retried: false,
    })
}

/// Components of `G[part]` without removed edges; each sorted.
fn split_components(g: &Graph, part: &[usize], mark: &[bool], removed: &[bool]) -> Vec<Vec<usize>> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    let mut sorted = part.to_vec();
    sorted.sort_unstable();
    for &s in &sorted {
        if !seen.insert(s) {
            continue;
        }
        let mut comp = vec![s];
        let mut i = 0;
        while i < comp.len() {
            let v = comp[i];
            i += 1;
            for &(u, e) in g.neighbors(v) {
                if mark[u] && !removed[e] && seen.insert(u) {
                    comp.push(u);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Power iteration on the lazy normalized walk matrix `(I + D^-1/2 A D^-1/2)/2`
/// with the stationary direction projected out. Returns an estimate of λ₂ of
/// the normalized Laplacian (Rayleigh quotient less the residual norm) and the
/// Fiedler-like embedding `x_v / sqrt(d_v)`.
pub fn spectral_estimate(g: &Graph, iters: usize, rng: &mut impl Rng) -> (f64, Vec<f64>) {
    let n = g.n();
    let sq: Vec<f64> = (0..n).map(|v| (g.degree(v) as f64).sqrt()).collect();
    let norm_top: f64 = sq.iter().map(|s| s * s).sum::<f64>().sqrt();
    let top: Vec<f64> = sq.iter().map(|s| s / norm_top).collect();
    let apply = |x: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|v| {
                let s: f64 = g.neighbors(v).iter().map(|&(u, _)| x[u] / (sq[v] * sq[u])).sum();
                0.5 * (x[v] + s)
            })
            .collect()
    };
    let deflate = |x: &mut Vec<f64>| {
        let d: f64 = x.iter().zip(&top).map(|(a, b)| a * b).sum();
        for (xi, ti) in x.iter_mut().zip(&top) {
            *xi -= d * ti;
        }
        let nrm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        if nrm > 0.0 {
            for xi in x.iter_mut() {
                *xi /= nrm;
            }
        }
    };
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    deflate(&mut x);
    for _ in 0..iters {
        x = apply(&x);
        deflate(&mut x);
    }
    let mx = apply(&x);
    let mu: f64 = x.iter().zip(&mx).map(|(a, b)| a * b).sum();
    let resid = mx.iter().zip(&x).map(|(a, b)| (a - mu * b).powi(2)).sum::<f64>().sqrt();
    let lambda2 = (2.0 * (1.0 - mu - resid)).max(0.0);
    let emb = (0..n).map(|v| if sq[v] > 0.0 { x[v] / sq[v] } else { 0.0 }).collect();
    (lambda2, emb)
}

/// Best prefix cut of the vertices ordered by `emb`.
pub fn sweep_cut(g: &Graph, emb: &[f64]) -> (Vec<usize>, Rational) {
    let n = g.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| emb[a].partial_cmp(&emb[b]).unwrap().then(a.cmp(&b)));
    let total = 2 * g.m();
    let mut inside = vec![false; n];
    let (mut boundary, mut vol) = (0usize, 0usize);
    let mut best = (Rational::from_integer(2), 1);
    for (k, &v) in order.iter().enumerate().take(n - 1) {
        for &(u, _) in g.neighbors(v) {
            if inside[u] {
                boundary -= 1;
            } else {
                boundary += 1;
            }
        }
        inside[v] = true;
        vol += g.degree(v);
        let phi = cut_ratio(boundary, vol, total - vol);
        if phi < best.0 {
            best = (phi, k + 1);
        }
    }
    let mut s = order[..best.1].to_vec();
    s.sort_unstable();
    (s, best.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    NotAPartition(String),
    RemovedEdgeInsideCluster(usize, usize),
    CrossingEdgeNotRemoved(usize, usize),
    EdgeBudget { removed: usize, allowed: Rational },
    DisconnectedCluster(usize),
    LowConductance { cluster: usize, conductance: Rational, phi: Rational },
    SpectralBelowTarget { cluster: usize, lambda2: f64 },
    BadCertificate { cluster: usize, reason: String },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub violations: Vec<Violation>,
    pub exact_checked: usize,
    pub spectral_checked: usize,
    pub connectivity_checked: usize,
    pub uncertified: Vec<usize>,
    /// Clusters whose certificate was too large to re-derive independently.
    pub skipped: Vec<usize>,
}

impl VerificationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Largest cluster whose spectral certificate is re-derived by a dense
/// eigensolver.
pub const DENSE_EIGEN_LIMIT: usize = 1500;

/// Independent re-check of a decomposition against `g`. Clusters of at most
/// 20 vertices are checked by exhaustive cut enumeration whatever their
/// certificate says.
pub fn verify_decomposition(g: &Graph, d: &Decomposition) -> VerificationReport {
    let mut rep = VerificationReport::default();
    if d.membership.len() != g.n() {
        rep.violations.push(Violation::NotAPartition("membership length differs from n".into()));
        return rep;
    }
    let mut count = vec![0usize; g.n()];
    for (i, c) in d.clusters.iter().enumerate() {
        for &v in c {
            count[v] += 1;
            if d.membership[v] != i {
                rep.violations.push(Violation::NotAPartition(format!("vertex {} listed in cluster {}", v, i)));
            }
        }
    }
    for v in 0..g.n() {
        let listed = d.membership[v] != NO_CLUSTER;
        if count[v] != usize::from(listed) {
            rep.violations.push(Violation::NotAPartition(format!("vertex {} appears {} times", v, count[v])));
        }
    }
    let removed: std::collections::BTreeSet<(usize, usize)> =
        d.removed_edges.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
    let mut m_members = 0usize;
    for &(u, v) in g.edges() {
        let (cu, cv) = (d.membership[u], d.membership[v]);
        if cu == NO_CLUSTER || cv == NO_CLUSTER {
            continue;
        }
        m_members += 1;
        let r = removed.contains(&(u, v));
        if cu == cv && r {
            rep.violations.push(Violation::RemovedEdgeInsideCluster(u, v));
        }
        if cu != cv && !r {
            rep.violations.push(Violation::CrossingEdgeNotRemoved(u, v));
        }
    }
    let mut allowed = d.epsilon * Rational::from_integer(m_members as i64);
    if g.density_bound().is_some() {
        let members = d.membership.iter().filter(|&&c| c != NO_CLUSTER).count();
        allowed = d.epsilon * Rational::from_integer(members.min(m_members) as i64);
    }
    if Rational::from_integer(removed.len() as i64) > allowed {
        rep.violations.push(Violation::EdgeBudget { removed: removed.len(), allowed });
    }
    for (i, c) in d.clusters.iter().enumerate() {
        let (sub, _) = g.induced(c);
        if c.len() > 1 && sub.components().len() != 1 {
            rep.violations.push(Violation::DisconnectedCluster(i));
            continue;
        }
        if c.len() <= EXACT_CONDUCTANCE_LIMIT {
            let (phi_c, _) = oracles::min_conductance(&sub);
            rep.exact_checked += 1;
            if phi_c < d.phi_target {
                rep.violations.push(Violation::LowConductance { cluster: i, conductance: phi_c, phi: d.phi_target });
            }
            continue;
        }
        match d.certificates.get(i) {
            Some(Certificate::Connectivity { edges }) => {
                rep.connectivity_checked += 1;
                if *edges != sub.m() {
                    rep.violations.push(Violation::BadCertificate {
                        cluster: i,
                        reason: format!("claims {} edges, has {}", edges, sub.m()),
                    });
                } else if Rational::new(1, sub.m() as i64) < d.phi_target {
                    rep.violations.push(Violation::LowConductance {
                        cluster: i,
                        conductance: Rational::new(1, sub.m() as i64),
                        phi: d.phi_target,
                    });
                }
            }
            Some(Certificate::Spectral { .. }) => {
                if c.len() > DENSE_EIGEN_LIMIT {
                    rep.skipped.push(i);
                    continue;
                }
                rep.spectral_checked += 1;
                let l2 = dense_lambda2(&sub);
                if l2 / 2.0 + 1e-12 < to_f64(d.phi_target) {
                    rep.violations.push(Violation::SpectralBelowTarget { cluster: i, lambda2: l2 });
                }
            }
            Some(Certificate::Unverified) => rep.uncertified.push(i),
            other => rep.violations.push(Violation::BadCertificate {
                cluster: i,
                reason: format!("{:?} on a cluster of {} vertices", other, c.len()),
            }),
        }
    }
    rep
}

/// Second-smallest eigenvalue of the normalized Laplacian of a connected graph.
pub fn dense_lambda2(g: &Graph) -> f64 {
    let n = g.n();
    let mut m = DMatrix::<f64>::identity(n, n);
    for &(u, v) in g.edges() {
        let w = 1.0 / ((g.degree(u) * g.degree(v)) as f64).sqrt();
        m[(u, v)] -= w;
        m[(v, u)] -= w;
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev.get(1).copied().unwrap_or(0.0)
}

/// Sanity helper for tests and reports: Φ of a given side inside `G[cluster]`.
pub fn cluster_cut_conductance(g: &Graph, cluster: &[usize], side: &[usize]) -> Rational {
    let (sub, _) = g.induced(cluster);
    let local: Vec<usize> = side.iter().filter_map(|v| cluster.iter().position(|c| c == v)).collect();
    conductance(&sub, &local).conductance
}
