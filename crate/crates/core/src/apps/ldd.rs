use std::collections::{BTreeMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::expander::decompose_with;
use crate::framework::{solve_on_decomposition, ClusterView, FrameworkConfig, LocalSolution};
use crate::graph::{id_bits, Graph};
use crate::routing::GatherInput;
use crate::sim::{derive_seed, Message, RoundLog};

use super::{flatten_parts, AppError, AppReport, Solution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LddConfig {
    /// Chopping stages per cluster.
    pub k_h: usize,
}

impl Default for LddConfig {
    fn default() -> LddConfig {
        LddConfig { k_h: 3 }
    }
}

impl LddConfig {
    pub fn d_cap(&self, epsilon: f64) -> usize {
        (16.0 * self.k_h as f64 / epsilon).ceil() as usize
    }
}

/// BFS distances inside `alive` from `src`; `usize::MAX` where unreachable.
fn bfs(g: &Graph, alive: &[bool], src: usize, dist: &mut Vec<usize>) {
    dist.clear();
    dist.resize(g.n(), usize::MAX);
    dist[src] = 0;
    let mut q = VecDeque::from([src]);
    while let Some(v) = q.pop_front() {
        for &(u, _) in g.neighbors(v) {
            if alive[u] && dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                q.push_back(u);
            }
        }
    }
}

/// Exact diameter of the connected subgraph on `piece` (iFUB).
pub fn piece_diameter(g: &Graph, piece: &[usize]) -> usize {
    if piece.len() <= 1 {
        return 0;
    }
    let mut alive = vec![false; g.n()];
    for &v in piece {
        alive[v] = true;
    }
    let mut dist = Vec::new();
    let far = |dist: &Vec<usize>| piece.iter().copied().max_by_key(|&v| (dist[v], std::cmp::Reverse(v))).unwrap();
    bfs(g, &alive, piece[0], &mut dist);
    let a = far(&dist);
    bfs(g, &alive, a, &mut dist);
    let b = far(&dist);
    let mut lb = dist[b];
    // Midpoint of the a-b path as the iFUB root.
    let mut mid = b;
    for _ in 0..lb / 2 {
        mid = g.neighbors(mid).iter().map(|&(u, _)| u).find(|&u| alive[u] && dist[u] + 1 == dist[mid]).unwrap();
    }
    bfs(g, &alive, mid, &mut dist);
    let mut levels: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &v in piece {
        levels.entry(dist[v]).or_default().push(v);
    }
    let mut other = Vec::new();
    for (&i, level) in levels.iter().rev() {
        if lb >= 2 * i {
            break;
        }
        for &v in level {
            bfs(g, &alive, v, &mut other);
            lb = lb.max(piece.iter().map(|&u| other[u]).max().unwrap());
        }
        if lb >= 2 * (i - 1) {
            break;
        }
    }
    lb
}

/// Connected components of `g` restricted to `alive`, each sorted.
fn components_within(g: &Graph, alive: &[bool]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; g.n()];
    let mut out = Vec::new();
    for s in 0..g.n() {
        if !alive[s] || seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut i = 0;
        while i < comp.len() {
            let v = comp[i];
            i += 1;
            for &(u, _) in g.neighbors(v) {
                if alive[u] && !seen[u] {
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

/// One chopping stage of a connected piece: BFS layers from its smallest
/// vertex, cut between layers `l` and `l + 1` whenever `l + 1 ≡ offset`
/// (mod `interval`). A random offset is kept unless it cuts more than the
/// average over all offsets, in which case the cheapest offset is used.
fn chop(g: &Graph, piece: &[usize], interval: usize, rng: &mut ChaCha8Rng) -> (Vec<Vec<usize>>, usize) {
    let mut alive = vec![false; g.n()];
    for &v in piece {
        alive[v] = true;
    }
    let mut dist = Vec::new();
    bfs(g, &alive, piece[0], &mut dist);
    let mut crossing = vec![0usize; interval];
    for &v in piece {
        for &(u, _) in g.neighbors(v) {
            if alive[u] && dist[u] == dist[v] + 1 {
                crossing[dist[u] % interval] += 1;
            }
        }
    }
    let total: usize = crossing.iter().sum();
    let mut offset = rng.gen_range(0..interval);
    if crossing[offset] * interval > total {
        offset = (0..interval).min_by_key(|&o| (crossing[o], o)).unwrap();
    }
    let band = |v: usize| (dist[v] + interval - offset) / interval;
    let mut label = vec![usize::MAX; g.n()];
    for &v in piece {
        label[v] = band(v);
    }
    // Components inside each band.
    let mut seen = vec![false; g.n()];
    let mut pieces = Vec::new();
    for &s in piece {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut i = 0;
        while i < comp.len() {
            let v = comp[i];
            i += 1;
            for &(u, _) in g.neighbors(v) {
                if alive[u] && !seen[u] && label[u] == label[v] {
                    seen[u] = true;
                    comp.push(u);
                }
            }
        }
        comp.sort_unstable();
        pieces.push(comp);
    }
    (pieces, crossing[offset])
}

/// Carve BFS balls from the smallest remaining vertex; each radius in
/// `[r/2, r]` is chosen to minimize the boundary.
fn ball_carve(g: &Graph, piece: &[usize], r: usize) -> (Vec<Vec<usize>>, usize) {
    let mut alive = vec![false; g.n()];
    for &v in piece {
        alive[v] = true;
    }
    let mut dist = Vec::new();
    let mut out = Vec::new();
    let mut cut = 0;
    let mut remaining: Vec<usize> = piece.to_vec();
    while let Some(&s) = remaining.first() {
        bfs(g, &alive, s, &mut dist);
        // boundary[d]: edges from layer d to layer d + 1.
        let mut boundary: BTreeMap<usize, usize> = BTreeMap::new();
        let mut ecc = 0;
        for &v in &remaining {
            if dist[v] == usize::MAX {
                continue;
            }
            ecc = ecc.max(dist[v]);
            for &(u, _) in g.neighbors(v) {
                if alive[u] && dist[u] == dist[v] + 1 {
                    *boundary.entry(dist[v]).or_default() += 1;
                }
            }
        }
        let radius = if ecc <= r {
            ecc
        } else {
            (r / 2..=r).min_by_key(|&d| (boundary.get(&d).copied().unwrap_or(0), std::cmp::Reverse(d))).unwrap()
        };
        cut += boundary.get(&radius).copied().unwrap_or(0);
        let ball: Vec<usize> = remaining.iter().copied().filter(|&v| dist[v] <= radius).collect();
        for &v in &ball {
            alive[v] = false;
        }
        remaining.retain(|&v| alive[v]);
        out.extend(components_within_ball(g, &ball));
    }
    (out, cut)
}

fn components_within_ball(g: &Graph, ball: &[usize]) -> Vec<Vec<usize>> {
    let mut alive = vec![false; g.n()];
    for &v in ball {
        alive[v] = true;
    }
    components_within(g, &alive)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    pub pieces: Vec<Vec<usize>>,
    pub cut: usize,
    pub carved: bool,
}

/// Leader-local refinement of a connected cluster graph: `k_h` chopping
/// stages, then ball carving of pieces whose diameter exceeds `D_cap`. The
/// carving is dropped when it would push the cut past `ε̃·|E|`.
pub fn refine(g: &Graph, epsilon_tilde: f64, d_cap: usize, cfg: &LddConfig, seed: u64) -> Refinement {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let interval = (4.0 / epsilon_tilde).ceil() as usize;
    let budget = (epsilon_tilde * g.m() as f64).floor() as usize;
    let all = vec![true; g.n()];
    let mut pieces = components_within(g, &all);
    let mut cut = 0;
    for _ in 0..cfg.k_h {
        let mut next = Vec::new();
        for p in &pieces {
            let (sub, c) = chop(g, p, interval, &mut rng);
            cut += c;
            next.extend(sub);
        }
        pieces = next;
    }
    let r = (2.0 / epsilon_tilde).ceil() as usize;
    let mut carved_pieces = Vec::new();
    let mut carve_cut = 0;
    let mut carved = false;
    for p in &pieces {
        if p.len() > d_cap + 1 && piece_diameter(g, p) > d_cap {
            let (sub, c) = ball_carve(g, p, r);
            carve_cut += c;
            carved_pieces.extend(sub);
            carved = true;
        } else {
            carved_pieces.push(p.clone());
        }
    }
    if carved && cut + carve_cut <= budget {
        Refinement { pieces: carved_pieces, cut: cut + carve_cut, carved }
    } else {
        Refinement { pieces, cut, carved: false }
    }
}

/// Outer decomposition with `ε/2`, then each leader refines its cluster with
/// `ε̃ = ε/2`. Failed clusters fall back to singletons.
pub fn low_diameter_decomposition(
    g: &Graph,
    epsilon: f64,
    seed: u64,
    ldd: &LddConfig,
    cfg: &FrameworkConfig,
) -> Result<AppReport, AppError> {
    let eps_t = epsilon / 2.0;
    let d_cap = ldd.d_cap(epsilon);
    let d = decompose_with(g, eps_t, derive_seed(seed, "decompose", 0), &cfg.decompose)?;
    let w = id_bits(g.n());
    let res = solve_on_decomposition(
        g,
        d,
        &GatherInput::plain(w),
        |v: &ClusterView| {
            let rf = refine(&v.graph, eps_t, d_cap, ldd, derive_seed(seed, "ldd", v.index as u64));
            let verts = v.vertices();
            let mut replies = BTreeMap::new();
            let mut parts = Vec::new();
            for (i, p) in rf.pieces.iter().enumerate() {
                for &x in p {
                    replies.insert(verts[x], Message::new().with(i as u64, w));
                }
                parts.push(p.iter().map(|&x| verts[x]).collect::<Vec<_>>());
            }
            LocalSolution { output: (parts, rf.carved), replies }
        },
        seed,
        cfg,
    );
    let mut parts = Vec::new();
    let mut carved = 0;
    for c in &res.per_cluster {
        match &c.output {
            Some((p, cv)) => {
                carved += usize::from(*cv);
                parts.extend(p.iter().cloned());
            }
            None => parts.extend(c.vertices.iter().map(|&v| vec![v])),
        }
    }
    let parts = flatten_parts(parts);
    let mut label = vec![usize::MAX; g.n()];
    for (i, p) in parts.iter().enumerate() {
        for &v in p {
            label[v] = i;
        }
    }
    let cut = g.edges().iter().filter(|&&(u, v)| label[u] != label[v]).count();
    let d_achieved = parts.iter().map(|p| piece_diameter(g, p)).max().unwrap_or(0);
    let mut log = RoundLog::new();
    log.absorb(res.round_log);
    let mut report = AppReport::new("ldd", Solution::Partition(parts), cut as u64, log);
    report.failures = res.failures;
    report.metrics.insert("cut_edges".into(), cut as f64);
    report.metrics.insert("cut_fraction".into(), if g.m() == 0 { 0.0 } else { cut as f64 / g.m() as f64 });
    report.metrics.insert("d_achieved".into(), d_achieved as f64);
    report.metrics.insert("d_cap".into(), d_cap as f64);
    report.metrics.insert("diameter_constant".into(), d_achieved as f64 * epsilon);
    report.metrics.insert("carved_clusters".into(), carved as f64);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{generate, Family};

    fn run(g: &Graph, eps: f64, seed: u64) -> AppReport {
        low_diameter_decomposition(g, eps, seed, &LddConfig::default(), &FrameworkConfig::default()).unwrap()
    }

    #[test]
    fn diameter_matches_brute_force() {
        for seed in 0..20 {
            let g = generate(&Family::RandomPlanar { n: 30 }, seed).unwrap();
            for c in g.components() {
                let all = vec![true; g.n()];
                let mut dist = Vec::new();
                let brute = c
                    .iter()
                    .map(|&s| {
                        bfs(&g, &all, s, &mut dist);
                        c.iter().map(|&v| dist[v]).max().unwrap()
                    })
                    .max()
                    .unwrap();
                assert_eq!(piece_diameter(&g, &c), brute);
            }
        }
        let cyc = generate(&Family::Cycle { n: 9 }, 0).unwrap();
        assert_eq!(piece_diameter(&cyc, &(0..9).collect::<Vec<_>>()), 4);
    }

    #[test]
    fn single_vertex() {
        let r = run(&Graph::empty(1), 0.2, 0);
        assert_eq!(r.solution, Solution::Partition(vec![vec![0]]));
        assert_eq!(r.metrics["d_achieved"], 0.0);
    }

    #[test]
    fn cycle_arcs() {
        let g = generate(&Family::Cycle { n: 100 }, 0).unwrap();
        let r = run(&g, 0.2, 1);
        assert!(r.objective <= 20);
        assert!(r.metrics["d_achieved"] <= r.metrics["d_cap"]);
    }

    #[test]
    fn grid_cut_fraction() {
        let g = generate(&Family::Grid { w: 30, h: 30 }, 0).unwrap();
        for seed in 0..4 {
            let r = run(&g, 0.25, seed);
            assert!(r.metrics["cut_fraction"] <= 0.25);
            assert!(r.metrics["d_achieved"] <= r.metrics["d_cap"]);
        }
    }

    #[test]
    fn carving_splits_long_paths() {
        let g = generate(&Family::Path { n: 400 }, 0).unwrap();
        let rf = refine(&g, 0.1, 60, &LddConfig { k_h: 0 }, 0);
        assert!(rf.carved);
        assert!(rf.pieces.iter().all(|p| piece_diameter(&g, p) <= 60));
        assert!(rf.cut <= 40);
    }
}
