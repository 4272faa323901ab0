//! The four steps of an iteration, the `Cut` procedure and the inner/outer
//! labelling.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::Rng;

use congest_core::expander::{decompose_members, Decomposition, RegistryKey, NO_CLUSTER};
use congest_core::graph::ceil_log2;
use congest_core::routing::exchange;
use congest_core::sim::{
    derive_seed, node_rng, run_protocol, Envelope, Message, Network, NodeRng, NodeView, Protocol, SimConfig,
};
use congest_core::Graph;

use crate::forest::Child;
use crate::run::{Diagnostics, MwmOptions, RoutingChoice};
use crate::search::{has_augmenting_path, maximal_augmenting_paths, shrink_blossoms, AugPath, LChild, LocalGraph};
use crate::state::MwmState;
use crate::MwmError;

/// G_elig on the same vertex set, carrying the host's density bound.
pub fn eligible_subgraph(g: &Graph, elig: &[bool]) -> Graph {
    let edges: Vec<(usize, usize)> = (0..g.m()).filter(|&e| elig[e]).map(|e| g.edge(e)).collect();
    let h = Graph::from_edges(g.n(), &edges).expect("subgraph of a simple graph");
    match g.density_bound() {
        Some(c) => h.with_density_bound(c),
        None => h,
    }
}

/// Base vertex of each contracted node with its vertices.
pub fn node_members(s: &MwmState, rep: &[usize]) -> BTreeMap<usize, Vec<usize>> {
    let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in 0..s.n() {
        out.entry(rep[v]).or_default().push(v);
    }
    out
}

pub fn register_decomposition(s: &mut MwmState, key: &RegistryKey, d: &Decomposition) {
    s.registry.register(key.clone(), d);
    s.phis.insert(key.clone(), d.phi_target);
}

/// Gathers each set at a leader of its registered cluster and replies.
pub fn exchange_sets(
    s: &mut MwmState,
    sets: Vec<(Vec<usize>, RegistryKey)>,
    seed: u64,
    opts: &MwmOptions,
) -> Result<(), MwmError> {
    let mut by_key: BTreeMap<RegistryKey, Vec<(Vec<usize>, RegistryKey)>> = BTreeMap::new();
    for (set, key) in sets {
        if !set.is_empty() {
            by_key.entry(key.clone()).or_default().push((set, key));
        }
    }
    let n = s.n();
    for (key, list) in by_key {
        let phi = s.phis[&key];
        match opts.routing_mode {
            RoutingChoice::Simulated => {
                let t = exchange(&s.g, &list, &mut s.registry, phi, &opts.routing, seed)?;
                s.round_log.absorb(t.log);
            }
            RoutingChoice::Charged => {
                let p = opts.routing.params(phi, n);
                let charge = p.walk_budget.saturating_mul(2 * ceil_log2(n as u64).max(1) as u64);
                s.round_log.charge_synthetic(&format!("exchange-charged:{}", key.label), charge);
            }
        }
    }
    Ok(())
}

fn root_sets(s: &MwmState) -> Vec<(Vec<usize>, RegistryKey)> {
    s.omega.roots().into_iter().map(|b| (s.omega.members(b), s.omega.blossoms[b].key.clone())).collect()
}

fn cluster_sets(d: &Decomposition, key: &RegistryKey) -> Vec<(Vec<usize>, RegistryKey)> {
    d.clusters.iter().map(|c| (c.clone(), key.clone())).collect()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CutOutcome {
    pub crossing: usize,
    pub lowered: usize,
    pub raised: usize,
    pub frozen: Vec<usize>,
}

/// Makes every eligible edge between two clusters of `d` ineligible, moving
/// cuts through root blossoms onto the base's matched edge or freezing a
/// free base.
pub fn cut_procedure(
    s: &mut MwmState,
    d: &Decomposition,
    seed: u64,
    opts: &MwmOptions,
) -> Result<CutOutcome, MwmError> {
    let elig = s.eligibility();
    let crossing: Vec<usize> = (0..s.g.m())
        .filter(|&e| {
            let (u, v) = s.g.edge(e);
            let (a, b) = (d.membership[u], d.membership[v]);
            elig[e] && a != NO_CLUSTER && b != NO_CLUSTER && a != b
        })
        .collect();
    let mut out = CutOutcome { crossing: crossing.len(), ..CutOutcome::default() };
    if crossing.is_empty() {
        return Ok(out);
    }
    let sets = root_sets(s);
    exchange_sets(s, sets, derive_seed(seed, "cut", 0), opts)?;
    let mut h_edges = BTreeSet::new();
    let mut h_free = BTreeSet::new();
    for e in crossing {
        let (u, v) = s.g.edge(e);
        match (s.omega.root_of(u), s.omega.root_of(v)) {
            (Some(a), Some(b)) if a == b => {
                let base = s.omega.base(Child::Blossom(a));
                if let Some(m) = s.mate[base] {
                    h_edges.insert(m);
                } else if !s.frozen[base] {
                    h_free.insert(base);
                }
            }
            _ => {
                h_edges.insert(e);
            }
        }
    }
    let delta = s.delta();
    for e in h_edges {
        if !elig[e] {
            continue;
        }
        if s.is_matched(e) {
            s.delta_w[e] += delta;
            out.raised += 1;
        } else {
            s.delta_w[e] -= delta;
            out.lowered += 1;
        }
    }
    for f in h_free {
        s.frozen[f] = true;
        out.frozen.push(f);
    }
    Ok(out)
}

/// Randomized maximal matching: proposers pick a random active neighbour,
/// acceptors take the smallest proposal, matched pairs announce themselves.
struct LubyMatching;

#[derive(Default)]
struct LubyState {
    round: u64,
    active: BTreeSet<usize>,
    proposed: Option<usize>,
    mate: Option<usize>,
    done: bool,
}

const PROPOSE: u64 = 1;
const ACCEPT: u64 = 2;
const MATCHED: u64 = 3;

impl Protocol for LubyMatching {
    type State = LubyState;
    type Output = Option<usize>;
    fn init(&self, node: &NodeView) -> LubyState {
        LubyState { active: node.neighbors.iter().copied().collect(), ..LubyState::default() }
    }
    fn step(&self, _: &NodeView, s: &mut LubyState, inbox: &[Envelope], rng: &mut NodeRng, out: &mut Vec<Envelope>) {
        if s.done {
            return;
        }
        let phase = s.round % 3;
        s.round += 1;
        let tell = |peer: usize, kind: u64| Envelope { peer, msg: Message::new().with(kind, 2) };
        match phase {
            0 => {
                for env in inbox {
                    if env.msg.reader().read(2) == MATCHED {
                        s.active.remove(&env.peer);
                    }
                }
                s.proposed = None;
                if s.active.is_empty() {
                    s.done = true;
                } else if rng.gen_bool(0.5) {
                    let k = rng.gen_range(0..s.active.len());
                    let p = *s.active.iter().nth(k).unwrap();
                    s.proposed = Some(p);
                    out.push(tell(p, PROPOSE));
                }
            }
            1 => {
                if s.proposed.is_none() {
                    let best = inbox.iter().filter(|e| e.msg.reader().read(2) == PROPOSE).map(|e| e.peer).min();
                    if let Some(p) = best {
                        s.mate = Some(p);
                        out.push(tell(p, ACCEPT));
                    }
                }
            }
            _ => {
                if let Some(p) = s.proposed {
                    if inbox.iter().any(|e| e.peer == p && e.msg.reader().read(2) == ACCEPT) {
                        s.mate = Some(p);
                    }
                }
                if let Some(m) = s.mate {
                    for &peer in &s.active {
                        if peer != m {
                            out.push(tell(peer, MATCHED));
                        }
                    }
                    s.done = true;
                }
            }
        }
    }
    fn halted(&self, _: &NodeView, s: &LubyState) -> bool {
        s.done
    }
    fn output(&self, _: &NodeView, s: LubyState) -> Option<usize> {
        s.mate
    }
}

/// Keeps the nodes of `nodes` that can lie on an alternating path: not
/// frozen, and unmatched or matched along an eligible edge to a kept node.
fn build_local(
    s: &MwmState,
    elig: &[bool],
    rep: &[usize],
    nodes: &[usize],
    arcs: &[(usize, usize, usize, bool)],
) -> LocalGraph {
    let inset: BTreeSet<usize> = nodes.iter().copied().collect();
    let kept: Vec<usize> = nodes
        .iter()
        .copied()
        .filter(|&b| {
            !s.frozen[b]
                && match s.mate[b] {
                    None => true,
                    Some(e) => elig[e] && inset.contains(&rep[s.mate_vertex(b).unwrap()]),
                }
        })
        .collect();
    LocalGraph::build(kept, rep, arcs)
}

fn eligible_arcs(s: &MwmState, elig: &[bool]) -> Vec<(usize, usize, usize, bool)> {
    (0..s.g.m())
        .filter(|&e| elig[e])
        .map(|e| {
            let (u, v) = s.g.edge(e);
            (u, v, e, s.is_matched(e))
        })
        .collect()
}

/// G_elig/Ω as one local graph, for checks and the exact skip test.
pub fn global_local_graph(s: &MwmState) -> LocalGraph {
    let elig = s.eligibility();
    let rep = s.reps();
    let nodes: Vec<usize> = node_members(s, &rep).into_keys().collect();
    build_local(s, &elig, &rep, &nodes, &eligible_arcs(s, &elig))
}

/// Flips a contracted augmenting path in G, rotating blossoms on the way.
fn apply_path(s: &mut MwmState, path: &AugPath) {
    let scale = s.scale;
    for &(x, y, e) in &path.new_arcs {
        for end in [x, y] {
            if let Some(b) = s.omega.root_of(end) {
                let MwmState { omega, mate, g, .. } = s;
                omega.augment_blossom(b, end, &mut |a, c, f| {
                    debug_assert_eq!(g.edge_id(a, c), Some(f));
                    mate[a] = Some(f);
                    mate[c] = Some(f);
                });
            }
        }
        s.set_match(x, y, e);
        s.type_of[e] = Some(scale);
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AugmentOutcome {
    pub luby_matched: usize,
    pub low_free: usize,
    pub paths: usize,
    pub cut: CutOutcome,
}

/// Step 1: maximal matching on free singletons, decomposition of the
/// eligible graph without low-degree free vertices, `Cut`, then repeated
/// random attachment of low-degree free vertices and per-cluster maximal
/// augmenting path sets.
pub fn augmentation_step(
    s: &mut MwmState,
    seed: u64,
    opts: &MwmOptions,
    diag: &mut Diagnostics,
) -> Result<AugmentOutcome, MwmError> {
    let n = s.n();
    let scale = s.scale;
    let mut out = AugmentOutcome::default();

    let elig = s.eligibility();
    let fs = s.free_singletons();
    if fs.iter().any(|&f| s.g.neighbors(f).iter().any(|&(_, e)| elig[e])) {
        let net = Network::filtered(&s.g, &fs, |_, _, e| elig[e]);
        let cap = 3 * (64 + 8 * ceil_log2(n as u64).max(1) as u64);
        let sim = SimConfig { c_msg: opts.routing.c_msg, record_transcript: false };
        let res = run_protocol(&net, &LubyMatching, derive_seed(seed, "luby", 0), cap, &sim, "luby")?;
        s.round_log.absorb(res.log);
        for (v, m) in res.outputs {
            if let Some(u) = m {
                if v < u {
                    let e = s.g.edge_id(v, u).expect("protocol runs on edges");
                    s.set_match(v, u, e);
                    s.type_of[e] = Some(scale);
                    out.luby_matched += 1;
                }
            }
        }
    }

    let elig = s.eligibility();
    let fs = s.free_singletons();
    let elig_deg = |v: usize| s.g.neighbors(v).iter().filter(|&&(_, e)| elig[e]).count();
    let mut is_low = vec![false; n];
    for &f in &fs {
        if elig_deg(f) <= s.cfg.c_h {
            is_low[f] = true;
        }
    }
    let low: Vec<usize> = (0..n).filter(|&v| is_low[v]).collect();
    out.low_free = low.len();
    let members: Vec<usize> = (0..n).filter(|&v| !is_low[v]).collect();
    let key = RegistryKey::new("augment", scale, s.iteration);
    let d = decompose_members(
        &eligible_subgraph(&s.g, &elig),
        &members,
        s.cfg.eps_dd,
        derive_seed(seed, "decompose-augment", 0),
        &opts.decompose,
    )?;
    s.round_log.absorb(d.round_log.clone());
    register_decomposition(s, &key, &d);
    out.cut = cut_procedure(s, &d, seed, opts)?;
    diag.cut_edges += out.cut.crossing;
    diag.frozen_vertices += out.cut.frozen.len();

    let reps = s.cfg.repetitions(n);
    let mut t = 0usize;
    loop {
        let exhaustive = opts.exhaustive_loop && t >= reps;
        if t >= reps && !exhaustive {
            break;
        }
        let possible = has_augmenting_path(&global_local_graph(s));
        if exhaustive && (!possible || t >= reps + opts.exhaustive_cap) {
            break;
        }
        if exhaustive {
            diag.extra_repetitions += 1;
        }
        if !low.is_empty() {
            s.round_log.record_true("attach-free", 1, 0);
        }
        exchange_sets(s, cluster_sets(&d, &key), derive_seed(seed, "exchange-augment", t as u64), opts)?;
        if !possible {
            // Every repetition searches a subgraph of G_elig/Ω, so nothing
            // can be found; skipping keeps the random streams unchanged.
            diag.skipped_repetitions += 1;
            t += 1;
            continue;
        }
        let found = repetition(s, &d, &is_low, derive_seed(seed, "repetition", t as u64), diag);
        out.paths += found;
        t += 1;
    }
    if opts.checks {
        diag.no_aug_checks += 1;
        if has_augmenting_path(&global_local_graph(s)) {
            diag.no_aug_failures += 1;
        }
    }
    diag.paths_augmented += out.paths;
    Ok(out)
}

/// One repetition of step 1(d); returns the number of paths augmented.
fn repetition(s: &mut MwmState, d: &Decomposition, is_low: &[bool], seed: u64, diag: &mut Diagnostics) -> usize {
    let n = s.n();
    let elig = s.eligibility();
    let mut comp: Vec<usize> = d.membership.clone();
    let mut pick = vec![usize::MAX; n];
    for f in 0..n {
        if !is_low[f] || !s.is_open(f) {
            continue;
        }
        let nbrs: Vec<usize> = s.g.neighbors(f).iter().filter(|&&(_, e)| elig[e]).map(|&(u, _)| u).collect();
        if nbrs.is_empty() {
            continue;
        }
        let u = nbrs[node_rng(seed, f, 0).gen_range(0..nbrs.len())];
        pick[f] = u;
        comp[f] = if is_low[u] { NO_CLUSTER } else { d.membership[u] };
    }
    let rep = s.reps();
    let members = node_members(s, &rep);
    let mut by_comp: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (&b, vs) in &members {
        let c = comp[vs[0]];
        if c != NO_CLUSTER && vs.iter().all(|&v| comp[v] == c) {
            by_comp.entry(c).or_default().push(b);
        }
    }
    let mut arcs_by: BTreeMap<usize, Vec<(usize, usize, usize, bool)>> = BTreeMap::new();
    for e in 0..s.g.m() {
        if !elig[e] {
            continue;
        }
        let (u, v) = s.g.edge(e);
        if (is_low[u] && pick[u] != v) || (is_low[v] && pick[v] != u) {
            continue;
        }
        if comp[u] != NO_CLUSTER && comp[u] == comp[v] {
            arcs_by.entry(comp[u]).or_default().push((u, v, e, s.is_matched(e)));
        }
    }
    let mut paths = Vec::new();
    for (c, nodes) in &by_comp {
        let Some(arcs) = arcs_by.get(c) else { continue };
        let lg = build_local(s, &elig, &rep, nodes, arcs);
        if (0..lg.len()).filter(|&i| lg.is_free(i)).count() < 2 {
            continue;
        }
        paths.extend(maximal_augmenting_paths(&lg));
    }
    for p in &paths {
        apply_path(s, p);
    }
    for p in &paths {
        for &(_, _, e) in p.new_arcs.iter().chain(&p.old_arcs) {
            if s.eligible(e) {
                diag.aug_gone_violations += 1;
            }
        }
    }
    paths.len()
}

/// What the shrinking step hands to the labelling and dual steps.
#[derive(Debug, Clone)]
pub struct ShrinkContext {
    pub fprime: Vec<bool>,
    pub decomposition: Decomposition,
    pub key: RegistryKey,
    pub new_blossoms: Vec<usize>,
}

/// Step 2: decomposition without F̂′, `Cut`, then a maximal nested blossom
/// set per cluster, searched together with the adjacent F̂′ vertices.
pub fn blossom_shrinking_step(
    s: &mut MwmState,
    seed: u64,
    opts: &MwmOptions,
    diag: &mut Diagnostics,
) -> Result<ShrinkContext, MwmError> {
    let n = s.n();
    let scale = s.scale;
    let elig = s.eligibility();
    let mut in_fs = vec![false; n];
    for f in s.free_singletons() {
        in_fs[f] = true;
    }
    let free_deg: Vec<usize> =
        (0..n).map(|x| s.g.neighbors(x).iter().filter(|&&(u, e)| elig[e] && in_fs[u]).count()).collect();
    let fprime: Vec<bool> = (0..n)
        .map(|f| in_fs[f] && s.g.neighbors(f).iter().filter(|&&(_, e)| elig[e]).all(|&(x, _)| free_deg[x] >= 2))
        .collect();
    let members: Vec<usize> = (0..n).filter(|&v| !fprime[v]).collect();
    let key = RegistryKey::new("shrink", scale, s.iteration);
    let d = decompose_members(
        &eligible_subgraph(&s.g, &elig),
        &members,
        s.cfg.eps_dd,
        derive_seed(seed, "decompose-shrink", 0),
        &opts.decompose,
    )?;
    s.round_log.absorb(d.round_log.clone());
    register_decomposition(s, &key, &d);
    let cut = cut_procedure(s, &d, derive_seed(seed, "cut-shrink", 0), opts)?;
    diag.cut_edges += cut.crossing;
    diag.frozen_vertices += cut.frozen.len();
    if fprime.iter().any(|&f| f) {
        s.round_log.record_true("announce-free", 1, 0);
    }
    exchange_sets(s, cluster_sets(&d, &key), derive_seed(seed, "exchange-shrink", 0), opts)?;

    let elig = s.eligibility();
    let rep = s.reps();
    let members = node_members(s, &rep);
    let root_at: BTreeMap<usize, usize> =
        s.omega.roots().into_iter().map(|b| (s.omega.base(Child::Blossom(b)), b)).collect();
    let mut by_cluster: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (&b, vs) in &members {
        let c = d.membership[vs[0]];
        if c != NO_CLUSTER && vs.iter().all(|&v| d.membership[v] == c) {
            by_cluster.entry(c).or_default().push(b);
        }
    }
    let arcs = eligible_arcs(s, &elig);
    let mut searches = Vec::new();
    for (&c, nodes) in &by_cluster {
        let mut all: BTreeSet<usize> = nodes.iter().copied().collect();
        for &b in nodes {
            for &v in &members[&b] {
                for &(u, e) in s.g.neighbors(v) {
                    if elig[e] && fprime[u] {
                        all.insert(u);
                    }
                }
            }
        }
        let all: Vec<usize> = all.into_iter().collect();
        let local_arcs: Vec<_> = arcs
            .iter()
            .copied()
            .filter(|&(u, v, _, _)| all.binary_search(&rep[u]).is_ok() && all.binary_search(&rep[v]).is_ok())
            .collect();
        let lg = build_local(s, &elig, &rep, &all, &local_arcs);
        let forbidden: Vec<bool> = lg.nodes.iter().map(|&b| fprime[b]).collect();
        let res = shrink_blossoms(&lg, &forbidden);
        diag.unexpected_paths += res.unexpected_paths;
        diag.bad_free_vertex += res.forbidden_hits;
        searches.push((c, lg, res));
    }
    let mut new_blossoms = Vec::new();
    for (_, lg, res) in searches {
        let mut ids: Vec<usize> = Vec::new();
        for nb in &res.blossoms {
            let children = nb
                .children
                .iter()
                .map(|&c| match c {
                    LChild::Node(i) => {
                        let b = lg.nodes[i];
                        match root_at.get(&b) {
                            Some(&r) => Child::Blossom(r),
                            None => Child::Vertex(b),
                        }
                    }
                    LChild::New(j) => Child::Blossom(ids[j]),
                })
                .collect();
            for &(_, _, e) in &nb.edges {
                if !s.is_matched(e) {
                    s.type_of[e] = Some(scale);
                }
            }
            let id = s.omega.add(nb.name, children, nb.edges.clone(), key.clone());
            ids.push(id);
            new_blossoms.push(id);
        }
    }
    diag.blossoms_formed += new_blossoms.len();
    Ok(ShrinkContext { fprime, decomposition: d, key, new_blossoms })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labels {
    pub inner: Vec<bool>,
    pub outer: Vec<bool>,
}

const OUT: u8 = 1;
const IN: u8 = 2;

/// Alternating BFS over eligible edges of the contracted graph, restricted
/// to `allowed` nodes, from outer and inner seeds.
fn alternating_bfs(
    s: &MwmState,
    elig: &[bool],
    rep: &[usize],
    members: &BTreeMap<usize, Vec<usize>>,
    allowed: &dyn Fn(usize) -> bool,
    outer_seeds: &[usize],
    inner_seeds: &[usize],
) -> BTreeMap<usize, u8> {
    let mut label: BTreeMap<usize, u8> = BTreeMap::new();
    let mut q = VecDeque::new();
    for &b in outer_seeds {
        if label.insert(b, OUT).is_none() {
            q.push_back(b);
        }
    }
    let mate_node = |b: usize| -> Option<usize> {
        let e = s.mate[b]?;
        if !elig[e] {
            return None;
        }
        let m = rep[s.mate_vertex(b).unwrap()];
        allowed(m).then_some(m)
    };
    let mark_inner = |b: usize, label: &mut BTreeMap<usize, u8>, q: &mut VecDeque<usize>| {
        if label.contains_key(&b) {
            return;
        }
        label.insert(b, IN);
        if let Some(m) = mate_node(b) {
            if !label.contains_key(&m) {
                label.insert(m, OUT);
                q.push_back(m);
            }
        }
    };
    for &b in inner_seeds {
        mark_inner(b, &mut label, &mut q);
    }
    while let Some(b) = q.pop_front() {
        for &x in &members[&b] {
            for &(y, e) in s.g.neighbors(x) {
                let w = rep[y];
                if w == b || !elig[e] || s.is_matched(e) || !allowed(w) {
                    continue;
                }
                mark_inner(w, &mut label, &mut q);
            }
        }
    }
    label
}

fn expand(members: &BTreeMap<usize, Vec<usize>>, label: &BTreeMap<usize, u8>, n: usize) -> Labels {
    let mut inner = vec![false; n];
    let mut outer = vec![false; n];
    for (&b, &l) in label {
        for &v in &members[&b] {
            if l == IN {
                inner[v] = true;
            } else {
                outer[v] = true;
            }
        }
    }
    Labels { inner, outer }
}

/// Direct computation on G_elig/Ω: outer from every open free node, frozen
/// vertices counting as matched.
pub fn inner_outer_direct(s: &MwmState) -> (Labels, BTreeMap<usize, u8>) {
    let elig = s.eligibility();
    let rep = s.reps();
    let members = node_members(s, &rep);
    let seeds: Vec<usize> = members.keys().copied().filter(|&b| s.is_open(b)).collect();
    let label = alternating_bfs(s, &elig, &rep, &members, &|_| true, &seeds, &[]);
    (expand(&members, &label, s.n()), label)
}

/// The three-phase protocol: F̂′ marks, per-cluster labelling at leaders,
/// then lifting inner marks over root blossoms.
pub fn inner_outer_protocol(
    s: &mut MwmState,
    ctx: &ShrinkContext,
    seed: u64,
    opts: &MwmOptions,
) -> Result<Labels, MwmError> {
    let n = s.n();
    let elig = s.eligibility();
    let mut inner = vec![false; n];
    let mut outer = vec![false; n];
    let unmatched_nbrs = |v: usize| -> Vec<usize> {
        s.g.neighbors(v).iter().filter(|&&(_, e)| elig[e] && !s.is_matched(e)).map(|&(u, _)| u).collect()
    };
    for f in (0..n).filter(|&f| ctx.fprime[f]) {
        outer[f] = true;
        for u in unmatched_nbrs(f) {
            inner[u] = true;
        }
    }
    let rep = s.reps();
    let members = node_members(s, &rep);
    let d = &ctx.decomposition;
    let mut by_cluster: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for (&b, vs) in &members {
        let c = d.membership[vs[0]];
        if c != NO_CLUSTER && vs.iter().all(|&v| d.membership[v] == c) {
            by_cluster.entry(c).or_default().insert(b);
        }
    }
    let mut out_send = Vec::new();
    for nodes in by_cluster.values() {
        let outer_seeds: Vec<usize> = nodes.iter().copied().filter(|&b| s.is_open(b)).collect();
        let inner_seeds: Vec<usize> =
            nodes.iter().copied().filter(|&b| members[&b].iter().any(|&v| inner[v])).collect();
        let label = alternating_bfs(s, &elig, &rep, &members, &|b| nodes.contains(&b), &outer_seeds, &inner_seeds);
        let l = expand(&members, &label, n);
        for v in 0..n {
            inner[v] |= l.inner[v];
            if l.outer[v] {
                outer[v] = true;
                out_send.push(v);
            }
        }
    }
    for v in out_send {
        for u in unmatched_nbrs(v) {
            if rep[u] != rep[v] {
                inner[u] = true;
            }
        }
    }
    let sets = root_sets(s);
    exchange_sets(s, cluster_sets(d, &ctx.key), derive_seed(seed, "exchange-label", 0), opts)?;
    s.round_log.record_true("mark-inner", 2, 0);
    exchange_sets(s, sets, derive_seed(seed, "exchange-lift", 0), opts)?;
    for b in s.omega.roots() {
        let vs = s.omega.members(b);
        if vs.iter().any(|&v| inner[v]) {
            for v in vs {
                inner[v] = true;
            }
        }
    }
    for v in 0..n {
        if inner[v] {
            outer[v] = false;
        }
    }
    Ok(Labels { inner, outer })
}

/// Labels by the protocol; in test mode also checks them against the
/// direct computation and counts outer-outer eligible edges.
pub fn compute_inner_outer(
    s: &mut MwmState,
    ctx: &ShrinkContext,
    seed: u64,
    opts: &MwmOptions,
    diag: &mut Diagnostics,
) -> Result<Labels, MwmError> {
    let labels = inner_outer_protocol(s, ctx, seed, opts)?;
    if opts.checks {
        let (direct, node_label) = inner_outer_direct(s);
        if direct != labels {
            diag.label_disagreements += 1;
        }
        let rep = s.reps();
        for e in 0..s.g.m() {
            let (u, v) = s.g.edge(e);
            if rep[u] != rep[v]
                && s.eligible(e)
                && node_label.get(&rep[u]) == Some(&OUT)
                && node_label.get(&rep[v]) == Some(&OUT)
            {
                diag.outer_outer_violations += 1;
            }
        }
    }
    Ok(labels)
}

/// Step 3: τ and outer duals drop by δ/2, inner duals rise by δ/2, and root
/// blossoms wholly outer (inner) gain (lose) δ.
pub fn dual_adjustment_step(s: &mut MwmState, labels: &Labels, seed: u64, opts: &MwmOptions) -> Result<(), MwmError> {
    let delta = s.delta();
    s.tau -= delta / 2;
    for v in 0..s.n() {
        if labels.outer[v] {
            s.y[v] -= delta / 2;
        } else if labels.inner[v] {
            s.y[v] += delta / 2;
        }
    }
    let sets = root_sets(s);
    exchange_sets(s, sets, derive_seed(seed, "exchange-dual", 0), opts)?;
    for b in s.omega.roots() {
        let vs = s.omega.members(b);
        if vs.iter().all(|&v| labels.outer[v]) {
            s.omega.blossoms[b].z += delta;
        } else if vs.iter().all(|&v| labels.inner[v]) {
            if s.omega.blossoms[b].z < delta {
                return Err(MwmError::NegativeZ { blossom: b });
            }
            s.omega.blossoms[b].z -= delta;
        }
    }
    Ok(())
}

/// Step 4: dissolve zero-z root blossoms until none is left, then drop the
/// dummies.
pub fn dissolution_step(s: &mut MwmState, seed: u64, opts: &MwmOptions) -> Result<usize, MwmError> {
    let sets = root_sets(s);
    exchange_sets(s, sets, derive_seed(seed, "exchange-dissolve", 0), opts)?;
    let mut dissolved = 0;
    loop {
        let zero: Vec<usize> = s.omega.roots().into_iter().filter(|&b| s.omega.blossoms[b].z == 0).collect();
        if zero.is_empty() {
            break;
        }
        for b in zero {
            s.omega.dissolve(b);
            dissolved += 1;
        }
    }
    s.frozen.iter_mut().for_each(|f| *f = false);
    Ok(dissolved)
}

/// Drops registry entries no live blossom refers to.
pub fn prune_registry(s: &mut MwmState) {
    let live: BTreeSet<RegistryKey> = s.omega.alive().into_iter().map(|b| s.omega.blossoms[b].key.clone()).collect();
    s.registry.entries.retain(|k, _| live.contains(k));
    s.phis.retain(|k, _| live.contains(k));
}
