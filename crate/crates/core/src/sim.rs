//! Synchronous round engine with per-edge bit budgets.

use std::collections::BTreeMap;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

use crate::graph::{ceil_log2, Graph};

pub const DEFAULT_C_MSG: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("message of {bits} bits on edge {from}->{to} in round {round} exceeds budget {budget}")]
    MessageTooLarge { from: usize, to: usize, round: u64, bits: usize, budget: usize },
    #[error("round cap {cap} exceeded")]
    RoundCapExceeded { cap: u64 },
    #[error("node {from} addressed non-neighbor {to} in round {round}")]
    NotANeighbor { from: usize, to: usize, round: u64 },
}

/// Per-edge, per-round message budget in bits: `c_msg * ceil(log2(n + 1))`.
pub fn message_budget(n: usize, c_msg: usize) -> usize {
    c_msg * ceil_log2(n as u64 + 1).max(1)
}

/// Bit string with explicit length.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Message {
    words: SmallVec<[u64; 2]>,
    bits: usize,
}

impl Message {
    pub fn new() -> Message {
        Message::default()
    }

    pub fn bit_length(&self) -> usize {
        self.bits
    }

    /// Append the low `width` bits of `value` (width ≤ 64).
    pub fn push(&mut self, value: u64, width: usize) -> &mut Message {
        assert!(width <= 64);
        assert!(width == 64 || value >> width == 0, "value {} does not fit in {} bits", value, width);
        if width == 0 {
            return self;
        }
        let off = self.bits % 64;
        if off == 0 {
            self.words.push(value);
        } else {
            *self.words.last_mut().unwrap() |= value << off;
            if off + width > 64 {
                self.words.push(value >> (64 - off));
            }
        }
        self.bits += width;
        self
    }

    pub fn with(mut self, value: u64, width: usize) -> Message {
        self.push(value, width);
        self
    }

    pub fn reader(&self) -> MessageReader<'_> {
        MessageReader { msg: self, pos: 0 }
    }
}

pub struct MessageReader<'a> {
    msg: &'a Message,
    pos: usize,
}

impl MessageReader<'_> {
    pub fn read(&mut self, width: usize) -> u64 {
        assert!(width <= 64 && self.pos + width <= self.msg.bits, "read past end of message");
        if width == 0 {
            return 0;
        }
        let (w, off) = (self.pos / 64, self.pos % 64);
        let mut v = self.msg.words[w] >> off;
        if off + width > 64 {
            v |= self.msg.words[w + 1] << (64 - off);
        }
        self.pos += width;
        if width == 64 {
            v
        } else {
            v & ((1u64 << width) - 1)
        }
    }

    pub fn remaining(&self) -> usize {
        self.msg.bits - self.pos
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoundKind {
    True,
    Synthetic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseEntry {
    pub label: String,
    pub rounds: u64,
    pub kind: RoundKind,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundLog {
    pub true_rounds: u64,
    pub synthetic_rounds: u64,
    pub max_edge_bits: usize,
    pub phases: Vec<PhaseEntry>,
}

impl RoundLog {
    pub fn new() -> RoundLog {
        RoundLog::default()
    }

    pub fn charge_synthetic(&mut self, phase: &str, rounds: u64) {
        self.synthetic_rounds = self.synthetic_rounds.saturating_add(rounds);
        self.phases.push(PhaseEntry { label: phase.to_string(), rounds, kind: RoundKind::Synthetic });
    }

    pub fn record_true(&mut self, phase: &str, rounds: u64, max_edge_bits: usize) {
        self.true_rounds = self.true_rounds.saturating_add(rounds);
        self.max_edge_bits = self.max_edge_bits.max(max_edge_bits);
        self.phases.push(PhaseEntry { label: phase.to_string(), rounds, kind: RoundKind::True });
    }

    /// Sequential composition: rounds add up.
    pub fn absorb(&mut self, other: RoundLog) {
        self.true_rounds = self.true_rounds.saturating_add(other.true_rounds);
        self.synthetic_rounds = self.synthetic_rounds.saturating_add(other.synthetic_rounds);
        self.max_edge_bits = self.max_edge_bits.max(other.max_edge_bits);
        self.phases.extend(other.phases);
    }

    /// Parallel composition (independent clusters): each kind costs the
    /// maximum over the branches, recorded as one phase per kind.
    pub fn absorb_parallel(&mut self, label: &str, branches: Vec<RoundLog>) {
        let t = branches.iter().map(|b| b.true_rounds).max().unwrap_or(0);
        let s = branches.iter().map(|b| b.synthetic_rounds).max().unwrap_or(0);
        let bits = branches.iter().map(|b| b.max_edge_bits).max().unwrap_or(0);
        if t > 0 || bits > 0 {
            self.record_true(label, t, bits);
        }
        if s > 0 {
            self.charge_synthetic(label, s);
        }
    }

    /// Counts saturate at `u64::MAX`.
    pub fn total(&self) -> u64 {
        self.true_rounds.saturating_add(self.synthetic_rounds)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("round log serializes")
    }
}

/// Functional form of [`RoundLog::charge_synthetic`].
pub fn charge_synthetic(mut log: RoundLog, phase: &str, rounds: u64) -> RoundLog {
    log.charge_synthetic(phase, rounds);
    log
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Random stream for `node` in `round`, independent of evaluation order.
pub fn node_rng(seed: u64, node: usize, round: u64) -> ChaCha8Rng {
    let k = splitmix(splitmix(splitmix(seed) ^ node as u64) ^ round);
    ChaCha8Rng::seed_from_u64(k)
}

/// [`node_rng`] built on first use.
pub struct NodeRng {
    key: (u64, usize, u64),
    rng: Option<ChaCha8Rng>,
}

impl NodeRng {
    pub fn new(seed: u64, node: usize, round: u64) -> NodeRng {
        NodeRng { key: (seed, node, round), rng: None }
    }

    fn inner(&mut self) -> &mut ChaCha8Rng {
        let (s, v, r) = self.key;
        self.rng.get_or_insert_with(|| node_rng(s, v, r))
    }
}

impl RngCore for NodeRng {
    fn next_u32(&mut self) -> u32 {
        self.inner().next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.inner().next_u64()
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner().fill_bytes(dest)
    }
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.inner().try_fill_bytes(dest)
    }
}

/// Derive a sub-seed for a labelled stage.
pub fn derive_seed(seed: u64, label: &str, index: u64) -> u64 {
    let mut h = splitmix(seed ^ index.rotate_left(17));
    for b in label.bytes() {
        h = splitmix(h ^ b as u64);
    }
    h
}

/// The communication graph a protocol runs on: a vertex subset of a host
/// graph with the edges between members. Budgets use the host's `n`.
#[derive(Debug, Clone)]
pub struct Network {
    pub n_global: usize,
    pub members: Vec<usize>,
    neighbors: BTreeMap<usize, Vec<usize>>,
}

impl Network {
    pub fn whole(g: &Graph) -> Network {
        Network::induced(g, &(0..g.n()).collect::<Vec<_>>())
    }

    pub fn induced(g: &Graph, members: &[usize]) -> Network {
        let mut inside = vec![false; g.n()];
        for &v in members {
            inside[v] = true;
        }
        Network::filtered(g, members, |u, v, _| inside[u] && inside[v])
    }

    /// Members plus the host edges accepted by `keep(u, v, edge_id)`.
    pub fn filtered(g: &Graph, members: &[usize], keep: impl Fn(usize, usize, usize) -> bool) -> Network {
        let mut sorted = members.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let mut neighbors = BTreeMap::new();
        for &v in &sorted {
            let l: Vec<usize> = g
                .neighbors(v)
                .iter()
                .filter(|&&(u, e)| sorted.binary_search(&u).is_ok() && keep(v, u, e))
                .map(|&(u, _)| u)
                .collect();
            neighbors.insert(v, l);
        }
        Network { n_global: g.n(), members: sorted, neighbors }
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[&v]
    }
}

pub struct NodeView<'a> {
    pub id: usize,
    pub neighbors: &'a [usize],
    pub n: usize,
    pub budget: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Envelope {
    pub peer: usize,
    pub msg: Message,
}

/// A node-local program. `step` reads what arrived at the end of the previous
/// round and pushes what to send this round onto `out`.
pub trait Protocol {
    type State;
    type Output;
    fn init(&self, node: &NodeView) -> Self::State;
    fn step(
        &self,
        node: &NodeView,
        state: &mut Self::State,
        inbox: &[Envelope],
        rng: &mut NodeRng,
        out: &mut Vec<Envelope>,
    );
    fn halted(&self, node: &NodeView, state: &Self::State) -> bool;
    fn output(&self, node: &NodeView, state: Self::State) -> Self::Output;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub c_msg: usize,
    pub record_transcript: bool,
}

impl Default for SimConfig {
    fn default() -> SimConfig {
        SimConfig { c_msg: DEFAULT_C_MSG, record_transcript: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub round: u64,
    pub from: usize,
    pub to: usize,
    pub bits: usize,
}

#[derive(Debug)]
pub struct RunResult<O> {
    /// Outputs in member order.
    pub outputs: Vec<(usize, O)>,
    pub log: RoundLog,
    pub transcript: Vec<TranscriptEntry>,
}

/// Runs until every node is halted with an empty inbox. A final pass that
/// only absorbs the last deliveries (nobody active, nothing sent) is local
/// computation and is not counted as a round.
pub fn run_protocol<P: Protocol>(
    net: &Network,
    p: &P,
    seed: u64,
    round_cap: u64,
    cfg: &SimConfig,
    label: &str,
) -> Result<RunResult<P::Output>, SimError> {
    let budget = message_budget(net.n_global, cfg.c_msg);
    let views: Vec<NodeView> =
        net.members.iter().map(|&v| NodeView { id: v, neighbors: net.neighbors(v), n: net.n_global, budget }).collect();
    let mut index = vec![usize::MAX; net.n_global];
    for (i, &v) in net.members.iter().enumerate() {
        index[v] = i;
    }
    let mut states: Vec<P::State> = views.iter().map(|nv| p.init(nv)).collect();
    let mut inbox: Vec<Vec<Envelope>> = vec![Vec::new(); views.len()];
    let mut next: Vec<Vec<Envelope>> = vec![Vec::new(); views.len()];
    let mut transcript = Vec::new();
    let mut max_bits = 0usize;
    let mut iterations: u64 = 0;
    let mut last_was_absorb = false;
    let mut load: Vec<(usize, usize)> = Vec::new();
    // Halting only changes when a node steps, so only woken nodes are checked.
    let mut awake: Vec<usize> = (0..views.len()).filter(|&i| !p.halted(&views[i], &states[i])).collect();
    let mut mail: Vec<usize> = Vec::new();
    let mut flagged = vec![false; views.len()];
    let mut to_step: Vec<usize> = Vec::new();
    let mut outbox: Vec<Envelope> = Vec::new();
    loop {
        to_step.clear();
        to_step.extend_from_slice(&awake);
        to_step.extend_from_slice(&mail);
        to_step.sort_unstable();
        to_step.dedup();
        if to_step.is_empty() {
            break;
        }
        if iterations >= round_cap {
            return Err(SimError::RoundCapExceeded { cap: round_cap });
        }
        let any_active = !awake.is_empty();
        for &i in &mail {
            flagged[i] = false;
        }
        mail.clear();
        awake.clear();
        iterations += 1;
        let round = iterations;
        let mut sent = false;
        for &i in &to_step {
            let mut rng = NodeRng::new(seed, views[i].id, round);
            let msgs = std::mem::take(&mut inbox[i]);
            outbox.clear();
            p.step(&views[i], &mut states[i], &msgs, &mut rng, &mut outbox);
            inbox[i] = msgs;
            inbox[i].clear();
            if !p.halted(&views[i], &states[i]) {
                awake.push(i);
            }
            let from = views[i].id;
            load.clear();
            for env in outbox.drain(..) {
                if views[i].neighbors.binary_search(&env.peer).is_err() {
                    return Err(SimError::NotANeighbor { from, to: env.peer, round });
                }
                let bits = env.msg.bit_length();
                let total = match load.iter_mut().find(|(p, _)| *p == env.peer) {
                    Some(l) => {
                        l.1 += bits;
                        l.1
                    }
                    None => {
                        load.push((env.peer, bits));
                        bits
                    }
                };
                if total > budget {
                    return Err(SimError::MessageTooLarge { from, to: env.peer, round, bits: total, budget });
                }
                max_bits = max_bits.max(total);
                if cfg.record_transcript {
                    transcript.push(TranscriptEntry { round, from, to: env.peer, bits });
                }
                sent = true;
                let j = index[env.peer];
                if !flagged[j] {
                    flagged[j] = true;
                    mail.push(j);
                }
                next[j].push(Envelope { peer: from, msg: env.msg });
            }
        }
        last_was_absorb = !sent && !any_active;
        std::mem::swap(&mut inbox, &mut next);
    }
    let rounds = iterations - u64::from(last_was_absorb && iterations > 0);
    let mut log = RoundLog::new();
    log.record_true(label, rounds, max_bits);
    let outputs = views.iter().zip(states).map(|(nv, s)| (nv.id, p.output(nv, s))).collect();
    Ok(RunResult { outputs, log, transcript })
}
