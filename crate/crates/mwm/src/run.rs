use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use congest_core::apps::{AppReport, Solution};
use congest_core::expander::DecomposeConfig;
use congest_core::routing::RoutingConfig;
use congest_core::sim::{derive_seed, PhaseEntry, RoundLog};
use congest_core::Graph;

use crate::rcs::{check_cycles, check_rcs, check_reconstruction};
use crate::state::{init_state, MwmState};
use crate::steps::{
    augmentation_step, blossom_shrinking_step, compute_inner_outer, dissolution_step, dual_adjustment_step,
    prune_registry,
};
use crate::MwmError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoutingChoice {
    /// Every exchange runs the random-walk gathering in the simulator.
    Simulated,
    /// Exchanges are charged their round bound without being simulated.
    Charged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MwmOptions {
    pub k_iter: usize,
    /// Test mode: invariant checks after every iteration.
    pub checks: bool,
    /// Keep repeating step 1(d) until no augmenting path is left.
    pub exhaustive_loop: bool,
    pub exhaustive_cap: usize,
    pub routing_mode: RoutingChoice,
    pub routing: RoutingConfig,
    pub decompose: DecomposeConfig,
    pub trace: bool,
    /// Exact ŵ(M*) for the free-dual and weight-change checks.
    pub oracle: Option<u64>,
    pub reconstruct_samples: usize,
    /// Overrides the density constant C_H taken from the graph.
    pub c_h: Option<usize>,
}

impl Default for MwmOptions {
    fn default() -> MwmOptions {
        MwmOptions {
            k_iter: 2,
            checks: false,
            exhaustive_loop: false,
            exhaustive_cap: 64,
            routing_mode: RoutingChoice::Simulated,
            routing: RoutingConfig::default(),
            decompose: DecomposeConfig::default(),
            trace: false,
            oracle: None,
            reconstruct_samples: 4,
            c_h: None,
        }
    }
}

impl MwmOptions {
    pub fn test_mode() -> MwmOptions {
        MwmOptions { checks: true, ..MwmOptions::default() }
    }
}

/// Counters filled by the steps and the test-mode checks.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub iterations: Vec<u64>,
    pub cut_edges: usize,
    pub frozen_vertices: usize,
    pub paths_augmented: usize,
    pub blossoms_formed: usize,
    pub skipped_repetitions: usize,
    pub extra_repetitions: usize,
    pub aug_gone_violations: usize,
    pub no_aug_checks: usize,
    pub no_aug_failures: usize,
    pub unexpected_paths: usize,
    pub bad_free_vertex: usize,
    pub outer_outer_violations: usize,
    pub label_disagreements: usize,
    pub rcs_checks: usize,
    pub rcs_hard_violations: usize,
    pub free_dual_failures: usize,
    pub weight_change_failures: usize,
    pub type_floor_violations: usize,
    pub tau_floor_violations: usize,
    pub reconstruct_failures: usize,
    pub cycle_failures: usize,
    pub tau_schedule_errors: usize,
    pub messages: Vec<String>,
}

impl Diagnostics {
    /// Violations of the deterministic assertions.
    pub fn hard_violations(&self) -> usize {
        self.aug_gone_violations
            + self.bad_free_vertex
            + self.outer_outer_violations
            + self.label_disagreements
            + self.rcs_hard_violations
            + self.type_floor_violations
            + self.tau_floor_violations
            + self.reconstruct_failures
            + self.cycle_failures
            + self.tau_schedule_errors
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub scale: u32,
    pub iteration: u32,
    pub matched: usize,
    pub weight: u64,
    pub sum_abs_dw: f64,
    pub tau: f64,
    pub rcs: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MwmOutcome {
    pub report: AppReport,
    pub diagnostics: Diagnostics,
    pub trace: Vec<TraceRecord>,
}

pub fn run_mwm(g: &Graph, epsilon: f64, seed: u64) -> Result<AppReport, MwmError> {
    run_mwm_with(g, epsilon, seed, &MwmOptions::default()).map(|o| o.report)
}

pub fn run_mwm_with(g: &Graph, epsilon: f64, seed: u64, opts: &MwmOptions) -> Result<MwmOutcome, MwmError> {
    let mut s = init_state(g, epsilon, opts.k_iter)?;
    if let Some(c) = opts.c_h {
        s.cfg = s.cfg.clone().with_c_h(c);
    }
    let mut diag = Diagnostics::default();
    let mut trace = Vec::new();
    for i in 0..=s.cfg.l {
        run_scale(&mut s, i, seed, opts, &mut diag, &mut trace)?;
    }
    let edges: Vec<(usize, usize)> = s.matching().into_iter().map(|e| s.g.edge(e)).collect();
    let objective = s.matching_weight();
    let mut report = AppReport::new("mwm", Solution::Edges(edges), objective, s.round_log.clone());
    if let Some(opt) = opts.oracle {
        report = report.with_oracle(opt);
    }
    let m = &mut report.metrics;
    m.insert("epsilon".into(), epsilon);
    m.insert("eps_prime".into(), 0.5f64.powi(s.cfg.eps_prime_exp as i32));
    m.insert("eps_dd".into(), s.cfg.eps_dd);
    m.insert("scales".into(), f64::from(s.cfg.l + 1));
    m.insert("iterations".into(), diag.iterations.iter().sum::<u64>() as f64);
    m.insert("paths_augmented".into(), diag.paths_augmented as f64);
    m.insert("blossoms_formed".into(), diag.blossoms_formed as f64);
    m.insert("cut_edges".into(), diag.cut_edges as f64);
    m.insert("sum_abs_delta_w".into(), s.cfg.to_f64(s.sum_abs_delta_w()));
    Ok(MwmOutcome { report, diagnostics: diag, trace })
}

/// Iterates scale `i` until τ reaches its end value, then applies the
/// end-of-scale raise of y and τ.
pub fn run_scale(
    s: &mut MwmState,
    i: u32,
    seed: u64,
    opts: &MwmOptions,
    diag: &mut Diagnostics,
    trace: &mut Vec<TraceRecord>,
) -> Result<(), MwmError> {
    s.scale = i;
    s.iteration = 0;
    let end = s.cfg.tau_end(i);
    let guard = s.cfg.iteration_guard();
    let mut count = 0u64;
    while s.tau > end {
        if count >= guard {
            return Err(MwmError::IterationOverflow { scale: i, guard });
        }
        let it_seed = derive_seed(seed, "iteration", (u64::from(i) << 32) | u64::from(s.iteration));
        iteration(s, it_seed, opts, diag)?;
        s.iteration += 1;
        count += 1;
        if opts.checks {
            run_checks(s, it_seed, opts, diag);
        }
        if opts.trace {
            trace.push(TraceRecord {
                scale: i,
                iteration: s.iteration - 1,
                matched: s.matching().len(),
                weight: s.matching_weight(),
                sum_abs_dw: s.cfg.to_f64(s.sum_abs_delta_w()),
                tau: s.cfg.to_f64(s.tau),
                rcs: check_rcs(s, opts.oracle).pass_vector(),
            });
        }
    }
    diag.iterations.push(count);
    if s.tau != end {
        diag.tau_schedule_errors += 1;
        note(diag, format!("scale {i} ended with tau {} instead of {}", s.cfg.to_f64(s.tau), s.cfg.to_f64(end)));
    }
    if i < s.cfg.l {
        let raise = 3 * s.cfg.delta(i + 1) / 2;
        s.tau += raise;
        s.y.iter_mut().for_each(|y| *y += raise);
    }
    Ok(())
}

fn iteration(s: &mut MwmState, seed: u64, opts: &MwmOptions, diag: &mut Diagnostics) -> Result<(), MwmError> {
    let before = s.round_log.phases.len();
    augmentation_step(s, derive_seed(seed, "augment", 0), opts, diag)?;
    let ctx = blossom_shrinking_step(s, derive_seed(seed, "shrink", 0), opts, diag)?;
    let labels = compute_inner_outer(s, &ctx, derive_seed(seed, "label", 0), opts, diag)?;
    dual_adjustment_step(s, &labels, derive_seed(seed, "dual", 0), opts)?;
    dissolution_step(s, derive_seed(seed, "dissolve", 0), opts)?;
    prune_registry(s);
    compact_phases(&mut s.round_log, before);
    Ok(())
}

fn run_checks(s: &MwmState, seed: u64, opts: &MwmOptions, diag: &mut Diagnostics) {
    let r = check_rcs(s, opts.oracle);
    diag.rcs_checks += 1;
    if !r.hard_ok() {
        diag.rcs_hard_violations += 1;
    }
    // Proxy failures are warnings only.
    if !r.proxy {
        diag.free_dual_failures += usize::from(!r.free_vertex_duals);
        diag.weight_change_failures += usize::from(!r.bounded_weight_change);
    }
    diag.type_floor_violations += r.type_floor;
    diag.tau_floor_violations += r.tau_floor;
    if !r.ok() && !(r.proxy && r.hard_ok() && r.type_floor == 0 && r.tau_floor == 0) {
        for m in &r.messages {
            note(diag, format!("scale {} iteration {}: {m}", s.scale, s.iteration));
        }
    }
    diag.reconstruct_failures += check_reconstruction(s, derive_seed(seed, "reconstruct", 0), opts.reconstruct_samples);
    diag.cycle_failures += check_cycles(s);
}

fn note(diag: &mut Diagnostics, msg: String) {
    if diag.messages.len() < 32 {
        diag.messages.push(msg);
    }
}

/// Merges the phases logged since `from` by label stem and kind, so the log
/// stays proportional to the number of iterations.
fn compact_phases(log: &mut RoundLog, from: usize) {
    let tail: Vec<PhaseEntry> = log.phases.drain(from..).collect();
    let mut merged: BTreeMap<(String, bool), u64> = BTreeMap::new();
    let mut order = Vec::new();
    for p in tail {
        let stem = p.label.split(':').next().unwrap_or("").to_string();
        let key = (stem, p.kind == congest_core::sim::RoundKind::True);
        let slot = merged.entry(key.clone()).or_insert_with(|| {
            order.push(key.clone());
            0
        });
        *slot = slot.saturating_add(p.rounds);
    }
    for key in order {
        let rounds = merged[&key];
        let kind = if key.1 { congest_core::sim::RoundKind::True } else { congest_core::sim::RoundKind::Synthetic };
        log.phases.push(PhaseEntry { label: key.0, rounds, kind });
    }
}
