use std::collections::BTreeMap;
use std::time::Instant;

use anyhow::bail;
use clap::Args;
use num_rational::Ratio;
use rand::Rng;
use serde::{Deserialize, Serialize};

use congest_core::apps::matching::is_matching;
use congest_core::apps::mis::is_independent;
use congest_core::apps::{
    correlation_clustering, low_diameter_decomposition, max_independent_set, mcm_planar, property_test, AppReport,
    LddConfig, Property, Solution,
};
use congest_core::conductance::Rational;
use congest_core::expander::{decompose_with, to_f64, verify_decomposition, DecomposeConfig};
use congest_core::framework::{FrameworkConfig, RoutingMode};
use congest_core::oracles::{exact_solve, OracleBudget, OracleValue, Problem};
use congest_core::routing::RoutingConfig;
use congest_core::sim::{derive_seed, node_rng, RoundLog, DEFAULT_C_MSG};
use congest_core::Graph;
use congest_mwm::{run_mwm_with, MwmOptions, RoutingChoice};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Decompose,
    Mwm,
    Mis,
    Mcm,
    Cc,
    Proptest,
    Ldd,
    Verify,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Decompose => "decompose",
            Algorithm::Mwm => "mwm",
            Algorithm::Mis => "mis",
            Algorithm::Mcm => "mcm",
            Algorithm::Cc => "cc",
            Algorithm::Proptest => "proptest",
            Algorithm::Ldd => "ldd",
            Algorithm::Verify => "verify",
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct Params {
    #[arg(long, default_value_t = 0.5)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Compare against the exact oracle (small instances only).
    #[arg(long)]
    pub oracle: bool,
    /// Run the per-iteration invariant checks (mwm).
    #[arg(long)]
    pub check: bool,
    /// Charge cluster routing instead of simulating the walks.
    #[arg(long)]
    pub charged: bool,
    /// Message size factor: B = c_msg·⌈log₂(n+1)⌉ bits.
    #[arg(long, default_value_t = DEFAULT_C_MSG)]
    pub c_msg: usize,
    /// Conductance target divisor: φ = ε²/(c_phi·⌈log n⌉).
    #[arg(long, default_value_t = 16)]
    pub c_phi: i64,
    /// Degree-condition constant, as `p/q`.
    #[arg(long, default_value = "1/64")]
    pub c_sep: Rational,
    /// Walk budget factor.
    #[arg(long, default_value_t = 4)]
    pub c_w: u64,
    #[arg(long, default_value_t = 2)]
    pub k_iter: usize,
    /// Density constant; taken from the graph when absent.
    #[arg(long)]
    pub c_h: Option<usize>,
    /// Internal accuracy factor of the planar matching, as `p/q`.
    #[arg(long, default_value = "1/8")]
    pub mcm_c: Ratio<i64>,
    /// Property for proptest: forest or planar.
    #[arg(long, default_value = "forest")]
    pub property: String,
    /// Chopping stages per cluster in ldd.
    #[arg(long, default_value_t = 3)]
    pub k_h: usize,
    /// Probability of a `+` label when cc draws labels.
    #[arg(long, default_value_t = 0.5)]
    pub plus_prob: f64,
    /// File with one 0/1 label per edge for cc.
    #[arg(long)]
    pub labels: Option<std::path::PathBuf>,
    /// JSONL trace of mwm iterations.
    #[arg(long)]
    pub trace: Option<std::path::PathBuf>,
}

impl Default for Params {
    fn default() -> Params {
        Params {
            epsilon: 0.5,
            seed: 0,
            oracle: false,
            check: false,
            charged: false,
            c_msg: DEFAULT_C_MSG,
            c_phi: 16,
            c_sep: Rational::new(1, 64),
            c_w: 4,
            k_iter: 2,
            c_h: None,
            mcm_c: Ratio::new(1, 8),
            property: "forest".into(),
            k_h: 3,
            plus_prob: 0.5,
            labels: None,
            trace: None,
        }
    }
}

impl Params {
    fn routing(&self) -> RoutingConfig {
        RoutingConfig { c_w: self.c_w, c_msg: self.c_msg, ..RoutingConfig::default() }
    }

    fn decompose(&self) -> DecomposeConfig {
        DecomposeConfig { c_phi: self.c_phi, ..DecomposeConfig::default() }
    }

    fn framework(&self) -> FrameworkConfig {
        FrameworkConfig {
            decompose: self.decompose(),
            routing: self.routing(),
            c_sep: self.c_sep,
            routing_mode: if self.charged { RoutingMode::Charged } else { RoutingMode::Simulated },
            ..FrameworkConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rounds {
    #[serde(rename = "true")]
    pub true_rounds: u64,
    pub synthetic: u64,
    pub max_edge_bits: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Invariants {
    pub ok: bool,
    /// Violation counts by check name.
    pub checks: BTreeMap<String, u64>,
    pub messages: Vec<String>,
}

impl Invariants {
    fn record(&mut self, name: &str, violations: u64) {
        *self.checks.entry(name.to_string()).or_default() += violations;
    }

    fn finish(mut self) -> Invariants {
        self.ok = self.checks.values().all(|&v| v == 0);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub algorithm: String,
    pub n: usize,
    pub m: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub objective: u64,
    pub oracle: Option<u64>,
    pub ratio: Option<f64>,
    pub rounds: Rounds,
    pub invariants: Invariants,
    pub metrics: BTreeMap<String, f64>,
    pub heuristic: bool,
    pub failures: usize,
    pub wall_time_ms: f64,
}

fn oracle_value(problem: Problem, g: &Graph, labels: Option<&[bool]>) -> anyhow::Result<u64> {
    if !OracleBudget::of(problem).admits(g) {
        bail!("instance too large for the exact oracle ({} vertices)", g.n());
    }
    match exact_solve(problem, g, labels)?.value {
        OracleValue::Int(v) => Ok(v),
        OracleValue::Ratio(_) => bail!("oracle returned a ratio"),
    }
}

fn cc_labels(g: &Graph, p: &Params) -> anyhow::Result<Vec<bool>> {
    if let Some(path) = &p.labels {
        let text = std::fs::read_to_string(path)?;
        let labels: Vec<bool> = text
            .split_whitespace()
            .map(|t| match t {
                "1" | "+" => Ok(true),
                "0" | "-" => Ok(false),
                _ => bail!("bad label {t}"),
            })
            .collect::<anyhow::Result<_>>()?;
        return Ok(labels);
    }
    let mut rng = node_rng(derive_seed(p.seed, "labels", 0), 0, 0);
    Ok((0..g.m()).map(|_| rng.gen_bool(p.plus_prob.clamp(0.0, 1.0))).collect())
}

pub fn run(alg: Algorithm, g: &Graph, p: &Params) -> anyhow::Result<RunReport> {
    let start = Instant::now();
    let mut inv = Invariants::default();
    let mut extra = BTreeMap::new();
    let app: AppReport = match alg {
        Algorithm::Decompose | Algorithm::Verify => {
            let d = decompose_with(g, p.epsilon, p.seed, &p.decompose())?;
            let v = verify_decomposition(g, &d);
            inv.record("decomposition", v.violations.len() as u64);
            inv.messages.extend(v.violations.iter().take(8).map(|x| format!("{x:?}")));
            let phi = to_f64(d.phi_target);
            let mut min_sep = f64::INFINITY;
            for c in &d.clusters {
                let (h, _) = g.induced(c);
                let deg = h.max_degree() as f64;
                if c.len() > 1 {
                    min_sep = min_sep.min(deg / (phi * phi * c.len() as f64));
                }
            }
            extra.insert("clusters".to_string(), d.clusters.len() as f64);
            extra.insert("phi".to_string(), phi);
            extra.insert("largest_cluster".to_string(), d.clusters.iter().map(|c| c.len()).max().unwrap_or(0) as f64);
            if min_sep.is_finite() {
                extra.insert("min_degree_ratio".to_string(), min_sep);
            }
            extra.insert("exact_checked".to_string(), v.exact_checked as f64);
            let mut rep = AppReport::new(
                alg.name(),
                Solution::Partition(d.clusters.clone()),
                d.removed_edges.len() as u64,
                d.round_log.clone(),
            );
            if alg == Algorithm::Verify && g.is_weighted() && g.m() > 0 {
                let oracle = OracleBudget::of(Problem::Mwm)
                    .admits(g)
                    .then(|| oracle_value(Problem::Mwm, g, None))
                    .transpose()?;
                let opts = mwm_options(p, oracle, true);
                let out = run_mwm_with(g, p.epsilon, p.seed, &opts)?;
                let dg = &out.diagnostics;
                inv.record("mwm_hard", dg.hard_violations() as u64);
                inv.record("mwm_free_duals", dg.free_dual_failures as u64);
                inv.record("mwm_weight_change", dg.weight_change_failures as u64);
                inv.messages.extend(dg.messages.iter().take(8).cloned());
                extra.insert("mwm_objective".to_string(), out.report.objective as f64);
                rep.round_log.absorb(out.report.round_log);
            }
            rep
        }
        Algorithm::Mwm => {
            let oracle = if p.oracle { Some(oracle_value(Problem::Mwm, g, None)?) } else { None };
            let opts = mwm_options(p, oracle, p.check);
            let out = run_mwm_with(g, p.epsilon, p.seed, &opts)?;
            let dg = &out.diagnostics;
            if let Solution::Edges(e) = &out.report.solution {
                inv.record("matching", u64::from(!is_matching(g, e)));
            }
            if p.check {
                inv.record("rcs_items_1_4", dg.rcs_hard_violations as u64);
                inv.record("type_floor", dg.type_floor_violations as u64);
                inv.record("aug_gone", dg.aug_gone_violations as u64);
                inv.record("outer_outer", dg.outer_outer_violations as u64);
                inv.record("bad_free_vertex", dg.bad_free_vertex as u64);
                inv.record("labels", dg.label_disagreements as u64);
                inv.record("reconstruction", (dg.reconstruct_failures + dg.cycle_failures) as u64);
                inv.record("tau_schedule", (dg.tau_schedule_errors + dg.tau_floor_violations) as u64);
                inv.record("free_vertex_duals", dg.free_dual_failures as u64);
                inv.record("weight_change", dg.weight_change_failures as u64);
                inv.messages.extend(dg.messages.iter().take(8).cloned());
                extra.insert("no_aug_failures".to_string(), dg.no_aug_failures as f64);
                extra.insert("no_aug_checks".to_string(), dg.no_aug_checks as f64);
            }
            if let Some(path) = &p.trace {
                let lines: Vec<String> =
                    out.trace.iter().map(|t| serde_json::to_string(t).expect("trace serializes")).collect();
                std::fs::write(path, lines.join("\n") + "\n")?;
            }
            out.report
        }
        Algorithm::Mis => {
            let mut rep = max_independent_set(g, p.epsilon, p.seed, &p.framework())?;
            if let Solution::Vertices(s) = &rep.solution {
                inv.record("independent", u64::from(!is_independent(g, s)));
            }
            if p.oracle {
                rep = rep.with_oracle(oracle_value(Problem::Mis, g, None)?);
            }
            rep
        }
        Algorithm::Mcm => {
            let mut rep = mcm_planar(g, p.epsilon, p.seed, p.mcm_c, &p.framework())?;
            if let Solution::Edges(e) = &rep.solution {
                inv.record("matching", u64::from(!is_matching(g, e)));
            }
            if p.oracle {
                rep = rep.with_oracle(oracle_value(Problem::Mcm, g, None)?);
            }
            rep
        }
        Algorithm::Cc => {
            let labels = cc_labels(g, p)?;
            let mut rep = correlation_clustering(g, &labels, p.epsilon, p.seed, &p.framework())?;
            if let Solution::Partition(parts) = &rep.solution {
                let covered: usize = parts.iter().map(|x| x.len()).sum();
                inv.record("partition", u64::from(covered != g.n()));
            }
            if p.oracle {
                rep = rep.with_oracle(oracle_value(Problem::CorrClustering, g, Some(&labels))?);
            }
            rep
        }
        Algorithm::Proptest => {
            let Some(prop) = Property::by_name(&p.property) else { bail!("unknown property {}", p.property) };
            property_test(g, prop, p.epsilon, p.seed, &p.framework())?
        }
        Algorithm::Ldd => {
            let ldd = LddConfig { k_h: p.k_h };
            let rep = low_diameter_decomposition(g, p.epsilon, p.seed, &ldd, &p.framework())?;
            let m = &rep.metrics;
            let cut_ok = m.get("cut_edges").copied().unwrap_or(0.0) <= p.epsilon * g.m() as f64;
            let d_ok = m.get("d_achieved").copied().unwrap_or(0.0) <= m.get("d_cap").copied().unwrap_or(f64::MAX);
            inv.record("cut_budget", u64::from(!cut_ok));
            inv.record("diameter_cap", u64::from(!d_ok));
            rep
        }
    };
    let bits_budget = p.c_msg * congest_core::graph::id_bits(g.n());
    inv.record("message_size", u64::from(app.round_log.max_edge_bits > bits_budget));
    let inv = inv.finish();
    let mut metrics = app.metrics.clone();
    metrics.extend(extra);
    let RoundLog { true_rounds, synthetic_rounds, max_edge_bits, .. } = app.round_log;
    Ok(RunReport {
        algorithm: alg.name().to_string(),
        n: g.n(),
        m: g.m(),
        epsilon: p.epsilon,
        seed: p.seed,
        objective: app.objective,
        oracle: app.oracle,
        ratio: app.ratio,
        rounds: Rounds { true_rounds, synthetic: synthetic_rounds, max_edge_bits },
        invariants: inv,
        metrics,
        heuristic: app.heuristic,
        failures: app.failures.len(),
        wall_time_ms: start.elapsed().as_secs_f64() * 1000.0,
    })
}

fn mwm_options(p: &Params, oracle: Option<u64>, checks: bool) -> MwmOptions {
    MwmOptions {
        k_iter: p.k_iter,
        checks,
        routing_mode: if p.charged { RoutingChoice::Charged } else { RoutingChoice::Simulated },
        routing: p.routing(),
        decompose: p.decompose(),
        trace: p.trace.is_some(),
        oracle,
        c_h: p.c_h,
        ..MwmOptions::default()
    }
}
