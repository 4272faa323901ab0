use std::io::Write;

use clap::Args;
use rayon::prelude::*;
use serde::Serialize;

use crate::instance;
use crate::runner::{self, Algorithm, Params, RunReport};

#[derive(Args)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    algorithm: Algorithm,
    /// Instance spec such as `grid:4:4` or `planar:12`; repeatable.
    #[arg(long = "instance", required = true)]
    instances: Vec<String>,
    /// Seeds 0..N per instance.
    #[arg(long, default_value_t = 5)]
    seeds: u64,
    /// Random weights in 1..=W for every instance.
    #[arg(long)]
    weights: Option<u64>,
    /// Emit CSV rows instead of a JSON array.
    #[arg(long)]
    csv: bool,
    #[command(flatten)]
    params: Params,
}

#[derive(Serialize)]
struct Row {
    index: usize,
    instance: String,
    seed: u64,
    status: String,
    error: Option<String>,
    report: Option<RunReport>,
}

fn threads() -> usize {
    std::env::var("CONGEST_MINOR_THREADS").ok().and_then(|v| v.parse().ok()).filter(|&t| t > 0).unwrap_or(1)
}

pub fn run(a: BenchArgs) -> anyhow::Result<bool> {
    let families = a.instances.iter().map(|s| instance::parse_spec(s)).collect::<anyhow::Result<Vec<_>>>()?;
    let jobs: Vec<(usize, usize, u64)> = (0..families.len())
        .flat_map(|i| (0..a.seeds).map(move |s| (i, s)))
        .enumerate()
        .map(|(k, (i, s))| (k, i, s))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads()).build()?;
    let rows: Vec<Row> = pool.install(|| {
        jobs.par_iter()
            .map(|&(index, i, seed)| {
                let mut p = a.params.clone();
                p.seed = seed;
                let res = instance::build(&families[i], seed, a.weights).and_then(|g| runner::run(a.algorithm, &g, &p));
                let (status, error, report) = match res {
                    Ok(r) if r.invariants.ok => ("ok".to_string(), None, Some(r)),
                    Ok(r) => ("invariant_failure".to_string(), None, Some(r)),
                    Err(e) => ("error".to_string(), Some(format!("{e:#}")), None),
                };
                Row { index, instance: a.instances[i].clone(), seed, status, error, report }
            })
            .collect()
    });
    let ok = rows.iter().all(|r| r.status == "ok");
    let mut out = std::io::stdout().lock();
    if a.csv {
        writeln!(
            out,
            "index,algorithm,instance,seed,status,n,m,epsilon,objective,oracle,ratio,true_rounds,synthetic_rounds,invariants_ok,wall_time_ms,error"
        )?;
        for r in &rows {
            let opt = |x: Option<String>| x.unwrap_or_default();
            let rep = r.report.as_ref();
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.index,
                a.algorithm.name(),
                r.instance,
                r.seed,
                r.status,
                opt(rep.map(|x| x.n.to_string())),
                opt(rep.map(|x| x.m.to_string())),
                a.params.epsilon,
                opt(rep.map(|x| x.objective.to_string())),
                opt(rep.and_then(|x| x.oracle).map(|v| v.to_string())),
                opt(rep.and_then(|x| x.ratio).map(|v| format!("{v:.6}"))),
                opt(rep.map(|x| x.rounds.true_rounds.to_string())),
                opt(rep.map(|x| x.rounds.synthetic.to_string())),
                opt(rep.map(|x| x.invariants.ok.to_string())),
                opt(rep.map(|x| format!("{:.3}", x.wall_time_ms))),
                opt(r.error.as_ref().map(|e| format!("\"{}\"", e.replace('"', "'")))),
            )?;
        }
    } else {
        writeln!(out, "{}", serde_json::to_string(&rows)?)?;
    }
    Ok(ok)
}
