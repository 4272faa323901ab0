use std::fs::File;
use std::path::Path;

use anyhow::{bail, Context};

use congest_core::generators::{generate, with_random_weights, Family};
use congest_core::graph::load_graph;
use congest_core::{Graph, GraphFormat};

pub fn load(path: &Path) -> anyhow::Result<Graph> {
    let format = if path.extension().is_some_and(|x| x == "json") { GraphFormat::Json } else { GraphFormat::EdgeList };
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(load_graph(file, format).with_context(|| format!("cannot read {}", path.display()))?)
}

pub fn family(name: &str, p: &[usize]) -> anyhow::Result<Family> {
    let want = |k: usize| -> anyhow::Result<()> {
        if p.len() != k {
            bail!("family {name} takes {k} parameter(s), got {}", p.len());
        }
        Ok(())
    };
    Ok(match name {
        "grid" => {
            want(2)?;
            Family::Grid { w: p[0], h: p[1] }
        }
        "cycle" => {
            want(1)?;
            Family::Cycle { n: p[0] }
        }
        "path" => {
            want(1)?;
            Family::Path { n: p[0] }
        }
        "tree" => {
            want(1)?;
            Family::Tree { n: p[0] }
        }
        "planar" => {
            want(1)?;
            Family::RandomPlanar { n: p[0] }
        }
        "star" => {
            want(1)?;
            Family::StarGadget { k: p[0] }
        }
        "gadget" => {
            want(3)?;
            if !(1..=2).contains(&p[1]) || !(1..=2).contains(&p[2]) {
                bail!("gadget indices i and j are 1 or 2");
            }
            Family::TesterGadget { t: p[0], i: p[1] as u8, j: p[2] as u8 }
        }
        _ => bail!("unknown family {name}"),
    })
}

/// `grid:4:4` style spec used by bench.
pub fn parse_spec(spec: &str) -> anyhow::Result<Family> {
    let mut parts = spec.split(':');
    let name = parts.next().unwrap_or_default();
    let params = parts
        .map(|x| x.parse::<usize>().with_context(|| format!("bad number in {spec}")))
        .collect::<Result<Vec<_>, _>>()?;
    family(name, &params)
}

pub fn build(fam: &Family, seed: u64, weights: Option<u64>) -> anyhow::Result<Graph> {
    let g = generate(fam, seed)?;
    Ok(match weights {
        Some(w) => with_random_weights(g, w, seed),
        None => g,
    })
}
