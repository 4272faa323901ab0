use crate::framework::{partition_and_solve, ClusterView, FailureReason, FrameworkConfig, LocalSolution};
use crate::graph::Graph;
use crate::planarity::planar;
use crate::sim::{Message, RoundLog};

use super::{AppError, AppReport, Solution};

/// A graph property closed under disjoint union, checked at cluster leaders.
#[derive(Clone, Copy)]
pub struct Property {
    pub name: &'static str,
    pub check: fn(&Graph) -> bool,
}

impl std::fmt::Debug for Property {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Property({})", self.name)
    }
}

pub fn is_forest(g: &Graph) -> bool {
    g.m() + g.components().len() == g.n()
}

impl Property {
    pub fn forest() -> Property {
        Property { name: "forest", check: is_forest }
    }

    pub fn planar() -> Property {
        Property { name: "planar", check: planar }
    }

    pub fn by_name(name: &str) -> Option<Property> {
        match name {
            "forest" => Some(Property::forest()),
            "planar" => Some(Property::planar()),
            _ => None,
        }
    }
}

/// One-sided test: a cluster Rejects when its induced subgraph violates the
/// property or its degree condition fails; routing and diameter failures
/// Accept.
pub fn property_test(
    g: &Graph,
    property: Property,
    epsilon: f64,
    seed: u64,
    cfg: &FrameworkConfig,
) -> Result<AppReport, AppError> {
    let res = partition_and_solve(
        g,
        epsilon,
        |v: &ClusterView| {
            let ok = (property.check)(&v.graph);
            let replies = v.vertices().iter().map(|&x| (x, Message::new().with(u64::from(ok), 1))).collect();
            LocalSolution { output: ok, replies }
        },
        seed,
        cfg,
    )?;
    let mut verdicts = vec![true; g.n()];
    let mut rejecting = 0;
    for c in &res.per_cluster {
        let accept = match (&c.output, &c.failure) {
            (Some(ok), _) => *ok,
            (None, Some(FailureReason::DegreeCondition)) => false,
            (None, _) => true,
        };
        if !accept {
            rejecting += 1;
            for &v in &c.vertices {
                verdicts[v] = false;
            }
        }
    }
    let rejects = verdicts.iter().filter(|&&a| !a).count() as u64;
    let mut log = RoundLog::new();
    log.absorb(res.round_log);
    let mut report = AppReport::new(property.name, Solution::Verdicts(verdicts), rejects, log);
    report.failures = res.failures;
    report.metrics.insert("rejecting_clusters".into(), rejecting as f64);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{generate, Family};

    fn rejects(g: &Graph, p: Property, eps: f64, seed: u64) -> u64 {
        property_test(g, p, eps, seed, &FrameworkConfig::default()).unwrap().objective
    }

    #[test]
    fn tree_always_accepts() {
        let g = generate(&Family::Tree { n: 50 }, 3).unwrap();
        for seed in 0..10 {
            assert_eq!(rejects(&g, Property::forest(), 0.2, seed), 0);
        }
    }

    #[test]
    fn k5_with_pendant_path_rejects() {
        let mut e = Vec::new();
        for a in 0..5 {
            for b in a + 1..5 {
                e.push((a, b));
            }
        }
        e.extend([(4, 5), (5, 6), (6, 7)]);
        let g = Graph::from_edges(8, &e).unwrap();
        for seed in 0..5 {
            assert!(rejects(&g, Property::planar(), 0.2, seed) >= 1);
        }
    }

    #[test]
    fn triangle_is_not_a_forest() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let r = property_test(&g, Property::forest(), 0.2, 0, &FrameworkConfig::default()).unwrap();
        assert_eq!(r.solution, Solution::Verdicts(vec![false; 3]));
    }
}
