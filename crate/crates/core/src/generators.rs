use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{Graph, GraphError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    Grid {
        w: usize,
        h: usize,
    },
    Cycle {
        n: usize,
    },
    Path {
        n: usize,
    },
    Tree {
        n: usize,
    },
    RandomPlanar {
        n: usize,
    },
    /// Center with `k` pendant leaves, joined to `x`; `x` and `y` share `k`
    /// degree-2 middles. Exercises star elimination.
    StarGadget {
        k: usize,
    },
    TesterGadget {
        t: usize,
        i: u8,
        j: u8,
    },
}

impl Family {
    pub fn tag(&self) -> String {
        match self {
            Family::Grid { w, h } => format!("grid({},{})", w, h),
            Family::Cycle { n } => format!("cycle({})", n),
            Family::Path { n } => format!("path({})", n),
            Family::Tree { n } => format!("tree({})", n),
            Family::RandomPlanar { n } => format!("random_planar({})", n),
            Family::StarGadget { k } => format!("star_gadget({})", k),
            Family::TesterGadget { t, i, j } => format!("tester_gadget({},{},{})", t, i, j),
        }
    }
}

fn planar(g: Graph, tag: String) -> Graph {
    g.with_family(&tag).with_density_bound(Ratio::from_integer(3))
}

fn bad(msg: &str) -> GraphError {
    GraphError::InvalidParameter(msg.to_string())
}

pub fn generate(family: &Family, seed: u64) -> Result<Graph, GraphError> {
    let tag = family.tag();
    let g = match *family {
        Family::Grid { w, h } => {
            if w == 0 || h == 0 {
                return Err(bad("grid dimensions must be positive"));
            }
            grid(w, h)?
        }
        Family::Cycle { n } => {
            if n < 3 {
                return Err(bad("cycle needs at least 3 vertices"));
            }
            let e: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
            Graph::from_edges(n, &e)?
        }
        Family::Path { n } => {
            if n == 0 {
                return Err(bad("path needs at least 1 vertex"));
            }
            let e: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
            Graph::from_edges(n, &e)?
        }
        Family::Tree { n } => {
            if n == 0 {
                return Err(bad("tree needs at least 1 vertex"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let e: Vec<_> = (1..n).map(|i| (rng.gen_range(0..i), i)).collect();
            Graph::from_edges(n, &e)?
        }
        Family::RandomPlanar { n } => {
            if n == 0 {
                return Err(bad("random_planar needs at least 1 vertex"));
            }
            random_planar(n, seed)?
        }
        Family::StarGadget { k } => {
            if k == 0 {
                return Err(bad("star_gadget needs k >= 1"));
            }
            star_gadget(k)?
        }
        Family::TesterGadget { t, i, j } => {
            if t == 0 || !(1..=2).contains(&i) || !(1..=2).contains(&j) {
                return Err(bad("tester_gadget needs t >= 1 and i, j in {1, 2}"));
            }
            tester_gadget(t, i, j)?
        }
    };
    Ok(planar(g, tag))
}

fn grid(w: usize, h: usize) -> Result<Graph, GraphError> {
    let id = |x: usize, y: usize| x + w * y;
    let mut e = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if x + 1 < w {
                e.push((id(x, y), id(x + 1, y)));
            }
            if y + 1 < h {
                e.push((id(x, y), id(x, y + 1)));
            }
        }
    }
    Graph::from_edges(w * h, &e)
}

/// Stacked triangulation (each new vertex lands in a uniformly random face),
/// then a random spanning tree is kept together with each remaining edge
/// independently with probability 0.7.
fn random_planar(n: usize, seed: u64) -> Result<Graph, GraphError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if n <= 2 {
        let e: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        return Graph::from_edges(n, &e);
    }
    let mut edges = vec![(0, 1), (1, 2), (0, 2)];
    let mut faces = vec![[0, 1, 2], [0, 1, 2]];
    for v in 3..n {
        let fi = rng.gen_range(0..faces.len());
        let [a, b, c] = faces.swap_remove(fi);
        edges.extend([(a, v), (b, v), (c, v)]);
        faces.extend([[a, b, v], [b, c, v], [a, c, v]]);
    }
    let full = Graph::from_edges(n, &edges)?;
    let mut keep = vec![false; full.m()];
    let mut seen = vec![false; n];
    let root = rng.gen_range(0..n);
    seen[root] = true;
    let mut stack = vec![root];
    while let Some(v) = stack.pop() {
        let mut nb = full.neighbors(v).to_vec();
        nb.shuffle(&mut rng);
        for (u, e) in nb {
            if !seen[u] {
                seen[u] = true;
                keep[e] = true;
                stack.push(u);
            }
        }
    }
    for k in keep.iter_mut() {
        if !*k && rng.gen_bool(0.7) {
            *k = true;
        }
    }
    let kept: Vec<_> = full.edges().iter().zip(&keep).filter(|(_, &k)| k).map(|(&e, _)| e).collect();
    Graph::from_edges(n, &kept)
}

fn star_gadget(k: usize) -> Result<Graph, GraphError> {
    // 0 = center, 1..=k leaves, k+1 = x, k+2 = y, then k middles.
    let (x, y) = (k + 1, k + 2);
    let mut e: Vec<_> = (1..=k).map(|l| (0, l)).collect();
    e.push((0, x));
    for i in 0..k {
        let m = k + 3 + i;
        e.push((x, m));
        e.push((y, m));
    }
    Graph::from_edges(2 * k + 3, &e)
}

/// Edges of `H_i`: the 5-clique on v1..v5 (indices 0..5) minus two edges.
fn h_edges(i: u8) -> Vec<(usize, usize)> {
    let missing = if i == 1 { [(0, 1), (0, 2)] } else { [(0, 1), (1, 2)] };
    let mut e = Vec::new();
    for a in 0..5 {
        for b in a + 1..5 {
            if !missing.contains(&(a, b)) {
                e.push((a, b));
            }
        }
    }
    e
}

/// Path `u_1..u_{3s}` (s = 2t+1) with a copy of `H_i` hung from each of the
/// first s path vertices and a copy of `H_j` from each of the last s, the
/// attachment edge going to the copy's `v1`.
fn tester_gadget(t: usize, i: u8, j: u8) -> Result<Graph, GraphError> {
    let s = 2 * t + 1;
    let mut e: Vec<_> = (1..3 * s).map(|x| (x - 1, x)).collect();
    let mut next = 3 * s;
    let mut attach = |u: usize, which: u8, e: &mut Vec<(usize, usize)>| {
        let base = next;
        next += 5;
        e.push((u, base));
        e.extend(h_edges(which).into_iter().map(|(a, b)| (base + a, base + b)));
    };
    for x in 0..s {
        attach(x, i, &mut e);
    }
    for x in 2 * s..3 * s {
        attach(x, j, &mut e);
    }
    Graph::from_edges(3 * s + 10 * s, &e)
}

/// Replace the weights of `g` with independent uniform integers in `1..=w_max`.
pub fn with_random_weights(g: Graph, w_max: u64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0f_3e16_u64);
    let w = (0..g.m()).map(|_| rng.gen_range(1..=w_max.max(1))).collect();
    g.with_weights(w).expect("weights are positive")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planarity::is_planar;

    #[test]
    fn small_families() {
        let g = generate(&Family::Grid { w: 2, h: 2 }, 0).unwrap();
        assert_eq!((g.n(), g.m()), (4, 4));
        let c = generate(&Family::Cycle { n: 5 }, 0).unwrap();
        assert_eq!((c.n(), c.m()), (5, 5));
        let t = generate(&Family::Tree { n: 30 }, 4).unwrap();
        assert_eq!(t.m(), 29);
        assert_eq!(t.components().len(), 1);
    }

    #[test]
    fn tester_gadget_follows_construction() {
        // s = 3: 9 path vertices, 6 copies of 5 vertices; 8 path edges and
        // 6 copies of (8 + 1) edges.
        let g = generate(&Family::TesterGadget { t: 1, i: 1, j: 2 }, 0).unwrap();
        assert_eq!((g.n(), g.m()), (39, 62));
        for t in 1..4 {
            let s = 2 * t + 1;
            let g = generate(&Family::TesterGadget { t, i: 2, j: 2 }, 0).unwrap();
            assert_eq!((g.n(), g.m()), (13 * s, 21 * s - 1));
        }
    }

    #[test]
    fn random_planar_is_planar_and_deterministic() {
        for n in [10, 50, 200] {
            for seed in 0..100 {
                let g = generate(&Family::RandomPlanar { n }, seed).unwrap();
                assert!(is_planar(&g).is_planar(), "n={} seed={}", n, seed);
                assert!(g.m() <= 3 * n);
                assert_eq!(g.components().len(), 1);
            }
        }
        let a = generate(&Family::RandomPlanar { n: 40 }, 9).unwrap();
        let b = generate(&Family::RandomPlanar { n: 40 }, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn density_bound_holds_on_families() {
        let fams = [
            Family::Grid { w: 7, h: 5 },
            Family::Cycle { n: 9 },
            Family::Tree { n: 20 },
            Family::RandomPlanar { n: 60 },
            Family::StarGadget { k: 4 },
            Family::TesterGadget { t: 2, i: 1, j: 1 },
        ];
        for f in fams {
            let g = generate(&f, 1).unwrap();
            let c = g.density_bound().unwrap();
            assert!(Ratio::from_integer(g.m() as i64) <= c * g.n() as i64, "{:?}", f);
        }
    }

    #[test]
    fn invalid_parameters() {
        assert!(generate(&Family::Cycle { n: 2 }, 0).is_err());
        assert!(generate(&Family::TesterGadget { t: 1, i: 3, j: 1 }, 0).is_err());
    }
}
