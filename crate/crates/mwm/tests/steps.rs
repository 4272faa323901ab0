use num_rational::Ratio;

use congest_core::expander::{Decomposition, RegistryKey};
use congest_core::Graph;
use congest_mwm::steps::{
    augmentation_step, blossom_shrinking_step, compute_inner_outer, cut_procedure, dissolution_step,
    dual_adjustment_step, inner_outer_direct, register_decomposition, Labels,
};
use congest_mwm::{check_rcs, init_state, Child, Diagnostics, MwmOptions, MwmState, RoutingChoice};

fn state(n: usize, edges: &[(usize, usize, i64)]) -> MwmState {
    init_state(&Graph::from_weighted_edges(n, edges).unwrap(), 0.5, 2).unwrap()
}

fn r(s: &MwmState, q: i128) -> Ratio<i128> {
    s.cfg.to_ratio(q)
}

fn charged() -> MwmOptions {
    MwmOptions { routing_mode: RoutingChoice::Charged, checks: true, ..MwmOptions::default() }
}

fn split(s: &MwmState, clusters: Vec<Vec<usize>>) -> Decomposition {
    Decomposition::from_clusters(&s.g, clusters, Ratio::new(1, 10), Ratio::new(1, 4))
}

fn match_edge(s: &mut MwmState, u: usize, v: usize) -> usize {
    let e = s.g.edge_id(u, v).unwrap();
    s.set_match(u, v, e);
    s.type_of[e] = Some(s.scale);
    e
}

/// Duals making the matched edge (a, b) and unmatched edges into a, b
/// eligible at the first iteration.
fn lift(s: &mut MwmState, a: usize, b: usize) {
    let four = s.cfg.from_int(4);
    s.y.iter_mut().for_each(|y| *y = four - s.cfg.delta(0));
    s.y[a] = four;
    s.y[b] = four;
}

/// Triangle 0-1-2 with (1,2) matched, turned into a blossom with base 0.
fn triangle_blossom(s: &mut MwmState) -> usize {
    let e12 = match_edge(s, 1, 2);
    let e01 = s.g.edge_id(0, 1).unwrap();
    let e02 = s.g.edge_id(0, 2).unwrap();
    for e in [e01, e02] {
        s.type_of[e] = Some(0);
    }
    let key = RegistryKey::new("test", 0, 0);
    let whole = split(s, vec![(0..s.n()).collect()]);
    register_decomposition(s, &key, &whole);
    s.omega.add(
        e12,
        vec![Child::Vertex(0), Child::Vertex(1), Child::Vertex(2)],
        vec![(0, 1, e01), (1, 2, e12), (2, 0, e02)],
        key,
    )
}

#[test]
fn cut_lowers_crossing_unmatched_edge() {
    let mut s = state(2, &[(0, 1, 8)]);
    assert!(s.eligible(0));
    let d = split(&s, vec![vec![0], vec![1]]);
    let out = cut_procedure(&mut s, &d, 1, &charged()).unwrap();
    assert_eq!(out.lowered, 1);
    assert_eq!(r(&s, s.delta_w[0]), Ratio::new(-1, 4));
    assert!(!s.eligible(0));
}

#[test]
fn cut_inside_regular_blossom_raises_outgoing_matched_edge() {
    let mut s = state(4, &[(0, 1, 8), (1, 2, 8), (0, 2, 8), (0, 3, 8)]);
    triangle_blossom(&mut s);
    let e03 = match_edge(&mut s, 0, 3);
    s.y[0] = s.cfg.from_int(4);
    s.y[3] = s.cfg.from_int(4);
    assert!(s.eligible(e03));
    let d = split(&s, vec![vec![0, 1], vec![2, 3]]);
    let out = cut_procedure(&mut s, &d, 1, &charged()).unwrap();
    assert_eq!(out.raised, 1);
    assert_eq!(r(&s, s.delta_w[e03]), Ratio::new(1, 4));
    assert!(!s.eligible(e03));
    assert!(s.delta_w.iter().enumerate().all(|(e, &d)| e == e03 || d == 0));
}

#[test]
fn cut_inside_free_blossom_freezes_base() {
    let mut s = state(3, &[(0, 1, 8), (1, 2, 8), (0, 2, 8)]);
    triangle_blossom(&mut s);
    let d = split(&s, vec![vec![0, 1], vec![2]]);
    let out = cut_procedure(&mut s, &d, 1, &charged()).unwrap();
    assert_eq!(out.frozen, vec![0]);
    assert!(s.frozen[0] && s.is_free(0) && !s.is_open(0));
    assert!(s.delta_w.iter().all(|&d| d == 0));
    // Cleanup frees it again.
    s.omega.blossoms[0].z = s.delta();
    dissolution_step(&mut s, 1, &charged()).unwrap();
    assert!(s.is_open(0));
}

#[test]
fn augmentation_matches_single_eligible_edge() {
    let mut s = state(2, &[(0, 1, 8)]);
    let mut diag = Diagnostics::default();
    let out = augmentation_step(&mut s, 3, &MwmOptions::test_mode(), &mut diag).unwrap();
    assert_eq!(out.luby_matched, 1);
    assert!(s.is_matched(0));
    assert_eq!(s.type_of[0], Some(0));
}

#[test]
fn augmentation_flips_alternating_path() {
    let mut s = state(4, &[(0, 1, 8), (1, 2, 8), (2, 3, 8)]);
    match_edge(&mut s, 1, 2);
    lift(&mut s, 1, 2);
    assert!(s.eligibility().iter().all(|&x| x));
    let mut diag = Diagnostics::default();
    let out = augmentation_step(&mut s, 3, &MwmOptions::test_mode(), &mut diag).unwrap();
    assert_eq!(out.paths, 1);
    assert_eq!(s.matching().len(), 2);
    assert!(s.is_matched(0) && s.is_matched(2));
    assert_eq!(diag.aug_gone_violations, 0);
    assert_eq!(diag.no_aug_failures, 0);
}

#[test]
fn augmentation_without_eligible_edges_is_a_no_op() {
    let mut s = state(3, &[(0, 1, 8), (1, 2, 4)]);
    s.y.iter_mut().for_each(|y| *y = 40 * s.cfg.den());
    assert!(s.eligibility().iter().all(|&x| !x));
    let mut diag = Diagnostics::default();
    augmentation_step(&mut s, 3, &MwmOptions::test_mode(), &mut diag).unwrap();
    assert!(s.matching().is_empty());
    assert!(s.delta_w.iter().all(|&d| d == 0));
}

#[test]
fn shrinking_forms_triangle_blossom() {
    let mut s = state(3, &[(0, 1, 8), (1, 2, 8), (0, 2, 8)]);
    match_edge(&mut s, 1, 2);
    lift(&mut s, 1, 2);
    let mut diag = Diagnostics::default();
    let ctx = blossom_shrinking_step(&mut s, 5, &MwmOptions::test_mode(), &mut diag).unwrap();
    assert_eq!(ctx.new_blossoms.len(), 1);
    let b = ctx.new_blossoms[0];
    assert_eq!(s.omega.members(b), vec![0, 1, 2]);
    assert_eq!(s.omega.blossoms[b].z, 0);
    assert_eq!(s.omega.base(Child::Blossom(b)), 0);
    assert_eq!(diag.bad_free_vertex, 0);
}

#[test]
fn inner_outer_examples() {
    // Lone free vertex next to an ineligible matched edge.
    let mut s = state(3, &[(0, 1, 8)]);
    match_edge(&mut s, 0, 1);
    s.y[0] = 0;
    s.y[1] = 0;
    let (l, _) = inner_outer_direct(&s);
    assert_eq!(l, Labels { inner: vec![false; 3], outer: vec![false, false, true] });

    // f -- a == b
    let mut s = state(3, &[(0, 1, 8), (1, 2, 8)]);
    match_edge(&mut s, 1, 2);
    lift(&mut s, 1, 2);
    let mut diag = Diagnostics::default();
    let opts = MwmOptions::test_mode();
    let ctx = blossom_shrinking_step(&mut s, 7, &opts, &mut diag).unwrap();
    let l = compute_inner_outer(&mut s, &ctx, 7, &opts, &mut diag).unwrap();
    assert_eq!(l.outer, vec![true, false, true]);
    assert_eq!(l.inner, vec![false, true, false]);
    assert_eq!(diag.label_disagreements, 0);
    assert_eq!(diag.outer_outer_violations, 0);
}

#[test]
fn dual_adjustment_examples() {
    let mut s = state(4, &[(0, 1, 8), (1, 2, 8), (0, 2, 8)]);
    triangle_blossom(&mut s);
    let labels = Labels { inner: vec![false; 4], outer: vec![true, true, true, false] };
    let y3 = s.y[3];
    dual_adjustment_step(&mut s, &labels, 1, &charged()).unwrap();
    // y and τ drop by δ₀/2 = 1/8 from 31/8.
    assert_eq!(r(&s, s.y[0]), Ratio::new(15, 4));
    assert_eq!(r(&s, s.tau), Ratio::new(15, 4));
    assert_eq!(s.omega.blossoms[0].z, s.delta());
    assert_eq!(s.y[3], y3);
}

#[test]
fn dissolution_examples() {
    // Outer blossom over the triangle and vertices 3, 4.
    let mut s = state(5, &[(0, 1, 8), (1, 2, 8), (0, 2, 8), (0, 3, 8), (3, 4, 8), (0, 4, 8)]);
    let inner = triangle_blossom(&mut s);
    match_edge(&mut s, 3, 4);
    let (e03, e34, e04) = (s.g.edge_id(0, 3).unwrap(), s.g.edge_id(3, 4).unwrap(), s.g.edge_id(0, 4).unwrap());
    let key = s.omega.blossoms[inner].key.clone();
    let outer = s.omega.add(
        e34,
        vec![Child::Blossom(inner), Child::Vertex(3), Child::Vertex(4)],
        vec![(0, 3, e03), (3, 4, e34), (4, 0, e04)],
        key,
    );
    s.omega.blossoms[inner].z = s.delta();
    let before = s.omega.clone();
    s.omega.blossoms[outer].z = s.delta();
    dissolution_step(&mut s, 1, &charged()).unwrap();
    assert_eq!(s.omega.roots(), vec![outer]);
    assert_ne!(s.omega, before);

    s.omega.blossoms[outer].z = 0;
    let n = dissolution_step(&mut s, 1, &charged()).unwrap();
    assert_eq!(n, 1);
    assert_eq!(s.omega.roots(), vec![inner]);
    assert_eq!(s.omega.blossoms[inner].parent, None);
    assert!(s.omega.edge_label[e34].is_none());
}

#[test]
fn fresh_state_passes_rcs_and_violations_are_reported() {
    let s = state(3, &[(0, 1, 8), (1, 2, 4)]);
    let rep = check_rcs(&s, Some(8));
    assert!(rep.ok(), "{:?}", rep.messages);

    let mut bad = s.clone();
    bad.y[0] += bad.delta() / 4;
    assert!(bad.delta() % 4 == 0);
    let rep = check_rcs(&bad, Some(8));
    assert!(rep.granularity > 0);

    let mut tight = s.clone();
    match_edge(&mut tight, 0, 1);
    tight.y[0] = tight.cfg.from_int(9) / 2;
    tight.y[1] = tight.cfg.from_int(9) / 2;
    // yz = 9 = w_0 + 4δ_0.
    assert_eq!(tight.yz(0), tight.w_i(0) + 4 * tight.delta());
    let rep = check_rcs(&tight, Some(8));
    assert!(rep.near_tightness > 0);
}
