use super::*;
use crate::dijkstra::{dijkstra_distance, dijkstra_sssp};
use crate::graph::{CoordinateTable, Graph, WeightKind};
use crate::hierarchy::ObjectHierarchy;
use crate::knn::{knn_brute_force, KnnResult, QueryStats};
use crate::objects::{gen_uniform, ObjectKind, ObjectSet};
use crate::rtree::RTree;
use crate::synth;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn build(g: &Graph, c: &CoordinateTable) -> SilcIndex {
    SilcIndex::build(g, c, SilcParams::default()).unwrap()
}

fn graph(n: usize, edges: &[(VertexId, VertexId, Dist)], pts: &[(f64, f64)]) -> (Graph, CoordinateTable) {
    let g = Graph::from_edges(n, edges, WeightKind::Distance).unwrap();
    let c = CoordinateTable::from_points(pts.iter().map(|&(x, y)| Point::new(x, y)).collect());
    (g, c)
}

/// Path graph 0 - 1 - ... - n-1 along the x axis.
fn path(n: usize, w: Dist) -> (Graph, CoordinateTable) {
    let edges: Vec<_> = (1..n as VertexId).map(|v| (v - 1, v, w)).collect();
    let pts: Vec<_> = (0..n).map(|i| (i as f64, 0.0)).collect();
    graph(n, &edges, &pts)
}

/// Lowest-id neighbour of `s` that starts a shortest path to `v`.
fn oracle_first_hop(g: &Graph, s: VertexId, v: VertexId, from_s: &[Dist]) -> VertexId {
    g.neighbors(s)
        .filter(|&(u, w)| w + dijkstra_distance(g, u, v) == from_s[v as usize])
        .map(|(u, _)| u)
        .min()
        .unwrap()
}

fn objects(g: &Graph, ids: Vec<VertexId>) -> ObjectSet {
    ObjectSet::new(ids, g.vertex_count(), ObjectKind::Uniform, None).unwrap()
}

#[test]
fn star_leaves_are_their_own_colors() {
    let pts = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0), (0.7, 0.7)];
    let edges: Vec<_> = (1..6).map(|v| (0, v, 2)).collect();
    let (g, c) = graph(6, &edges, &pts);
    let idx = build(&g, &c);
    for v in 1..6 {
        assert_eq!(idx.next_hop(0, v), v);
        assert_eq!(idx.distance(0, v), 2);
    }
    assert_eq!(idx.blocks_of(0), 5);
    // from a leaf everything goes through the centre
    assert_eq!(idx.blocks_of(1), 1);
    assert_eq!(idx.next_hop(1, 3), 0);
}

#[test]
fn next_hop_follows_the_running_example_shape() {
    // v6 reaches v9..v12 through v8 with unit weights
    let edges = [
        (6, 5, 1),
        (6, 7, 1),
        (6, 8, 1),
        (8, 9, 1),
        (8, 10, 1),
        (10, 11, 1),
        (11, 12, 1),
        (5, 4, 1),
        (7, 3, 1),
        (4, 1, 1),
        (3, 2, 1),
        (1, 0, 1),
        (2, 0, 1),
    ];
    let pts: Vec<_> = (0..13).map(|i| ((i % 4) as f64, (i / 4) as f64 + 0.1 * i as f64)).collect();
    let (g, c) = graph(13, &edges, &pts);
    let idx = build(&g, &c);
    assert_eq!(idx.next_hop(6, 12), 8);
    for t in 9..=12 {
        assert_eq!(idx.next_hop(6, t), 8);
    }
    assert_eq!(idx.next_hop(6, 7), 7);
    assert_eq!(idx.path(6, 12), vec![6, 8, 10, 11, 12]);
}

#[test]
#[should_panic(expected = "distinct")]
fn next_hop_to_itself_is_a_contract_violation() {
    let (g, c) = path(3, 1);
    build(&g, &c).next_hop(1, 1);
}

#[test]
fn first_hops_and_ratios_match_dijkstra() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for seed in 0..4 {
        let (g, c) = synth::random_planar(300, seed);
        let idx = build(&g, &c);
        for _ in 0..250 {
            let s = rng.gen_range(0..300);
            let v = rng.gen_range(0..300);
            if s == v {
                continue;
            }
            let from_s = dijkstra_sssp(&g, s);
            assert_eq!(idx.next_hop(s, v), oracle_first_hop(&g, s, v, &from_s), "s={s} v={v}");
            if let Some((lo, hi)) = idx.ratio_bounds(s, v) {
                let r = from_s[v as usize] as f64 / c.point(s).dist(c.point(v));
                assert!(lo as f64 <= r && r <= hi as f64, "{lo} <= {r} <= {hi}");
            }
        }
    }
}

#[test]
fn every_vertex_is_covered_once() {
    let (g, c) = synth::road_like(400, 5);
    let idx = build(&g, &c);
    for s in 0..400 {
        let r = idx.tree_range(s);
        let ends: Vec<u128> = r.clone().map(|i| idx.block_code[i] as u128 + span(idx.block_depth[i])).collect();
        for (j, i) in r.clone().enumerate().skip(1) {
            assert!(ends[j - 1] <= idx.block_code[i] as u128, "blocks overlap");
        }
        for t in 0..400 {
            if t == s {
                continue;
            }
            let code = idx.codes[t as usize] as u128;
            let covering = r
                .clone()
                .filter(|&i| idx.block_code[i] as u128 <= code && code < ends[i - r.start])
                .count();
            let exc = idx.exc_vertex[idx.exception_range(s)].contains(&t);
            assert!(covering == 1 || (exc && covering == 0));
        }
    }
}

#[test]
fn path_walks_sum_to_network_distance() {
    let (g, c) = synth::road_like(600, 11);
    let idx = build(&g, &c);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..300 {
        let (s, t) = (rng.gen_range(0..600), rng.gen_range(0..600));
        let p = idx.path(s, t);
        let walked: Dist = p.windows(2).map(|e| g.weight_between(e[0], e[1]).unwrap()).sum();
        assert_eq!(walked, dijkstra_distance(&g, s, t));
        assert_eq!(idx.distance(s, t), walked);
    }
}

#[test]
fn refinement_is_monotone_and_converges_within_hop_count() {
    for seed in 0..5 {
        let (g, c) = synth::random_planar(200, seed);
        let idx = build(&g, &c);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..200 {
            let (s, t) = (rng.gen_range(0..200), rng.gen_range(0..200));
            let d = dijkstra_distance(&g, s, t);
            let hops = idx.path(s, t).len() - 1;
            for mode in [Refinement::Plain, Refinement::Chain] {
                let mut st = QueryStats::default();
                let mut iv = idx.interval(s, t, &mut st);
                let mut steps = 0;
                while !iv.is_exact() {
                    assert!(iv.lo <= d && d <= iv.hi);
                    let before = iv;
                    idx.refine_step(&mut iv, mode, &mut st);
                    assert!(iv.lo >= before.lo && iv.hi <= before.hi);
                    steps += 1;
                }
                assert_eq!((iv.lo, iv.hi), (d, d));
                assert!(steps <= hops, "{steps} steps for {hops} hops");
            }
        }
    }
}

#[test]
fn adjacent_unique_hop_is_exact_in_one_step() {
    let (g, c) = path(5, 3);
    let idx = build(&g, &c);
    let mut st = QueryStats::default();
    let mut iv = idx.interval(3, 4, &mut st);
    idx.refine(&mut iv, &mut st);
    assert_eq!((iv.lo, iv.hi), (3, 3));
}

#[test]
fn chain_jump_reaches_path_end_in_one_step() {
    let (g, c) = path(50, 2);
    let idx = build(&g, &c);
    assert!(idx.check_chains());
    let (mut plain, mut chain) = (QueryStats::default(), QueryStats::default());
    let mut a = idx.interval(0, 49, &mut plain);
    let mut b = idx.interval(0, 49, &mut chain);
    idx.refine_with_chain(&mut b, &mut chain);
    assert!(b.is_exact());
    assert_eq!(b.lo, 98);
    assert_eq!(idx.refine_to_exact(&mut a, Refinement::Plain, &mut plain), 98);
    assert!(chain.refine_lookups < plain.refine_lookups);
    assert_eq!(chain.refine_lookups, 1);
}

#[test]
fn chain_jump_stops_for_targets_inside_the_chain() {
    // junctions 0 and 20 with a chain 1..19 between them plus a detour
    let mut edges: Vec<_> = (0..20).map(|v| (v, v + 1, 1)).collect();
    edges.extend([(0, 21, 50), (21, 20, 50), (0, 22, 1), (20, 23, 1)]);
    let mut pts: Vec<_> = (0..21).map(|i| (i as f64, 0.0)).collect();
    pts.extend([(10.0, 5.0), (-1.0, 0.0), (21.0, 0.0)]);
    let (g, c) = graph(24, &edges, &pts);
    let idx = build(&g, &c);
    assert!(idx.check_chains());
    assert_eq!(idx.chain_of(5), idx.chain_of(12));
    for t in [12, 19, 20, 23] {
        let mut st = QueryStats::default();
        let mut iv = idx.interval(22, t, &mut st);
        assert_eq!(
            idx.refine_to_exact(&mut iv, Refinement::Chain, &mut st),
            dijkstra_distance(&g, 22, t)
        );
    }
}

#[test]
fn pure_cycles_have_no_chain() {
    let edges: Vec<_> = (0..6).map(|v| (v, (v + 1) % 6, 1)).collect();
    let pts: Vec<_> = (0..6).map(|i| ((i as f64).cos(), (i as f64).sin())).collect();
    let (g, c) = graph(6, &edges, &pts);
    let idx = build(&g, &c);
    assert!((0..6).all(|v| idx.chain_of(v).is_none()));
    assert!(idx.check_chains());
    assert_eq!(idx.distance(0, 3), 3);
}

#[test]
fn region_bounds_contain_every_object() {
    let (g, c) = synth::road_like(800, 3);
    let idx = build(&g, &c);
    let o = gen_uniform(&g, 0.1, 3).unwrap();
    let oh = ObjectHierarchy::with_capacity(&o, &c, 4);
    for q in [0, 17, 400, 799] {
        let dist = dijkstra_sssp(&g, q);
        for n in 0..oh.node_count() as u32 {
            let (lo, hi) = idx.region_interval(q, &oh.bounds(n));
            for &v in oh.objects(n) {
                assert!(lo <= dist[v as usize] && dist[v as usize] <= hi);
            }
        }
    }
}

#[test]
fn coincident_vertices_become_exceptions() {
    let edges = [(0, 1, 5), (1, 2, 5), (2, 3, 5), (0, 3, 20)];
    let pts = [(0.0, 0.0), (1.0, 0.0), (1.0, 0.0), (0.0, 1.0)];
    let (g, c) = graph(4, &edges, &pts);
    let idx = build(&g, &c);
    for s in 0..4 {
        for t in 0..4 {
            assert_eq!(idx.distance(s, t), dijkstra_distance(&g, s, t));
        }
    }
}

#[test]
fn budget_refusal_reports_the_estimate() {
    let (g, c) = path(100, 1);
    let params = SilcParams {
        budget_bytes: 10,
        ..SilcParams::default()
    };
    match SilcIndex::build(&g, &c, params) {
        Err(Error::MemoryBudget {
            estimated_bytes,
            budget_bytes,
        }) => {
            assert_eq!(budget_bytes, 10);
            assert_eq!(estimated_bytes, build::estimate_bytes(100));
        }
        other => panic!("expected a budget refusal, got {other:?}"),
    }
}

#[test]
fn binary_round_trip_and_parallel_determinism() {
    let (g, c) = synth::road_like(500, 9);
    let a = build(&g, &c);
    let b = SilcIndex::build(
        &g,
        &c,
        SilcParams {
            parallelism: Parallelism::Sequential,
            ..SilcParams::default()
        },
    )
    .unwrap();
    assert_eq!(a, b);
    let mut buf = Vec::new();
    a.write_binary(&mut buf).unwrap();
    let back = SilcIndex::read_binary(&mut buf.as_slice()).unwrap();
    assert_eq!(back, a);
    assert!(SilcIndex::read_binary(&mut &buf[..buf.len() - 3]).is_err());
}

fn disbrw(idx: &SilcIndex, oh: &ObjectHierarchy, q: VertexId, k: usize, mode: Refinement) -> (KnnResult, QueryStats) {
    let mut st = QueryStats::default();
    let r = knn_disbrw_with(q, k, idx, oh, &mut SilcScratch::new(), &mut st, mode);
    (r, st)
}

fn db_enn(idx: &SilcIndex, rt: &RTree, q: VertexId, k: usize, mode: Refinement) -> (KnnResult, QueryStats) {
    let mut st = QueryStats::default();
    let r = knn_db_enn_with(q, k, idx, rt, &mut SilcScratch::new(), &mut st, mode);
    (r, st)
}

#[test]
fn query_vertex_object_comes_first() {
    let (g, c) = synth::random_planar(120, 4);
    let idx = build(&g, &c);
    let o = objects(&g, vec![3, 40, 77]);
    let oh = ObjectHierarchy::build(&o, &c);
    let rt = RTree::build(&o, &c);
    for q in [3, 40, 77] {
        assert_eq!(disbrw(&idx, &oh, q, 1, Refinement::Chain).0.entries, vec![(q, 0)]);
        assert_eq!(db_enn(&idx, &rt, q, 1, Refinement::Chain).0.entries, vec![(q, 0)]);
    }
}

#[test]
fn single_leaf_hierarchy_refines_every_object() {
    let (g, c) = synth::random_planar(200, 8);
    let idx = build(&g, &c);
    let o = gen_uniform(&g, 0.1, 8).unwrap();
    let flat = ObjectHierarchy::with_capacity(&o, &c, o.len());
    assert!(flat.is_leaf(flat.root()));
    let deep = ObjectHierarchy::with_capacity(&o, &c, 2);
    for q in [0, 50, 199] {
        let want = knn_brute_force(&g, q, 5, &o);
        assert_eq!(disbrw(&idx, &flat, q, 5, Refinement::Chain).0, want);
        assert_eq!(disbrw(&idx, &deep, q, 5, Refinement::Chain).0, want);
    }
}

#[test]
fn k_equal_to_object_count_returns_everything() {
    let (g, c) = synth::random_planar(150, 2);
    let idx = build(&g, &c);
    let o = gen_uniform(&g, 0.05, 2).unwrap();
    let rt = RTree::build(&o, &c);
    let (r, st) = db_enn(&idx, &rt, 9, o.len(), Refinement::Chain);
    assert_eq!(r, knn_brute_force(&g, 9, o.len(), &o));
    assert_eq!(st.cursor_pulls, o.len() as u64);
}

#[test]
fn chain_refinement_saves_lookups_in_queries() {
    // long chains between a few junctions
    let (g, c) = path(200, 3);
    let idx = build(&g, &c);
    let o = objects(&g, vec![0, 90, 150, 199]);
    let oh = ObjectHierarchy::build(&o, &c);
    let rt = RTree::build(&o, &c);
    let (a, sa) = disbrw(&idx, &oh, 10, 2, Refinement::Chain);
    let (b, sb) = disbrw(&idx, &oh, 10, 2, Refinement::Plain);
    assert_eq!(a, b);
    assert!(sa.refine_lookups < sb.refine_lookups);
    let (a, sa) = db_enn(&idx, &rt, 10, 2, Refinement::Chain);
    let (b, sb) = db_enn(&idx, &rt, 10, 2, Refinement::Plain);
    assert_eq!(a, b);
    assert!(sa.refine_lookups < sb.refine_lookups);
}

/// The first Euclidean neighbour is not the nearest; the nearest must not be
/// dropped while closer Euclidean candidates are still unread.
#[test]
fn db_enn_keeps_candidates_beaten_only_by_unread_neighbours() {
    let seed = 15_715_005_604_373_573_095;
    let (g, c) = synth::random_planar(116, seed);
    let idx = build(&g, &c);
    let o = gen_uniform(&g, 0.1, seed ^ 1).unwrap();
    let rt = RTree::build(&o, &c);
    let want = knn_brute_force(&g, 0, 1, &o);
    assert_eq!(want.entries, vec![(113, 1668)]);
    for mode in [Refinement::Chain, Refinement::Plain] {
        assert_eq!(db_enn(&idx, &rt, 0, 1, mode).0, want);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn browsing_matches_brute_force(seed in 0u64..10_000, n in 50usize..400, k in 1usize..12, density in 0.01f64..0.2, cap in 1usize..40) {
        let (g, c) = synth::random_planar(n, seed);
        let idx = build(&g, &c);
        let o = gen_uniform(&g, density, seed).unwrap();
        let oh = ObjectHierarchy::with_capacity(&o, &c, cap);
        let rt = RTree::with_capacity(&o, &c, cap.max(2));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..4 {
            let q = rng.gen_range(0..n as VertexId);
            let want = knn_brute_force(&g, q, k, &o);
            let (a, sa) = disbrw(&idx, &oh, q, k, Refinement::Chain);
            let (b, sb) = disbrw(&idx, &oh, q, k, Refinement::Plain);
            let (e, se) = db_enn(&idx, &rt, q, k, Refinement::Chain);
            let (f, sf) = db_enn(&idx, &rt, q, k, Refinement::Plain);
            prop_assert_eq!(&a, &want);
            prop_assert_eq!(&b, &want);
            prop_assert_eq!(&e, &want);
            prop_assert_eq!(&f, &want);
            prop_assert!(sa.refine_lookups <= sb.refine_lookups, "disbrw {} > {}", sa.refine_lookups, sb.refine_lookups);
            prop_assert!(se.refine_lookups <= sf.refine_lookups, "db-enn {} > {}", se.refine_lookups, sf.refine_lookups);
            prop_assert!(se.cursor_pulls >= k.min(o.len()) as u64 && se.cursor_pulls <= o.len() as u64);
        }
    }

    #[test]
    fn chain_and_plain_refinement_agree(seed in 0u64..10_000, n in 20usize..200) {
        let (g, c) = synth::road_like(n, seed);
        let idx = build(&g, &c);
        prop_assert!(idx.check_chains());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let (s, t) = (rng.gen_range(0..n as VertexId), rng.gen_range(0..n as VertexId));
            let (mut sa, mut sb) = (QueryStats::default(), QueryStats::default());
            let mut a = idx.interval(s, t, &mut sa);
            let mut b = idx.interval(s, t, &mut sb);
            let da = idx.refine_to_exact(&mut a, Refinement::Chain, &mut sa);
            let db = idx.refine_to_exact(&mut b, Refinement::Plain, &mut sb);
            prop_assert_eq!(da, db);
            prop_assert_eq!(da, dijkstra_distance(&g, s, t));
            prop_assert!(sa.refine_lookups <= sb.refine_lookups);
        }
    }
}
