use super::*;
use crate::dijkstra::{dijkstra_distance, dijkstra_sssp};
use crate::graph::WeightKind;
use crate::knn::{knn_brute_force, KnnResult, QueryStats};
use crate::objects::{gen_uniform, ObjectKind};
use crate::synth;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn build(g: &Graph, f: usize, l: usize) -> RoadIndex {
    RoadIndex::build(g, RoadParams::new(f, l)).unwrap()
}

/// Edge sets of every Rnet, rebuilt from the leaves.
fn rnet_edges(idx: &RoadIndex) -> Vec<Vec<(VertexId, VertexId, Dist)>> {
    let leaves = idx.leaf_edges();
    (0..idx.rnet_count() as u32)
        .map(|r| {
            let mut es: Vec<_> = idx
                .descendant_leaves(r)
                .into_iter()
                .flat_map(|x| leaves[x as usize].iter().copied())
                .collect();
            es.sort_unstable();
            es.dedup();
            es
        })
        .collect()
}

fn query(idx: &RoadIndex, ad: &AssociationDirectory, q: VertexId, k: usize, pruning: bool) -> (KnnResult, QueryStats) {
    let mut s = RoadScratch::new(idx);
    let mut st = QueryStats::default();
    (knn_road_with(q, k, idx, ad, &mut s, &mut st, pruning), st)
}

#[test]
fn one_level_two_leaves_cover_all_edges() {
    let (g, _) = synth::random_planar(80, 2);
    let idx = build(&g, 2, 1);
    assert_eq!(idx.rnet_count(), 3);
    assert!(idx.is_leaf(1) && idx.is_leaf(2));
    let es = rnet_edges(&idx);
    let mut all: Vec<_> = es[1].iter().chain(&es[2]).copied().collect();
    all.sort_unstable();
    all.dedup();
    assert_eq!(all, g.edges().collect::<Vec<_>>());
}

#[test]
fn hierarchy_invariants() {
    let (g, _) = synth::road_like(1_500, 3);
    let idx = build(&g, 4, 3);
    let es = rnet_edges(&idx);
    assert_eq!(es[0], g.edges().collect::<Vec<_>>());
    for r in 1..idx.rnet_count() as u32 {
        let mut verts: Vec<VertexId> = es[r as usize].iter().flat_map(|e| [e.0, e.1]).collect();
        verts.sort_unstable();
        verts.dedup();
        let inside = |u: VertexId, v: VertexId| es[r as usize].binary_search(&(u.min(v), u.max(v), g.weight_between(u, v).unwrap())).is_ok();
        let brute: Vec<VertexId> = verts
            .iter()
            .copied()
            .filter(|&v| g.targets(v).iter().any(|&u| !inside(u, v)))
            .collect();
        assert_eq!(idx.borders(r), &brute[..], "rnet {r}");
        assert_eq!(idx.interior_count(r), verts.len() - brute.len());
        let p = idx.parent(r).unwrap();
        assert!(es[r as usize].iter().all(|e| es[p as usize].binary_search(e).is_ok()));
        // children split the parent's edges; a border stays a border of
        // some child at each lower level
        if !idx.is_leaf(r) {
            let total: usize = idx.children(r).map(|c| es[c as usize].len()).sum();
            assert_eq!(total, es[r as usize].len());
            for &b in idx.borders(r) {
                assert!(idx.children(r).any(|c| idx.borders(c).contains(&b)));
            }
        }
        for &v in &verts {
            assert!(idx.rnets_of(v).contains(&r));
        }
    }
}

#[test]
fn shortcuts_match_restricted_search() {
    let (g, _) = synth::random_planar(400, 5);
    let idx = build(&g, 4, 3);
    let es = rnet_edges(&idx);
    for r in 1..idx.rnet_count() as u32 {
        let bs = idx.borders(r);
        let want = restricted_distances(g.vertex_count(), &es[r as usize], bs, bs);
        for i in 0..bs.len() {
            for j in 0..bs.len() {
                assert_eq!(idx.shortcut(r, i, j), want[i * bs.len() + j], "rnet {r} ({i},{j})");
                if want[i * bs.len() + j] != INF {
                    assert!(idx.shortcut(r, i, j) >= dijkstra_distance(&g, bs[i], bs[j]));
                }
            }
        }
    }
}

#[test]
fn bottom_up_equals_direct() {
    for seed in 0..4 {
        let (g, _) = synth::random_planar(300, seed);
        let mut p = RoadParams::new(3, 3);
        let a = RoadIndex::build(&g, p).unwrap();
        p.shortcuts = ShortcutBuild::Direct;
        let b = RoadIndex::build(&g, p).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn infeasible_level_names_the_level() {
    let (g, _) = synth::random_planar(30, 1);
    match RoadIndex::build(&g, RoadParams::new(4, 4)) {
        Err(Error::InfeasibleLevel { level, fanout, vertices }) => {
            assert!((2..=4).contains(&level));
            assert_eq!(fanout, 4);
            assert!(vertices < 4);
        }
        other => panic!("expected an infeasible level, got {other:?}"),
    }
    assert!(RoadIndex::build(&g, RoadParams::new(1, 2)).is_err());
}

#[test]
fn default_levels_fit_small_graphs() {
    assert_eq!(default_levels(48_812, 4), 7);
    assert_eq!(default_levels(1_000_000, 4), 9);
    assert_eq!(default_levels(24_000_000, 4), 11);
    assert_eq!(default_levels(100, 4), 2);
    for n in [50, 120, 500, 2_000] {
        let (g, _) = synth::random_planar(n, 7);
        RoadIndex::build(&g, RoadParams::for_size(n)).unwrap();
    }
}

#[test]
fn directory_bits_match_scan() {
    let (g, _) = synth::random_planar(500, 9);
    let idx = build(&g, 4, 3);
    let es = rnet_edges(&idx);
    for (density, seed) in [(0.01, 1), (0.1, 2), (1.0, 3)] {
        let o = gen_uniform(&g, density, seed).unwrap();
        let ad = AssociationDirectory::build(&idx, &o);
        for r in 0..idx.rnet_count() as u32 {
            let brute = es[r as usize].iter().any(|e| o.contains(e.0) || o.contains(e.1));
            assert_eq!(ad.has_object(r), brute, "rnet {r}");
            if density == 1.0 {
                assert!(ad.has_object(r));
            }
        }
        for v in 0..500 {
            assert_eq!(ad.is_object(v), o.contains(v));
        }
    }
}

#[test]
fn query_vertex_object() {
    let (g, _) = synth::random_planar(200, 3);
    let idx = build(&g, 4, 2);
    let o = ObjectSet::new(vec![17, 40, 90], 200, ObjectKind::File, None).unwrap();
    let ad = AssociationDirectory::build(&idx, &o);
    assert_eq!(query(&idx, &ad, 40, 1, true).0.entries, vec![(40, 0)]);
}

#[test]
fn objects_on_leaf_borders_keep_search_outside() {
    let (g, _) = synth::road_like(2_000, 11);
    let idx = build(&g, 4, 3);
    let es = rnet_edges(&idx);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    for leaf in (1..idx.rnet_count() as u32).filter(|&r| idx.is_leaf(r) && idx.interior_count(r) > 0) {
        let bs = idx.borders(leaf).to_vec();
        if bs.is_empty() {
            continue;
        }
        let mut vl: Vec<VertexId> = es[leaf as usize].iter().flat_map(|e| [e.0, e.1]).collect();
        vl.sort_unstable();
        vl.dedup();
        let q = loop {
            let q = rng.gen_range(0..2_000);
            if vl.binary_search(&q).is_err() {
                break q;
            }
        };
        let o = ObjectSet::new(bs.clone(), 2_000, ObjectKind::File, None).unwrap();
        let ad = AssociationDirectory::build(&idx, &o);
        let mut s = RoadScratch::new(&idx);
        let mut st = QueryStats::default();
        let got = knn_road(q, 1, &idx, &ad, &mut s, &mut st);
        assert_eq!(got, knn_brute_force(&g, q, 1, &o));
        for &v in vl.iter().filter(|v| bs.binary_search(v).is_err()) {
            assert!(!s.is_settled(v), "interior vertex {v} of leaf {leaf} settled");
        }
        checked += 1;
        if checked == 20 {
            break;
        }
    }
    assert!(checked > 0);
}

#[test]
fn object_free_rnet_is_bypassed_with_fewer_inserts() {
    let (g, _) = synth::road_like(3_000, 21);
    let idx = build(&g, 4, 4);
    let es = rnet_edges(&idx);
    let verts_of = |r: u32| {
        let mut v: Vec<VertexId> = es[r as usize].iter().flat_map(|e| [e.0, e.1]).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    // objects only inside the first top-level Rnet, query inside the last
    let kids: Vec<u32> = idx.children(0).collect();
    let (a, z) = (kids[0], *kids.last().unwrap());
    let va = verts_of(a);
    let vz = verts_of(z);
    let objs: Vec<VertexId> = va.iter().copied().filter(|v| !vz.contains(v)).step_by(40).take(5).collect();
    let q = *vz.iter().find(|v| !va.contains(v) && !idx.borders(z).contains(v)).unwrap();
    let o = ObjectSet::new(objs, 3_000, ObjectKind::File, None).unwrap();
    let ad = AssociationDirectory::build(&idx, &o);
    let (r1, s1) = query(&idx, &ad, q, 3, true);
    let (r0, s0) = query(&idx, &ad, q, 3, false);
    assert_eq!(r1, knn_brute_force(&g, q, 3, &o));
    assert_eq!(r1, r0);
    assert!(s1.queue_inserts < s0.queue_inserts, "{} vs {}", s1.queue_inserts, s0.queue_inserts);
    assert!(s1.vertices_bypassed > 0);
    assert_eq!(s1.vertices_bypassed, s0.vertices_bypassed);
    assert!(s1.settled < 3_000);
}

#[test]
fn all_rnets_occupied_matches_plain_expansion() {
    let (g, _) = synth::random_planar(300, 13);
    let idx = build(&g, 2, 3);
    let all = ObjectSet::new((0..300).collect(), 300, ObjectKind::File, None).unwrap();
    let ad = AssociationDirectory::build(&idx, &all);
    let (r, st) = query(&idx, &ad, 5, 40, true);
    assert_eq!(r, knn_brute_force(&g, 5, 40, &all));
    assert_eq!(st.vertices_bypassed, 0);
    assert_eq!(st.settled, 40);
}

#[test]
fn binary_round_trip_and_determinism() {
    let (g, _) = synth::random_planar(400, 17);
    let idx = build(&g, 4, 3);
    let mut a = Vec::new();
    idx.write_binary(&mut a).unwrap();
    let back = RoadIndex::read_binary(&mut a.as_slice()).unwrap();
    assert_eq!(back, idx);
    let mut b = Vec::new();
    build(&g, 4, 3).write_binary(&mut b).unwrap();
    assert_eq!(a, b);
    let mut p = RoadParams::new(4, 3);
    p.parallelism = crate::par::Parallelism::Sequential;
    assert_eq!(RoadIndex::build(&g, p).unwrap(), idx);
    assert!(idx.byte_size() > 0);
}

#[test]
fn disconnected_inside_rnet_gives_infinite_shortcut() {
    // path 0-1-2-3 plus a detour 0-4-3; restricting to a subset can cut it
    let g = Graph::from_edges(5, &[(0, 1, 1), (1, 2, 1), (2, 3, 1), (0, 4, 5), (4, 3, 5)], WeightKind::Distance).unwrap();
    let d = restricted_distances(5, &[(0, 1, 1), (2, 3, 1)], &[0, 3], &[0, 3]);
    assert_eq!(d, vec![0, INF, INF, 0]);
    let full = dijkstra_sssp(&g, 0);
    assert_eq!(full[3], 3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn knn_matches_brute_force(seed in 0u64..10_000, n in 50usize..400, k in 1usize..12, density in 0.01f64..0.2, f in 2usize..5) {
        let (g, _) = synth::random_planar(n, seed);
        let l = default_levels(n, f).min(4);
        let idx = RoadIndex::build(&g, RoadParams::new(f, l)).unwrap();
        let o = gen_uniform(&g, density, seed).unwrap();
        let ad = AssociationDirectory::build(&idx, &o);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..4 {
            let q = rng.gen_range(0..n as VertexId);
            let want = knn_brute_force(&g, q, k, &o);
            let (a, sa) = query(&idx, &ad, q, k, true);
            let (b, sb) = query(&idx, &ad, q, k, false);
            prop_assert_eq!(&a, &want);
            prop_assert_eq!(&b, &want);
            prop_assert!(sa.queue_inserts <= sb.queue_inserts);
        }
    }
}
