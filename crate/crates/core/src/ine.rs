//! Incremental network expansion.

use crate::dijkstra::DijkstraScratch;
use crate::graph::{Graph, VertexId};
use crate::knn::{KnnResult, QueryStats};
use crate::objects::ObjectSet;

/// Expands from `q` in `(distance, id)` order and stops at the `k`-th
/// settled object.
pub fn knn_ine(
    g: &Graph,
    q: VertexId,
    k: usize,
    objects: &ObjectSet,
    scratch: &mut DijkstraScratch,
    stats: &mut QueryStats,
) -> KnnResult {
    let mut out = Vec::with_capacity(k.min(objects.len()));
    if k > 0 {
        scratch.run(g, q, |v, d| {
            if objects.contains(v) {
                out.push((v, d));
            }
            out.len() >= k
        });
    }
    stats.settled += scratch.settled_count as u64;
    KnnResult::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dijkstra::dijkstra_sssp;
    use crate::graph::WeightKind;
    use crate::knn::knn_brute_force;
    use crate::objects::{gen_uniform, ObjectKind};
    use crate::synth;
    use proptest::prelude::*;

    fn run(g: &Graph, q: VertexId, k: usize, o: &ObjectSet) -> (KnnResult, QueryStats) {
        let mut s = DijkstraScratch::new(g.vertex_count());
        let mut st = QueryStats::default();
        (knn_ine(g, q, k, o, &mut s, &mut st), st)
    }

    #[test]
    fn query_vertex_object() {
        let (g, _) = synth::random_planar(50, 1);
        let o = ObjectSet::new(vec![7, 20], 50, ObjectKind::File, None).unwrap();
        assert_eq!(run(&g, 7, 1, &o).0.entries, vec![(7, 0)]);
    }

    #[test]
    fn k_beyond_object_count_returns_all() {
        let g = Graph::from_edges(4, &[(0, 1, 3), (1, 2, 3), (2, 3, 3)], WeightKind::Distance).unwrap();
        let o = ObjectSet::new(vec![3, 1], 4, ObjectKind::File, None).unwrap();
        assert_eq!(run(&g, 0, 10, &o).0.entries, vec![(1, 3), (3, 9)]);
    }

    #[test]
    fn ties_resolve_by_id() {
        let g = Graph::from_edges(3, &[(0, 1, 4), (0, 2, 4)], WeightKind::Distance).unwrap();
        let o = ObjectSet::new(vec![1, 2], 3, ObjectKind::File, None).unwrap();
        assert_eq!(run(&g, 0, 1, &o).0.entries, vec![(1, 4)]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]
        #[test]
        fn matches_sssp_ranking(seed in 0u64..10_000, k in 1usize..15) {
            let (g, _) = synth::random_planar(300, seed);
            let o = gen_uniform(&g, 0.05, seed).unwrap();
            let q = (seed % 300) as VertexId;
            let (r, st) = run(&g, q, k, &o);
            prop_assert_eq!(&r, &knn_brute_force(&g, q, k, &o));
            // everything strictly closer than the k-th object was settled
            let dist = dijkstra_sssp(&g, q);
            let dk = r.kth_distance().unwrap();
            let closer = dist.iter().filter(|&&d| d < dk).count() as u64;
            let at_dk = dist.iter().filter(|&&d| d == dk).count() as u64;
            prop_assert!(st.settled > closer && st.settled <= closer + at_dk);
        }
    }
}
