//! Incremental Euclidean restriction over a pluggable distance oracle.

use std::collections::BinaryHeap;

use crate::dijkstra::{dijkstra_distance_with, DijkstraScratch};
use crate::graph::{euclid_lower_bound, CoordinateTable, Dist, Graph, VertexId};
use crate::knn::{KnnResult, QueryStats};
use crate::rtree::RTree;

/// Exact point-to-point network distances.
///
/// Implementations with `supports_materialization` keep per-source state
/// between `distance` calls; [`knn_ier`] calls `reset_source` once per query
/// either way.
pub trait DistanceOracle {
    fn supports_materialization(&self) -> bool {
        false
    }

    fn reset_source(&mut self, s: VertexId);

    /// Distance from the current source to `t`.
    fn distance(&mut self, t: VertexId) -> Dist;

    fn distance_between(&mut self, s: VertexId, t: VertexId) -> Dist {
        self.reset_source(s);
        self.distance(t)
    }

    /// Adds implementation-specific counters gathered since the last reset.
    fn add_stats(&self, _stats: &mut QueryStats) {}
}

/// A fresh early-exit Dijkstra search per call, with no reuse across calls.
pub struct DijkstraOracle<'g> {
    g: &'g Graph,
    scratch: DijkstraScratch,
    source: VertexId,
    settled: u64,
}

impl<'g> DijkstraOracle<'g> {
    pub fn new(g: &'g Graph) -> Self {
        DijkstraOracle {
            g,
            scratch: DijkstraScratch::new(g.vertex_count()),
            source: 0,
            settled: 0,
        }
    }
}

impl DistanceOracle for DijkstraOracle<'_> {
    fn reset_source(&mut self, s: VertexId) {
        self.source = s;
        self.settled = 0;
    }

    fn distance(&mut self, t: VertexId) -> Dist {
        let d = dijkstra_distance_with(self.g, self.source, t, &mut self.scratch);
        self.settled += self.scratch.settled_count as u64;
        d
    }

    fn add_stats(&self, stats: &mut QueryStats) {
        stats.settled += self.settled;
    }
}

/// Candidates come from the Euclidean cursor in ascending `d_E` order; each
/// is verified by `oracle` unless its lower bound `ceil(d_E * lb_scale)`
/// already loses to the current `k`-th candidate. Stops at the first
/// candidate whose bound exceeds that distance.
pub fn knn_ier<O: DistanceOracle + ?Sized>(
    q: VertexId,
    k: usize,
    oracle: &mut O,
    rtree: &RTree,
    coords: &CoordinateTable,
    lb_scale: f64,
    stats: &mut QueryStats,
) -> KnnResult {
    if k == 0 {
        return KnnResult::default();
    }
    oracle.reset_source(q);
    let mut best: BinaryHeap<(Dist, VertexId)> = BinaryHeap::with_capacity(k + 1);
    let mut cursor = rtree.cursor(coords.point(q));
    let mut calls = 0u64;
    while let Some((p, d_e)) = cursor.next_nn() {
        if best.len() == k {
            let top = *best.peek().expect("full heap");
            let bound = euclid_lower_bound(d_e, lb_scale);
            if bound > top.0 {
                break;
            }
            if (bound, p) > top {
                continue;
            }
        }
        let d = oracle.distance(p);
        calls += 1;
        if best.len() < k {
            best.push((d, p));
        } else if (d, p) < *best.peek().expect("full heap") {
            best.pop();
            best.push((d, p));
        }
    }
    let result = KnnResult::from_unsorted(best.into_iter().map(|(d, v)| (v, d)).collect());
    stats.oracle_calls += calls;
    stats.false_hits += calls - result.len() as u64;
    stats.cursor_pulls += cursor.pulls();
    oracle.add_stats(stats);
    result
}
