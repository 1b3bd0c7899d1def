//! Result and statistics types shared by every kNN method.

use std::fmt;
use std::str::FromStr;

use crate::dijkstra::dijkstra_sssp;
use crate::graph::{Dist, Graph, VertexId};
use crate::objects::ObjectSet;

/// Total order used to rank objects: distance first, then vertex id.
pub type Key = (Dist, VertexId);

/// Objects in ascending `(distance, id)` order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct KnnResult {
    pub entries: Vec<(VertexId, Dist)>,
}

impl KnnResult {
    pub fn new(entries: Vec<(VertexId, Dist)>) -> Self {
        debug_assert!(entries
            .windows(2)
            .all(|w| (w[0].1, w[0].0) < (w[1].1, w[1].0)));
        KnnResult { entries }
    }

    /// Sorts arbitrary `(vertex, distance)` pairs into result order.
    pub fn from_unsorted(mut entries: Vec<(VertexId, Dist)>) -> Self {
        entries.sort_unstable_by_key(|&(v, d)| (d, v));
        KnnResult { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> Vec<VertexId> {
        self.entries.iter().map(|e| e.0).collect()
    }

    pub fn distances(&self) -> Vec<Dist> {
        self.entries.iter().map(|e| e.1).collect()
    }

    pub fn kth_distance(&self) -> Option<Dist> {
        self.entries.last().map(|e| e.1)
    }
}

/// Brute-force ranking from a full single-source search. Used as the ground
/// truth for every method.
pub fn knn_brute_force(g: &Graph, q: VertexId, k: usize, objects: &ObjectSet) -> KnnResult {
    let dist = dijkstra_sssp(g, q);
    let mut all: Vec<_> = objects.ids().iter().map(|&o| (o, dist[o as usize])).collect();
    all.sort_unstable_by_key(|&(v, d)| (d, v));
    all.truncate(k);
    KnnResult::new(all)
}

/// Per-query operation counters. Fields a method does not use stay zero.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QueryStats {
    /// Vertices settled by an expansion search.
    pub settled: u64,
    /// Priority-queue pushes.
    pub queue_inserts: u64,
    /// Network-distance oracle invocations (IER).
    pub oracle_calls: u64,
    /// Oracle-verified candidates that did not make the result (IER).
    pub false_hits: u64,
    /// Border-to-border additions performed while assembling distances.
    pub path_cost: u64,
    /// Interior vertices skipped through object-free Rnets (ROAD).
    pub vertices_bypassed: u64,
    /// Quadtree lookups made while refining distance intervals.
    pub refine_lookups: u64,
    /// Euclidean nearest neighbours pulled from an R-tree cursor.
    pub cursor_pulls: u64,
    /// Objects whose exact network distance was computed (G-tree).
    pub candidates: u64,
}

impl std::ops::AddAssign for QueryStats {
    fn add_assign(&mut self, o: Self) {
        self.settled += o.settled;
        self.queue_inserts += o.queue_inserts;
        self.oracle_calls += o.oracle_calls;
        self.false_hits += o.false_hits;
        self.path_cost += o.path_cost;
        self.vertices_bypassed += o.vertices_bypassed;
        self.refine_lookups += o.refine_lookups;
        self.cursor_pulls += o.cursor_pulls;
        self.candidates += o.candidates;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Ine,
    IerDijkstra,
    IerGtree,
    DisBrw,
    DbEnn,
    Road,
    Gtree,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Ine,
        Method::IerDijkstra,
        Method::IerGtree,
        Method::DisBrw,
        Method::DbEnn,
        Method::Road,
        Method::Gtree,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Ine => "ine",
            Method::IerDijkstra => "ier-dijkstra",
            Method::IerGtree => "ier-gtree",
            Method::DisBrw => "disbrw",
            Method::DbEnn => "db-enn",
            Method::Road => "road",
            Method::Gtree => "gtree",
        }
    }

    pub fn is_ier(self) -> bool {
        matches!(self, Method::IerDijkstra | Method::IerGtree)
    }

    pub fn needs_silc(self) -> bool {
        matches!(self, Method::DisBrw | Method::DbEnn)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Method::ALL.iter().map(|m| m.name()).collect();
                format!("unknown method `{s}` (expected one of {})", names.join(", "))
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("dijkstra".parse::<Method>().is_err());
    }

    #[test]
    fn unsorted_entries_are_ranked_by_distance_then_id() {
        let r = KnnResult::from_unsorted(vec![(9, 4), (2, 4), (5, 1)]);
        assert_eq!(r.ids(), vec![5, 2, 9]);
        assert_eq!(r.kth_distance(), Some(4));
    }
}
