use super::{AssemblyState, GTreeIndex};
use crate::graph::{Dist, VertexId};
use crate::ier::DistanceOracle;
use crate::knn::QueryStats;

/// Point-to-point distances by G-tree assembly, reusing border rows of
/// already visited nodes for every target from the same source.
pub struct MGtreeOracle<'a> {
    idx: &'a GTreeIndex,
    state: AssemblyState,
}

impl<'a> MGtreeOracle<'a> {
    pub fn new(idx: &'a GTreeIndex) -> Self {
        MGtreeOracle {
            idx,
            state: AssemblyState::new(idx),
        }
    }

    /// Non-leaf matrix sweeps since the last source reset.
    pub fn sweeps(&self) -> u64 {
        self.state.sweeps()
    }
}

impl DistanceOracle for MGtreeOracle<'_> {
    fn supports_materialization(&self) -> bool {
        true
    }

    fn reset_source(&mut self, s: VertexId) {
        self.state.reset(self.idx, s);
    }

    fn distance(&mut self, t: VertexId) -> Dist {
        self.state.distance(self.idx, t)
    }

    fn add_stats(&self, stats: &mut QueryStats) {
        stats.path_cost += self.state.path_cost();
    }
}
