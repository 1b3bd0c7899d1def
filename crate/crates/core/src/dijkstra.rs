//! Dijkstra's algorithm over the full graph: the ground-truth distance oracle.

use crate::graph::{Dist, Graph, VertexId, INF};
use crate::search::{MinQueue, SettledSet};

/// Reusable per-thread buffers. Distances are reset lazily through the
/// touched list.
#[derive(Debug, Clone)]
pub struct DijkstraScratch {
    dist: Vec<Dist>,
    touched: Vec<VertexId>,
    queue: MinQueue<Dist, VertexId>,
    settled: SettledSet,
    pub settled_count: usize,
}

impl DijkstraScratch {
    pub fn new(n: usize) -> Self {
        DijkstraScratch {
            dist: vec![INF; n],
            touched: Vec::new(),
            queue: MinQueue::new(),
            settled: SettledSet::new(n),
            settled_count: 0,
        }
    }

    fn reset(&mut self) {
        for &v in &self.touched {
            self.dist[v as usize] = INF;
        }
        self.touched.clear();
        self.queue.clear();
        self.settled.reset();
        self.settled_count = 0;
    }

    #[inline]
    fn relax(&mut self, v: VertexId, d: Dist) {
        let slot = &mut self.dist[v as usize];
        if d < *slot {
            if *slot == INF {
                self.touched.push(v);
            }
            *slot = d;
            self.queue.push(d, v);
        }
    }

    /// Runs from `s` until `stop(v, d)` returns true for a settled vertex or
    /// the graph is exhausted.
    pub fn run<F>(&mut self, g: &Graph, s: VertexId, mut stop: F)
    where
        F: FnMut(VertexId, Dist) -> bool,
    {
        self.reset();
        self.relax(s, 0);
        while let Some((d, u)) = self.queue.pop_min() {
            if !self.settled.insert(u) {
                continue;
            }
            self.settled_count += 1;
            if stop(u, d) {
                return;
            }
            for (v, w) in g.neighbors(u) {
                if !self.settled.query(v) {
                    self.relax(v, d + w);
                }
            }
        }
    }

    /// Tentative or final distance from the last run.
    #[inline]
    pub fn dist(&self, v: VertexId) -> Dist {
        self.dist[v as usize]
    }

    #[inline]
    pub fn is_settled(&self, v: VertexId) -> bool {
        self.settled.query(v)
    }
}

pub fn dijkstra_sssp(g: &Graph, s: VertexId) -> Vec<Dist> {
    let mut scratch = DijkstraScratch::new(g.vertex_count());
    scratch.run(g, s, |_, _| false);
    scratch.dist
}

pub fn dijkstra_distance(g: &Graph, s: VertexId, t: VertexId) -> Dist {
    let mut scratch = DijkstraScratch::new(g.vertex_count());
    dijkstra_distance_with(g, s, t, &mut scratch)
}

pub fn dijkstra_distance_with(
    g: &Graph,
    s: VertexId,
    t: VertexId,
    scratch: &mut DijkstraScratch,
) -> Dist {
    let mut out = INF;
    scratch.run(g, s, |v, d| {
        if v == t {
            out = d;
            true
        } else {
            false
        }
    });
    out
}

/// Distances from `s` to each of `targets`, stopping once all are settled.
pub fn dijkstra_to_targets(
    g: &Graph,
    s: VertexId,
    targets: &[VertexId],
    scratch: &mut DijkstraScratch,
    is_target: &mut [bool],
) -> Vec<Dist> {
    let mut remaining = 0usize;
    for &t in targets {
        if !is_target[t as usize] {
            is_target[t as usize] = true;
            remaining += 1;
        }
    }
    if remaining > 0 {
        scratch.run(g, s, |v, _| {
            if is_target[v as usize] {
                remaining -= 1;
            }
            remaining == 0
        });
    }
    for &t in targets {
        is_target[t as usize] = false;
    }
    targets.iter().map(|&t| scratch.dist(t)).collect()
}
