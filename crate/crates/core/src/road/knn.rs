use super::{AssociationDirectory, RoadIndex, NONE};
use crate::graph::{Dist, VertexId, INF};
use crate::knn::{KnnResult, QueryStats};
use crate::search::{MinQueue, SettledSet};

/// Per-thread buffers for ROAD queries.
pub struct RoadScratch {
    queue: MinQueue<Dist, VertexId>,
    visited: SettledSet,
    stack: Vec<u32>,
    /// Query stamp per Rnet, so each bypassed Rnet is counted once.
    bypassed: Vec<u32>,
    stamp: u32,
}

impl RoadScratch {
    pub fn new(idx: &RoadIndex) -> Self {
        RoadScratch {
            queue: MinQueue::new(),
            visited: SettledSet::new(idx.vertex_count()),
            stack: Vec::new(),
            bypassed: vec![0; idx.rnet_count()],
            stamp: 0,
        }
    }

    /// Whether the last query settled `v`.
    pub fn is_settled(&self, v: VertexId) -> bool {
        self.visited.query(v)
    }
}

/// Network expansion from `q` that bypasses object-free Rnets, skipping
/// shortcut targets that are already settled.
pub fn knn_road(
    q: VertexId,
    k: usize,
    idx: &RoadIndex,
    ad: &AssociationDirectory,
    scratch: &mut RoadScratch,
    stats: &mut QueryStats,
) -> KnnResult {
    knn_road_with(q, k, idx, ad, scratch, stats, true)
}

/// As [`knn_road`]; with `visited_pruning` off every shortcut target is
/// queued and discarded later if already settled.
pub fn knn_road_with(
    q: VertexId,
    k: usize,
    idx: &RoadIndex,
    ad: &AssociationDirectory,
    s: &mut RoadScratch,
    stats: &mut QueryStats,
    visited_pruning: bool,
) -> KnnResult {
    let mut out = Vec::with_capacity(k);
    if k == 0 {
        return KnnResult::default();
    }
    s.visited.reset();
    s.queue.clear();
    s.stamp = s.stamp.wrapping_add(1);
    if s.stamp == 0 {
        s.bypassed.iter_mut().for_each(|x| *x = 0);
        s.stamp = 1;
    }
    s.queue.push(0, q);
    stats.queue_inserts += 1;
    while out.len() < k {
        let Some((d, v)) = s.queue.pop_min() else {
            break;
        };
        if s.visited.query(v) {
            continue;
        }
        if ad.is_object(v) {
            out.push((v, d));
        }
        s.visited.mark(v);
        stats.settled += 1;
        if out.len() < k {
            relax(v, d, idx, ad, s, stats, visited_pruning);
        }
    }
    KnnResult::new(out)
}

/// Walks the shortcut tree of `v`: object-free Rnets with `v` as a border are
/// crossed by shortcuts, occupied ones are descended, and leaves relax edges.
fn relax(
    v: VertexId,
    d: Dist,
    idx: &RoadIndex,
    ad: &AssociationDirectory,
    s: &mut RoadScratch,
    stats: &mut QueryStats,
    visited_pruning: bool,
) {
    let range = idx.entries_of(v);
    push_siblings(&mut s.stack, idx, range.start, range.end);
    while let Some(at) = s.stack.pop() {
        let e = idx.entries[at as usize];
        if e.row != NONE && !ad.has_object(e.rnet) {
            let bs = idx.borders(e.rnet);
            for (j, &w) in idx.shortcut_row(e.rnet, e.row).iter().enumerate() {
                let b = bs[j];
                if w == INF || b == v || (visited_pruning && s.visited.query(b)) {
                    continue;
                }
                s.queue.push(d + w, b);
                stats.queue_inserts += 1;
            }
            if s.bypassed[e.rnet as usize] != s.stamp {
                s.bypassed[e.rnet as usize] = s.stamp;
                stats.vertices_bypassed += idx.interior_count(e.rnet) as u64;
            }
        } else if idx.is_leaf(e.rnet) {
            let es = e.edge_start as usize..(e.edge_start + e.edge_len) as usize;
            for (&t, &w) in idx.edge_target[es.clone()].iter().zip(&idx.edge_weight[es]) {
                if !s.visited.query(t) {
                    s.queue.push(d + w, t);
                    stats.queue_inserts += 1;
                }
            }
        } else {
            push_siblings(&mut s.stack, idx, at as usize + 1, e.end as usize);
        }
    }
}

fn push_siblings(stack: &mut Vec<u32>, idx: &RoadIndex, start: usize, end: usize) {
    let mut i = start;
    while i < end {
        stack.push(i as u32);
        i = idx.entries[i].end as usize;
    }
}
