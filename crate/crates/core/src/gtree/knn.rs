use super::{AssemblyState, GTreeIndex, OccurrenceList, NONE};
use crate::graph::{Dist, VertexId, INF};
use crate::knn::{KnnResult, QueryStats};
use crate::search::MinQueue;

const NODE: u8 = 0;
const VERTEX: u8 = 1;

/// Per-thread buffers for G-tree queries.
pub struct GtreeScratch {
    pub assembly: AssemblyState,
    /// Entries ordered by (distance, node-before-vertex, id).
    queue: MinQueue<(Dist, u8), u32>,
    leaf_queue: MinQueue<Dist, u32>,
    visited: Vec<bool>,
    border_slot: Vec<u32>,
}

impl GtreeScratch {
    pub fn new(idx: &GTreeIndex) -> Self {
        GtreeScratch {
            assembly: AssemblyState::new(idx),
            queue: MinQueue::new(),
            leaf_queue: MinQueue::new(),
            visited: Vec::new(),
            border_slot: Vec::new(),
        }
    }
}

/// Best-first traversal of the G-tree from the query leaf upwards, using the
/// improved leaf search.
pub fn knn_gtree(
    q: VertexId,
    k: usize,
    idx: &GTreeIndex,
    ol: &OccurrenceList,
    scratch: &mut GtreeScratch,
    stats: &mut QueryStats,
) -> KnnResult {
    knn_with(q, k, idx, ol, scratch, stats, true)
}

/// Same traversal, but the query leaf is scanned in full: every leaf object
/// gets its exact distance and is queued.
pub fn knn_gtree_unimproved(
    q: VertexId,
    k: usize,
    idx: &GTreeIndex,
    ol: &OccurrenceList,
    scratch: &mut GtreeScratch,
    stats: &mut QueryStats,
) -> KnnResult {
    knn_with(q, k, idx, ol, scratch, stats, false)
}

fn knn_with(
    q: VertexId,
    k: usize,
    idx: &GTreeIndex,
    ol: &OccurrenceList,
    s: &mut GtreeScratch,
    stats: &mut QueryStats,
    improved: bool,
) -> KnnResult {
    let mut result: Vec<(VertexId, Dist)> = Vec::with_capacity(k);
    if k == 0 {
        return KnnResult::default();
    }
    s.assembly.reset(idx, q);
    s.queue.clear();
    let leaf = idx.leaf_of(q);
    if ol.is_occupied(leaf) {
        if improved {
            leaf_search(q, k, idx, ol, s, &mut result, stats);
        } else {
            leaf_scan(q, idx, ol, s, stats);
        }
    }
    let root = idx.root();
    let mut tn = leaf;
    let mut t_min = if tn == root { INF } else { s.assembly.node_distance(idx, tn) };
    while result.len() < k && (!s.queue.is_empty() || tn != root) {
        if s.queue.is_empty() {
            update_t(idx, ol, s, &mut tn, &mut t_min, stats);
        }
        let Some(((d, kind), e)) = s.queue.pop_min() else {
            continue;
        };
        if d > t_min {
            update_t(idx, ol, s, &mut tn, &mut t_min, stats);
            s.queue.push((d, kind), e);
            stats.queue_inserts += 1;
        } else if kind == VERTEX {
            result.push((e, d));
        } else if idx.is_leaf(e) {
            for &o in ol.get(e) {
                let d = s.assembly.distance(idx, o);
                s.queue.push((d, VERTEX), o);
                stats.queue_inserts += 1;
                stats.candidates += 1;
            }
        } else {
            for &c in ol.get(e) {
                let d = s.assembly.node_distance(idx, c);
                s.queue.push((d, NODE), c);
                stats.queue_inserts += 1;
            }
        }
    }
    stats.path_cost += s.assembly.path_cost();
    KnnResult::new(result)
}

fn update_t(
    idx: &GTreeIndex,
    ol: &OccurrenceList,
    s: &mut GtreeScratch,
    tn: &mut u32,
    t_min: &mut Dist,
    stats: &mut QueryStats,
) {
    let prev = *tn;
    *tn = idx.parent(prev).expect("not at the root");
    *t_min = if *tn == idx.root() { INF } else { s.assembly.node_distance(idx, *tn) };
    for &c in ol.get(*tn) {
        if c != prev {
            let d = s.assembly.node_distance(idx, c);
            s.queue.push((d, NODE), c);
            stats.queue_inserts += 1;
        }
    }
}

fn prepare_leaf(idx: &GTreeIndex, leaf: u32, s: &mut GtreeScratch) {
    let size = idx.leaf_vertices(leaf).len();
    s.visited.clear();
    s.visited.resize(size, false);
    s.border_slot.clear();
    s.border_slot.resize(size, NONE);
    for (j, &p) in idx.own_border_positions(leaf).iter().enumerate() {
        s.border_slot[p as usize] = j as u32;
    }
    s.leaf_queue.clear();
}

/// Dijkstra over the query leaf where borders also reach each other through
/// the leaf matrix. Objects settled before any border are final; later ones
/// go to the main queue. Stops after `k` objects.
fn leaf_search(
    q: VertexId,
    k: usize,
    idx: &GTreeIndex,
    ol: &OccurrenceList,
    s: &mut GtreeScratch,
    result: &mut Vec<(VertexId, Dist)>,
    stats: &mut QueryStats,
) {
    let leaf = idx.leaf_of(q);
    prepare_leaf(idx, leaf, s);
    let verts = idx.leaf_vertices(leaf);
    let objects = ol.get(leaf);
    let border_pos = idx.own_border_positions(leaf);
    s.leaf_queue.push(0, idx.position_in_leaf(q) as u32);
    stats.queue_inserts += 1;
    let mut found = 0;
    let mut border_found = false;
    while result.len() < k && found < k {
        let Some((d, p)) = s.leaf_queue.pop_min() else {
            break;
        };
        let p = p as usize;
        if s.visited[p] {
            continue;
        }
        s.visited[p] = true;
        stats.settled += 1;
        let v = verts[p];
        if objects.binary_search(&v).is_ok() {
            found += 1;
            stats.candidates += 1;
            if border_found {
                s.queue.push((d, VERTEX), v);
                stats.queue_inserts += 1;
            } else {
                result.push((v, d));
            }
        }
        for (u, w) in idx.leaf_adjacency(leaf, p) {
            if !s.visited[u as usize] {
                s.leaf_queue.push(d + w, u);
                stats.queue_inserts += 1;
            }
        }
        if s.border_slot[p] != NONE {
            for (j, &bp) in border_pos.iter().enumerate() {
                if !s.visited[bp as usize] {
                    s.leaf_queue.push(d + idx.leaf_distance(leaf, p, j), bp);
                    stats.queue_inserts += 1;
                }
            }
            border_found = true;
        }
    }
}

/// Leaf-restricted Dijkstra until every leaf object is settled, then each
/// object's distance is improved through the borders and queued.
fn leaf_scan(q: VertexId, idx: &GTreeIndex, ol: &OccurrenceList, s: &mut GtreeScratch, stats: &mut QueryStats) {
    let leaf = idx.leaf_of(q);
    prepare_leaf(idx, leaf, s);
    let verts = idx.leaf_vertices(leaf);
    let objects = ol.get(leaf);
    let qp = idx.position_in_leaf(q);
    let mut dist = vec![INF; verts.len()];
    dist[qp] = 0;
    s.leaf_queue.push(0, qp as u32);
    stats.queue_inserts += 1;
    let mut remaining = objects.len();
    while remaining > 0 {
        let Some((d, p)) = s.leaf_queue.pop_min() else {
            break;
        };
        let p = p as usize;
        if s.visited[p] {
            continue;
        }
        s.visited[p] = true;
        stats.settled += 1;
        if objects.binary_search(&verts[p]).is_ok() {
            remaining -= 1;
        }
        for (u, w) in idx.leaf_adjacency(leaf, p) {
            if d + w < dist[u as usize] {
                dist[u as usize] = d + w;
                s.leaf_queue.push(d + w, u);
                stats.queue_inserts += 1;
            }
        }
    }
    let nb = idx.borders(leaf).len();
    for &o in objects {
        let op = idx.position_in_leaf(o);
        let mut d = dist[op];
        for j in 0..nb {
            d = d.min(idx.leaf_distance(leaf, qp, j) + idx.leaf_distance(leaf, op, j));
        }
        stats.path_cost += nb as u64;
        stats.candidates += 1;
        s.queue.push((d, VERTEX), o);
        stats.queue_inserts += 1;
    }
}
