use std::collections::BTreeSet;

use super::{DistanceInterval, Refinement, SilcIndex};
use crate::graph::{euclid_lower_bound, Dist, VertexId, INF};
use crate::hierarchy::ObjectHierarchy;
use crate::knn::{Key, KnnResult, QueryStats};
use crate::rtree::RTree;
use crate::search::MinQueue;

const NODE: u8 = 0;
const OBJECT: u8 = 1;
const NO_KEY: Key = (INF, VertexId::MAX);

/// Per-thread buffers for distance browsing.
#[derive(Default)]
pub struct SilcScratch {
    /// Lower-bound keys; objects tie on their id, nodes on 0.
    queue: MinQueue<Key, (u8, u32)>,
    items: Vec<DistanceInterval>,
    in_l: Vec<bool>,
    /// Upper-bound keys of the current candidates with item indexes.
    l: BTreeSet<(Dist, VertexId, u32)>,
}

impl SilcScratch {
    pub fn new() -> Self {
        SilcScratch::default()
    }
}

/// Shared state of both browsing variants. Every object carries the keys
/// `(lo, id)` and `(hi, id)`; node keys are `(lo, 0)` and `(hi, MAX)`, which
/// bound the keys of every object below.
struct Browse<'a> {
    idx: &'a SilcIndex,
    q: VertexId,
    k: usize,
    mode: Refinement,
    s: &'a mut SilcScratch,
    stats: &'a mut QueryStats,
    /// Upper bound on the key of the k-th nearest object.
    dk: Key,
    steps: u64,
    budget: u64,
}

impl<'a> Browse<'a> {
    #[allow(clippy::too_many_arguments)]
    fn new(
        idx: &'a SilcIndex,
        q: VertexId,
        k: usize,
        mode: Refinement,
        s: &'a mut SilcScratch,
        stats: &'a mut QueryStats,
        objects: usize,
        nodes: usize,
    ) -> Self {
        s.queue.clear();
        s.items.clear();
        s.in_l.clear();
        s.l.clear();
        let budget = (nodes as u64 + objects as u64 * (idx.vertex_count() as u64 + 1)).max(1);
        Browse {
            idx,
            q,
            k,
            mode,
            s,
            stats,
            dk: NO_KEY,
            steps: 0,
            budget,
        }
    }

    fn front(&self) -> Key {
        self.s.queue.peek_key().unwrap_or(NO_KEY)
    }

    fn push(&mut self, key: Key, kind: u8, id: u32) {
        self.s.queue.push(key, (kind, id));
        self.stats.queue_inserts += 1;
    }

    /// Adds an object after the O(1) Euclidean pre-check.
    fn insert_object(&mut self, o: VertexId) {
        let idx = self.idx;
        let d_e = idx.point(self.q).dist(idx.point(o));
        if (euclid_lower_bound(d_e, idx.lower_bound_scale()), o) >= self.dk {
            return;
        }
        let iv = idx.interval(self.q, o, self.stats);
        if (iv.lo, o) >= self.dk {
            return;
        }
        let item = self.s.items.len() as u32;
        self.s.items.push(iv);
        self.s.in_l.push(false);
        self.push((iv.lo, o), OBJECT, item);
        self.update_l(item);
    }

    /// Makes `item` a candidate if its upper bound is within `dk`.
    fn update_l(&mut self, item: u32) {
        let iv = self.s.items[item as usize];
        if (iv.hi, iv.target) > self.dk {
            return;
        }
        self.s.l.insert((iv.hi, iv.target, item));
        self.s.in_l[item as usize] = true;
        if self.s.l.len() > self.k {
            let (_, _, out) = self.s.l.pop_last().expect("non-empty");
            self.s.in_l[out as usize] = false;
        }
        if self.s.l.len() == self.k {
            let &(hi, o, _) = self.s.l.last().expect("non-empty");
            self.dk = self.dk.min((hi, o));
        }
    }

    fn remove_l(&mut self, item: u32) {
        if self.s.in_l[item as usize] {
            let iv = self.s.items[item as usize];
            self.s.l.remove(&(iv.hi, iv.target, item));
            self.s.in_l[item as usize] = false;
        }
    }

    /// Pops one queue entry. Returns it, or `None` when the search is done.
    fn pop(&mut self) -> Option<(Key, u8, u32)> {
        let (key, (kind, id)) = self.s.queue.pop_min()?;
        self.steps += 1;
        assert!(
            self.steps <= self.budget,
            "distance browsing exceeded its step budget of {}",
            self.budget
        );
        (key < self.dk).then_some((key, kind, id))
    }

    /// Settles a dequeued object: dropped once it is a known candidate whose
    /// upper bound beats everything queued and every key not yet inserted
    /// (bounded below by `pending`), refined by one step otherwise.
    fn process_object(&mut self, item: u32, pending: Key) {
        let iv = self.s.items[item as usize];
        let ub = (iv.hi, iv.target);
        if ub <= self.dk && (iv.is_exact() || ub < self.front().min(pending)) {
            debug_assert!(self.s.in_l[item as usize]);
            return;
        }
        self.remove_l(item);
        let mut iv = iv;
        self.idx.refine_step(&mut iv, self.mode, self.stats);
        self.s.items[item as usize] = iv;
        self.update_l(item);
        if (iv.lo, iv.target) <= self.dk {
            self.push((iv.lo, iv.target), OBJECT, item);
        }
    }

    /// Refines the candidates to exact distances.
    fn finish(self) -> KnnResult {
        let items: Vec<u32> = self.s.l.iter().map(|e| e.2).collect();
        let mut out = Vec::with_capacity(items.len());
        for item in items {
            let iv = &mut self.s.items[item as usize];
            let d = self.idx.refine_to_exact(iv, self.mode, self.stats);
            out.push((iv.target, d));
        }
        KnnResult::from_unsorted(out)
    }
}

/// Distance browsing over an object hierarchy.
pub fn knn_disbrw(
    q: VertexId,
    k: usize,
    idx: &SilcIndex,
    oh: &ObjectHierarchy,
    scratch: &mut SilcScratch,
    stats: &mut QueryStats,
) -> KnnResult {
    knn_disbrw_with(q, k, idx, oh, scratch, stats, Refinement::Chain)
}

pub fn knn_disbrw_with(
    q: VertexId,
    k: usize,
    idx: &SilcIndex,
    oh: &ObjectHierarchy,
    scratch: &mut SilcScratch,
    stats: &mut QueryStats,
    mode: Refinement,
) -> KnnResult {
    let root = oh.root();
    if k == 0 || oh.count(root) == 0 {
        return KnnResult::default();
    }
    let mut b = Browse::new(idx, q, k, mode, scratch, stats, oh.count(root), oh.node_count());
    b.push((0, 0), NODE, root);
    while let Some((_, kind, id)) = b.pop() {
        if kind == OBJECT {
            b.process_object(id, NO_KEY);
        } else if oh.is_leaf(id) {
            for &o in oh.objects(id) {
                b.insert_object(o);
            }
        } else {
            for c in oh.children(id) {
                let (lo, hi) = idx.region_interval(q, &oh.bounds(c));
                if (lo, 0) < b.dk {
                    b.push((lo, 0), NODE, c);
                    if oh.count(c) >= k {
                        b.dk = b.dk.min((hi, VertexId::MAX));
                    }
                }
            }
        }
    }
    b.finish()
}

/// Distance browsing fed by Euclidean nearest neighbours instead of an
/// object hierarchy.
pub fn knn_db_enn(
    q: VertexId,
    k: usize,
    idx: &SilcIndex,
    rt: &RTree,
    scratch: &mut SilcScratch,
    stats: &mut QueryStats,
) -> KnnResult {
    knn_db_enn_with(q, k, idx, rt, scratch, stats, Refinement::Chain)
}

pub fn knn_db_enn_with(
    q: VertexId,
    k: usize,
    idx: &SilcIndex,
    rt: &RTree,
    scratch: &mut SilcScratch,
    stats: &mut QueryStats,
    mode: Refinement,
) -> KnnResult {
    if k == 0 || rt.is_empty() {
        return KnnResult::default();
    }
    let mut cursor = rt.cursor(idx.point(q));
    let mut b = Browse::new(idx, q, k, mode, scratch, stats, rt.len(), 0);
    for _ in 0..k {
        match cursor.next_nn() {
            Some((o, _)) => b.insert_object(o),
            None => break,
        }
    }
    loop {
        // pull while the next Euclidean neighbour could precede the queue front
        while let Some(d_e) = cursor.peek_distance() {
            let front = (euclid_lower_bound(d_e, idx.lower_bound_scale()), 0);
            if front >= b.dk || front >= b.front() {
                break;
            }
            if let Some((o, _)) = cursor.next_nn() {
                b.insert_object(o);
            }
        }
        match b.pop() {
            Some((_, _, item)) => {
                let pending = cursor
                    .peek_distance()
                    .map_or(NO_KEY, |d_e| (euclid_lower_bound(d_e, idx.lower_bound_scale()), 0));
                b.process_object(item, pending)
            }
            None => break,
        }
    }
    b.stats.cursor_pulls += cursor.pulls();
    b.finish()
}
