//! Bulk-loaded R-tree over object coordinates with a resumable best-first
//! nearest-neighbour cursor.

use std::cmp::Ordering;

use crate::graph::{CoordinateTable, Point, VertexId};
use crate::objects::ObjectSet;
use crate::search::MinQueue;

pub const DEFAULT_NODE_CAPACITY: usize = 64;

/// Closed axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub lo: Point,
    pub hi: Point,
}

impl Rect {
    pub fn empty() -> Rect {
        Rect {
            lo: Point::new(f64::INFINITY, f64::INFINITY),
            hi: Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    pub fn of_point(p: Point) -> Rect {
        Rect { lo: p, hi: p }
    }

    pub fn expand(&mut self, p: Point) {
        self.lo.x = self.lo.x.min(p.x);
        self.lo.y = self.lo.y.min(p.y);
        self.hi.x = self.hi.x.max(p.x);
        self.hi.y = self.hi.y.max(p.y);
    }

    pub fn union(&mut self, r: &Rect) {
        self.expand(r.lo);
        self.expand(r.hi);
    }

    pub fn contains_point(&self, p: Point) -> bool {
        p.x >= self.lo.x && p.x <= self.hi.x && p.y >= self.lo.y && p.y <= self.hi.y
    }

    pub fn contains_rect(&self, r: &Rect) -> bool {
        self.contains_point(r.lo) && self.contains_point(r.hi)
    }

    pub fn intersects(&self, r: &Rect) -> bool {
        self.lo.x <= r.hi.x && r.lo.x <= self.hi.x && self.lo.y <= r.hi.y && r.lo.y <= self.hi.y
    }

    /// Smallest distance from `q` to any point of the rectangle. Never
    /// exceeds `q.dist(p)` for a contained `p`, bit for bit.
    #[inline]
    pub fn min_dist(&self, q: Point) -> f64 {
        let c = Point::new(q.x.clamp(self.lo.x, self.hi.x), q.y.clamp(self.lo.y, self.hi.y));
        q.dist(c)
    }

    /// Largest distance from `q` to any point of the rectangle.
    pub fn max_dist(&self, q: Point) -> f64 {
        let fx = if (q.x - self.lo.x).abs() > (q.x - self.hi.x).abs() { self.lo.x } else { self.hi.x };
        let fy = if (q.y - self.lo.y).abs() > (q.y - self.hi.y).abs() { self.lo.y } else { self.hi.y };
        q.dist(Point::new(fx, fy))
    }

    pub fn center(&self) -> Point {
        Point::new((self.lo.x + self.hi.x) / 2.0, (self.lo.y + self.hi.y) / 2.0)
    }
}

#[derive(Debug, Clone)]
struct Node {
    rect: Rect,
    start: u32,
    end: u32,
    leaf: bool,
}

#[derive(Debug, Clone)]
pub struct RTree {
    entries: Vec<(Point, VertexId)>,
    nodes: Vec<Node>,
    root: u32,
    capacity: usize,
}

impl RTree {
    pub fn build(objects: &ObjectSet, coords: &CoordinateTable) -> RTree {
        Self::with_capacity(objects, coords, DEFAULT_NODE_CAPACITY)
    }

    /// Sort-tile-recursive packing with `capacity` entries per node.
    pub fn with_capacity(objects: &ObjectSet, coords: &CoordinateTable, capacity: usize) -> RTree {
        let capacity = capacity.max(2);
        let mut entries: Vec<(Point, VertexId)> =
            objects.ids().iter().map(|&v| (coords.point(v), v)).collect();
        let centres: Vec<Point> = entries.iter().map(|e| e.0).collect();
        let order = str_order(&centres, capacity);
        entries = order.iter().map(|&i| entries[i]).collect();

        let mut nodes = Vec::new();
        let mut level: Vec<u32> = Vec::new();
        for (c, chunk) in entries.chunks(capacity).enumerate() {
            let mut rect = Rect::empty();
            chunk.iter().for_each(|e| rect.expand(e.0));
            let start = (c * capacity) as u32;
            nodes.push(Node {
                rect,
                start,
                end: start + chunk.len() as u32,
                leaf: true,
            });
            level.push(nodes.len() as u32 - 1);
        }
        while level.len() > 1 {
            let centres: Vec<Point> = level.iter().map(|&n| nodes[n as usize].rect.center()).collect();
            let order = str_order(&centres, capacity);
            let packed: Vec<u32> = order.iter().map(|&i| level[i]).collect();
            // children of one parent must be contiguous in `nodes`
            let base = nodes.len() as u32;
            for &n in &packed {
                let copy = nodes[n as usize].clone();
                nodes.push(copy);
            }
            let mut next = Vec::new();
            for (c, chunk) in packed.chunks(capacity).enumerate() {
                let start = base + (c * capacity) as u32;
                let mut rect = Rect::empty();
                for i in 0..chunk.len() as u32 {
                    rect.union(&nodes[(start + i) as usize].rect);
                }
                nodes.push(Node {
                    rect,
                    start,
                    end: start + chunk.len() as u32,
                    leaf: false,
                });
                next.push(nodes.len() as u32 - 1);
            }
            level = next;
        }
        RTree {
            entries,
            nodes,
            root: level[0],
            capacity,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn byte_size(&self) -> usize {
        self.entries.len() * std::mem::size_of::<(Point, VertexId)>()
            + self.nodes.len() * std::mem::size_of::<Node>()
    }

    /// Objects located exactly at `p`.
    pub fn locate(&self, p: Point) -> Vec<VertexId> {
        let mut out = Vec::new();
        let mut stack = vec![self.root];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n as usize];
            if !node.rect.contains_point(p) {
                continue;
            }
            if node.leaf {
                out.extend(
                    self.entries[node.start as usize..node.end as usize]
                        .iter()
                        .filter(|e| e.0 == p)
                        .map(|e| e.1),
                );
            } else {
                stack.extend(node.start..node.end);
            }
        }
        out
    }

    /// Structural check: every child rectangle lies in its parent's and every
    /// entry appears exactly once.
    pub fn check_invariants(&self) -> bool {
        let mut seen = vec![0u32; self.entries.len()];
        let mut stack = vec![self.root];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n as usize];
            if node.leaf {
                for i in node.start..node.end {
                    if !node.rect.contains_point(self.entries[i as usize].0) {
                        return false;
                    }
                    seen[i as usize] += 1;
                }
            } else {
                for c in node.start..node.end {
                    if !node.rect.contains_rect(&self.nodes[c as usize].rect) {
                        return false;
                    }
                    stack.push(c);
                }
            }
        }
        seen.iter().all(|&s| s == 1)
    }

    pub fn cursor(&self, q: Point) -> NNCursor<'_> {
        let mut heap = MinQueue::new();
        heap.push(
            (OrdF64(self.nodes[self.root as usize].rect.min_dist(q)), 0, self.root),
            (),
        );
        NNCursor {
            tree: self,
            q,
            heap,
            pulls: 0,
        }
    }
}

/// Tile order for sort-tile-recursive packing.
fn str_order(centres: &[Point], capacity: usize) -> Vec<usize> {
    let n = centres.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| centres[a].x.total_cmp(&centres[b].x).then(a.cmp(&b)));
    let pages = n.div_ceil(capacity);
    let slabs = (pages as f64).sqrt().ceil().max(1.0) as usize;
    let per_slab = slabs * capacity;
    for slab in idx.chunks_mut(per_slab) {
        slab.sort_by(|&a, &b| centres[a].y.total_cmp(&centres[b].y).then(a.cmp(&b)));
    }
    idx
}

/// `f64` ordered by `total_cmp`.
#[derive(Debug, Clone, Copy)]
pub struct OrdF64(pub f64);

impl PartialEq for OrdF64 {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Suspended best-first search. Objects come out in ascending
/// `(distance, id)` order; nodes sort ahead of objects at equal distance so
/// ties are resolved by id.
pub struct NNCursor<'a> {
    tree: &'a RTree,
    q: Point,
    // key: (distance, 0 = node | 1 = object, node index or vertex id)
    heap: MinQueue<(OrdF64, u8, u32), ()>,
    pulls: u64,
}

impl<'a> NNCursor<'a> {
    pub fn query_point(&self) -> Point {
        self.q
    }

    /// Number of objects emitted so far.
    pub fn pulls(&self) -> u64 {
        self.pulls
    }

    /// Lower bound on the distance of the next object, if any remain.
    pub fn peek_distance(&self) -> Option<f64> {
        self.heap.peek_key().map(|k| k.0 .0)
    }

    pub fn next_nn(&mut self) -> Option<(VertexId, f64)> {
        let tree = self.tree;
        while let Some(((d, kind, id), ())) = self.heap.pop_min() {
            if kind == 1 {
                self.pulls += 1;
                return Some((id, d.0));
            }
            let node = &tree.nodes[id as usize];
            if node.leaf {
                for &(p, v) in &tree.entries[node.start as usize..node.end as usize] {
                    self.heap.push((OrdF64(self.q.dist(p)), 1, v), ());
                }
            } else {
                for c in node.start..node.end {
                    let md = tree.nodes[c as usize].rect.min_dist(self.q);
                    self.heap.push((OrdF64(md), 0, c), ());
                }
            }
        }
        None
    }
}

impl Iterator for NNCursor<'_> {
    type Item = (VertexId, f64);

    fn next(&mut self) -> Option<Self::Item> {
        self.next_nn()
    }
}
