//! Point quadtree over an object set, with per-node object counts.

use crate::graph::{CoordinateTable, Point, VertexId};
use crate::objects::ObjectSet;
use crate::rtree::Rect;

pub const DEFAULT_LEAF_CAPACITY: usize = 500;
const MAX_DEPTH: u32 = 64;

#[derive(Debug, Clone)]
struct QNode {
    block: Rect,
    /// Tight bounding box of the contained objects.
    mbr: Rect,
    first_child: u32,
    child_count: u32,
    start: u32,
    end: u32,
}

/// Each node's objects occupy one contiguous range of `objects`, so a node's
/// count is the length of its range.
#[derive(Debug, Clone)]
pub struct ObjectHierarchy {
    nodes: Vec<QNode>,
    objects: Vec<VertexId>,
    leaf_capacity: usize,
}

impl ObjectHierarchy {
    pub fn build(objects: &ObjectSet, coords: &CoordinateTable) -> ObjectHierarchy {
        Self::with_capacity(objects, coords, DEFAULT_LEAF_CAPACITY)
    }

    pub fn with_capacity(objects: &ObjectSet, coords: &CoordinateTable, leaf_capacity: usize) -> ObjectHierarchy {
        let leaf_capacity = leaf_capacity.max(1);
        let mut items: Vec<(Point, VertexId)> =
            objects.ids().iter().map(|&v| (coords.point(v), v)).collect();
        let mut block = Rect::empty();
        items.iter().for_each(|e| block.expand(e.0));
        // square root block so quadrants stay square
        let side = (block.hi.x - block.lo.x).max(block.hi.y - block.lo.y);
        block.hi = Point::new(block.lo.x + side, block.lo.y + side);
        let mut h = ObjectHierarchy {
            nodes: vec![QNode {
                block,
                mbr: Rect::empty(),
                first_child: 0,
                child_count: 0,
                start: 0,
                end: items.len() as u32,
            }],
            objects: Vec::new(),
            leaf_capacity,
        };
        h.split(0, &mut items, 0, 0);
        h.objects = items.iter().map(|e| e.1).collect();
        h
    }

    fn split(&mut self, node: usize, items: &mut [(Point, VertexId)], offset: u32, depth: u32) {
        let mut mbr = Rect::empty();
        items.iter().for_each(|e| mbr.expand(e.0));
        self.nodes[node].mbr = mbr;
        if items.len() <= self.leaf_capacity || depth >= MAX_DEPTH {
            items.sort_unstable_by_key(|e| e.1);
            return;
        }
        let block = self.nodes[node].block;
        let mid = block.center();
        let quadrant = |p: Point| (usize::from(p.x >= mid.x)) | (usize::from(p.y >= mid.y) << 1);
        items.sort_unstable_by_key(|e| (quadrant(e.0), e.1));
        let mut bounds = [0usize; 5];
        for e in items.iter() {
            bounds[quadrant(e.0) + 1] += 1;
        }
        for q in 0..4 {
            bounds[q + 1] += bounds[q];
        }
        let first = self.nodes.len() as u32;
        let mut ranges = Vec::new();
        for q in 0..4 {
            if bounds[q] == bounds[q + 1] {
                continue;
            }
            let lo = Point::new(
                if q & 1 == 0 { block.lo.x } else { mid.x },
                if q & 2 == 0 { block.lo.y } else { mid.y },
            );
            let hi = Point::new(
                if q & 1 == 0 { mid.x } else { block.hi.x },
                if q & 2 == 0 { mid.y } else { block.hi.y },
            );
            self.nodes.push(QNode {
                block: Rect { lo, hi },
                mbr: Rect::empty(),
                first_child: 0,
                child_count: 0,
                start: offset + bounds[q] as u32,
                end: offset + bounds[q + 1] as u32,
            });
            ranges.push((bounds[q], bounds[q + 1]));
        }
        self.nodes[node].first_child = first;
        self.nodes[node].child_count = ranges.len() as u32;
        for (i, (a, b)) in ranges.into_iter().enumerate() {
            self.split(first as usize + i, &mut items[a..b], offset + a as u32, depth + 1);
        }
    }

    pub fn root(&self) -> u32 {
        0
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaf_capacity(&self) -> usize {
        self.leaf_capacity
    }

    pub fn is_leaf(&self, n: u32) -> bool {
        self.nodes[n as usize].child_count == 0
    }

    pub fn children(&self, n: u32) -> std::ops::Range<u32> {
        let node = &self.nodes[n as usize];
        node.first_child..node.first_child + node.child_count
    }

    pub fn count(&self, n: u32) -> usize {
        let node = &self.nodes[n as usize];
        (node.end - node.start) as usize
    }

    /// All objects below `n`; for a leaf these are its own objects in id order.
    pub fn objects(&self, n: u32) -> &[VertexId] {
        let node = &self.nodes[n as usize];
        &self.objects[node.start as usize..node.end as usize]
    }

    pub fn block(&self, n: u32) -> Rect {
        self.nodes[n as usize].block
    }

    pub fn bounds(&self, n: u32) -> Rect {
        self.nodes[n as usize].mbr
    }

    pub fn byte_size(&self) -> usize {
        self.nodes.len() * std::mem::size_of::<QNode>() + self.objects.len() * 4
    }

    /// Every count equals the sum of its children's, and every object lies in
    /// its node's bounds.
    pub fn check_counts(&self, coords: &CoordinateTable) -> bool {
        (0..self.nodes.len() as u32).all(|n| {
            let inside = self
                .objects(n)
                .iter()
                .all(|&v| self.bounds(n).contains_point(coords.point(v)));
            let sums = self.is_leaf(n) || self.children(n).map(|c| self.count(c)).sum::<usize>() == self.count(n);
            inside && sums
        })
    }
}
