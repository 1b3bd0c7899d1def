use super::{GTreeIndex, NONE};
use crate::graph::{Dist, VertexId, INF};
use crate::search::MinQueue;

/// Distances from one source to node borders, memoized per node.
///
/// Rows are derived from the source leaf upwards, across at a common
/// ancestor, and downwards, each by one min-plus sweep over a node matrix.
#[derive(Debug, Clone)]
pub struct AssemblyState {
    source: VertexId,
    source_leaf: u32,
    /// Ancestors of the source leaf indexed by depth.
    path: Vec<u32>,
    cache: Vec<u32>,
    cached: Vec<u32>,
    arena: Vec<Dist>,
    /// Exact distances from the source to every vertex of its leaf.
    leaf_local: Vec<Dist>,
    local_queue: MinQueue<Dist, u32>,
    local_done: Vec<bool>,
    sweeps: u64,
    path_cost: u64,
}

impl AssemblyState {
    pub fn new(idx: &GTreeIndex) -> Self {
        AssemblyState {
            source: 0,
            source_leaf: NONE,
            path: Vec::new(),
            cache: vec![NONE; idx.node_count()],
            cached: Vec::new(),
            arena: Vec::new(),
            leaf_local: Vec::new(),
            local_queue: MinQueue::new(),
            local_done: Vec::new(),
            sweeps: 0,
            path_cost: 0,
        }
    }

    pub fn reset(&mut self, idx: &GTreeIndex, s: VertexId) {
        for &n in &self.cached {
            self.cache[n as usize] = NONE;
        }
        self.cached.clear();
        self.arena.clear();
        self.leaf_local.clear();
        self.source = s;
        self.source_leaf = idx.leaf_of(s);
        self.path.clear();
        let mut x = self.source_leaf;
        loop {
            self.path.push(x);
            match idx.parent(x) {
                Some(p) => x = p,
                None => break,
            }
        }
        self.path.reverse();
        self.sweeps = 0;
        self.path_cost = 0;
    }

    pub fn source(&self) -> VertexId {
        self.source
    }

    pub fn source_leaf(&self) -> u32 {
        self.source_leaf
    }

    /// Non-leaf matrix sweeps since the last reset.
    pub fn sweeps(&self) -> u64 {
        self.sweeps
    }

    /// Border-to-border additions since the last reset.
    pub fn path_cost(&self) -> u64 {
        self.path_cost
    }

    #[inline]
    pub fn on_path(&self, idx: &GTreeIndex, n: u32) -> bool {
        self.path.get(idx.depth(n) as usize) == Some(&n)
    }

    /// Child of `n` on the path to the source leaf; `n` must be on the path
    /// and not the leaf itself.
    fn path_child(&self, idx: &GTreeIndex, n: u32) -> u32 {
        self.path[idx.depth(n) as usize + 1]
    }

    /// Exact distances from the source to the borders of `n`, in border order.
    pub fn border_distances(&mut self, idx: &GTreeIndex, n: u32) -> &[Dist] {
        let (start, len) = self.ensure(idx, n);
        &self.arena[start..start + len]
    }

    /// Smallest source-to-border distance of `n`; infinite without borders.
    pub fn node_distance(&mut self, idx: &GTreeIndex, n: u32) -> Dist {
        self.border_distances(idx, n).iter().copied().min().unwrap_or(INF)
    }

    fn ensure(&mut self, idx: &GTreeIndex, n: u32) -> (usize, usize) {
        let len = idx.borders(n).len();
        if self.cache[n as usize] != NONE {
            return (self.cache[n as usize] as usize, len);
        }
        let mut row = vec![INF; len];
        if n == self.source_leaf {
            let p = idx.position_in_leaf(self.source);
            for (j, r) in row.iter_mut().enumerate() {
                *r = idx.leaf_distance(n, p, j);
            }
        } else if self.on_path(idx, n) {
            // upwards: own borders of n through borders of the path child
            let c = self.path_child(idx, n);
            let (src, src_len) = self.ensure(idx, c);
            let rows_at = idx.child_offsets(n)[(c - idx.children(n).start) as usize] as usize;
            let cols = idx.own_border_positions(n);
            self.sweep(idx, n, src, src_len, |i| rows_at + i, cols.iter().map(|&p| p as usize), &mut row);
        } else {
            let p = idx.parent(n).expect("root is always on the path");
            let k = (n - idx.children(p).start) as usize;
            let col_at = idx.child_offsets(p)[k] as usize;
            let cols = (0..len).map(|j| col_at + j);
            if self.on_path(idx, p) {
                // across: from the sibling that holds the source
                let c = self.path_child(idx, p);
                let (src, src_len) = self.ensure(idx, c);
                let rows_at = idx.child_offsets(p)[(c - idx.children(p).start) as usize] as usize;
                self.sweep(idx, p, src, src_len, |i| rows_at + i, cols, &mut row);
            } else {
                // downwards: from the parent's own borders
                let (src, src_len) = self.ensure(idx, p);
                let own = idx.own_border_positions(p);
                self.sweep(idx, p, src, src_len, |i| own[i] as usize, cols, &mut row);
            }
        }
        let start = self.arena.len();
        self.arena.extend_from_slice(&row);
        self.cache[n as usize] = start as u32;
        self.cached.push(n);
        (start, len)
    }

    /// `row[j] = min_i arena[src + i] + M[rows(i)][col_j]`.
    #[allow(clippy::too_many_arguments)]
    fn sweep<R, C>(
        &mut self,
        idx: &GTreeIndex,
        m: u32,
        src: usize,
        src_len: usize,
        rows: R,
        cols: C,
        row: &mut [Dist],
    ) where
        R: Fn(usize) -> usize,
        C: Iterator<Item = usize> + Clone,
    {
        self.sweeps += 1;
        self.path_cost += (src_len * row.len()) as u64;
        for i in 0..src_len {
            let base = self.arena[src + i];
            let r = rows(i);
            for (j, col) in cols.clone().enumerate() {
                let d = base + idx.union_distance(m, r, col);
                if d < row[j] {
                    row[j] = d;
                }
            }
        }
    }

    /// Exact network distance from the source to `t`.
    pub fn distance(&mut self, idx: &GTreeIndex, t: VertexId) -> Dist {
        let leaf = idx.leaf_of(t);
        if leaf == self.source_leaf {
            self.ensure_leaf_local(idx);
            return self.leaf_local[idx.position_in_leaf(t)];
        }
        let (start, len) = self.ensure(idx, leaf);
        self.path_cost += len as u64;
        let p = idx.position_in_leaf(t);
        (0..len)
            .map(|j| self.arena[start + j] + idx.leaf_distance(leaf, p, j))
            .min()
            .unwrap_or(INF)
    }

    /// Source-leaf distances: a search restricted to the leaf, improved by
    /// routes that leave and re-enter through a border.
    fn ensure_leaf_local(&mut self, idx: &GTreeIndex) {
        if !self.leaf_local.is_empty() {
            return;
        }
        let leaf = self.source_leaf;
        let verts = idx.leaf_vertices(leaf);
        let mut dist = vec![INF; verts.len()];
        self.local_done.clear();
        self.local_done.resize(verts.len(), false);
        let sp = idx.position_in_leaf(self.source);
        self.local_queue.clear();
        dist[sp] = 0;
        self.local_queue.push(0, sp as u32);
        let nb = idx.borders(leaf).len();
        while let Some((d, p)) = self.local_queue.pop_min() {
            let p = p as usize;
            if self.local_done[p] {
                continue;
            }
            self.local_done[p] = true;
            for (q, w) in idx.leaf_adjacency(leaf, p) {
                let nd = d + w;
                if nd < dist[q as usize] {
                    dist[q as usize] = nd;
                    self.local_queue.push(nd, q);
                }
            }
        }
        for (p, slot) in dist.iter_mut().enumerate() {
            for j in 0..nb {
                let via = idx.leaf_distance(leaf, sp, j) + idx.leaf_distance(leaf, p, j);
                if via < *slot {
                    *slot = via;
                }
            }
        }
        self.leaf_local = dist;
    }
}
