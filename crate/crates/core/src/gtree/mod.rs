//! G-tree: a balanced partition hierarchy whose nodes store border-to-border
//! distance matrices, queried by assembling matrix rows along tree paths.
//!
//! Matrices hold full-graph shortest distances. Because a node's borders
//! separate its vertices from the rest of the graph, min-plus chaining of
//! these matrices along any leaf-to-leaf tree path is exact.

mod assembly;
mod build;
mod knn;
mod oracle;

use std::io::{Read, Write};

use crate::binio;
use crate::error::{Error, Result};
use crate::graph::{Dist, VertexId};
use crate::objects::ObjectSet;
use crate::par::Parallelism;

pub use assembly::AssemblyState;
pub use knn::{knn_gtree, knn_gtree_unimproved, GtreeScratch};
pub use oracle::MGtreeOracle;

pub const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GTreeParams {
    pub fanout: usize,
    pub leaf_capacity: usize,
    pub seed: u64,
    pub parallelism: Parallelism,
}

impl GTreeParams {
    pub fn new(fanout: usize, leaf_capacity: usize) -> Self {
        GTreeParams {
            fanout,
            leaf_capacity,
            seed: 0x6774_7265,
            parallelism: Parallelism::Auto,
        }
    }

    /// Fanout 4 with the leaf capacity for a network of `vertices` vertices.
    pub fn for_size(vertices: usize) -> Self {
        Self::new(4, default_leaf_capacity(vertices))
    }
}

/// 64 for networks up to about 50k vertices, doubling per size tier.
pub fn default_leaf_capacity(vertices: usize) -> usize {
    match vertices {
        0..=60_000 => 64,
        60_001..=500_000 => 128,
        500_001..=4_000_000 => 256,
        _ => 512,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub(crate) struct GNode {
    pub parent: u32,
    pub depth: u32,
    pub first_child: u32,
    pub child_count: u32,
    pub border_start: u32,
    pub border_len: u32,
    pub union_start: u32,
    pub union_len: u32,
    pub child_off_start: u32,
    pub own_pos_start: u32,
    pub vert_start: u32,
    pub vert_len: u32,
    pub matrix_start: u64,
}

impl GNode {
    const FIELDS: usize = 13;

    fn to_words(self) -> [u64; Self::FIELDS] {
        [
            self.parent as u64,
            self.depth as u64,
            self.first_child as u64,
            self.child_count as u64,
            self.border_start as u64,
            self.border_len as u64,
            self.union_start as u64,
            self.union_len as u64,
            self.child_off_start as u64,
            self.own_pos_start as u64,
            self.vert_start as u64,
            self.vert_len as u64,
            self.matrix_start,
        ]
    }

    fn from_words(w: &[u64]) -> GNode {
        GNode {
            parent: w[0] as u32,
            depth: w[1] as u32,
            first_child: w[2] as u32,
            child_count: w[3] as u32,
            border_start: w[4] as u32,
            border_len: w[5] as u32,
            union_start: w[6] as u32,
            union_len: w[7] as u32,
            child_off_start: w[8] as u32,
            own_pos_start: w[9] as u32,
            vert_start: w[10] as u32,
            vert_len: w[11] as u32,
            matrix_start: w[12],
        }
    }
}

/// Node 0 is the root; children of a node have consecutive ids greater than
/// their parent's.
///
/// A non-leaf node stores the concatenation of its children's border lists
/// (`union`) and a square matrix over it, row-major. Its own borders are a
/// subset of that union, located through `own_pos`. A leaf stores its
/// vertices and a `vertices × borders` matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GTreeIndex {
    pub(crate) fanout: usize,
    pub(crate) leaf_capacity: usize,
    pub(crate) nodes: Vec<GNode>,
    pub(crate) borders: Vec<VertexId>,
    pub(crate) union: Vec<VertexId>,
    pub(crate) child_offsets: Vec<u32>,
    pub(crate) own_pos: Vec<u32>,
    pub(crate) leaf_vertices: Vec<VertexId>,
    pub(crate) matrix: Vec<Dist>,
    pub(crate) leaf_of: Vec<u32>,
    pub(crate) pos_in_leaf: Vec<u32>,
    /// Edges between vertices of the same leaf, indexed like `leaf_vertices`.
    pub(crate) leaf_adj_first: Vec<u32>,
    pub(crate) leaf_adj_target: Vec<u32>,
    pub(crate) leaf_adj_weight: Vec<Dist>,
}

impl GTreeIndex {
    pub fn build(g: &crate::graph::Graph, params: GTreeParams) -> Result<GTreeIndex> {
        build::build(g, params)
    }

    pub fn fanout(&self) -> usize {
        self.fanout
    }

    pub fn leaf_capacity(&self) -> usize {
        self.leaf_capacity
    }

    pub fn vertex_count(&self) -> usize {
        self.leaf_of.len()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn root(&self) -> u32 {
        0
    }

    pub fn parent(&self, n: u32) -> Option<u32> {
        let p = self.nodes[n as usize].parent;
        (p != NONE).then_some(p)
    }

    pub fn depth(&self, n: u32) -> u32 {
        self.nodes[n as usize].depth
    }

    pub fn is_leaf(&self, n: u32) -> bool {
        self.nodes[n as usize].child_count == 0
    }

    pub fn children(&self, n: u32) -> std::ops::Range<u32> {
        let node = &self.nodes[n as usize];
        node.first_child..node.first_child + node.child_count
    }

    pub fn leaf_of(&self, v: VertexId) -> u32 {
        self.leaf_of[v as usize]
    }

    /// Border vertices of `n`, ascending.
    pub fn borders(&self, n: u32) -> &[VertexId] {
        let node = &self.nodes[n as usize];
        &self.borders[node.border_start as usize..(node.border_start + node.border_len) as usize]
    }

    /// Concatenated child borders of a non-leaf node.
    pub fn union_borders(&self, n: u32) -> &[VertexId] {
        let node = &self.nodes[n as usize];
        &self.union[node.union_start as usize..(node.union_start + node.union_len) as usize]
    }

    /// Start of each child's segment within [`Self::union_borders`], plus the
    /// total length.
    pub fn child_offsets(&self, n: u32) -> &[u32] {
        let node = &self.nodes[n as usize];
        let start = node.child_off_start as usize;
        &self.child_offsets[start..start + node.child_count as usize + 1]
    }

    /// Position of each own border within the union (non-leaf) or within
    /// the vertex list (leaf).
    pub fn own_border_positions(&self, n: u32) -> &[u32] {
        let node = &self.nodes[n as usize];
        let start = node.own_pos_start as usize;
        &self.own_pos[start..start + node.border_len as usize]
    }

    /// Vertices of a leaf, ascending.
    pub fn leaf_vertices(&self, n: u32) -> &[VertexId] {
        let node = &self.nodes[n as usize];
        &self.leaf_vertices[node.vert_start as usize..(node.vert_start + node.vert_len) as usize]
    }

    /// Neighbours of the leaf vertex at `pos` inside the same leaf, as
    /// `(position, weight)`.
    pub fn leaf_adjacency(&self, leaf: u32, pos: usize) -> impl Iterator<Item = (u32, Dist)> + '_ {
        let i = self.nodes[leaf as usize].vert_start as usize + pos;
        let range = self.leaf_adj_first[i] as usize..self.leaf_adj_first[i + 1] as usize;
        self.leaf_adj_target[range.clone()]
            .iter()
            .copied()
            .zip(self.leaf_adj_weight[range].iter().copied())
    }

    /// All vertices below `n`, ascending.
    pub fn node_vertices(&self, n: u32) -> Vec<VertexId> {
        let mut out = Vec::new();
        let mut stack = vec![n];
        while let Some(x) = stack.pop() {
            if self.is_leaf(x) {
                out.extend_from_slice(self.leaf_vertices(x));
            } else {
                stack.extend(self.children(x));
            }
        }
        out.sort_unstable();
        out
    }

    pub fn position_in_leaf(&self, v: VertexId) -> usize {
        self.pos_in_leaf[v as usize] as usize
    }

    /// Row width of the node's matrix.
    pub fn matrix_width(&self, n: u32) -> usize {
        let node = &self.nodes[n as usize];
        if node.child_count == 0 {
            node.border_len as usize
        } else {
            node.union_len as usize
        }
    }

    pub fn matrix(&self, n: u32) -> &[Dist] {
        let node = &self.nodes[n as usize];
        let rows = if node.child_count == 0 { node.vert_len } else { node.union_len } as usize;
        let start = node.matrix_start as usize;
        &self.matrix[start..start + rows * self.matrix_width(n)]
    }

    /// Distance between two entries of a non-leaf node's union.
    #[inline]
    pub fn union_distance(&self, n: u32, i: usize, j: usize) -> Dist {
        let w = self.matrix_width(n);
        self.matrix[self.nodes[n as usize].matrix_start as usize + i * w + j]
    }

    /// Distance from leaf vertex at `pos` to the leaf's `j`-th border.
    #[inline]
    pub fn leaf_distance(&self, leaf: u32, pos: usize, j: usize) -> Dist {
        let w = self.nodes[leaf as usize].border_len as usize;
        self.matrix[self.nodes[leaf as usize].matrix_start as usize + pos * w + j]
    }

    /// Total border count over all nodes.
    pub fn total_borders(&self) -> usize {
        self.borders.len()
    }

    pub fn byte_size(&self) -> usize {
        self.nodes.len() * std::mem::size_of::<GNode>()
            + 4 * (self.borders.len()
                + self.union.len()
                + self.child_offsets.len()
                + self.own_pos.len()
                + self.leaf_vertices.len()
                + self.leaf_of.len()
                + self.pos_in_leaf.len()
                + self.leaf_adj_first.len()
                + self.leaf_adj_target.len())
            + 8 * (self.matrix.len() + self.leaf_adj_weight.len())
    }

    /// Offset of the node's matrix within [`matrix_mut`](Self::matrix_mut).
    pub fn matrix_start(&self, n: u32) -> usize {
        self.nodes[n as usize].matrix_start as usize
    }

    /// Mutable matrix access, used to inject faults when testing verifiers.
    pub fn matrix_mut(&mut self) -> &mut [Dist] {
        &mut self.matrix
    }

    pub fn write_binary<W: Write>(&self, w: &mut W) -> Result<()> {
        binio::write_header(w, b"RKGT", 1)?;
        binio::write_u64(w, self.fanout as u64)?;
        binio::write_u64(w, self.leaf_capacity as u64)?;
        let words: Vec<u64> = self.nodes.iter().flat_map(|n| n.to_words()).collect();
        binio::write_u64s(w, &words)?;
        binio::write_u32s(w, &self.borders)?;
        binio::write_u32s(w, &self.union)?;
        binio::write_u32s(w, &self.child_offsets)?;
        binio::write_u32s(w, &self.own_pos)?;
        binio::write_u32s(w, &self.leaf_vertices)?;
        binio::write_u64s(w, &self.matrix)?;
        binio::write_u32s(w, &self.leaf_of)?;
        binio::write_u32s(w, &self.pos_in_leaf)?;
        binio::write_u32s(w, &self.leaf_adj_first)?;
        binio::write_u32s(w, &self.leaf_adj_target)?;
        binio::write_u64s(w, &self.leaf_adj_weight)?;
        Ok(())
    }

    pub fn read_binary<R: Read>(r: &mut R) -> Result<GTreeIndex> {
        binio::read_header(r, b"RKGT", 1)?;
        let fanout = binio::read_u64(r)? as usize;
        let leaf_capacity = binio::read_u64(r)? as usize;
        let words = binio::read_u64s(r)?;
        if words.len() % GNode::FIELDS != 0 {
            return Err(Error::BadIndex("truncated G-tree node table".into()));
        }
        let nodes = words.chunks(GNode::FIELDS).map(GNode::from_words).collect();
        Ok(GTreeIndex {
            fanout,
            leaf_capacity,
            nodes,
            borders: binio::read_u32s(r)?,
            union: binio::read_u32s(r)?,
            child_offsets: binio::read_u32s(r)?,
            own_pos: binio::read_u32s(r)?,
            leaf_vertices: binio::read_u32s(r)?,
            matrix: binio::read_u64s(r)?,
            leaf_of: binio::read_u32s(r)?,
            pos_in_leaf: binio::read_u32s(r)?,
            leaf_adj_first: binio::read_u32s(r)?,
            leaf_adj_target: binio::read_u32s(r)?,
            leaf_adj_weight: binio::read_u64s(r)?,
        })
    }
}

/// Per-node record of the children holding objects, and per-leaf object
/// lists. Built once per object set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccurrenceList {
    occupied: Vec<bool>,
    start: Vec<u32>,
    entries: Vec<u32>,
}

impl OccurrenceList {
    /// Marks leaves from the objects, then propagates to ancestors.
    pub fn build(idx: &GTreeIndex, objects: &ObjectSet) -> OccurrenceList {
        let n = idx.node_count();
        let mut lists: Vec<Vec<u32>> = vec![Vec::new(); n];
        for &o in objects.ids() {
            lists[idx.leaf_of(o) as usize].push(o);
        }
        let mut occupied: Vec<bool> = lists.iter().map(|l| !l.is_empty()).collect();
        // children have larger ids than their parent
        for c in (1..n as u32).rev() {
            if occupied[c as usize] {
                let p = idx.parent(c).expect("non-root has a parent");
                occupied[p as usize] = true;
                lists[p as usize].push(c);
            }
        }
        let mut start = Vec::with_capacity(n + 1);
        let mut entries = Vec::new();
        for mut l in lists {
            start.push(entries.len() as u32);
            l.sort_unstable();
            entries.extend(l);
        }
        start.push(entries.len() as u32);
        OccurrenceList {
            occupied,
            start,
            entries,
        }
    }

    pub fn is_occupied(&self, n: u32) -> bool {
        self.occupied[n as usize]
    }

    /// Occupied children of a non-leaf node, or the objects of a leaf.
    pub fn get(&self, n: u32) -> &[u32] {
        &self.entries[self.start[n as usize] as usize..self.start[n as usize + 1] as usize]
    }

    pub fn byte_size(&self) -> usize {
        self.occupied.len() + 4 * (self.start.len() + self.entries.len())
    }
}
