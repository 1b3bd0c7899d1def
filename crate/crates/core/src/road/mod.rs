//! ROAD: a hierarchy of edge-partition cells (Rnets) with border-to-border
//! shortcuts, a per-vertex route overlay, and an association directory that
//! marks which Rnets hold objects.
//!
//! Each Rnet owns a vertex subset; an edge belongs to exactly one Rnet per
//! level. Shortcut weights are distances restricted to the Rnet's edges. The
//! search bypasses an object-free Rnet entered at a border by relaxing those
//! shortcuts instead of the Rnet's interior edges.

mod build;
mod knn;

use std::io::{Read, Write};

use crate::binio;
use crate::error::{Error, Result};
use crate::graph::{Dist, Graph, VertexId, INF};
use crate::objects::ObjectSet;
use crate::par::Parallelism;

pub use knn::{knn_road, knn_road_with, RoadScratch};

pub const NONE: u32 = u32::MAX;

/// How non-leaf shortcuts are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShortcutBuild {
    /// From the children's shortcuts, one overlay search per border.
    #[default]
    BottomUp,
    /// A search over the Rnet's own edges for every border.
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoadParams {
    pub fanout: usize,
    pub levels: usize,
    pub seed: u64,
    pub parallelism: Parallelism,
    pub shortcuts: ShortcutBuild,
}

impl RoadParams {
    pub fn new(fanout: usize, levels: usize) -> Self {
        RoadParams {
            fanout,
            levels,
            seed: 0x726f_6164,
            parallelism: Parallelism::Auto,
            shortcuts: ShortcutBuild::BottomUp,
        }
    }

    /// Fanout 4 with the level count for a network of `vertices` vertices.
    pub fn for_size(vertices: usize) -> Self {
        Self::new(4, default_levels(vertices, 4))
    }
}

/// 7 levels for networks of about 50k vertices, one more per size tier,
/// capped so that leaf Rnets still own about two vertices each.
pub fn default_levels(vertices: usize, fanout: usize) -> usize {
    let tier = match vertices {
        0..=60_000 => 7,
        60_001..=200_000 => 8,
        200_001..=1_100_000 => 9,
        1_100_001..=4_000_000 => 10,
        _ => 11,
    };
    let mut cap = 0;
    let mut cells = fanout.max(2);
    while cells * 2 <= vertices {
        cap += 1;
        cells *= fanout.max(2);
    }
    tier.min(cap).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub(crate) struct Rnet {
    pub parent: u32,
    pub level: u32,
    pub first_child: u32,
    pub child_count: u32,
    pub border_start: u32,
    pub border_len: u32,
    /// Vertices of the Rnet that are not borders.
    pub interior: u32,
    pub shortcut_start: u64,
}

impl Rnet {
    const FIELDS: usize = 8;

    fn to_words(self) -> [u64; Self::FIELDS] {
        [
            self.parent as u64,
            self.level as u64,
            self.first_child as u64,
            self.child_count as u64,
            self.border_start as u64,
            self.border_len as u64,
            self.interior as u64,
            self.shortcut_start,
        ]
    }

    fn from_words(w: &[u64]) -> Rnet {
        Rnet {
            parent: w[0] as u32,
            level: w[1] as u32,
            first_child: w[2] as u32,
            child_count: w[3] as u32,
            border_start: w[4] as u32,
            border_len: w[5] as u32,
            interior: w[6] as u32,
            shortcut_start: w[7],
        }
    }
}

/// One node of a vertex's shortcut tree. Entries of a vertex are stored in
/// preorder; `end` is one past the entry's last descendant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub(crate) struct Entry {
    pub rnet: u32,
    pub end: u32,
    /// Row of the vertex among the Rnet's borders, or [`NONE`].
    pub row: u32,
    /// Leaf entries: the vertex's edges inside the Rnet.
    pub edge_start: u32,
    pub edge_len: u32,
}

impl Entry {
    const FIELDS: usize = 5;

    fn to_words(self) -> [u32; Self::FIELDS] {
        [self.rnet, self.end, self.row, self.edge_start, self.edge_len]
    }

    fn from_words(w: &[u32]) -> Entry {
        Entry {
            rnet: w[0],
            end: w[1],
            row: w[2],
            edge_start: w[3],
            edge_len: w[4],
        }
    }
}

/// Rnet hierarchy, shortcuts and route overlay.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoadIndex {
    pub(crate) fanout: usize,
    pub(crate) levels: usize,
    pub(crate) rnets: Vec<Rnet>,
    pub(crate) borders: Vec<VertexId>,
    pub(crate) shortcuts: Vec<Dist>,
    pub(crate) entry_first: Vec<u32>,
    pub(crate) entries: Vec<Entry>,
    pub(crate) edge_target: Vec<VertexId>,
    pub(crate) edge_weight: Vec<Dist>,
}

impl RoadIndex {
    pub fn build(g: &Graph, params: RoadParams) -> Result<RoadIndex> {
        build::build(g, params)
    }

    pub fn fanout(&self) -> usize {
        self.fanout
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn vertex_count(&self) -> usize {
        self.entry_first.len() - 1
    }

    pub fn rnet_count(&self) -> usize {
        self.rnets.len()
    }

    /// The root Rnet is the whole graph at level 0.
    pub fn root(&self) -> u32 {
        0
    }

    pub fn level(&self, r: u32) -> usize {
        self.rnets[r as usize].level as usize
    }

    pub fn parent(&self, r: u32) -> Option<u32> {
        let p = self.rnets[r as usize].parent;
        (p != NONE).then_some(p)
    }

    pub fn children(&self, r: u32) -> std::ops::Range<u32> {
        let n = &self.rnets[r as usize];
        n.first_child..n.first_child + n.child_count
    }

    pub fn is_leaf(&self, r: u32) -> bool {
        self.rnets[r as usize].child_count == 0
    }

    pub fn borders(&self, r: u32) -> &[VertexId] {
        let n = &self.rnets[r as usize];
        &self.borders[n.border_start as usize..(n.border_start + n.border_len) as usize]
    }

    /// Number of non-border vertices of `r`.
    pub fn interior_count(&self, r: u32) -> usize {
        self.rnets[r as usize].interior as usize
    }

    /// Shortcut between the `i`-th and `j`-th border of `r`; infinite when
    /// the Rnet's edges do not connect them.
    pub fn shortcut(&self, r: u32, i: usize, j: usize) -> Dist {
        let n = &self.rnets[r as usize];
        self.shortcuts[n.shortcut_start as usize + i * n.border_len as usize + j]
    }

    pub(crate) fn shortcut_row(&self, r: u32, row: u32) -> &[Dist] {
        let n = &self.rnets[r as usize];
        let w = n.border_len as usize;
        let at = n.shortcut_start as usize + row as usize * w;
        &self.shortcuts[at..at + w]
    }

    pub(crate) fn entries_of(&self, v: VertexId) -> std::ops::Range<usize> {
        self.entry_first[v as usize] as usize..self.entry_first[v as usize + 1] as usize
    }

    /// Rnets whose vertex set contains `v`, in shortcut-tree preorder.
    pub fn rnets_of(&self, v: VertexId) -> Vec<u32> {
        self.entries[self.entries_of(v)].iter().map(|e| e.rnet).collect()
    }

    /// Leaf Rnets that contain `v`.
    pub fn leaf_rnets_of(&self, v: VertexId) -> impl Iterator<Item = u32> + '_ {
        self.entries[self.entries_of(v)]
            .iter()
            .map(|e| e.rnet)
            .filter(|&r| self.is_leaf(r))
    }

    /// Edge lists of all leaf Rnets as `(u, v, w)` with `u < v`, indexed by
    /// Rnet id (empty for non-leaves).
    pub fn leaf_edges(&self) -> Vec<Vec<(VertexId, VertexId, Dist)>> {
        let mut out = vec![Vec::new(); self.rnets.len()];
        for v in 0..self.vertex_count() as VertexId {
            for e in &self.entries[self.entries_of(v)] {
                if self.is_leaf(e.rnet) {
                    let s = e.edge_start as usize;
                    for i in s..s + e.edge_len as usize {
                        let t = self.edge_target[i];
                        if v < t {
                            out[e.rnet as usize].push((v, t, self.edge_weight[i]));
                        }
                    }
                }
            }
        }
        out
    }

    /// Leaf Rnets below `r`, or `r` itself when it is a leaf.
    pub fn descendant_leaves(&self, r: u32) -> Vec<u32> {
        let mut out = Vec::new();
        let mut stack = vec![r];
        while let Some(x) = stack.pop() {
            if self.is_leaf(x) {
                out.push(x);
            } else {
                stack.extend(self.children(x));
            }
        }
        out.sort_unstable();
        out
    }

    pub fn total_borders(&self) -> usize {
        self.borders.len()
    }

    pub fn shortcut_count(&self) -> usize {
        self.shortcuts.len()
    }

    pub fn byte_size(&self) -> usize {
        self.rnets.len() * std::mem::size_of::<Rnet>()
            + self.entries.len() * std::mem::size_of::<Entry>()
            + 4 * (self.borders.len() + self.entry_first.len() + self.edge_target.len())
            + 8 * (self.shortcuts.len() + self.edge_weight.len())
    }

    /// Mutable shortcut access, used to inject faults when testing verifiers.
    pub fn shortcuts_mut(&mut self) -> &mut [Dist] {
        &mut self.shortcuts
    }

    pub fn write_binary<W: Write>(&self, w: &mut W) -> Result<()> {
        binio::write_header(w, b"RKRD", 1)?;
        binio::write_u64(w, self.fanout as u64)?;
        binio::write_u64(w, self.levels as u64)?;
        let words: Vec<u64> = self.rnets.iter().flat_map(|n| n.to_words()).collect();
        binio::write_u64s(w, &words)?;
        binio::write_u32s(w, &self.borders)?;
        binio::write_u64s(w, &self.shortcuts)?;
        binio::write_u32s(w, &self.entry_first)?;
        let words: Vec<u32> = self.entries.iter().flat_map(|e| e.to_words()).collect();
        binio::write_u32s(w, &words)?;
        binio::write_u32s(w, &self.edge_target)?;
        binio::write_u64s(w, &self.edge_weight)?;
        Ok(())
    }

    pub fn read_binary<R: Read>(r: &mut R) -> Result<RoadIndex> {
        binio::read_header(r, b"RKRD", 1)?;
        let fanout = binio::read_u64(r)? as usize;
        let levels = binio::read_u64(r)? as usize;
        let words = binio::read_u64s(r)?;
        if words.len() % Rnet::FIELDS != 0 {
            return Err(Error::BadIndex("truncated Rnet table".into()));
        }
        let rnets = words.chunks(Rnet::FIELDS).map(Rnet::from_words).collect();
        let borders = binio::read_u32s(r)?;
        let shortcuts = binio::read_u64s(r)?;
        let entry_first = binio::read_u32s(r)?;
        let words = binio::read_u32s(r)?;
        if words.len() % Entry::FIELDS != 0 || entry_first.is_empty() {
            return Err(Error::BadIndex("truncated route overlay".into()));
        }
        let entries = words.chunks(Entry::FIELDS).map(Entry::from_words).collect();
        Ok(RoadIndex {
            fanout,
            levels,
            rnets,
            borders,
            shortcuts,
            entry_first,
            entries,
            edge_target: binio::read_u32s(r)?,
            edge_weight: binio::read_u64s(r)?,
        })
    }
}

/// Object bits per vertex and occupancy bits per Rnet. An Rnet is occupied
/// when any of its vertices (borders included) is an object.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssociationDirectory {
    rnet_bits: Vec<u64>,
    vertex_bits: Vec<u64>,
    objects: Vec<VertexId>,
}

impl AssociationDirectory {
    /// Marks the leaf Rnets of every object, then propagates to parents.
    pub fn build(idx: &RoadIndex, objects: &ObjectSet) -> AssociationDirectory {
        let mut rnet_bits = vec![0u64; idx.rnet_count().div_ceil(64)];
        let mut vertex_bits = vec![0u64; idx.vertex_count().div_ceil(64)];
        for &o in objects.ids() {
            set(&mut vertex_bits, o as usize);
            for r in idx.leaf_rnets_of(o) {
                set(&mut rnet_bits, r as usize);
            }
        }
        // children always have larger ids than their parent
        for r in (1..idx.rnet_count() as u32).rev() {
            if get(&rnet_bits, r as usize) {
                set(&mut rnet_bits, idx.rnets[r as usize].parent as usize);
            }
        }
        AssociationDirectory {
            rnet_bits,
            vertex_bits,
            objects: objects.ids().to_vec(),
        }
    }

    #[inline]
    pub fn has_object(&self, r: u32) -> bool {
        get(&self.rnet_bits, r as usize)
    }

    #[inline]
    pub fn is_object(&self, v: VertexId) -> bool {
        get(&self.vertex_bits, v as usize)
    }

    pub fn objects(&self) -> &[VertexId] {
        &self.objects
    }

    pub fn byte_size(&self) -> usize {
        8 * (self.rnet_bits.len() + self.vertex_bits.len()) + 4 * self.objects.len()
    }
}

#[inline]
fn set(bits: &mut [u64], i: usize) {
    bits[i / 64] |= 1 << (i % 64);
}

#[inline]
fn get(bits: &[u64], i: usize) -> bool {
    bits[i / 64] & (1 << (i % 64)) != 0
}

/// Shortest distances restricted to `edges`, from each source to each
/// target. Row-major, `sources.len() x targets.len()`.
pub fn restricted_distances(
    vertex_count: usize,
    edges: &[(VertexId, VertexId, Dist)],
    sources: &[VertexId],
    targets: &[VertexId],
) -> Vec<Dist> {
    let mut verts: Vec<VertexId> = edges.iter().flat_map(|&(u, v, _)| [u, v]).collect();
    verts.extend_from_slice(sources);
    verts.extend_from_slice(targets);
    verts.sort_unstable();
    verts.dedup();
    debug_assert!(verts.last().is_none_or(|&v| (v as usize) < vertex_count));
    let local = |v: VertexId| verts.binary_search(&v).unwrap() as u32;
    let arcs: Vec<(u32, u32, Dist)> = edges
        .iter()
        .flat_map(|&(u, v, w)| [(local(u), local(v), w), (local(v), local(u), w)])
        .collect();
    let csr = build::LocalCsr::from_arcs(verts.len(), arcs);
    let src: Vec<u32> = sources.iter().map(|&s| local(s)).collect();
    let tgt: Vec<u32> = targets.iter().map(|&t| local(t)).collect();
    let mut out = vec![INF; src.len() * tgt.len()];
    let mut scratch = build::LocalScratch::default();
    for (i, &s) in src.iter().enumerate() {
        csr.row(s, &tgt, &mut scratch, &mut out[i * tgt.len()..(i + 1) * tgt.len()]);
    }
    out
}

#[cfg(test)]
mod tests;
