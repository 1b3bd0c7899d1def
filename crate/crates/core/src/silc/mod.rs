//! Spatially induced linkage cognizance (SILC) and distance browsing.
//!
//! For every source vertex `s` the vertices are colored by the neighbour of
//! `s` that starts their shortest path (lowest id among equal paths). The
//! colors are stored as a Morton-ordered list of maximal uniform quadtree
//! blocks over a 2^32 x 2^32 grid, each block carrying the range
//! `[λ⁻, λ⁺]` of network-to-Euclidean distance ratios of its vertices.
//! Grid cells that hold vertices of several colors, and vertices sitting on
//! the source itself, go to a small exception list with exact distances.
//!
//! A lookup gives the next hop towards a target and a distance interval.
//! [`DistanceInterval`] walks the path one hop at a time (or one degree-2
//! chain at a time), tightening the interval until it collapses.

mod build;
mod interval;
mod knn;

use std::io::{Read, Write};

use crate::binio;
use crate::error::{Error, Result};
use crate::graph::{Dist, Point, VertexId};
use crate::par::Parallelism;
use crate::rtree::Rect;

pub use interval::{DistanceInterval, Refinement};
pub use knn::{knn_db_enn, knn_db_enn_with, knn_disbrw, knn_disbrw_with, SilcScratch};

pub(crate) const NONE: u32 = u32::MAX;
const MAX_DEPTH: u8 = 32;

/// Environment variable holding the build memory budget in megabytes.
pub const BUDGET_ENV: &str = "ROADKNN_SILC_BUDGET_MB";

/// Budget used when [`BUDGET_ENV`] is unset.
pub const DEFAULT_BUDGET_BYTES: u64 = 8 << 30;

#[derive(Debug, Clone, Copy)]
pub struct SilcParams {
    pub parallelism: Parallelism,
    /// Builds whose estimated size exceeds this are refused.
    pub budget_bytes: u64,
}

impl Default for SilcParams {
    fn default() -> Self {
        SilcParams {
            parallelism: Parallelism::Auto,
            budget_bytes: DEFAULT_BUDGET_BYTES,
        }
    }
}

impl SilcParams {
    /// Default parameters with the budget taken from [`BUDGET_ENV`] if set.
    pub fn from_env() -> Result<SilcParams> {
        let mut p = SilcParams::default();
        if let Ok(v) = std::env::var(BUDGET_ENV) {
            let mb: u64 = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("{BUDGET_ENV}={v} is not a number of megabytes")))?;
            p.budget_bytes = mb.saturating_mul(1 << 20);
        }
        Ok(p)
    }
}

/// Square grid snapped to the coordinate bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Grid {
    origin: Point,
    side: f64,
}

impl Grid {
    fn new(points: &[Point]) -> Grid {
        let mut r = Rect::empty();
        points.iter().for_each(|&p| r.expand(p));
        let side = (r.hi.x - r.lo.x).max(r.hi.y - r.lo.y);
        Grid {
            origin: r.lo,
            side: if side > 0.0 && side.is_finite() { side } else { 1.0 },
        }
    }

    fn cell_index(&self, x: f64, o: f64) -> u32 {
        let c = ((x - o) / self.side * 4_294_967_296.0).floor();
        c.clamp(0.0, u32::MAX as f64) as u32
    }

    fn code(&self, p: Point) -> u64 {
        spread(self.cell_index(p.x, self.origin.x)) | (spread(self.cell_index(p.y, self.origin.y)) << 1)
    }

    /// Closed rectangle of the cell at `depth` whose codes start at `code`.
    fn cell_rect(&self, code: u64, depth: u8) -> Rect {
        let unit = self.side / 4_294_967_296.0;
        let size = self.side / (1u64 << depth) as f64;
        let lo = Point::new(
            self.origin.x + compact(code) as f64 * unit,
            self.origin.y + compact(code >> 1) as f64 * unit,
        );
        Rect {
            lo,
            hi: Point::new(lo.x + size, lo.y + size),
        }
    }
}

fn spread(v: u32) -> u64 {
    let mut x = v as u64;
    x = (x | (x << 16)) & 0x0000_FFFF_0000_FFFF;
    x = (x | (x << 8)) & 0x00FF_00FF_00FF_00FF;
    x = (x | (x << 4)) & 0x0F0F_0F0F_0F0F_0F0F;
    x = (x | (x << 2)) & 0x3333_3333_3333_3333;
    (x | (x << 1)) & 0x5555_5555_5555_5555
}

fn compact(code: u64) -> u32 {
    let mut x = code & 0x5555_5555_5555_5555;
    x = (x | (x >> 1)) & 0x3333_3333_3333_3333;
    x = (x | (x >> 2)) & 0x0F0F_0F0F_0F0F_0F0F;
    x = (x | (x >> 4)) & 0x00FF_00FF_00FF_00FF;
    x = (x | (x >> 8)) & 0x0000_FFFF_0000_FFFF;
    ((x | (x >> 16)) & 0x0000_0000_FFFF_FFFF) as u32
}

/// Number of codes covered by a cell at `depth`.
#[inline]
fn span(depth: u8) -> u128 {
    1u128 << (2 * (MAX_DEPTH - depth) as u32)
}

/// What one quadtree lookup says about a target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Hit {
    Block { slot: u16, lam_lo: f32, lam_hi: f32 },
    Exact { slot: u16, dist: Dist },
}

impl Hit {
    fn slot(self) -> u16 {
        match self {
            Hit::Block { slot, .. } | Hit::Exact { slot, .. } => slot,
        }
    }
}

/// One colored quadtree per vertex, stored back to back.
///
/// Colors are adjacency slots of the owner (its neighbours in id order).
/// The index keeps its own copy of coordinates and adjacency so queries need
/// nothing else.
#[derive(Debug, Clone, PartialEq)]
pub struct SilcIndex {
    grid: Grid,
    points: Vec<Point>,
    codes: Vec<u64>,
    adj_first: Vec<u32>,
    adj_target: Vec<VertexId>,
    adj_weight: Vec<Dist>,
    lb_scale: f64,
    tree_first: Vec<u64>,
    block_code: Vec<u64>,
    block_depth: Vec<u8>,
    block_slot: Vec<u16>,
    lam_lo: Vec<f32>,
    lam_hi: Vec<f32>,
    exc_first: Vec<u64>,
    exc_vertex: Vec<VertexId>,
    exc_slot: Vec<u16>,
    exc_dist: Vec<Dist>,
    chain_id: Vec<u32>,
    chain_end: Vec<[VertexId; 2]>,
    chain_len: Vec<[Dist; 2]>,
}

/// Bytes per stored block: code, depth, color slot and two ratios.
pub const BLOCK_BYTES: u64 = 8 + 1 + 2 + 4 + 4;

impl SilcIndex {
    pub fn vertex_count(&self) -> usize {
        self.points.len()
    }

    /// Total number of blocks over all quadtrees.
    pub fn block_count(&self) -> usize {
        self.block_code.len()
    }

    pub fn exception_count(&self) -> usize {
        self.exc_vertex.len()
    }

    pub fn blocks_of(&self, s: VertexId) -> usize {
        let r = self.tree_range(s);
        r.end - r.start
    }

    pub fn lower_bound_scale(&self) -> f64 {
        self.lb_scale
    }

    pub fn point(&self, v: VertexId) -> Point {
        self.points[v as usize]
    }

    pub fn byte_size(&self) -> usize {
        self.block_code.len() * BLOCK_BYTES as usize
            + self.exc_vertex.len() * (4 + 2 + 8)
            + (self.tree_first.len() + self.exc_first.len()) * 8
            + self.points.len() * (16 + 8 + 4 + 8 + 16)
            + self.adj_first.len() * 4
            + self.adj_target.len() * 12
    }

    fn tree_range(&self, s: VertexId) -> std::ops::Range<usize> {
        self.tree_first[s as usize] as usize..self.tree_first[s as usize + 1] as usize
    }

    fn exception_range(&self, s: VertexId) -> std::ops::Range<usize> {
        self.exc_first[s as usize] as usize..self.exc_first[s as usize + 1] as usize
    }

    pub(crate) fn neighbor(&self, v: VertexId, slot: u16) -> (VertexId, Dist) {
        let i = self.adj_first[v as usize] as usize + slot as usize;
        (self.adj_target[i], self.adj_weight[i])
    }

    pub(crate) fn degree(&self, v: VertexId) -> usize {
        (self.adj_first[v as usize + 1] - self.adj_first[v as usize]) as usize
    }

    /// Color and ratio data of `t` in the quadtree of `s`. `s != t`.
    pub(crate) fn lookup(&self, s: VertexId, t: VertexId) -> Hit {
        let er = self.exception_range(s);
        if let Ok(i) = self.exc_vertex[er.clone()].binary_search(&t) {
            let i = er.start + i;
            return Hit::Exact {
                slot: self.exc_slot[i],
                dist: self.exc_dist[i],
            };
        }
        let r = self.tree_range(s);
        let code = self.codes[t as usize];
        let i = r.start + self.block_code[r.clone()].partition_point(|&c| c <= code) - 1;
        debug_assert!((code as u128) < self.block_code[i] as u128 + span(self.block_depth[i]));
        Hit::Block {
            slot: self.block_slot[i],
            lam_lo: self.lam_lo[i],
            lam_hi: self.lam_hi[i],
        }
    }

    /// First vertex after `s` on the shortest path to `t`.
    ///
    /// Panics if `s == t`.
    pub fn next_hop(&self, s: VertexId, t: VertexId) -> VertexId {
        assert_ne!(s, t, "next_hop needs distinct vertices");
        self.neighbor(s, self.lookup(s, t).slot()).0
    }

    /// The full shortest path from `s` to `t` by repeated next hops.
    pub fn path(&self, s: VertexId, t: VertexId) -> Vec<VertexId> {
        let mut out = vec![s];
        let mut v = s;
        while v != t {
            v = self.next_hop(v, t);
            out.push(v);
        }
        out
    }

    /// `[λ⁻, λ⁺]` stored for `t` in the quadtree of `s`, or `None` if `t` is
    /// an exception there.
    pub fn ratio_bounds(&self, s: VertexId, t: VertexId) -> Option<(f32, f32)> {
        match self.lookup(s, t) {
            Hit::Block { lam_lo, lam_hi, .. } => Some((lam_lo, lam_hi)),
            Hit::Exact { .. } => None,
        }
    }

    /// Chain id of a degree-2 vertex, if it lies on a chain with two ends.
    pub fn chain_of(&self, v: VertexId) -> Option<u32> {
        let c = self.chain_id[v as usize];
        (c != NONE).then_some(c)
    }

    /// Chain ends of `v` reached through its first and second neighbour,
    /// with accumulated weights.
    pub fn chain_ends(&self, v: VertexId) -> Option<[(VertexId, Dist); 2]> {
        self.chain_of(v).map(|_| {
            let e = self.chain_end[v as usize];
            let l = self.chain_len[v as usize];
            [(e[0], l[0]), (e[1], l[1])]
        })
    }

    /// Walks every chain entry and checks its ends and weights against the
    /// adjacency.
    pub fn check_chains(&self) -> bool {
        (0..self.vertex_count() as VertexId).all(|v| match self.chain_ends(v) {
            None => self.degree(v) != 2 || self.is_on_cycle(v),
            Some(ends) => {
                self.degree(v) == 2
                    && (0..2).all(|dir| {
                        let (mut prev, mut cur) = (v, self.neighbor(v, dir as u16));
                        let mut acc = cur.1;
                        while self.degree(cur.0) == 2 {
                            if self.chain_id[cur.0 as usize] != self.chain_id[v as usize] {
                                return false;
                            }
                            let (a, b) = (self.neighbor(cur.0, 0), self.neighbor(cur.0, 1));
                            let next = if a.0 == prev { b } else { a };
                            prev = cur.0;
                            cur = next;
                            acc += cur.1;
                        }
                        (cur.0, acc) == ends[dir]
                    })
            }
        })
    }

    fn is_on_cycle(&self, v: VertexId) -> bool {
        let (mut prev, mut cur) = (v, self.neighbor(v, 0).0);
        while cur != v {
            if self.degree(cur) != 2 {
                return false;
            }
            let (a, b) = (self.neighbor(cur, 0).0, self.neighbor(cur, 1).0);
            let next = if a == prev { b } else { a };
            prev = cur;
            cur = next;
        }
        true
    }

    pub fn write_binary<W: Write>(&self, w: &mut W) -> Result<()> {
        binio::write_header(w, b"RKSL", 1)?;
        binio::write_f64s(w, &[self.grid.origin.x, self.grid.origin.y, self.grid.side, self.lb_scale])?;
        let xy: Vec<f64> = self.points.iter().flat_map(|p| [p.x, p.y]).collect();
        binio::write_f64s(w, &xy)?;
        binio::write_u64s(w, &self.codes)?;
        binio::write_u32s(w, &self.adj_first)?;
        binio::write_u32s(w, &self.adj_target)?;
        binio::write_u64s(w, &self.adj_weight)?;
        binio::write_u64s(w, &self.tree_first)?;
        binio::write_u64s(w, &self.block_code)?;
        binio::write_u8s(w, &self.block_depth)?;
        binio::write_u16s(w, &self.block_slot)?;
        binio::write_f32s(w, &self.lam_lo)?;
        binio::write_f32s(w, &self.lam_hi)?;
        binio::write_u64s(w, &self.exc_first)?;
        binio::write_u32s(w, &self.exc_vertex)?;
        binio::write_u16s(w, &self.exc_slot)?;
        binio::write_u64s(w, &self.exc_dist)?;
        binio::write_u32s(w, &self.chain_id)?;
        let ends: Vec<u32> = self.chain_end.iter().flatten().copied().collect();
        binio::write_u32s(w, &ends)?;
        let lens: Vec<u64> = self.chain_len.iter().flatten().copied().collect();
        binio::write_u64s(w, &lens)?;
        Ok(())
    }

    pub fn read_binary<R: Read>(r: &mut R) -> Result<SilcIndex> {
        binio::read_header(r, b"RKSL", 1)?;
        let head = binio::read_f64s(r)?;
        if head.len() != 4 {
            return Err(Error::BadIndex("bad SILC header".into()));
        }
        let xy = binio::read_f64s(r)?;
        let points: Vec<Point> = xy.chunks_exact(2).map(|c| Point::new(c[0], c[1])).collect();
        let idx = SilcIndex {
            grid: Grid {
                origin: Point::new(head[0], head[1]),
                side: head[2],
            },
            lb_scale: head[3],
            points,
            codes: binio::read_u64s(r)?,
            adj_first: binio::read_u32s(r)?,
            adj_target: binio::read_u32s(r)?,
            adj_weight: binio::read_u64s(r)?,
            tree_first: binio::read_u64s(r)?,
            block_code: binio::read_u64s(r)?,
            block_depth: binio::read_u8s(r)?,
            block_slot: binio::read_u16s(r)?,
            lam_lo: binio::read_f32s(r)?,
            lam_hi: binio::read_f32s(r)?,
            exc_first: binio::read_u64s(r)?,
            exc_vertex: binio::read_u32s(r)?,
            exc_slot: binio::read_u16s(r)?,
            exc_dist: binio::read_u64s(r)?,
            chain_id: binio::read_u32s(r)?,
            chain_end: binio::read_u32s(r)?.chunks_exact(2).map(|c| [c[0], c[1]]).collect(),
            chain_len: binio::read_u64s(r)?.chunks_exact(2).map(|c| [c[0], c[1]]).collect(),
        };
        let n = idx.points.len();
        let blocks = idx.block_code.len();
        let excs = idx.exc_vertex.len();
        let ok = n > 0
            && idx.codes.len() == n
            && idx.adj_first.len() == n + 1
            && idx.adj_target.len() == idx.adj_weight.len()
            && idx.tree_first.len() == n + 1
            && idx.tree_first[n] as usize == blocks
            && [idx.block_depth.len(), idx.block_slot.len(), idx.lam_lo.len(), idx.lam_hi.len()]
                .iter()
                .all(|&l| l == blocks)
            && idx.exc_first.len() == n + 1
            && idx.exc_first[n] as usize == excs
            && idx.exc_slot.len() == excs
            && idx.exc_dist.len() == excs
            && idx.chain_id.len() == n
            && idx.chain_end.len() == n
            && idx.chain_len.len() == n;
        if !ok {
            return Err(Error::BadIndex("inconsistent SILC array lengths".into()));
        }
        Ok(idx)
    }
}

#[cfg(test)]
mod tests;
