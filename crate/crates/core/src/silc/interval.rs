use super::{Hit, SilcIndex, MAX_DEPTH, NONE};
use crate::graph::{Dist, Point, VertexId};
use crate::knn::QueryStats;
use crate::rtree::Rect;

/// Upper bounds saturate here instead of overflowing when added to a known
/// prefix distance.
const CEILING: Dist = Dist::MAX / 4;

/// How one refinement step advances along the path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Refinement {
    /// One hop per step.
    Plain,
    /// Skip to the far end of a degree-2 chain when the target is not on it.
    #[default]
    Chain,
}

/// Bounds `[lo, hi]` on the network distance from a source to `target`,
/// with the path known exactly up to `via`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DistanceInterval {
    pub target: VertexId,
    pub via: VertexId,
    /// Network distance from the source to `via`.
    pub known: Dist,
    pub lo: Dist,
    pub hi: Dist,
    next: VertexId,
    next_weight: Dist,
}

impl DistanceInterval {
    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    /// Vertex the next step moves to, unless the interval is exact.
    pub fn next_hop(&self) -> Option<VertexId> {
        (!self.is_exact()).then_some(self.next)
    }

    fn exact(target: VertexId, via: VertexId, d: Dist) -> Self {
        DistanceInterval {
            target,
            via,
            known: d,
            lo: d,
            hi: d,
            next: NONE,
            next_weight: 0,
        }
    }
}

#[inline]
fn lower(lam: f32, d_e: f64) -> Dist {
    let x = lam as f64 * d_e * (1.0 - 1e-12);
    if x.is_nan() || x <= 0.0 {
        0
    } else if x >= CEILING as f64 {
        CEILING
    } else {
        x.floor() as Dist
    }
}

#[inline]
fn upper(lam: f32, d_e: f64) -> Dist {
    let x = lam as f64 * d_e * (1.0 + 1e-12);
    if x.is_nan() || x >= CEILING as f64 {
        CEILING
    } else {
        x.ceil() as Dist
    }
}

impl SilcIndex {
    /// Interval for `d(s, t)` from one lookup in the quadtree of `s`.
    pub fn interval(&self, s: VertexId, t: VertexId, stats: &mut QueryStats) -> DistanceInterval {
        if s == t {
            return DistanceInterval::exact(t, t, 0);
        }
        self.advance(s, t, 0, stats)
    }

    /// State at `v`, reached at distance `d`, after one lookup there.
    fn advance(&self, v: VertexId, t: VertexId, d: Dist, stats: &mut QueryStats) -> DistanceInterval {
        stats.refine_lookups += 1;
        let hit = self.lookup(v, t);
        let (next, next_weight) = self.neighbor(v, hit.slot());
        match hit {
            Hit::Exact { dist, .. } => DistanceInterval::exact(t, v, d + dist),
            Hit::Block { lam_lo, lam_hi, .. } => {
                let d_e = self.point(v).dist(self.point(t));
                DistanceInterval {
                    target: t,
                    via: v,
                    known: d,
                    lo: d + lower(lam_lo, d_e),
                    hi: (d + upper(lam_hi, d_e)).min(CEILING),
                    next,
                    next_weight,
                }
            }
        }
    }

    /// Moves one hop along the path; bounds only ever tighten.
    pub fn refine(&self, iv: &mut DistanceInterval, stats: &mut QueryStats) {
        self.refine_step(iv, Refinement::Plain, stats)
    }

    /// As [`refine`](Self::refine), but jumps over a whole degree-2 chain
    /// with a single lookup at its far end.
    pub fn refine_with_chain(&self, iv: &mut DistanceInterval, stats: &mut QueryStats) {
        self.refine_step(iv, Refinement::Chain, stats)
    }

    pub fn refine_step(&self, iv: &mut DistanceInterval, mode: Refinement, stats: &mut QueryStats) {
        if iv.is_exact() {
            return;
        }
        let t = iv.target;
        let mut u = iv.next;
        let mut d = iv.known + iv.next_weight;
        if mode == Refinement::Chain && u != t {
            let c = self.chain_id[u as usize];
            if c != NONE && self.chain_id[t as usize] != c {
                let dir = usize::from(self.neighbor(u, 0).0 == iv.via);
                d += self.chain_len[u as usize][dir];
                u = self.chain_end[u as usize][dir];
            }
        }
        if u == t {
            *iv = DistanceInterval::exact(t, t, d);
            return;
        }
        let next = self.advance(u, t, d, stats);
        let (lo, hi) = (iv.lo.max(next.lo), iv.hi.min(next.hi));
        *iv = if next.is_exact() { next } else { DistanceInterval { lo, hi, ..next } };
    }

    /// Refines until exact and returns the distance.
    pub fn refine_to_exact(&self, iv: &mut DistanceInterval, mode: Refinement, stats: &mut QueryStats) -> Dist {
        while !iv.is_exact() {
            self.refine_step(iv, mode, stats);
        }
        iv.lo
    }

    /// Exact network distance by path walking.
    pub fn distance(&self, s: VertexId, t: VertexId) -> Dist {
        let mut stats = QueryStats::default();
        let mut iv = self.interval(s, t, &mut stats);
        self.refine_to_exact(&mut iv, Refinement::Chain, &mut stats)
    }

    /// Bounds on the distance from `q` to any vertex inside the closed
    /// rectangle `r`: the extreme ratios over the blocks of `q`'s quadtree
    /// that intersect `r`, times the nearest and farthest Euclidean distance
    /// from `q` to `r`. Exceptions and `q` itself contribute exact values.
    pub fn region_interval(&self, q: VertexId, r: &Rect) -> (Dist, Dist) {
        let pad = self.grid.side * 1e-9;
        let padded = Rect {
            lo: Point::new(r.lo.x - pad, r.lo.y - pad),
            hi: Point::new(r.hi.x + pad, r.hi.y + pad),
        };
        let (mut lam_lo, mut lam_hi) = (f32::INFINITY, f32::NEG_INFINITY);
        let tr = self.tree_range(q);
        self.visit(0, 0, tr.start, tr.end, &padded, &mut |i| {
            lam_lo = lam_lo.min(self.lam_lo[i]);
            lam_hi = lam_hi.max(self.lam_hi[i]);
        });
        let pq = self.point(q);
        let (mut lo, mut hi) = (Dist::MAX, 0);
        if lam_lo.is_finite() || lam_hi.is_finite() {
            lo = lower(lam_lo, r.min_dist(pq));
            hi = upper(lam_hi, r.max_dist(pq));
        }
        if padded.contains_point(pq) {
            lo = 0;
        }
        for i in self.exception_range(q) {
            if padded.contains_point(self.point(self.exc_vertex[i])) {
                lo = lo.min(self.exc_dist[i]);
                hi = hi.max(self.exc_dist[i]);
            }
        }
        if lo > hi {
            // nothing inside `r`
            return (0, CEILING);
        }
        (lo, hi)
    }

    /// Calls `f` for every block in `a..b` (the blocks inside the cell
    /// `code/depth`) whose cell intersects `r`.
    fn visit(&self, code: u64, depth: u8, a: usize, b: usize, r: &Rect, f: &mut impl FnMut(usize)) {
        if a == b {
            return;
        }
        let cell = self.grid.cell_rect(code, depth);
        if !cell.intersects(r) {
            return;
        }
        if r.contains_rect(&cell) || (b - a == 1 && self.block_depth[a] == depth) {
            (a..b).for_each(f);
            return;
        }
        debug_assert!(depth < MAX_DEPTH);
        let child = super::span(depth + 1);
        let mut lo = a;
        for k in 0..4u64 {
            let hi = if k == 3 {
                b
            } else {
                let end = code as u128 + (k as u128 + 1) * child;
                lo + self.block_code[lo..b].partition_point(|&c| (c as u128) < end)
            };
            self.visit(code + k * child as u64, depth + 1, lo, hi, r, f);
            lo = hi;
        }
    }
}
