use std::sync::atomic::{AtomicUsize, Ordering};

use log::info;

use super::{span, Grid, SilcIndex, SilcParams, BLOCK_BYTES, MAX_DEPTH, NONE};
use crate::error::{Error, Result};
use crate::graph::{lower_bound_scale, CoordinateTable, Dist, Graph, Point, VertexId, INF};
use crate::par;
use crate::search::MinQueue;

/// Marks the source and vertices that share its position.
const WILD: u16 = u16::MAX;

/// Blocks per source grow roughly with the square root of |V| on road
/// networks. Synthetic road-like graphs measure 2.1 to 2.4.
const BLOCKS_PER_SQRT_V: f64 = 3.0;

/// Projected index size in bytes for `n` vertices.
pub fn estimate_bytes(n: usize) -> u64 {
    let blocks = BLOCKS_PER_SQRT_V * (n as f64).powf(1.5);
    (blocks * BLOCK_BYTES as f64) as u64 + n as u64 * 64
}

struct Ctx<'a> {
    g: &'a Graph,
    points: &'a [Point],
    /// Vertex ids in Morton order, and their codes.
    order: Vec<VertexId>,
    sorted_codes: Vec<u64>,
}

struct Scratch {
    dist: Vec<Dist>,
    hop: Vec<u16>,
    queue: MinQueue<Dist, VertexId>,
    /// Color per Morton position, wildcards filled from a neighbour.
    fill: Vec<u16>,
    real: Vec<bool>,
    run_end: Vec<u32>,
}

impl Scratch {
    fn new(n: usize) -> Scratch {
        Scratch {
            dist: vec![INF; n],
            hop: vec![WILD; n],
            queue: MinQueue::new(),
            fill: vec![0; n],
            real: vec![false; n],
            run_end: vec![0; n],
        }
    }
}

#[derive(Default)]
struct Tree {
    code: Vec<u64>,
    depth: Vec<u8>,
    slot: Vec<u16>,
    lo: Vec<f32>,
    hi: Vec<f32>,
    exceptions: Vec<(VertexId, u16, Dist)>,
}

impl SilcIndex {
    /// Builds one quadtree per vertex. Refuses with
    /// [`Error::MemoryBudget`] when the size estimate exceeds the budget.
    pub fn build(g: &Graph, coords: &CoordinateTable, params: SilcParams) -> Result<SilcIndex> {
        let n = g.vertex_count();
        if coords.len() != n {
            return Err(Error::InvalidParameter(format!(
                "{} coordinates for {n} vertices",
                coords.len()
            )));
        }
        if let Some(v) = (0..n as VertexId).find(|&v| g.degree(v) > WILD as usize) {
            return Err(Error::InvalidParameter(format!(
                "vertex {v} has degree {}, SILC supports at most {}",
                g.degree(v),
                WILD
            )));
        }
        let estimated_bytes = estimate_bytes(n);
        if estimated_bytes > params.budget_bytes {
            return Err(Error::MemoryBudget {
                estimated_bytes,
                budget_bytes: params.budget_bytes,
            });
        }
        let points = coords.points();
        let grid = Grid::new(points);
        let codes: Vec<u64> = points.iter().map(|&p| grid.code(p)).collect();
        let mut order: Vec<VertexId> = (0..n as VertexId).collect();
        order.sort_unstable_by_key(|&v| (codes[v as usize], v));
        let sorted_codes = order.iter().map(|&v| codes[v as usize]).collect();
        let ctx = Ctx {
            g,
            points,
            order,
            sorted_codes,
        };

        let done = AtomicUsize::new(0);
        let step = (n / 10).max(1);
        let trees = par::map_with_scratch(
            n,
            params.parallelism,
            || Scratch::new(n),
            |sc, s| {
                let t = ctx.tree(s as VertexId, sc);
                let c = done.fetch_add(1, Ordering::Relaxed) + 1;
                if c.is_multiple_of(step) {
                    info!("SILC: {c}/{n} quadtrees");
                }
                t
            },
        );

        let total: usize = trees.iter().map(|t| t.code.len()).sum();
        let total_exc: usize = trees.iter().map(|t| t.exceptions.len()).sum();
        let mut idx = SilcIndex {
            grid,
            points: points.to_vec(),
            codes,
            adj_first: g.first_edge().to_vec(),
            adj_target: (0..n as VertexId).flat_map(|v| g.targets(v).iter().copied()).collect(),
            adj_weight: (0..n as VertexId).flat_map(|v| g.weights(v).iter().copied()).collect(),
            lb_scale: lower_bound_scale(g, coords),
            tree_first: Vec::with_capacity(n + 1),
            block_code: Vec::with_capacity(total),
            block_depth: Vec::with_capacity(total),
            block_slot: Vec::with_capacity(total),
            lam_lo: Vec::with_capacity(total),
            lam_hi: Vec::with_capacity(total),
            exc_first: Vec::with_capacity(n + 1),
            exc_vertex: Vec::with_capacity(total_exc),
            exc_slot: Vec::with_capacity(total_exc),
            exc_dist: Vec::with_capacity(total_exc),
            chain_id: Vec::new(),
            chain_end: Vec::new(),
            chain_len: Vec::new(),
        };
        idx.tree_first.push(0);
        idx.exc_first.push(0);
        for t in trees {
            idx.block_code.extend(t.code);
            idx.block_depth.extend(t.depth);
            idx.block_slot.extend(t.slot);
            idx.lam_lo.extend(t.lo);
            idx.lam_hi.extend(t.hi);
            idx.tree_first.push(idx.block_code.len() as u64);
            for (v, slot, d) in t.exceptions {
                idx.exc_vertex.push(v);
                idx.exc_slot.push(slot);
                idx.exc_dist.push(d);
            }
            idx.exc_first.push(idx.exc_vertex.len() as u64);
        }
        idx.build_chains();
        info!(
            "SILC: {} blocks, {} exceptions, {} bytes (estimate {estimated_bytes})",
            idx.block_count(),
            idx.exception_count(),
            idx.byte_size()
        );
        Ok(idx)
    }

    fn build_chains(&mut self) {
        let n = self.vertex_count();
        self.chain_id = vec![NONE; n];
        self.chain_end = vec![[NONE; 2]; n];
        self.chain_len = vec![[0; 2]; n];
        let mut seen = vec![false; n];
        let mut next_id = 0;
        for v in 0..n as VertexId {
            if seen[v as usize] || self.degree(v) != 2 {
                continue;
            }
            // walk both ways; `line` runs end_a .. v .. end_b
            let (left, end_a, cyclic) = self.walk(v, 0);
            if cyclic {
                left.iter().for_each(|&u| seen[u as usize] = true);
                seen[v as usize] = true;
                continue;
            }
            let (right, end_b, _) = self.walk(v, 1);
            let mut line = Vec::with_capacity(left.len() + right.len() + 1);
            line.push(end_a);
            line.extend(left.iter().rev());
            line.push(v);
            line.extend(&right);
            line.push(end_b);
            let mut pre = vec![0 as Dist; line.len()];
            for i in 1..line.len() {
                pre[i] = pre[i - 1] + self.weight(line[i - 1], line[i]);
            }
            let total = pre[line.len() - 1];
            for i in 1..line.len() - 1 {
                let u = line[i];
                seen[u as usize] = true;
                self.chain_id[u as usize] = next_id;
                let (ea, eb) = ((end_a, pre[i]), (end_b, total - pre[i]));
                let [a, b] = if self.neighbor(u, 0).0 == line[i - 1] { [ea, eb] } else { [eb, ea] };
                self.chain_end[u as usize] = [a.0, b.0];
                self.chain_len[u as usize] = [a.1, b.1];
            }
            next_id += 1;
        }
    }

    /// Follows degree-2 vertices from `v` through neighbour `dir`. Returns
    /// the vertices passed, the first vertex of another degree, and whether
    /// the walk came back to `v`.
    fn walk(&self, v: VertexId, dir: u16) -> (Vec<VertexId>, VertexId, bool) {
        let mut out = Vec::new();
        let (mut prev, mut cur) = (v, self.neighbor(v, dir).0);
        while cur != v && self.degree(cur) == 2 {
            out.push(cur);
            let (a, b) = (self.neighbor(cur, 0).0, self.neighbor(cur, 1).0);
            let next = if a == prev { b } else { a };
            prev = cur;
            cur = next;
        }
        (out, cur, cur == v)
    }

    fn weight(&self, u: VertexId, v: VertexId) -> Dist {
        let r = self.adj_first[u as usize] as usize..self.adj_first[u as usize + 1] as usize;
        let i = self.adj_target[r.clone()].binary_search(&v).expect("adjacent");
        self.adj_weight[r.start + i]
    }
}

impl Ctx<'_> {
    fn tree(&self, s: VertexId, sc: &mut Scratch) -> Tree {
        self.color(s, sc);
        let n = self.order.len();
        let ps = self.points[s as usize];
        let mut tree = Tree::default();
        let mut last = WILD;
        for i in 0..n {
            let v = self.order[i];
            let on_source = v != s && self.points[v as usize].dist(ps) == 0.0;
            if on_source {
                tree.exceptions.push((v, sc.hop[v as usize], sc.dist[v as usize]));
            }
            sc.real[i] = v != s && !on_source;
            if sc.real[i] {
                last = sc.hop[v as usize];
            }
            sc.fill[i] = last;
        }
        // leading wildcards take the first real color
        if let Some(first) = sc.real.iter().position(|&r| r) {
            let c = sc.fill[first];
            sc.fill[..first].iter_mut().for_each(|x| *x = c);
        }
        sc.run_end[n - 1] = n as u32;
        for i in (0..n - 1).rev() {
            sc.run_end[i] = if sc.fill[i] == sc.fill[i + 1] { sc.run_end[i + 1] } else { i as u32 + 1 };
        }
        self.emit(0, 0, 0, n, ps, sc, &mut tree);
        tree.exceptions.sort_unstable_by_key(|e| e.0);
        tree
    }

    /// Dijkstra from `s` recording the lowest first-hop slot among all
    /// shortest paths.
    fn color(&self, s: VertexId, sc: &mut Scratch) {
        sc.dist.fill(INF);
        sc.hop.fill(WILD);
        sc.queue.clear();
        sc.dist[s as usize] = 0;
        sc.queue.push(0, s);
        while let Some((d, u)) = sc.queue.pop_min() {
            if d > sc.dist[u as usize] {
                continue;
            }
            let targets = self.g.targets(u);
            let weights = self.g.weights(u);
            for (i, (&v, &w)) in targets.iter().zip(weights).enumerate() {
                let nd = d + w;
                let cand = if u == s { i as u16 } else { sc.hop[u as usize] };
                let dv = &mut sc.dist[v as usize];
                if nd < *dv {
                    *dv = nd;
                    sc.hop[v as usize] = cand;
                    sc.queue.push(nd, v);
                } else if nd == *dv && cand < sc.hop[v as usize] {
                    sc.hop[v as usize] = cand;
                }
            }
        }
    }

    /// Emits the blocks of the cell `code/depth` holding Morton positions
    /// `a..b`, in Morton order.
    #[allow(clippy::too_many_arguments)]
    fn emit(&self, code: u64, depth: u8, a: usize, b: usize, ps: Point, sc: &Scratch, tree: &mut Tree) {
        if a == b {
            return;
        }
        if sc.run_end[a] as usize >= b {
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for i in a..b {
                if sc.real[i] {
                    let v = self.order[i] as usize;
                    let r = sc.dist[v] as f64 / self.points[v].dist(ps);
                    lo = lo.min(r);
                    hi = hi.max(r);
                }
            }
            if lo.is_finite() {
                tree.code.push(code);
                tree.depth.push(depth);
                tree.slot.push(sc.fill[a]);
                tree.lo.push(round_down(lo));
                tree.hi.push(round_up(hi));
            }
            return;
        }
        if depth == MAX_DEPTH {
            for i in a..b {
                if sc.real[i] {
                    let v = self.order[i];
                    tree.exceptions.push((v, sc.hop[v as usize], sc.dist[v as usize]));
                }
            }
            return;
        }
        let child = span(depth + 1);
        let mut lo = a;
        for k in 0..4u64 {
            let hi = if k == 3 {
                b
            } else {
                let end = code as u128 + (k as u128 + 1) * child;
                lo + self.sorted_codes[lo..b].partition_point(|&c| (c as u128) < end)
            };
            self.emit(code + k * child as u64, depth + 1, lo, hi, ps, sc, tree);
            lo = hi;
        }
    }
}

fn round_down(x: f64) -> f32 {
    let f = x as f32;
    if f as f64 > x {
        f.next_down()
    } else {
        f
    }
}

fn round_up(x: f64) -> f32 {
    let f = x as f32;
    if (f as f64) < x {
        f.next_up()
    } else {
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_rounding_brackets_the_value() {
        for x in [0.1, 1.0 / 3.0, 1.7e10, 1.0, 123.456789] {
            assert!(round_down(x) as f64 <= x);
            assert!(round_up(x) as f64 >= x);
        }
        assert_eq!(round_up(1e300), f32::INFINITY);
    }
}
