//! Multilevel balanced graph partitioning.
//!
//! Each bisection coarsens by heavy-edge matching, grows an initial split on
//! the coarsest graph, then projects back while refining the boundary with
//! Fiduccia-Mattheyses passes. `k`-way splits are recursive bisections.

use std::collections::BinaryHeap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Graph, VertexId};

const COARSEST: usize = 60;
const INITIAL_TRIES: usize = 8;
const FM_PASSES: usize = 8;
const FM_STALL: usize = 64;
const IMBALANCE: f64 = 0.03;

/// Induced subgraph in local ids with vertex and edge weights.
#[derive(Debug, Clone)]
struct Local {
    xadj: Vec<usize>,
    adj: Vec<u32>,
    ew: Vec<u32>,
    vw: Vec<u32>,
}

impl Local {
    fn n(&self) -> usize {
        self.vw.len()
    }

    fn total_weight(&self) -> u64 {
        self.vw.iter().map(|&w| w as u64).sum()
    }

    fn nbrs(&self, v: usize) -> impl Iterator<Item = (usize, u32)> + '_ {
        (self.xadj[v]..self.xadj[v + 1]).map(move |e| (self.adj[e] as usize, self.ew[e]))
    }

    fn induced(g: &Graph, vertices: &[VertexId]) -> Local {
        let mut pos = std::collections::HashMap::with_capacity(vertices.len());
        for (i, &v) in vertices.iter().enumerate() {
            pos.insert(v, i as u32);
        }
        let mut xadj = Vec::with_capacity(vertices.len() + 1);
        let mut adj = Vec::new();
        xadj.push(0);
        for &v in vertices {
            adj.extend(g.targets(v).iter().filter_map(|t| pos.get(t).copied()));
            xadj.push(adj.len());
        }
        let ew = vec![1; adj.len()];
        Local {
            xadj,
            adj,
            ew,
            vw: vec![1; vertices.len()],
        }
    }

    fn subset(&self, keep: &[usize]) -> Local {
        let mut pos = vec![u32::MAX; self.n()];
        for (i, &v) in keep.iter().enumerate() {
            pos[v] = i as u32;
        }
        let mut xadj = vec![0];
        let mut adj = Vec::new();
        let mut ew = Vec::new();
        for &v in keep {
            for (u, w) in self.nbrs(v) {
                if pos[u] != u32::MAX {
                    adj.push(pos[u]);
                    ew.push(w);
                }
            }
            xadj.push(adj.len());
        }
        Local {
            xadj,
            adj,
            ew,
            vw: keep.iter().map(|&v| self.vw[v]).collect(),
        }
    }

    /// Heavy-edge matching; returns the coarse graph and the fine-to-coarse map.
    fn coarsen(&self, rng: &mut ChaCha8Rng) -> (Local, Vec<u32>) {
        let n = self.n();
        let cap = (self.total_weight() / 20).max(2) as u32;
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let mut mate = vec![u32::MAX; n];
        for &u in &order {
            if mate[u] != u32::MAX {
                continue;
            }
            let mut best: Option<(u32, usize)> = None;
            for (v, w) in self.nbrs(u) {
                if v != u && mate[v] == u32::MAX && self.vw[u] + self.vw[v] <= cap {
                    let better = match best {
                        None => true,
                        Some((bw, bv)) => w > bw || (w == bw && v < bv),
                    };
                    if better {
                        best = Some((w, v));
                    }
                }
            }
            match best {
                Some((_, v)) => {
                    mate[u] = v as u32;
                    mate[v] = u as u32;
                }
                None => mate[u] = u as u32,
            }
        }
        let mut cmap = vec![u32::MAX; n];
        let mut cn = 0u32;
        for u in 0..n {
            if cmap[u] == u32::MAX {
                cmap[u] = cn;
                cmap[mate[u] as usize] = cn;
                cn += 1;
            }
        }
        let mut members: Vec<Vec<usize>> = vec![Vec::with_capacity(2); cn as usize];
        for u in 0..n {
            members[cmap[u] as usize].push(u);
        }
        let mut slot = vec![u32::MAX; cn as usize];
        let mut xadj = vec![0];
        let mut adj: Vec<u32> = Vec::new();
        let mut ew: Vec<u32> = Vec::new();
        let mut vw = Vec::with_capacity(cn as usize);
        for (c, group) in members.iter().enumerate() {
            let start = adj.len();
            vw.push(group.iter().map(|&u| self.vw[u]).sum());
            for &u in group {
                for (v, w) in self.nbrs(u) {
                    let cv = cmap[v];
                    if cv as usize == c {
                        continue;
                    }
                    let s = slot[cv as usize];
                    if s != u32::MAX && s as usize >= start {
                        ew[s as usize] += w;
                    } else {
                        slot[cv as usize] = adj.len() as u32;
                        adj.push(cv);
                        ew.push(w);
                    }
                }
            }
            xadj.push(adj.len());
        }
        (Local { xadj, adj, ew, vw }, cmap)
    }
}

struct Bisection {
    side: Vec<u8>,
    weight: [u64; 2],
    max: [u64; 2],
}

impl Bisection {
    fn cut(&self, g: &Local) -> u64 {
        let mut cut = 0u64;
        for v in 0..g.n() {
            for (u, w) in g.nbrs(v) {
                if self.side[u] != self.side[v] {
                    cut += w as u64;
                }
            }
        }
        cut / 2
    }

    fn overload(&self) -> u64 {
        self.weight[0].saturating_sub(self.max[0]) + self.weight[1].saturating_sub(self.max[1])
    }

    fn gain(&self, g: &Local, v: usize) -> i64 {
        let mut gain = 0i64;
        for (u, w) in g.nbrs(v) {
            if self.side[u] == self.side[v] {
                gain -= w as i64;
            } else {
                gain += w as i64;
            }
        }
        gain
    }

    fn mv(&mut self, g: &Local, v: usize) {
        let s = self.side[v] as usize;
        self.weight[s] -= g.vw[v] as u64;
        self.weight[1 - s] += g.vw[v] as u64;
        self.side[v] = 1 - self.side[v];
    }

    /// Fiduccia-Mattheyses: moves the best-gain unlocked vertex while the
    /// move keeps balance (or relieves an overloaded side), then rolls back
    /// to the best prefix.
    fn refine(&mut self, g: &Local) {
        let n = g.n();
        for _ in 0..FM_PASSES {
            let mut gain: Vec<i64> = (0..n).map(|v| self.gain(g, v)).collect();
            let mut heap: BinaryHeap<(i64, u32)> = (0..n)
                .filter(|&v| g.nbrs(v).any(|(u, _)| self.side[u] != self.side[v]))
                .map(|v| (gain[v], v as u32))
                .collect();
            let mut locked = vec![false; n];
            let mut cut = self.cut(g) as i64;
            let start = (self.overload(), cut);
            let mut best = start;
            let mut moves: Vec<usize> = Vec::new();
            let mut best_len = 0;
            while let Some((gv, v)) = heap.pop() {
                let v = v as usize;
                if locked[v] || gv != gain[v] {
                    continue;
                }
                let s = self.side[v] as usize;
                let fits = self.weight[1 - s] + g.vw[v] as u64 <= self.max[1 - s];
                let relieves = self.weight[s] > self.max[s];
                if !fits && !relieves {
                    continue;
                }
                locked[v] = true;
                self.mv(g, v);
                cut -= gv;
                moves.push(v);
                for (u, w) in g.nbrs(v) {
                    if locked[u] {
                        continue;
                    }
                    let delta = 2 * w as i64;
                    gain[u] += if self.side[u] == self.side[v] { -delta } else { delta };
                    heap.push((gain[u], u as u32));
                }
                let score = (self.overload(), cut);
                if score < best {
                    best = score;
                    best_len = moves.len();
                } else if moves.len() - best_len > FM_STALL {
                    break;
                }
            }
            for &v in moves[best_len..].iter().rev() {
                self.mv(g, v);
            }
            if best >= start {
                break;
            }
        }
    }
}

/// Grows side 0 from `seed` by best gain until it reaches `target` weight.
fn grow(g: &Local, seed: usize, target: u64, rng: &mut ChaCha8Rng) -> Vec<u8> {
    let n = g.n();
    let mut side = vec![1u8; n];
    let mut gain: Vec<i64> = (0..n).map(|v| -g.nbrs(v).map(|(_, w)| w as i64).sum::<i64>()).collect();
    let mut heap: BinaryHeap<(i64, u32)> = BinaryHeap::new();
    let mut weight = 0u64;
    heap.push((gain[seed], seed as u32));
    while weight < target {
        let v = match heap.pop() {
            Some((gv, v)) if side[v as usize] == 1 && gv == gain[v as usize] => v as usize,
            Some(_) => continue,
            None => {
                // disconnected remainder: restart from a random unassigned vertex
                let rest: Vec<usize> = (0..n).filter(|&v| side[v] == 1).collect();
                if rest.is_empty() {
                    break;
                }
                rest[rng.gen_range(0..rest.len())]
            }
        };
        if weight + g.vw[v] as u64 > target && weight > 0 && (weight + g.vw[v] as u64 - target) > (target - weight) {
            break;
        }
        side[v] = 0;
        weight += g.vw[v] as u64;
        for (u, w) in g.nbrs(v) {
            if side[u] == 1 {
                gain[u] += 2 * w as i64;
                heap.push((gain[u], u as u32));
            }
        }
    }
    side
}

fn bisect(g: &Local, frac: f64, rng: &mut ChaCha8Rng) -> Vec<u8> {
    let n = g.n();
    let total = g.total_weight();
    let target0 = ((total as f64) * frac).round() as u64;
    let max_vw = g.vw.iter().copied().max().unwrap_or(1) as u64;
    let slack = ((target0.min(total - target0) as f64) * IMBALANCE).ceil() as u64;
    let max = [target0 + slack.max(max_vw), (total - target0) + slack.max(max_vw)];

    if n > COARSEST {
        let (coarse, cmap) = g.coarsen(rng);
        if coarse.n() < n * 9 / 10 {
            let cside = bisect(&coarse, frac, rng);
            let side: Vec<u8> = cmap.iter().map(|&c| cside[c as usize]).collect();
            let mut b = Bisection {
                weight: weights(g, &side),
                side,
                max,
            };
            b.refine(g);
            return b.side;
        }
    }

    let mut best: Option<((u64, u64), Bisection)> = None;
    for _ in 0..INITIAL_TRIES.min(n.max(1)) {
        let seed = rng.gen_range(0..n);
        let side = grow(g, seed, target0, rng);
        let mut b = Bisection {
            weight: weights(g, &side),
            side,
            max,
        };
        b.refine(g);
        let score = (b.overload(), b.cut(g));
        if best.as_ref().is_none_or(|(s, _)| score < *s) {
            best = Some((score, b));
        }
    }
    best.map(|(_, b)| b.side).unwrap_or_default()
}

fn weights(g: &Local, side: &[u8]) -> [u64; 2] {
    let mut w = [0u64; 2];
    for (v, &s) in side.iter().enumerate() {
        w[s as usize] += g.vw[v] as u64;
    }
    w
}

/// Moves vertices so side `s` holds at least `need[s]` vertices, preferring
/// vertices adjacent to side `s`.
fn ensure_counts(g: &Local, side: &mut [u8], need: [usize; 2]) {
    for s in 0..2u8 {
        let mut have = side.iter().filter(|&&x| x == s).count();
        while have < need[s as usize] {
            let pick = (0..g.n())
                .filter(|&v| side[v] != s)
                .max_by_key(|&v| (g.nbrs(v).filter(|&(u, _)| side[u] == s).count(), std::cmp::Reverse(v)))
                .expect("enough vertices overall");
            side[pick] = s;
            have += 1;
        }
    }
}

fn kway(g: &Local, parts: usize, rng: &mut ChaCha8Rng) -> Vec<u32> {
    let n = g.n();
    if parts <= 1 || n == 0 {
        return vec![0; n];
    }
    if n <= parts {
        return (0..n as u32).collect();
    }
    let p0 = parts / 2;
    let mut side = bisect(g, p0 as f64 / parts as f64, rng);
    ensure_counts(g, &mut side, [p0, parts - p0]);
    let mut out = vec![0u32; n];
    for (s, offset, p) in [(0u8, 0u32, p0), (1u8, p0 as u32, parts - p0)] {
        let keep: Vec<usize> = (0..n).filter(|&v| side[v] == s).collect();
        let sub = g.subset(&keep);
        let inner = kway(&sub, p, rng);
        for (i, &v) in keep.iter().enumerate() {
            out[v] = offset + inner[i];
        }
    }
    out
}

/// Splits `vertices` (inducing a subgraph of `g`) into `parts` groups of
/// near-equal size with few cut edges. Returns the part of each input vertex.
/// Every part is non-empty when `vertices.len() >= parts`.
pub fn partition(g: &Graph, vertices: &[VertexId], parts: usize, seed: u64) -> Vec<u32> {
    let local = Local::induced(g, vertices);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (vertices.len() as u64).rotate_left(17));
    kway(&local, parts, &mut rng)
}

/// Number of edges of `g` whose endpoints fall in different parts.
pub fn edge_cut(g: &Graph, vertices: &[VertexId], part: &[u32]) -> usize {
    let mut of = std::collections::HashMap::new();
    for (i, &v) in vertices.iter().enumerate() {
        of.insert(v, part[i]);
    }
    g.edges()
        .filter(|(u, v, _)| matches!((of.get(u), of.get(v)), (Some(a), Some(b)) if a != b))
        .count()
}
