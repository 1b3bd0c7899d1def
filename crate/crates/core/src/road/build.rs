use log::info;

use super::{Entry, RoadIndex, RoadParams, Rnet, ShortcutBuild, NONE};
use crate::error::{Error, Result};
use crate::graph::{Dist, Graph, VertexId, INF};
use crate::par;
use crate::partition::partition;
use crate::search::MinQueue;

/// Small adjacency structure over local ids.
pub(crate) struct LocalCsr {
    first: Vec<u32>,
    target: Vec<u32>,
    weight: Vec<Dist>,
}

#[derive(Default)]
pub(crate) struct LocalScratch {
    dist: Vec<Dist>,
    done: Vec<bool>,
    is_target: Vec<bool>,
    touched: Vec<u32>,
    queue: MinQueue<Dist, u32>,
}

impl LocalCsr {
    pub fn from_arcs(n: usize, mut arcs: Vec<(u32, u32, Dist)>) -> LocalCsr {
        arcs.sort_unstable();
        let mut first = vec![0u32; n + 1];
        for &(u, _, _) in &arcs {
            first[u as usize + 1] += 1;
        }
        for i in 0..n {
            first[i + 1] += first[i];
        }
        LocalCsr {
            first,
            target: arcs.iter().map(|a| a.1).collect(),
            weight: arcs.iter().map(|a| a.2).collect(),
        }
    }

    fn n(&self) -> usize {
        self.first.len() - 1
    }

    /// Distances from `s` to `targets`, written to `out`. Stops once every
    /// target is settled.
    pub fn row(&self, s: u32, targets: &[u32], sc: &mut LocalScratch, out: &mut [Dist]) {
        let n = self.n();
        if sc.dist.len() < n {
            sc.dist.resize(n, INF);
            sc.done.resize(n, false);
            sc.is_target.resize(n, false);
        }
        let mut remaining = 0;
        for &t in targets {
            if !sc.is_target[t as usize] {
                sc.is_target[t as usize] = true;
                remaining += 1;
            }
        }
        sc.queue.clear();
        sc.dist[s as usize] = 0;
        sc.touched.push(s);
        sc.queue.push(0, s);
        while let Some((d, u)) = sc.queue.pop_min() {
            let u = u as usize;
            if sc.done[u] {
                continue;
            }
            sc.done[u] = true;
            if sc.is_target[u] {
                remaining -= 1;
                if remaining == 0 {
                    break;
                }
            }
            for e in self.first[u] as usize..self.first[u + 1] as usize {
                let t = self.target[e];
                let nd = d + self.weight[e];
                if nd < sc.dist[t as usize] {
                    if sc.dist[t as usize] == INF {
                        sc.touched.push(t);
                    }
                    sc.dist[t as usize] = nd;
                    sc.queue.push(nd, t);
                }
            }
        }
        for (o, &t) in out.iter_mut().zip(targets) {
            *o = sc.dist[t as usize];
        }
        for &t in targets {
            sc.is_target[t as usize] = false;
        }
        for &v in &sc.touched {
            sc.dist[v as usize] = INF;
            sc.done[v as usize] = false;
        }
        sc.touched.clear();
    }
}

/// Border-to-border distances over `arcs` (in vertex ids), for the sorted
/// vertex list `verts` that contains every arc endpoint and border.
fn border_matrix(
    verts: &[VertexId],
    arcs: impl Iterator<Item = (VertexId, VertexId, Dist)>,
    borders: &[VertexId],
    sc: &mut LocalScratch,
) -> Vec<Dist> {
    let local = |v: VertexId| verts.binary_search(&v).expect("endpoint listed") as u32;
    let arcs: Vec<_> = arcs.map(|(u, v, w)| (local(u), local(v), w)).collect();
    let csr = LocalCsr::from_arcs(verts.len(), arcs);
    let b: Vec<u32> = borders.iter().map(|&x| local(x)).collect();
    let w = b.len();
    let mut out = vec![INF; w * w];
    for (i, &s) in b.iter().enumerate() {
        csr.row(s, &b, sc, &mut out[i * w..(i + 1) * w]);
    }
    out
}

pub(super) fn build(g: &Graph, params: RoadParams) -> Result<RoadIndex> {
    let (f, l) = (params.fanout, params.levels);
    if f < 2 {
        return Err(Error::InvalidParameter(format!("ROAD fanout {f} < 2")));
    }
    if l < 1 {
        return Err(Error::InvalidParameter("ROAD needs at least one level".into()));
    }
    let started = std::time::Instant::now();
    let n = g.vertex_count();
    let edges: Vec<(VertexId, VertexId, Dist)> = g.edges().collect();

    // Rnets in breadth-first order; each owns a vertex subset, and every
    // parent edge goes to the child owning its lower endpoint (or the only
    // endpoint the parent owns)
    let mut rnets = vec![Rnet {
        parent: NONE,
        ..Rnet::default()
    }];
    let mut owned: Vec<Vec<VertexId>> = vec![(0..n as VertexId).collect()];
    let mut redges: Vec<Vec<u32>> = vec![(0..edges.len() as u32).collect()];
    let mut slot = vec![NONE; n];
    let mut i = 0;
    while i < rnets.len() {
        let level = rnets[i].level as usize;
        if level == l {
            i += 1;
            continue;
        }
        let own = &owned[i];
        if own.len() < f {
            return Err(Error::InfeasibleLevel {
                level: level + 1,
                vertices: own.len(),
                fanout: f,
            });
        }
        let part = partition(g, own, f, params.seed.wrapping_add(i as u64));
        let mut groups: Vec<Vec<VertexId>> = vec![Vec::new(); f];
        for (k, &v) in own.iter().enumerate() {
            groups[part[k] as usize].push(v);
        }
        groups.retain(|g| !g.is_empty());
        let first = rnets.len() as u32;
        for (c, grp) in groups.iter().enumerate() {
            for &v in grp {
                slot[v as usize] = c as u32;
            }
        }
        let mut child_edges: Vec<Vec<u32>> = vec![Vec::new(); groups.len()];
        for &e in &redges[i] {
            let (u, v, _) = edges[e as usize];
            let c = if slot[u as usize] != NONE { slot[u as usize] } else { slot[v as usize] };
            debug_assert!(c != NONE, "edge ({u}, {v}) has no endpoint in its Rnet");
            child_edges[c as usize].push(e);
        }
        for &v in own {
            slot[v as usize] = NONE;
        }
        rnets[i].first_child = first;
        rnets[i].child_count = groups.len() as u32;
        for (grp, ce) in groups.into_iter().zip(child_edges) {
            rnets.push(Rnet {
                parent: i as u32,
                level: level as u32 + 1,
                ..Rnet::default()
            });
            owned.push(grp);
            redges.push(ce);
        }
        i += 1;
    }

    // vertex sets and borders
    let mut count = vec![0u32; n];
    let mut members: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut vsets: Vec<Vec<VertexId>> = vec![Vec::new(); rnets.len()];
    let mut borders = Vec::new();
    let mut touched = Vec::new();
    for r in 0..rnets.len() {
        rnets[r].border_start = borders.len() as u32;
        if r == 0 {
            rnets[r].interior = n as u32;
            continue;
        }
        for &e in &redges[r] {
            let (u, v, _) = edges[e as usize];
            for x in [u, v] {
                if count[x as usize] == 0 {
                    touched.push(x);
                }
                count[x as usize] += 1;
            }
        }
        touched.sort_unstable();
        let start = borders.len();
        for &x in &touched {
            if (count[x as usize] as usize) < g.degree(x) {
                borders.push(x);
            }
            count[x as usize] = 0;
            members[x as usize].push(r as u32);
        }
        rnets[r].border_len = (borders.len() - start) as u32;
        rnets[r].interior = (touched.len() - (borders.len() - start)) as u32;
        vsets[r] = std::mem::take(&mut touched);
    }

    // shortcuts, deepest level first
    drop(owned);
    let mut mats: Vec<Vec<Dist>> = vec![Vec::new(); rnets.len()];
    for level in (1..=l).rev() {
        let ids: Vec<usize> = (0..rnets.len()).filter(|&r| rnets[r].level as usize == level).collect();
        let ctx = ShortcutCtx {
            edges: &edges,
            rnets: &rnets,
            borders: &borders,
            redges: &redges,
            vsets: &vsets,
            mats: &mats,
        };
        let out = par::map_with_scratch(ids.len(), params.parallelism, LocalScratch::default, |sc, t| {
            ctx.compute(ids[t], params.shortcuts, sc)
        });
        for (t, m) in out.into_iter().enumerate() {
            mats[ids[t]] = m;
        }
    }
    let mut shortcuts = Vec::with_capacity(mats.iter().map(Vec::len).sum());
    for (r, m) in mats.into_iter().enumerate() {
        rnets[r].shortcut_start = shortcuts.len() as u64;
        shortcuts.extend(m);
    }

    // route overlay
    let mut leaf_adj: Vec<Vec<(u32, VertexId, Dist)>> = vec![Vec::new(); n];
    for (r, node) in rnets.iter().enumerate() {
        if node.child_count == 0 && r != 0 {
            for &e in &redges[r] {
                let (u, v, w) = edges[e as usize];
                leaf_adj[u as usize].push((r as u32, v, w));
                leaf_adj[v as usize].push((r as u32, u, w));
            }
        }
    }
    drop(redges);
    let mut entry_first = Vec::with_capacity(n + 1);
    let mut entries = Vec::new();
    let mut edge_target = Vec::new();
    let mut edge_weight = Vec::new();
    for v in 0..n as VertexId {
        entry_first.push(entries.len() as u32);
        let list = &members[v as usize];
        let ctx = OverlayCtx {
            v,
            list,
            rnets: &rnets,
            borders: &borders,
            adj: &leaf_adj[v as usize],
        };
        for &r in list.iter().filter(|&&r| rnets[r as usize].level == 1) {
            ctx.emit(r, &mut entries, &mut edge_target, &mut edge_weight);
        }
    }
    entry_first.push(entries.len() as u32);
    info!(
        "ROAD: {} Rnets over {} levels, {} borders, {} shortcuts, {} overlay entries, built in {:.2?}",
        rnets.len(),
        l,
        borders.len(),
        shortcuts.len(),
        entries.len(),
        started.elapsed()
    );

    Ok(RoadIndex {
        fanout: f,
        levels: l,
        rnets,
        borders,
        shortcuts,
        entry_first,
        entries,
        edge_target,
        edge_weight,
    })
}

struct OverlayCtx<'a> {
    v: VertexId,
    /// Rnets containing `v`, ascending.
    list: &'a [u32],
    rnets: &'a [Rnet],
    borders: &'a [VertexId],
    adj: &'a [(u32, VertexId, Dist)],
}

impl OverlayCtx<'_> {
    fn emit(&self, r: u32, entries: &mut Vec<Entry>, target: &mut Vec<VertexId>, weight: &mut Vec<Dist>) {
        let node = &self.rnets[r as usize];
        let bs = &self.borders[node.border_start as usize..(node.border_start + node.border_len) as usize];
        let row = bs.binary_search(&self.v).map_or(NONE, |p| p as u32);
        let at = entries.len();
        let mut e = Entry {
            rnet: r,
            end: 0,
            row,
            edge_start: target.len() as u32,
            edge_len: 0,
        };
        if node.child_count == 0 {
            for &(lr, t, w) in self.adj {
                if lr == r {
                    target.push(t);
                    weight.push(w);
                }
            }
            e.edge_len = target.len() as u32 - e.edge_start;
        }
        entries.push(e);
        for &c in self.list.iter().filter(|&&c| self.rnets[c as usize].parent == r) {
            self.emit(c, entries, target, weight);
        }
        entries[at].end = entries.len() as u32;
    }
}

struct ShortcutCtx<'a> {
    edges: &'a [(VertexId, VertexId, Dist)],
    rnets: &'a [Rnet],
    borders: &'a [VertexId],
    redges: &'a [Vec<u32>],
    vsets: &'a [Vec<VertexId>],
    mats: &'a [Vec<Dist>],
}

impl ShortcutCtx<'_> {
    fn borders(&self, r: usize) -> &[VertexId] {
        let node = &self.rnets[r];
        &self.borders[node.border_start as usize..(node.border_start + node.border_len) as usize]
    }

    /// Shortcut matrix of `r`. Leaves search their own edges. Above the
    /// leaves, a path inside `r` changes child only at vertices bordering
    /// both children, so the children's shortcuts over their borders suffice.
    fn compute(&self, r: usize, mode: ShortcutBuild, sc: &mut LocalScratch) -> Vec<Dist> {
        let node = &self.rnets[r];
        let bs = self.borders(r);
        if node.child_count == 0 || mode == ShortcutBuild::Direct {
            let arcs = self.redges[r].iter().flat_map(|&e| {
                let (u, v, w) = self.edges[e as usize];
                [(u, v, w), (v, u, w)]
            });
            return border_matrix(&self.vsets[r], arcs, bs, sc);
        }
        let kids = node.first_child as usize..(node.first_child + node.child_count) as usize;
        let mut verts: Vec<VertexId> = kids.clone().flat_map(|c| self.borders(c).iter().copied()).collect();
        verts.sort_unstable();
        verts.dedup();
        let arcs = kids.flat_map(|c| {
            let cb = self.borders(c);
            let m = &self.mats[c];
            let w = cb.len();
            (0..w * w).filter_map(move |x| {
                let (a, b) = (x / w, x % w);
                (a != b && m[x] != INF).then(|| (cb[a], cb[b], m[x]))
            })
        });
        border_matrix(&verts, arcs, bs, sc)
    }
}
