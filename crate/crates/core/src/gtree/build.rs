use log::info;

use super::{GNode, GTreeIndex, GTreeParams, NONE};
use crate::dijkstra::{dijkstra_to_targets, DijkstraScratch};
use crate::error::{Error, Result};
use crate::graph::{Dist, Graph, VertexId};
use crate::par;
use crate::partition::partition;

pub(super) fn build(g: &Graph, params: GTreeParams) -> Result<GTreeIndex> {
    if params.fanout < 2 {
        return Err(Error::InvalidParameter(format!("G-tree fanout {} < 2", params.fanout)));
    }
    if params.leaf_capacity < 1 {
        return Err(Error::InvalidParameter("G-tree leaf capacity must be at least 1".into()));
    }
    let started = std::time::Instant::now();
    let n = g.vertex_count();

    // breadth-first splitting keeps siblings contiguous
    let mut nodes: Vec<GNode> = vec![GNode {
        parent: NONE,
        ..GNode::default()
    }];
    let mut members: Vec<Vec<VertexId>> = vec![(0..n as VertexId).collect()];
    let mut i = 0;
    while i < nodes.len() {
        if members[i].len() > params.leaf_capacity {
            let verts = std::mem::take(&mut members[i]);
            let part = partition(g, &verts, params.fanout, params.seed.wrapping_add(i as u64));
            let mut groups: Vec<Vec<VertexId>> = vec![Vec::new(); params.fanout];
            for (k, &v) in verts.iter().enumerate() {
                groups[part[k] as usize].push(v);
            }
            nodes[i].first_child = nodes.len() as u32;
            for grp in groups.into_iter().filter(|g| !g.is_empty()) {
                nodes.push(GNode {
                    parent: i as u32,
                    depth: nodes[i].depth + 1,
                    ..GNode::default()
                });
                members.push(grp);
                nodes[i].child_count += 1;
            }
        }
        i += 1;
    }

    let mut leaf_of = vec![NONE; n];
    let mut pos_in_leaf = vec![0u32; n];
    let mut leaf_vertices = Vec::with_capacity(n);
    for (id, m) in members.iter_mut().enumerate() {
        if nodes[id].child_count > 0 {
            continue;
        }
        m.sort_unstable();
        nodes[id].vert_start = leaf_vertices.len() as u32;
        nodes[id].vert_len = m.len() as u32;
        for (p, &v) in m.iter().enumerate() {
            leaf_of[v as usize] = id as u32;
            pos_in_leaf[v as usize] = p as u32;
        }
        leaf_vertices.extend_from_slice(m);
    }
    drop(members);

    let mut leaf_adj_first = Vec::with_capacity(n + 1);
    let mut leaf_adj_target = Vec::new();
    let mut leaf_adj_weight = Vec::new();
    for &v in &leaf_vertices {
        leaf_adj_first.push(leaf_adj_target.len() as u32);
        for (u, w) in g.neighbors(v) {
            if leaf_of[u as usize] == leaf_of[v as usize] {
                leaf_adj_target.push(pos_in_leaf[u as usize]);
                leaf_adj_weight.push(w);
            }
        }
    }
    leaf_adj_first.push(leaf_adj_target.len() as u32);

    // v borders every node on its leaf-to-root chain strictly below the
    // shallowest LCA with a neighbour
    let mut node_borders: Vec<Vec<VertexId>> = vec![Vec::new(); nodes.len()];
    for v in 0..n as VertexId {
        let lv = leaf_of[v as usize];
        let mut min_lca_depth = nodes[lv as usize].depth;
        for &u in g.targets(v) {
            let lu = leaf_of[u as usize];
            if lu != lv {
                min_lca_depth = min_lca_depth.min(nodes[lca(&nodes, lv, lu) as usize].depth);
            }
        }
        let mut x = lv;
        while nodes[x as usize].depth > min_lca_depth {
            node_borders[x as usize].push(v);
            x = nodes[x as usize].parent;
        }
    }

    let mut borders = Vec::new();
    for (id, b) in node_borders.iter_mut().enumerate() {
        b.sort_unstable();
        nodes[id].border_start = borders.len() as u32;
        nodes[id].border_len = b.len() as u32;
        borders.extend_from_slice(b);
    }

    let mut union = Vec::new();
    let mut child_offsets = Vec::new();
    let mut own_pos = Vec::new();
    for id in 0..nodes.len() {
        nodes[id].own_pos_start = own_pos.len() as u32;
        if nodes[id].child_count == 0 {
            let node = nodes[id];
            own_pos.extend(node_borders[id].iter().map(|&b| pos_in_leaf[b as usize]));
            debug_assert!(node.border_len as usize == node_borders[id].len());
            continue;
        }
        nodes[id].union_start = union.len() as u32;
        nodes[id].child_off_start = child_offsets.len() as u32;
        let first = nodes[id].first_child;
        let mut seg = Vec::new();
        for c in first..first + nodes[id].child_count {
            child_offsets.push(seg.len() as u32);
            seg.extend_from_slice(&node_borders[c as usize]);
        }
        child_offsets.push(seg.len() as u32);
        let offs = &child_offsets[nodes[id].child_off_start as usize..];
        for &b in &node_borders[id] {
            let c = child_on_chain(&nodes, leaf_of[b as usize], id as u32);
            let k = (c - first) as usize;
            let part = &seg[offs[k] as usize..offs[k + 1] as usize];
            let at = part.binary_search(&b).expect("border is inherited by a child");
            own_pos.push(offs[k] + at as u32);
        }
        nodes[id].union_len = seg.len() as u32;
        union.extend(seg);
    }

    // one Dijkstra task per matrix row (non-leaf) or column (leaf)
    let mut tasks: Vec<(u32, u32)> = Vec::new();
    let mut matrix_len = 0u64;
    for (id, node) in nodes.iter_mut().enumerate() {
        node.matrix_start = matrix_len;
        let count = if node.child_count == 0 { node.border_len } else { node.union_len };
        tasks.extend((0..count).map(|k| (id as u32, k)));
        matrix_len += if node.child_count == 0 {
            node.vert_len as u64 * node.border_len as u64
        } else {
            node.union_len as u64 * node.union_len as u64
        };
    }
    info!(
        "G-tree: {} nodes, {} borders, {} matrix entries, {} searches",
        nodes.len(),
        borders.len(),
        matrix_len,
        tasks.len()
    );

    let rows: Vec<Vec<Dist>> = par::map_with_scratch(
        tasks.len(),
        params.parallelism,
        || (DijkstraScratch::new(n), vec![false; n]),
        |(scratch, mark), t| {
            let (id, k) = tasks[t];
            let node = &nodes[id as usize];
            if node.child_count == 0 {
                let s = borders[(node.border_start + k) as usize];
                let verts =
                    &leaf_vertices[node.vert_start as usize..(node.vert_start + node.vert_len) as usize];
                dijkstra_to_targets(g, s, verts, scratch, mark)
            } else {
                let u = &union[node.union_start as usize..(node.union_start + node.union_len) as usize];
                dijkstra_to_targets(g, u[k as usize], u, scratch, mark)
            }
        },
    );

    let mut matrix = vec![0 as Dist; matrix_len as usize];
    for (t, row) in rows.into_iter().enumerate() {
        let (id, k) = tasks[t];
        let node = &nodes[id as usize];
        let base = node.matrix_start as usize;
        if node.child_count == 0 {
            let w = node.border_len as usize;
            for (p, d) in row.into_iter().enumerate() {
                matrix[base + p * w + k as usize] = d;
            }
        } else {
            let w = node.union_len as usize;
            matrix[base + k as usize * w..base + (k as usize + 1) * w].copy_from_slice(&row);
        }
    }
    info!("G-tree built in {:.2?}", started.elapsed());

    Ok(GTreeIndex {
        fanout: params.fanout,
        leaf_capacity: params.leaf_capacity,
        nodes,
        borders,
        union,
        child_offsets,
        own_pos,
        leaf_vertices,
        matrix,
        leaf_of,
        pos_in_leaf,
        leaf_adj_first,
        leaf_adj_target,
        leaf_adj_weight,
    })
}

fn lca(nodes: &[GNode], mut a: u32, mut b: u32) -> u32 {
    while nodes[a as usize].depth > nodes[b as usize].depth {
        a = nodes[a as usize].parent;
    }
    while nodes[b as usize].depth > nodes[a as usize].depth {
        b = nodes[b as usize].parent;
    }
    while a != b {
        a = nodes[a as usize].parent;
        b = nodes[b as usize].parent;
    }
    a
}

/// The child of `ancestor` on the chain from `leaf` upwards.
fn child_on_chain(nodes: &[GNode], mut leaf: u32, ancestor: u32) -> u32 {
    while nodes[leaf as usize].parent != ancestor {
        leaf = nodes[leaf as usize].parent;
    }
    leaf
}
