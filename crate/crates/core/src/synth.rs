//! Seeded synthetic road networks for tests, benchmarks and the harness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{CoordinateTable, Dist, Graph, Point, VertexId, WeightKind};

struct Dsu(Vec<u32>);

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu((0..n as u32).collect())
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.0[x as usize] != x {
            let p = self.0[self.0[x as usize] as usize];
            self.0[x as usize] = p;
            x = p;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) -> bool {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        self.0[a.max(b) as usize] = a.min(b);
        true
    }
}

/// Random points joined to their nearest neighbours, with independent random
/// integer weights in `1..=1000`. The Euclidean lower bound only holds after
/// scaling by [`crate::graph::lower_bound_scale`].
pub fn random_planar(n: usize, seed: u64) -> (Graph, CoordinateTable) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (coords, pairs) = geometric_skeleton(n, &mut rng);
    let edges: Vec<_> = pairs
        .into_iter()
        .map(|(u, v)| (u, v, rng.gen_range(1..=1000)))
        .collect();
    let g = Graph::from_edges(n, &edges, WeightKind::Distance).expect("skeleton is connected");
    (g, coords)
}

/// Like [`random_planar`] but every weight is at least the edge's Euclidean
/// length, so Euclidean distance is a direct lower bound.
pub fn random_planar_metric(n: usize, seed: u64) -> (Graph, CoordinateTable) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (coords, pairs) = geometric_skeleton(n, &mut rng);
    let edges: Vec<_> = pairs
        .into_iter()
        .map(|(u, v)| {
            let len = coords.point(u).dist(coords.point(v));
            let w = (len * rng.gen_range(1.0..1.3)).ceil().max(1.0) as Dist;
            (u, v, w)
        })
        .collect();
    let g = Graph::from_edges(n, &edges, WeightKind::Distance).expect("skeleton is connected");
    (g, coords)
}

/// Points in a 10 km square, each joined to its three nearest neighbours,
/// then components linked by their closest pairs.
fn geometric_skeleton(n: usize, rng: &mut ChaCha8Rng) -> (CoordinateTable, Vec<(VertexId, VertexId)>) {
    assert!(n >= 2, "need at least two vertices");
    let pts: Vec<Point> = (0..n)
        .map(|_| Point::new(rng.gen_range(0.0..10_000.0), rng.gen_range(0.0..10_000.0)))
        .collect();
    let coords = CoordinateTable::from_points(pts);
    let p = coords.points();
    let mut pairs = Vec::new();
    let mut dsu = Dsu::new(n);
    for u in 0..n {
        let mut near: Vec<(f64, usize)> = (0..n)
            .filter(|&v| v != u)
            .map(|v| (p[u].dist(p[v]), v))
            .collect();
        let take = 3.min(near.len());
        near.select_nth_unstable_by(take - 1, |a, b| a.partial_cmp(b).unwrap());
        for &(_, v) in &near[..take] {
            pairs.push((u.min(v) as VertexId, u.max(v) as VertexId));
            dsu.union(u as u32, v as u32);
        }
    }
    loop {
        let roots: Vec<u32> = (0..n as u32).filter(|&v| dsu.find(v) == v).collect();
        if roots.len() == 1 {
            break;
        }
        // join component of vertex 0 to its nearest outside vertex
        let r0 = dsu.find(0);
        let mut best = (f64::INFINITY, 0, 0);
        for u in 0..n as u32 {
            if dsu.find(u) != r0 {
                continue;
            }
            for v in 0..n as u32 {
                if dsu.find(v) != r0 {
                    let d = p[u as usize].dist(p[v as usize]);
                    if d < best.0 {
                        best = (d, u, v);
                    }
                }
            }
        }
        pairs.push((best.1.min(best.2), best.1.max(best.2)));
        dsu.union(best.1, best.2);
    }
    pairs.sort_unstable();
    pairs.dedup();
    (coords, pairs)
}

/// A road-like network of exactly `n` vertices: a jittered grid of junctions
/// with a random spanning tree plus extra streets, where some streets are
/// subdivided into chains of degree-2 vertices. Weights are Euclidean lengths
/// inflated by up to 20 %, so both the Euclidean bound and degree-2 chains
/// behave as on real road data.
pub fn road_like(n: usize, seed: u64) -> (Graph, CoordinateTable) {
    assert!(n >= 4, "need at least four vertices");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let junctions = ((n as f64) * 0.6).round().max(4.0) as usize;
    let side = (junctions as f64).sqrt().ceil() as usize;
    let junctions = junctions.min(side * side);
    let spacing = 250.0;
    let mut pts: Vec<Point> = (0..junctions)
        .map(|i| {
            let (r, c) = (i / side, i % side);
            Point::new(
                c as f64 * spacing + rng.gen_range(-80.0..80.0),
                r as f64 * spacing + rng.gen_range(-80.0..80.0),
            )
        })
        .collect();
    let mut grid_edges: Vec<(u32, u32)> = Vec::new();
    for i in 0..junctions {
        let (r, c) = (i / side, i % side);
        if c + 1 < side && i + 1 < junctions {
            grid_edges.push((i as u32, i as u32 + 1));
        }
        if (r + 1) * side + c < junctions {
            grid_edges.push((i as u32, ((r + 1) * side + c) as u32));
        }
    }
    for i in (1..grid_edges.len()).rev() {
        let j = rng.gen_range(0..=i);
        grid_edges.swap(i, j);
    }
    let subdivisions = n - junctions;
    let target_edges = ((n as f64) * 1.22).round() as usize;
    let street_target = target_edges.saturating_sub(subdivisions).max(junctions - 1);
    let mut dsu = Dsu::new(junctions);
    let mut streets = Vec::new();
    let mut spare = Vec::new();
    for &(u, v) in &grid_edges {
        if dsu.union(u, v) {
            streets.push((u, v));
        } else {
            spare.push((u, v));
        }
    }
    let extra = street_target.saturating_sub(streets.len()).min(spare.len());
    streets.extend_from_slice(&spare[..extra]);

    // distribute degree-2 vertices over random streets
    let mut splits = vec![0usize; streets.len()];
    for _ in 0..subdivisions {
        let s = rng.gen_range(0..streets.len());
        splits[s] += 1;
    }
    let mut edges: Vec<(VertexId, VertexId, Dist)> = Vec::with_capacity(target_edges);
    let weight = |a: Point, b: Point, rng: &mut ChaCha8Rng| -> Dist {
        (a.dist(b) * rng.gen_range(1.0..1.2)).ceil().max(1.0) as Dist
    };
    for (s, &(u, v)) in streets.iter().enumerate() {
        let (a, b) = (pts[u as usize], pts[v as usize]);
        let mut prev = u;
        for k in 1..=splits[s] {
            let t = k as f64 / (splits[s] + 1) as f64;
            let bend = rng.gen_range(-15.0..15.0);
            let p = Point::new(a.x + (b.x - a.x) * t + bend, a.y + (b.y - a.y) * t - bend);
            let id = pts.len() as VertexId;
            pts.push(p);
            let w = weight(pts[prev as usize], p, &mut rng);
            edges.push((prev, id, w));
            prev = id;
        }
        let w = weight(pts[prev as usize], b, &mut rng);
        edges.push((prev, v, w));
    }
    debug_assert_eq!(pts.len(), n);
    let coords = CoordinateTable::from_points(pts);
    let g = Graph::from_edges(n, &edges, WeightKind::Distance).expect("spanning tree keeps it connected");
    (g, coords)
}

/// Travel-time weights: length over a per-street speed drawn from three road
/// classes, in tenths of a second.
pub fn travel_time_weights(g: &Graph, coords: &CoordinateTable, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    const SPEEDS_MPS: [f64; 3] = [8.3, 13.9, 27.8];
    g.reweighted(WeightKind::Time, |u, v, w| {
        let len = (w as f64).max(coords.point(u).dist(coords.point(v)));
        let speed = SPEEDS_MPS[rng.gen_range(0..SPEEDS_MPS.len())];
        ((len / speed) * 10.0).ceil().max(1.0) as Dist
    })
    .expect("reweighting keeps connectivity")
}
