//! Road network representation and DIMACS ingestion.
//!
//! The adjacency lists of all vertices live in one pair of arrays
//! (`edge_target`, `edge_weight`), indexed through `first_edge`. Each
//! undirected edge is stored once in each endpoint's range.

use std::collections::{HashMap, HashSet, VecDeque};
use std::io::{BufRead, Read, Write};

use crate::binio;
use crate::error::{Error, Result};

pub type VertexId = u32;
pub type Dist = u64;

/// Sentinel for "unreachable" / "no bound yet".
pub const INF: Dist = Dist::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeightKind {
    Distance,
    Time,
}

impl WeightKind {
    pub fn as_str(self) -> &'static str {
        match self {
            WeightKind::Distance => "distance",
            WeightKind::Time => "time",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    /// Straight-line distance. Every Euclidean comparison in the crate goes
    /// through this function so that equal inputs give bit-equal outputs.
    #[inline]
    pub fn dist(self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    first_edge: Vec<u32>,
    edge_target: Vec<VertexId>,
    edge_weight: Vec<Dist>,
    weight_kind: WeightKind,
}

impl Graph {
    /// Builds a graph from undirected edges. Parallel edges collapse to the
    /// lightest one and self-loops are dropped.
    pub fn from_edges(
        vertex_count: usize,
        edges: &[(VertexId, VertexId, Dist)],
        weight_kind: WeightKind,
    ) -> Result<Graph> {
        if vertex_count == 0 {
            return Err(Error::Format("graph has no vertices".into()));
        }
        if vertex_count > u32::MAX as usize {
            return Err(Error::Format("too many vertices".into()));
        }
        let mut merged: HashMap<(VertexId, VertexId), Dist> = HashMap::with_capacity(edges.len());
        for &(u, v, w) in edges {
            if u as usize >= vertex_count || v as usize >= vertex_count {
                return Err(Error::Format(format!(
                    "edge ({u}, {v}) references a vertex outside 0..{vertex_count}"
                )));
            }
            if w == 0 {
                return Err(Error::ZeroWeight(u as usize, v as usize));
            }
            if u == v {
                continue;
            }
            let key = (u.min(v), u.max(v));
            merged
                .entry(key)
                .and_modify(|old| *old = (*old).min(w))
                .or_insert(w);
        }
        let mut degree = vec![0u32; vertex_count + 1];
        for &(u, v) in merged.keys() {
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut first_edge = vec![0u32; vertex_count + 1];
        for v in 0..vertex_count {
            first_edge[v + 1] = first_edge[v] + degree[v];
        }
        let total = first_edge[vertex_count] as usize;
        let mut adj: Vec<(VertexId, Dist)> = vec![(0, 0); total];
        let mut fill = first_edge.clone();
        for (&(u, v), &w) in &merged {
            adj[fill[u as usize] as usize] = (v, w);
            fill[u as usize] += 1;
            adj[fill[v as usize] as usize] = (u, w);
            fill[v as usize] += 1;
        }
        for v in 0..vertex_count {
            adj[first_edge[v] as usize..first_edge[v + 1] as usize].sort_unstable();
        }
        let (edge_target, edge_weight) = adj.into_iter().unzip();
        let g = Graph {
            first_edge,
            edge_target,
            edge_weight,
            weight_kind,
        };
        g.check_connected()?;
        Ok(g)
    }

    fn check_connected(&self) -> Result<()> {
        let n = self.vertex_count();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0u32]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for &v in self.targets(u) {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    queue.push_back(v);
                }
            }
        }
        match seen.iter().position(|s| !s) {
            Some(vertex) => Err(Error::Disconnected { vertex }),
            None => Ok(()),
        }
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.first_edge.len() - 1
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.edge_target.len() / 2
    }

    /// Number of directed arcs (twice the undirected edge count).
    pub fn arc_count(&self) -> usize {
        self.edge_target.len()
    }

    pub fn weight_kind(&self) -> WeightKind {
        self.weight_kind
    }

    pub fn first_edge(&self) -> &[u32] {
        &self.first_edge
    }

    #[inline]
    pub fn targets(&self, v: VertexId) -> &[VertexId] {
        let (a, b) = self.range(v);
        &self.edge_target[a..b]
    }

    #[inline]
    pub fn weights(&self, v: VertexId) -> &[Dist] {
        let (a, b) = self.range(v);
        &self.edge_weight[a..b]
    }

    #[inline]
    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = (VertexId, Dist)> + '_ {
        self.targets(v)
            .iter()
            .copied()
            .zip(self.weights(v).iter().copied())
    }

    #[inline]
    fn range(&self, v: VertexId) -> (usize, usize) {
        let v = v as usize;
        (self.first_edge[v] as usize, self.first_edge[v + 1] as usize)
    }

    #[inline]
    pub fn degree(&self, v: VertexId) -> usize {
        let (a, b) = self.range(v);
        b - a
    }

    pub fn weight_between(&self, u: VertexId, v: VertexId) -> Option<Dist> {
        let ts = self.targets(u);
        ts.binary_search(&v).ok().map(|i| self.weights(u)[i])
    }

    /// Iterates each undirected edge once as `(u, v, w)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId, Dist)> + '_ {
        (0..self.vertex_count() as VertexId).flat_map(move |u| {
            self.neighbors(u)
                .filter(move |&(v, _)| u < v)
                .map(move |(v, w)| (u, v, w))
        })
    }

    pub fn byte_size(&self) -> usize {
        self.first_edge.len() * 4 + self.edge_target.len() * 4 + self.edge_weight.len() * 8
    }

    /// Returns a copy with every weight replaced by `f(u, v, w)`.
    pub fn reweighted<F>(&self, kind: WeightKind, mut f: F) -> Result<Graph>
    where
        F: FnMut(VertexId, VertexId, Dist) -> Dist,
    {
        let edges: Vec<_> = self.edges().map(|(u, v, w)| (u, v, f(u, v, w))).collect();
        Graph::from_edges(self.vertex_count(), &edges, kind)
    }

    pub fn write_binary<W: Write>(&self, w: &mut W) -> Result<()> {
        binio::write_header(w, b"RKGR", 1)?;
        binio::write_u8s(w, &[matches!(self.weight_kind, WeightKind::Time) as u8])?;
        binio::write_u32s(w, &self.first_edge)?;
        binio::write_u32s(w, &self.edge_target)?;
        binio::write_u64s(w, &self.edge_weight)?;
        Ok(())
    }

    pub fn read_binary<R: Read>(r: &mut R) -> Result<Graph> {
        binio::read_header(r, b"RKGR", 1)?;
        let kind = binio::read_u8s(r)?;
        let weight_kind = match kind.first() {
            Some(0) => WeightKind::Distance,
            Some(1) => WeightKind::Time,
            _ => return Err(Error::BadIndex("bad weight kind".into())),
        };
        let first_edge = binio::read_u32s(r)?;
        let edge_target = binio::read_u32s(r)?;
        let edge_weight = binio::read_u64s(r)?;
        if first_edge.is_empty()
            || *first_edge.last().unwrap() as usize != edge_target.len()
            || edge_target.len() != edge_weight.len()
        {
            return Err(Error::BadIndex("inconsistent graph arrays".into()));
        }
        Ok(Graph {
            first_edge,
            edge_target,
            edge_weight,
            weight_kind,
        })
    }
}

/// Counts reported by the DIMACS reader alongside the graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DimacsStats {
    /// Vertex count declared on the problem line.
    pub declared_vertices: usize,
    /// Arc count declared on the problem line.
    pub declared_arcs: usize,
    /// `a` lines actually read.
    pub arc_lines: usize,
}

/// Parses a DIMACS shortest-path `.gr` file into an undirected graph.
///
/// Vertex ids are rebased from 1-based to 0-based. Every arc must be matched
/// by a reverse arc of equal weight.
pub fn parse_dimacs_gr<R: BufRead>(reader: R, kind: WeightKind) -> Result<(Graph, DimacsStats)> {
    let mut stats = DimacsStats::default();
    let mut n: Option<usize> = None;
    let mut edges = Vec::new();
    // +1 for u<v direction, -1 for the reverse
    let mut balance: HashMap<(VertexId, VertexId, Dist), i64> = HashMap::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let mut it = line.split_ascii_whitespace();
        let bad = |msg: &str| Error::Parse {
            line: lineno,
            msg: msg.to_string(),
        };
        match it.next() {
            Some("p") => {
                if n.is_some() {
                    return Err(bad("duplicate problem line"));
                }
                if it.next() != Some("sp") {
                    return Err(bad("expected `p sp <n> <m>`"));
                }
                let nv = parse_num::<usize>(it.next(), lineno)?;
                let m = parse_num::<usize>(it.next(), lineno)?;
                stats.declared_vertices = nv;
                stats.declared_arcs = m;
                n = Some(nv);
                edges.reserve(m / 2);
            }
            Some("a") => {
                let nv = n.ok_or_else(|| bad("arc before problem line"))?;
                let u = parse_num::<usize>(it.next(), lineno)?;
                let v = parse_num::<usize>(it.next(), lineno)?;
                let w = parse_num::<Dist>(it.next(), lineno)?;
                if it.next().is_some() {
                    return Err(bad("trailing fields on arc line"));
                }
                if u == 0 || v == 0 || u > nv || v > nv {
                    return Err(bad("vertex id out of range"));
                }
                if w == 0 {
                    return Err(Error::Format(format!(
                        "line {lineno}: non-positive weight on arc {u} -> {v}"
                    )));
                }
                stats.arc_lines += 1;
                let (u, v) = ((u - 1) as VertexId, (v - 1) as VertexId);
                if u != v {
                    let key = (u.min(v), u.max(v), w);
                    *balance.entry(key).or_insert(0) += if u < v { 1 } else { -1 };
                    if u < v {
                        edges.push((u, v, w));
                    }
                }
            }
            Some(_) => return Err(bad("unrecognised line")),
            None => {}
        }
    }
    let n = n.ok_or_else(|| Error::Format("missing problem line".into()))?;
    if let Some((&(u, v, w), _)) = balance
        .iter()
        .filter(|(_, &b)| b != 0)
        .min_by_key(|(k, _)| **k)
    {
        return Err(Error::Format(format!(
            "arc {} -> {} (weight {w}) has no matching reverse arc",
            u + 1,
            v + 1
        )));
    }
    let g = Graph::from_edges(n, &edges, kind)?;
    Ok((g, stats))
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, line: usize) -> Result<T> {
    let tok = tok.ok_or_else(|| Error::Parse {
        line,
        msg: "missing field".into(),
    })?;
    tok.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("invalid number `{tok}`"),
    })
}

/// Writes the graph as a DIMACS `.gr` file (both arcs of every edge).
pub fn write_dimacs_gr<W: Write>(g: &Graph, w: &mut W) -> Result<()> {
    writeln!(w, "c generated by roadknn")?;
    writeln!(w, "p sp {} {}", g.vertex_count(), g.arc_count())?;
    for u in 0..g.vertex_count() as VertexId {
        for (v, wt) in g.neighbors(u) {
            writeln!(w, "a {} {} {}", u + 1, v + 1, wt)?;
        }
    }
    Ok(())
}

/// Per-vertex planar coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateTable {
    points: Vec<Point>,
}

impl CoordinateTable {
    /// Builds a table, moving coincident points apart by the smallest
    /// representable offset in a deterministic square spiral (lower ids keep
    /// their position).
    pub fn from_points(points: Vec<Point>) -> CoordinateTable {
        let mut seen: HashSet<(u64, u64)> = HashSet::with_capacity(points.len());
        let mut out = Vec::with_capacity(points.len());
        for p in points {
            let key = |q: Point| (q.x.to_bits(), q.y.to_bits());
            if seen.insert(key(p)) {
                out.push(p);
                continue;
            }
            let step = ulp(p.x.abs().max(p.y.abs()).max(1.0));
            let mut placed = None;
            for (dx, dy) in spiral().skip(1) {
                let q = Point::new(p.x + dx as f64 * step, p.y + dy as f64 * step);
                if seen.insert(key(q)) {
                    placed = Some(q);
                    break;
                }
            }
            out.push(placed.expect("spiral is unbounded"));
        }
        CoordinateTable { points: out }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    #[inline]
    pub fn point(&self, v: VertexId) -> Point {
        self.points[v as usize]
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounds(&self) -> (Point, Point) {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.points {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        (lo, hi)
    }

    /// Converts DIMACS longitude/latitude (millionths of a degree) to metres
    /// with an equirectangular projection around the mean latitude.
    pub fn project_lonlat_micro(&self) -> CoordinateTable {
        const EARTH_RADIUS_M: f64 = 6_371_000.0;
        let mean_lat = self.points.iter().map(|p| p.y).sum::<f64>() / self.points.len() as f64;
        let k = std::f64::consts::PI / 180.0 * 1e-6 * EARTH_RADIUS_M;
        let cos = (mean_lat * 1e-6).to_radians().cos();
        CoordinateTable::from_points(
            self.points
                .iter()
                .map(|p| Point::new(p.x * k * cos, p.y * k))
                .collect(),
        )
    }

    pub fn write_binary<W: Write>(&self, w: &mut W) -> Result<()> {
        binio::write_header(w, b"RKCO", 1)?;
        let flat: Vec<f64> = self.points.iter().flat_map(|p| [p.x, p.y]).collect();
        binio::write_f64s(w, &flat)
    }

    pub fn read_binary<R: Read>(r: &mut R) -> Result<CoordinateTable> {
        binio::read_header(r, b"RKCO", 1)?;
        let flat = binio::read_f64s(r)?;
        if flat.len() % 2 != 0 {
            return Err(Error::BadIndex("odd coordinate array".into()));
        }
        Ok(CoordinateTable {
            points: flat.chunks(2).map(|c| Point::new(c[0], c[1])).collect(),
        })
    }
}

fn ulp(x: f64) -> f64 {
    f64::from_bits(x.to_bits() + 1) - x
}

/// Square spiral over the integer lattice starting at the origin.
fn spiral() -> impl Iterator<Item = (i64, i64)> {
    let (mut x, mut y) = (0i64, 0i64);
    let (mut dx, mut dy) = (1i64, 0i64);
    let mut leg = 1;
    let mut walked = 0;
    let mut turns = 0;
    std::iter::from_fn(move || {
        let out = (x, y);
        x += dx;
        y += dy;
        walked += 1;
        if walked == leg {
            walked = 0;
            (dx, dy) = (-dy, dx);
            turns += 1;
            if turns % 2 == 0 {
                leg += 1;
            }
        }
        Some(out)
    })
}

/// Parses a DIMACS `.co` coordinate file for a graph of `vertex_count`
/// vertices. Coordinates are kept in file units.
pub fn parse_dimacs_co<R: BufRead>(reader: R, vertex_count: usize) -> Result<CoordinateTable> {
    let mut pts: Vec<Option<Point>> = vec![None; vertex_count];
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('p') {
            continue;
        }
        let mut it = line.split_ascii_whitespace();
        if it.next() != Some("v") {
            return Err(Error::Parse {
                line: lineno,
                msg: "expected `v <id> <x> <y>`".into(),
            });
        }
        let id = parse_num::<usize>(it.next(), lineno)?;
        let x = parse_num::<f64>(it.next(), lineno)?;
        let y = parse_num::<f64>(it.next(), lineno)?;
        if id == 0 || id > vertex_count {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("vertex id {id} out of range"),
            });
        }
        if pts[id - 1].replace(Point::new(x, y)).is_some() {
            return Err(Error::Format(format!(
                "line {lineno}: duplicate id {id} in coordinate file"
            )));
        }
    }
    let mut points = Vec::with_capacity(vertex_count);
    for (i, p) in pts.into_iter().enumerate() {
        points.push(p.ok_or_else(|| {
            Error::Format(format!("coordinate missing for vertex {}", i + 1))
        })?);
    }
    Ok(CoordinateTable::from_points(points))
}

pub fn write_dimacs_co<W: Write>(coords: &CoordinateTable, w: &mut W) -> Result<()> {
    writeln!(w, "c generated by roadknn")?;
    writeln!(w, "p aux sp co {}", coords.len())?;
    for (i, p) in coords.points().iter().enumerate() {
        writeln!(w, "v {} {} {}", i + 1, p.x, p.y)?;
    }
    Ok(())
}

#[inline]
pub fn euclidean_distance(a: VertexId, b: VertexId, coords: &CoordinateTable) -> f64 {
    coords.point(a).dist(coords.point(b))
}

/// Largest ratio of straight-line length to weight over all edges. Dividing a
/// Euclidean distance by it gives a lower bound on network distance.
pub fn max_speed(g: &Graph, coords: &CoordinateTable) -> Result<f64> {
    let mut best = 0.0f64;
    for (u, v, w) in g.edges() {
        if w == 0 {
            return Err(Error::ZeroWeight(u as usize, v as usize));
        }
        best = best.max(euclidean_distance(u, v, coords) / w as f64);
    }
    Ok(best)
}

/// Multiplier turning Euclidean distances into network-distance lower bounds.
pub fn lower_bound_scale(g: &Graph, coords: &CoordinateTable) -> f64 {
    match max_speed(g, coords) {
        Ok(s) if s > 0.0 => 1.0 / s,
        _ => 0.0,
    }
}

/// Integer lower bound on a network distance from the scaled Euclidean
/// distance. The value is shaved by a relative 1e-12 so floating-point
/// rounding cannot push it above the true bound; rounding up afterwards is
/// valid because network distances are integers.
#[inline]
pub fn euclid_lower_bound(d_e: f64, scale: f64) -> Dist {
    let x = d_e * scale * (1.0 - 1e-12);
    if x.is_nan() || x <= 0.0 {
        0
    } else if x >= (Dist::MAX / 2) as f64 {
        Dist::MAX / 2
    } else {
        x.ceil() as Dist
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gr(text: &str) -> Result<(Graph, DimacsStats)> {
        parse_dimacs_gr(text.as_bytes(), WeightKind::Distance)
    }

    #[test]
    fn minimal_gr_file() {
        let (g, stats) = gr("c hi\np sp 3 4\na 1 2 5\na 2 1 5\na 2 3 7\na 3 2 7\n").unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(stats.arc_lines, 4);
        assert_eq!(g.weight_between(0, 1), Some(5));
        assert_eq!(g.weight_between(2, 1), Some(7));
        assert_eq!(g.first_edge()[0], 0);
        assert_eq!(*g.first_edge().last().unwrap() as usize, 2 * g.edge_count());
    }

    #[test]
    fn missing_reverse_arc_is_a_format_error() {
        let err = gr("p sp 2 1\na 1 2 5\n").unwrap_err();
        assert!(matches!(err, Error::Format(_)), "{err}");
    }

    #[test]
    fn asymmetric_weights_are_rejected() {
        assert!(gr("p sp 2 2\na 1 2 5\na 2 1 6\n").is_err());
    }

    #[test]
    fn zero_weight_is_rejected() {
        assert!(matches!(
            gr("p sp 2 2\na 1 2 0\na 2 1 0\n").unwrap_err(),
            Error::Format(_)
        ));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        match gr("p sp 2 2\na 1 2 x\n").unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn disconnected_graph_names_stranded_vertex() {
        match gr("p sp 3 2\na 1 2 5\na 2 1 5\n").unwrap_err() {
            Error::Disconnected { vertex } => assert_eq!(vertex, 2),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn parallel_edges_keep_lightest() {
        let g = Graph::from_edges(2, &[(0, 1, 9), (1, 0, 4)], WeightKind::Distance).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.weight_between(0, 1), Some(4));
    }

    #[test]
    fn co_file_parses_and_checks_coverage() {
        let c = parse_dimacs_co("v 1 0 0\nv 2 3 4\n".as_bytes(), 2).unwrap();
        assert_eq!(c.point(0), Point::new(0.0, 0.0));
        assert_eq!(c.point(1), Point::new(3.0, 4.0));
        assert_eq!(euclidean_distance(0, 1, &c), 5.0);
        assert_eq!(euclidean_distance(1, 1, &c), 0.0);

        let missing = parse_dimacs_co("v 1 0 0\n".as_bytes(), 2).unwrap_err();
        assert!(missing.to_string().contains("coordinate missing for vertex"));
        let dup = parse_dimacs_co("v 1 0 0\nv 1 2 2\nv 2 1 1\n".as_bytes(), 2).unwrap_err();
        assert!(dup.to_string().contains("duplicate id"));
    }

    #[test]
    fn coincident_points_are_separated() {
        let pts = vec![Point::new(5.0, 5.0); 20];
        let c = CoordinateTable::from_points(pts);
        assert_eq!(c.point(0), Point::new(5.0, 5.0));
        let distinct: HashSet<_> = c.points().iter().map(|p| (p.x.to_bits(), p.y.to_bits())).collect();
        assert_eq!(distinct.len(), 20);
        for v in 1..20 {
            let d = euclidean_distance(0, v, &c);
            assert!(d > 0.0 && d < 1e-12);
        }
    }

    #[test]
    fn max_speed_takes_the_largest_ratio() {
        let c = CoordinateTable::from_points(vec![
            Point::new(0.0, 0.0),
            Point::new(3.0, 4.0),
            Point::new(3.0, 8.0),
        ]);
        let g = Graph::from_edges(2, &[(0, 1, 5)], WeightKind::Time).unwrap();
        assert_eq!(max_speed(&g, &c).unwrap(), 1.0);
        // ratios 5/10 = 0.5 and 4/2 = 2.0
        let g = Graph::from_edges(3, &[(0, 1, 10), (1, 2, 2)], WeightKind::Time).unwrap();
        assert_eq!(max_speed(&g, &c).unwrap(), 2.0);
    }

    #[test]
    fn lower_bound_never_exceeds_exact_integer() {
        assert_eq!(euclid_lower_bound(5.0, 1.0), 5);
        assert_eq!(euclid_lower_bound(5.5, 1.0), 6);
        assert_eq!(euclid_lower_bound(5.0 + 1e-15, 1.0), 5);
        assert_eq!(euclid_lower_bound(0.0, 1.0), 0);
        assert_eq!(euclid_lower_bound(3.0, 0.0), 0);
    }

    #[test]
    fn spiral_visits_distinct_cells() {
        let cells: Vec<_> = spiral().take(25).collect();
        let set: HashSet<_> = cells.iter().collect();
        assert_eq!(set.len(), 25);
        assert_eq!(cells[0], (0, 0));
        assert!(cells.iter().all(|&(x, y)| x.abs() <= 2 && y.abs() <= 2));
    }
}
