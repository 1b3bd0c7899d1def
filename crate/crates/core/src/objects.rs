//! Object (point-of-interest) sets and their synthetic generators.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dijkstra::{dijkstra_sssp, DijkstraScratch};
use crate::error::{Error, Result};
use crate::graph::{CoordinateTable, Dist, Graph, Point, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectKind {
    Uniform,
    Clustered,
    MinDist,
    File,
}

impl ObjectKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ObjectKind::Uniform => "uniform",
            ObjectKind::Clustered => "clustered",
            ObjectKind::MinDist => "min_dist",
            ObjectKind::File => "file",
        }
    }
}

impl fmt::Display for ObjectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ObjectKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "uniform" => Ok(ObjectKind::Uniform),
            "clustered" => Ok(ObjectKind::Clustered),
            "min_dist" | "mindist" => Ok(ObjectKind::MinDist),
            "file" => Ok(ObjectKind::File),
            _ => Err(format!("unknown object kind `{s}`")),
        }
    }
}

/// A sorted, duplicate-free, non-empty set of object vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectSet {
    ids: Vec<VertexId>,
    member: Vec<u64>,
    vertex_count: usize,
    kind: ObjectKind,
    seed: Option<u64>,
}

impl ObjectSet {
    pub fn new(
        mut ids: Vec<VertexId>,
        vertex_count: usize,
        kind: ObjectKind,
        seed: Option<u64>,
    ) -> Result<ObjectSet> {
        ids.sort_unstable();
        ids.dedup();
        if ids.is_empty() {
            return Err(Error::InvalidParameter("object set is empty".into()));
        }
        if let Some(&bad) = ids.iter().find(|&&v| v as usize >= vertex_count) {
            return Err(Error::InvalidParameter(format!(
                "object id {bad} is not a vertex (graph has {vertex_count})"
            )));
        }
        let mut member = vec![0u64; vertex_count.div_ceil(64)];
        for &v in &ids {
            member[v as usize / 64] |= 1 << (v % 64);
        }
        Ok(ObjectSet {
            ids,
            member,
            vertex_count,
            kind,
            seed,
        })
    }

    pub fn ids(&self) -> &[VertexId] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    #[inline]
    pub fn contains(&self, v: VertexId) -> bool {
        self.member[v as usize / 64] & (1 << (v % 64)) != 0
    }

    pub fn density(&self) -> f64 {
        self.ids.len() as f64 / self.vertex_count as f64
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn kind(&self) -> ObjectKind {
        self.kind
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Writes the set with its `# density=.. kind=.. seed=..` header.
    pub fn write<W: Write>(&self, w: &mut W) -> Result<()> {
        let seed = self.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        writeln!(
            w,
            "# density={} kind={} seed={}",
            self.density(),
            self.kind,
            seed
        )?;
        for v in &self.ids {
            writeln!(w, "{v}")?;
        }
        Ok(())
    }
}

/// Reads newline-separated vertex ids. `#` lines carry metadata; the kind and
/// seed are recovered from the header when present.
pub fn load_objects<R: BufRead>(reader: R, vertex_count: usize) -> Result<ObjectSet> {
    let mut ids = Vec::new();
    let mut kind = ObjectKind::File;
    let mut seed = None;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('#') {
            for field in header.split_ascii_whitespace() {
                match field.split_once('=') {
                    Some(("kind", k)) => kind = k.parse().unwrap_or(ObjectKind::File),
                    Some(("seed", s)) => seed = s.parse().ok(),
                    _ => {}
                }
            }
            continue;
        }
        let v: usize = line.parse().map_err(|_| Error::Parse {
            line: i + 1,
            msg: format!("invalid vertex id `{line}`"),
        })?;
        if v >= vertex_count {
            return Err(Error::InvalidParameter(format!(
                "line {}: object id {v} is not a vertex (graph has {vertex_count})",
                i + 1
            )));
        }
        ids.push(v as VertexId);
    }
    ObjectSet::new(ids, vertex_count, kind, seed)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn sample_vertices(n: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<VertexId> {
    let mut v: Vec<VertexId> = index::sample(rng, n, count)
        .into_iter()
        .map(|i| i as VertexId)
        .collect();
    v.sort_unstable();
    v
}

pub fn uniform_count(vertex_count: usize, density: f64) -> usize {
    ((density * vertex_count as f64).round() as usize).clamp(1, vertex_count)
}

/// `round(d·|V|)` distinct vertices drawn uniformly without replacement.
pub fn gen_uniform(g: &Graph, density: f64, seed: u64) -> Result<ObjectSet> {
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "density {density} outside (0, 1]"
        )));
    }
    let n = g.vertex_count();
    let ids = sample_vertices(n, uniform_count(n, density), &mut rng(seed));
    ObjectSet::new(ids, n, ObjectKind::Uniform, Some(seed))
}

/// `clusters` uniformly drawn centres, each grown to its `max_size` nearest
/// vertices by network distance. Overlapping clusters are merged.
pub fn gen_clustered(g: &Graph, clusters: usize, max_size: usize, seed: u64) -> Result<ObjectSet> {
    let n = g.vertex_count();
    if clusters == 0 || max_size == 0 {
        return Err(Error::InvalidParameter(
            "cluster count and size must be at least 1".into(),
        ));
    }
    if clusters > n {
        return Err(Error::InvalidParameter(format!(
            "{clusters} clusters requested but the graph has {n} vertices"
        )));
    }
    let centres = sample_vertices(n, clusters, &mut rng(seed));
    let mut scratch = DijkstraScratch::new(n);
    let mut ids = Vec::with_capacity(clusters * max_size);
    for &c in &centres {
        cluster_members(g, c, max_size, &mut scratch, &mut ids);
    }
    ObjectSet::new(ids, n, ObjectKind::Clustered, Some(seed))
}

/// The first `max_size` vertices settled by a search from `centre`.
pub fn cluster_members(
    g: &Graph,
    centre: VertexId,
    max_size: usize,
    scratch: &mut DijkstraScratch,
    out: &mut Vec<VertexId>,
) {
    let mut taken = 0;
    scratch.run(g, centre, |v, _| {
        out.push(v);
        taken += 1;
        taken >= max_size
    });
}

/// Centre vertex and distance profile used by minimum-distance workloads.
#[derive(Debug, Clone)]
pub struct MinDistContext {
    pub centre: VertexId,
    pub d_max: Dist,
    pub dist: Vec<Dist>,
}

impl MinDistContext {
    pub fn new(g: &Graph, coords: &CoordinateTable) -> MinDistContext {
        let (lo, hi) = coords.bounds();
        let mid = Point::new((lo.x + hi.x) / 2.0, (lo.y + hi.y) / 2.0);
        let mut centre = 0;
        let mut best = f64::INFINITY;
        for (v, p) in coords.points().iter().enumerate() {
            let d = p.dist(mid);
            if d < best {
                best = d;
                centre = v as VertexId;
            }
        }
        let dist = dijkstra_sssp(g, centre);
        let d_max = dist.iter().copied().max().unwrap_or(0);
        MinDistContext {
            centre,
            d_max,
            dist,
        }
    }

    /// `D_max / 2^(m-i+1)`.
    pub fn threshold(&self, i: usize, m: usize) -> f64 {
        self.d_max as f64 / 2f64.powi((m - i + 1) as i32)
    }

    pub fn qualifying(&self, i: usize, m: usize) -> Vec<VertexId> {
        let t = self.threshold(i, m);
        (0..self.dist.len() as VertexId)
            .filter(|&v| self.dist[v as usize] as f64 >= t)
            .collect()
    }

    /// Query vertices closer to the centre than every bucket: `d < D_max/2^m`.
    pub fn query_vertices(&self, m: usize, count: usize, seed: u64) -> Vec<VertexId> {
        let limit = self.d_max as f64 / 2f64.powi(m as i32);
        let pool: Vec<VertexId> = (0..self.dist.len() as VertexId)
            .filter(|&v| (self.dist[v as usize] as f64) < limit)
            .collect();
        let mut r = rng(seed);
        (0..count)
            .map(|_| pool[rand::Rng::gen_range(&mut r, 0..pool.len())])
            .collect()
    }
}

pub fn gen_min_dist(
    g: &Graph,
    coords: &CoordinateTable,
    size: usize,
    i: usize,
    m: usize,
    seed: u64,
) -> Result<ObjectSet> {
    gen_min_dist_with(&MinDistContext::new(g, coords), size, i, m, seed)
}

pub fn gen_min_dist_with(
    ctx: &MinDistContext,
    size: usize,
    i: usize,
    m: usize,
    seed: u64,
) -> Result<ObjectSet> {
    if i < 1 || i > m {
        return Err(Error::InvalidParameter(format!(
            "bucket {i} outside 1..={m}"
        )));
    }
    let pool = ctx.qualifying(i, m);
    if pool.len() < size || size == 0 {
        return Err(Error::InfeasibleBucket {
            qualifying: pool.len(),
            requested: size,
        });
    }
    let picks = sample_vertices(pool.len(), size, &mut rng(seed));
    let ids = picks.into_iter().map(|p| pool[p as usize]).collect();
    ObjectSet::new(ids, ctx.dist.len(), ObjectKind::MinDist, Some(seed))
}
