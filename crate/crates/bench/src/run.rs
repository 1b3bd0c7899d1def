use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roadknn::engine::{Engine, Networks, ObjectIndexes, Worker};
use roadknn::gtree::{default_leaf_capacity, GTreeIndex, GTreeParams};
use roadknn::objects::{gen_clustered, gen_min_dist_with, gen_uniform, load_objects, MinDistContext};
use roadknn::par::Parallelism;
use roadknn::road::{default_levels, RoadIndex, RoadParams};
use roadknn::silc::{SilcIndex, SilcParams};
use roadknn::{KnnResult, Method, ObjectSet, QueryStats, VertexId};

use crate::record::{percentile, BuildRecord, RunRecord};
use crate::spec::{derive_seed, index_path, Dataset, ExperimentSpec, Workload, STREAM_OBJECTS, STREAM_QUERIES};

#[derive(Debug)]
pub enum HarnessError {
    Core(roadknn::Error),
    Mismatch(Box<Mismatch>),
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::Core(e) => e.fmt(f),
            HarnessError::Mismatch(m) => m.fmt(f),
        }
    }
}

impl std::error::Error for HarnessError {}

impl From<roadknn::Error> for HarnessError {
    fn from(e: roadknn::Error) -> Self {
        HarnessError::Core(e)
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Core(e.into())
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

/// A query whose answer differs from the reference, with what is needed to
/// replay it.
#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub graph: String,
    pub seed: u64,
    pub object_set: usize,
    pub method: Method,
    pub q: VertexId,
    pub k: usize,
    pub expected: KnnResult,
    pub got: KnnResult,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |r: &KnnResult| {
            let head: Vec<String> = r.entries.iter().take(12).map(|(v, d)| format!("{v}:{d}")).collect();
            let more = if r.len() > 12 { " ..." } else { "" };
            format!("[{}{more}]", head.join(" "))
        };
        write!(
            f,
            "{} disagrees with the reference: graph={} seed={} object_set={} q={} k={}\n  expected {}\n  got      {}",
            self.method,
            self.graph,
            self.seed,
            self.object_set,
            self.q,
            self.k,
            show(&self.expected),
            show(&self.got)
        )
    }
}

/// Network indexes the methods need, with one build row each.
pub fn build_networks(ds: &Dataset, spec: &ExperimentSpec, par: Parallelism) -> Result<(Networks, Vec<BuildRecord>)> {
    let g = &ds.graph;
    let n = g.vertex_count();
    let mut net = Networks::default();
    let mut rows = Vec::new();
    let mut row = |index: &str, params: String, bytes: usize, ms: f64| {
        rows.push(BuildRecord {
            index: index.into(),
            dataset: ds.name.clone(),
            vertices: n,
            edges: g.edge_count(),
            params,
            bytes,
            build_ms: ms,
            file: String::new(),
        });
    };
    let ms = |t: Instant| t.elapsed().as_secs_f64() * 1e3;
    if spec.methods.iter().any(|m| matches!(m, Method::Gtree | Method::IerGtree)) {
        let tau = spec.gtree_leaf_capacity.unwrap_or_else(|| default_leaf_capacity(n));
        let p = GTreeParams {
            parallelism: par,
            ..GTreeParams::new(spec.gtree_fanout, tau)
        };
        info!("building G-tree f={} tau={tau}", spec.gtree_fanout);
        let t = Instant::now();
        let idx = GTreeIndex::build(g, p)?;
        row("gtree", format!("f={} tau={tau}", spec.gtree_fanout), idx.byte_size(), ms(t));
        net.gtree = Some(idx);
    }
    if spec.methods.contains(&Method::Road) {
        let l = spec.road_levels.unwrap_or_else(|| default_levels(n, spec.road_fanout));
        let p = RoadParams {
            parallelism: par,
            ..RoadParams::new(spec.road_fanout, l)
        };
        info!("building ROAD f={} l={l}", spec.road_fanout);
        let t = Instant::now();
        let idx = RoadIndex::build(g, p)?;
        row("road", format!("f={} l={l}", spec.road_fanout), idx.byte_size(), ms(t));
        net.road = Some(idx);
    }
    if spec.methods.iter().any(|m| m.needs_silc()) {
        let p = SilcParams {
            parallelism: par,
            ..SilcParams::from_env()?
        };
        info!("building SILC");
        let t = Instant::now();
        let idx = SilcIndex::build(g, &ds.coords, p)?;
        row("silc", format!("blocks={}", idx.block_count()), idx.byte_size(), ms(t));
        net.silc = Some(idx);
    }
    Ok((net, rows))
}

/// Writes every present index to `dir` and records the file names.
pub fn save_networks(net: &Networks, dir: &Path, rows: &mut [BuildRecord]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for r in rows.iter_mut() {
        let path = index_path(dir, &r.index);
        let mut w = BufWriter::new(File::create(&path)?);
        match r.index.as_str() {
            "gtree" => net.gtree.as_ref().expect("built").write_binary(&mut w)?,
            "road" => net.road.as_ref().expect("built").write_binary(&mut w)?,
            "silc" => net.silc.as_ref().expect("built").write_binary(&mut w)?,
            other => unreachable!("unknown index {other}"),
        }
        w.flush()?;
        r.file = path.display().to_string();
    }
    Ok(())
}

/// Reads the indexes `methods` need from `dir`.
pub fn load_networks(dir: &Path, ds: &Dataset, methods: &[Method]) -> Result<Networks> {
    fn open(dir: &Path, index: &str) -> Result<BufReader<File>> {
        let path = index_path(dir, index);
        File::open(&path).map(BufReader::new).map_err(|e| {
            roadknn::Error::BadIndex(format!("{}: {e} (run `roadknn build` first)", path.display())).into()
        })
    }
    let n = ds.graph.vertex_count();
    let check = |what: &str, m: usize| -> Result<()> {
        if m != n {
            return Err(roadknn::Error::BadIndex(format!("{what} index has {m} vertices, graph has {n}")).into());
        }
        Ok(())
    };
    let mut net = Networks::default();
    if methods.iter().any(|m| matches!(m, Method::Gtree | Method::IerGtree)) {
        let idx = GTreeIndex::read_binary(&mut open(dir, "gtree")?)?;
        check("G-tree", idx.vertex_count())?;
        net.gtree = Some(idx);
    }
    if methods.contains(&Method::Road) {
        let idx = RoadIndex::read_binary(&mut open(dir, "road")?)?;
        check("ROAD", idx.vertex_count())?;
        net.road = Some(idx);
    }
    if methods.iter().any(|m| m.needs_silc()) {
        let idx = SilcIndex::read_binary(&mut open(dir, "silc")?)?;
        check("SILC", idx.vertex_count())?;
        net.silc = Some(idx);
    }
    Ok(net)
}

/// Object set `i` of the workload.
pub fn make_objects(ds: &Dataset, w: &Workload, ctx: Option<&MinDistContext>, master: u64, i: usize) -> Result<ObjectSet> {
    let g = &ds.graph;
    let seed = derive_seed(master, STREAM_OBJECTS + i as u64);
    let set = match w {
        Workload::Uniform { density } => gen_uniform(g, *density, seed)?,
        Workload::Clustered { clusters, size } => gen_clustered(g, *clusters, *size, seed)?,
        Workload::MinDist { bucket, buckets, size } => {
            gen_min_dist_with(ctx.expect("context for min-dist workloads"), *size, *bucket, *buckets, seed)?
        }
        Workload::Files(paths) => {
            let p = &paths[i % paths.len()];
            load_objects(BufReader::new(File::open(p)?), g.vertex_count())?
        }
    };
    Ok(set)
}

/// Writes `sets` object files to `dir`, named after the workload.
pub fn write_object_sets(ds: &Dataset, w: &Workload, sets: usize, master: u64, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let ctx = matches!(w, Workload::MinDist { .. }).then(|| MinDistContext::new(&ds.graph, &ds.coords));
    let stem = match w {
        Workload::Uniform { density } => format!("uniform_d{density}"),
        Workload::Clustered { clusters, size } => format!("clustered_c{clusters}_s{size}"),
        Workload::MinDist { bucket, buckets, .. } => format!("mindist_{bucket}of{buckets}"),
        Workload::Files(_) => "copy".into(),
    };
    (0..sets)
        .map(|i| {
            let set = make_objects(ds, w, ctx.as_ref(), master, i)?;
            let path = dir.join(format!("{stem}_{i:02}.txt"));
            let mut f = BufWriter::new(File::create(&path)?);
            set.write(&mut f)?;
            f.flush()?;
            Ok(path)
        })
        .collect()
}

/// Query vertices for the workload, drawn from the master seed.
pub fn query_vertices(ds: &Dataset, w: &Workload, ctx: Option<&MinDistContext>, count: usize, master: u64) -> Vec<VertexId> {
    let seed = derive_seed(master, STREAM_QUERIES);
    if let (Workload::MinDist { buckets, .. }, Some(ctx)) = (w, ctx) {
        return ctx.query_vertices(*buckets, count, seed);
    }
    let n = ds.graph.vertex_count() as VertexId;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.gen_range(0..n)).collect()
}

#[derive(Default)]
struct Acc {
    times_us: Vec<f64>,
    stats: QueryStats,
    objects: usize,
    index_bytes: usize,
}

/// Runs the query suite: for every object set, `k` and method, a warm-up
/// then every query timed on a single worker. With `spec.verify` each answer
/// is compared with INE and the first difference aborts the run.
pub fn run_queries(
    ds: &Dataset,
    net: &Networks,
    spec: &ExperimentSpec,
    build_ms: &BTreeMap<String, f64>,
) -> Result<Vec<RunRecord>> {
    let ctx = matches!(spec.workload, Workload::MinDist { .. }).then(|| MinDistContext::new(&ds.graph, &ds.coords));
    let qs = query_vertices(ds, &spec.workload, ctx.as_ref(), spec.queries, spec.seed);
    let mut acc: BTreeMap<(usize, Method), Acc> = BTreeMap::new();
    let mut kind = String::new();
    for set in 0..spec.sets.max(1) {
        let objects = make_objects(ds, &spec.workload, ctx.as_ref(), spec.seed, set)?;
        kind = objects.kind().to_string();
        let obj = ObjectIndexes::with_rtree_capacity(objects, &ds.coords, net, spec.rtree_capacity);
        let engine = Engine::new(&ds.graph, &ds.coords, net, &obj);
        for &m in &spec.methods {
            engine.check(m)?;
        }
        for &k in &spec.ks {
            let reference: Option<Vec<KnnResult>> = spec.verify.then(|| {
                engine
                    .batch(Method::Ine, &qs, k, Parallelism::Auto)
                    .into_iter()
                    .map(|(r, _)| r)
                    .collect()
            });
            for &m in &spec.methods {
                info!("set {set} k={k} {m}: {} queries", qs.len());
                let a = acc.entry((k, m)).or_default();
                a.objects += obj.objects.len();
                a.index_bytes = a.index_bytes.max(engine.index_bytes(m));
                let mut w = Worker::default();
                for &q in qs.iter().take(spec.warmup) {
                    std::hint::black_box(engine.query(m, q, k, &mut w, &mut QueryStats::default()));
                }
                for (i, &q) in qs.iter().enumerate() {
                    let mut st = QueryStats::default();
                    let t = Instant::now();
                    let r = engine.query(m, q, k, &mut w, &mut st);
                    a.times_us.push(t.elapsed().as_secs_f64() * 1e6);
                    a.stats += st;
                    if let Some(want) = &reference {
                        if r != want[i] {
                            return Err(HarnessError::Mismatch(Box::new(Mismatch {
                                graph: ds.name.clone(),
                                seed: spec.seed,
                                object_set: set,
                                method: m,
                                q,
                                k,
                                expected: want[i].clone(),
                                got: r,
                            })));
                        }
                    }
                }
            }
        }
    }
    let sets = spec.sets.max(1);
    let records = acc
        .into_iter()
        .map(|((k, m), mut a)| {
            a.times_us.sort_by(f64::total_cmp);
            let nq = a.times_us.len();
            let built: Option<f64> = match m {
                Method::Gtree | Method::IerGtree => build_ms.get("gtree").copied(),
                Method::Road => build_ms.get("road").copied(),
                Method::DisBrw | Method::DbEnn => build_ms.get("silc").copied(),
                Method::Ine | Method::IerDijkstra => None,
            };
            RunRecord {
                method: m.name().into(),
                dataset: ds.name.clone(),
                weights: ds.graph.weight_kind().as_str().into(),
                vertices: ds.graph.vertex_count(),
                object_kind: kind.clone(),
                workload: spec.workload.describe(),
                objects: a.objects as f64 / sets as f64,
                sets,
                k,
                queries: nq,
                mean_us: a.times_us.iter().sum::<f64>() / nq.max(1) as f64,
                p50_us: percentile(&a.times_us, 50.0),
                p95_us: percentile(&a.times_us, 95.0),
                p99_us: percentile(&a.times_us, 99.0),
                false_hits: m.is_ier().then(|| a.stats.false_hits as f64 / nq.max(1) as f64),
                stats: a.stats,
                index_bytes: a.index_bytes,
                build_ms: built,
            }
        })
        .collect();
    Ok(records)
}
