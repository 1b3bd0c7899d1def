use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;
use roadknn::graph::{write_dimacs_co, write_dimacs_gr};
use roadknn::par::Parallelism;
use roadknn::silc::BUDGET_ENV;
use roadknn::{Method, WeightKind};
use roadknn_bench::record::{emit, BuildRecord, RunRecord};
use roadknn_bench::run::{build_networks, load_networks, run_queries, save_networks, write_object_sets, HarnessError};
use roadknn_bench::spec::{parse_weight_kind, Dataset, ExperimentSpec, GraphSource, Workload};
use roadknn_bench::verify::{verify, Fault, VerifyConfig};

#[derive(Parser)]
#[command(name = "roadknn", version, about = "kNN on road networks: index builds, query suites, verification")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build network indexes and write them to an index directory.
    Build(BuildArgs),
    /// Generate object set files.
    Genobjects(GenArgs),
    /// Run a timed query suite and write one CSV row per method and k.
    Query(QueryArgs),
    /// Check every method against a Dijkstra ranking on random small graphs.
    Verify(VerifyArgs),
    /// Write a synthetic network as DIMACS `.gr` and `.co` files.
    Synth(SynthArgs),
}

#[derive(Args, Clone)]
struct GraphArgs {
    /// DIMACS `.gr` file (coordinates from the sibling `.co`), or
    /// `road:N[:SEED]` / `planar:N[:SEED]` for a synthetic network.
    #[arg(long)]
    graph: GraphSource,
    /// Coordinate file, when not next to the graph.
    #[arg(long)]
    coords: Option<PathBuf>,
    /// Coordinates are DIMACS longitude/latitude in millionths of a degree.
    #[arg(long)]
    lonlat: bool,
    #[arg(long, default_value = "distance", value_parser = parse_weight_kind)]
    weights: WeightKind,
}

impl GraphArgs {
    fn source(&self) -> GraphSource {
        match &self.graph {
            GraphSource::Dimacs { gr, co, .. } => GraphSource::Dimacs {
                gr: gr.clone(),
                co: self.coords.clone().unwrap_or_else(|| co.clone()),
                lonlat: self.lonlat,
            },
            other => other.clone(),
        }
    }

    fn load(&self) -> Result<Dataset, HarnessError> {
        let src = self.source();
        info!("loading {}", src.name());
        let ds = Dataset::load(&src, self.weights)?;
        info!("{} vertices, {} edges", ds.graph.vertex_count(), ds.graph.edge_count());
        Ok(ds)
    }
}

#[derive(Args, Clone)]
struct IndexArgs {
    /// Comma-separated methods; all by default.
    #[arg(long, value_delimiter = ',', default_values_t = Method::ALL.to_vec())]
    methods: Vec<Method>,
    /// G-tree fanout f.
    #[arg(long, default_value_t = 4)]
    gtree_fanout: usize,
    /// G-tree leaf capacity tau; size-dependent by default.
    #[arg(long)]
    gtree_leaf: Option<usize>,
    /// ROAD fanout.
    #[arg(long, default_value_t = 4)]
    road_fanout: usize,
    /// ROAD level count l; size-dependent by default.
    #[arg(long)]
    road_levels: Option<usize>,
    /// R-tree node capacity.
    #[arg(long, default_value_t = roadknn::rtree::DEFAULT_NODE_CAPACITY)]
    rtree_capacity: usize,
}

#[derive(Args, Clone)]
struct WorkloadArgs {
    /// uniform, clustered, min_dist or file.
    #[arg(long, default_value = "uniform")]
    kind: String,
    /// Object density |O|/|V| for uniform sets.
    #[arg(long, default_value_t = 0.001)]
    density: f64,
    #[arg(long, default_value_t = 10)]
    clusters: usize,
    /// Largest cluster size.
    #[arg(long, default_value_t = 5)]
    cluster_size: usize,
    /// Min-distance bucket i in 1..=m.
    #[arg(long, default_value_t = 1)]
    bucket: usize,
    /// Min-distance bucket count m.
    #[arg(long, default_value_t = 6)]
    buckets: usize,
    /// Object count for min-distance sets.
    #[arg(long, default_value_t = 100)]
    size: usize,
    /// Object files for `--kind file`.
    #[arg(long, value_delimiter = ',')]
    objects: Vec<PathBuf>,
}

impl WorkloadArgs {
    fn workload(&self) -> Result<Workload, String> {
        Ok(match self.kind.as_str() {
            "uniform" => Workload::Uniform { density: self.density },
            "clustered" => Workload::Clustered {
                clusters: self.clusters,
                size: self.cluster_size,
            },
            "min_dist" | "mindist" => Workload::MinDist {
                bucket: self.bucket,
                buckets: self.buckets,
                size: self.size,
            },
            "file" if !self.objects.is_empty() => Workload::Files(self.objects.clone()),
            "file" => return Err("--kind file needs --objects".into()),
            other => return Err(format!("unknown object kind `{other}`")),
        })
    }
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    index: IndexArgs,
    #[arg(long)]
    index_dir: PathBuf,
    /// Build workers; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// SILC memory budget in megabytes.
    #[arg(long, env = BUDGET_ENV)]
    silc_budget_mb: Option<u64>,
    /// CSV report; stdout by default.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    workload: WorkloadArgs,
    #[arg(long, default_value_t = 50)]
    sets: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct QueryArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    index: IndexArgs,
    #[command(flatten)]
    workload: WorkloadArgs,
    /// Read indexes from here; built in memory when absent.
    #[arg(long)]
    index_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    queries: usize,
    #[arg(long, value_delimiter = ',', default_value = "10")]
    k: Vec<usize>,
    /// Object sets per parameter point.
    #[arg(long, default_value_t = 1)]
    sets: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Unmeasured queries before timing.
    #[arg(long, default_value_t = 100)]
    warmup: usize,
    /// Compare every answer with INE and stop at the first difference.
    #[arg(long)]
    verify: bool,
    #[arg(long, env = BUDGET_ENV)]
    silc_budget_mb: Option<u64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_delimiter = ',', default_values_t = Method::ALL.to_vec())]
    methods: Vec<Method>,
    #[arg(long, default_value_t = 50)]
    min_vertices: usize,
    #[arg(long, default_value_t = 500)]
    max_vertices: usize,
    /// Corrupt one G-tree matrix entry per graph; the run must then fail.
    #[arg(long)]
    inject_fault: bool,
    #[arg(long, default_value = "distance", value_parser = parse_weight_kind)]
    weights: WeightKind,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Output path without extension.
    #[arg(long)]
    out: PathBuf,
}

fn spec_from(graph: &GraphArgs, index: &IndexArgs) -> ExperimentSpec {
    ExperimentSpec {
        graph: graph.source(),
        weights: graph.weights,
        methods: index.methods.clone(),
        gtree_fanout: index.gtree_fanout,
        gtree_leaf_capacity: index.gtree_leaf,
        road_fanout: index.road_fanout,
        road_levels: index.road_levels,
        rtree_capacity: index.rtree_capacity,
        ..ExperimentSpec::default()
    }
}

/// The flag wins over the environment; the index code reads the variable.
fn apply_budget(mb: Option<u64>) {
    if let Some(mb) = mb {
        std::env::set_var(BUDGET_ENV, mb.to_string());
    }
}

fn comments(ds: &Dataset, seed: Option<u64>, extra: &[(&'static str, String)]) -> Vec<(&'static str, String)> {
    let mut c = vec![
        ("roadknn", env!("CARGO_PKG_VERSION").to_string()),
        ("command", std::env::args().collect::<Vec<_>>().join(" ")),
        ("dataset", ds.name.clone()),
        ("vertices", ds.graph.vertex_count().to_string()),
        ("edges", ds.graph.edge_count().to_string()),
        ("weights", ds.graph.weight_kind().as_str().to_string()),
    ];
    if let Some(s) = seed {
        c.push(("seed", s.to_string()));
    }
    c.extend_from_slice(extra);
    c
}

fn threads(n: usize) -> Parallelism {
    match n {
        0 => Parallelism::Auto,
        1 => Parallelism::Sequential,
        t => Parallelism::Threads(t),
    }
}

fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    match cli.cmd {
        Cmd::Build(a) => {
            apply_budget(a.silc_budget_mb);
            let ds = a.graph.load()?;
            let spec = spec_from(&a.graph, &a.index);
            let (net, mut rows) = build_networks(&ds, &spec, threads(a.threads))?;
            save_networks(&net, &a.index_dir, &mut rows)?;
            let rows: Vec<_> = rows.iter().map(BuildRecord::row).collect();
            emit(a.output.as_deref(), &comments(&ds, None, &[]), &BuildRecord::COLUMNS, &rows)?;
        }
        Cmd::Genobjects(a) => {
            let ds = a.graph.load()?;
            let w = a.workload.workload()?;
            let files = write_object_sets(&ds, &w, a.sets, a.seed, &a.out_dir)?;
            for f in files {
                println!("{}", f.display());
            }
        }
        Cmd::Query(a) => {
            apply_budget(a.silc_budget_mb);
            let ds = a.graph.load()?;
            let spec = ExperimentSpec {
                workload: a.workload.workload()?,
                sets: a.sets,
                queries: a.queries,
                ks: a.k.clone(),
                seed: a.seed,
                warmup: a.warmup,
                verify: a.verify,
                index_dir: a.index_dir.clone(),
                output: a.output.clone(),
                ..spec_from(&a.graph, &a.index)
            };
            let mut build_ms = BTreeMap::new();
            let net = match &spec.index_dir {
                Some(dir) => load_networks(dir, &ds, &spec.methods)?,
                None => {
                    let (net, rows) = build_networks(&ds, &spec, Parallelism::Auto)?;
                    for r in rows {
                        build_ms.insert(r.index, r.build_ms);
                    }
                    net
                }
            };
            let records = run_queries(&ds, &net, &spec, &build_ms)?;
            let rows: Vec<_> = records.iter().map(RunRecord::row).collect();
            let extra = [
                ("workload", spec.workload.describe()),
                ("queries", spec.queries.to_string()),
                ("warmup", spec.warmup.to_string()),
                ("verify", spec.verify.to_string()),
            ];
            emit(
                spec.output.as_deref(),
                &comments(&ds, Some(spec.seed), &extra),
                &RunRecord::COLUMNS,
                &rows,
            )?;
        }
        Cmd::Verify(a) => {
            let cfg = VerifyConfig {
                trials: a.trials,
                seed: a.seed,
                methods: a.methods,
                min_vertices: a.min_vertices,
                max_vertices: a.max_vertices.max(a.min_vertices),
                fault: a.inject_fault.then_some(Fault::GtreeMatrix),
                weights: a.weights,
                ..VerifyConfig::default()
            };
            let r = verify(&cfg)?;
            println!(
                "verify: PASS trials={} graphs={} queries={} comparisons={}",
                r.trials, r.graphs, r.queries, r.comparisons
            );
        }
        Cmd::Synth(a) => {
            let ds = a.graph.load()?;
            let mut gr = BufWriter::new(File::create(a.out.with_extension("gr"))?);
            write_dimacs_gr(&ds.graph, &mut gr)?;
            gr.flush()?;
            let mut co = BufWriter::new(File::create(a.out.with_extension("co"))?);
            write_dimacs_co(&ds.coords, &mut co)?;
            co.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            // 2 marks a wrong answer, 1 anything else
            if matches!(e.downcast_ref::<HarnessError>(), Some(HarnessError::Mismatch(_))) {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
