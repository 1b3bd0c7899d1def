use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roadknn::graph::{parse_dimacs_co, parse_dimacs_gr};
use roadknn::synth::{random_planar, road_like, travel_time_weights};
use roadknn::{CoordinateTable, Graph, Method, Result, WeightKind};

/// Where the network comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    /// DIMACS `.gr` file with its `.co` coordinates. `lonlat` projects
    /// micro-degree coordinates to metres.
    Dimacs { gr: PathBuf, co: PathBuf, lonlat: bool },
    /// `road:N[:SEED]`, a road-like synthetic network.
    Road { n: usize, seed: u64 },
    /// `planar:N[:SEED]`, random planar graph with weights in 1..=1000.
    Planar { n: usize, seed: u64 },
}

impl FromStr for GraphSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let synth = |rest: &str| -> Result<(usize, u64), String> {
            let mut it = rest.split(':');
            let n = it
                .next()
                .and_then(|x| x.parse().ok())
                .ok_or_else(|| format!("bad vertex count in `{s}`"))?;
            let seed = match it.next() {
                Some(x) => x.parse().map_err(|_| format!("bad seed in `{s}`"))?,
                None => 1,
            };
            Ok((n, seed))
        };
        if let Some(rest) = s.strip_prefix("road:") {
            let (n, seed) = synth(rest)?;
            return Ok(GraphSource::Road { n, seed });
        }
        if let Some(rest) = s.strip_prefix("planar:") {
            let (n, seed) = synth(rest)?;
            return Ok(GraphSource::Planar { n, seed });
        }
        let gr = PathBuf::from(s);
        Ok(GraphSource::Dimacs {
            co: gr.with_extension("co"),
            gr,
            lonlat: false,
        })
    }
}

impl GraphSource {
    pub fn name(&self) -> String {
        match self {
            GraphSource::Dimacs { gr, .. } => gr
                .file_stem()
                .map_or_else(|| gr.display().to_string(), |x| x.to_string_lossy().into_owned()),
            GraphSource::Road { n, seed } => format!("road:{n}:{seed}"),
            GraphSource::Planar { n, seed } => format!("planar:{n}:{seed}"),
        }
    }
}

/// A loaded network.
pub struct Dataset {
    pub name: String,
    pub graph: Graph,
    pub coords: CoordinateTable,
}

impl Dataset {
    /// Synthetic sources get travel-time weights derived from their lengths;
    /// DIMACS files are read as they are.
    pub fn load(src: &GraphSource, weights: WeightKind) -> Result<Dataset> {
        let (graph, coords) = match src {
            GraphSource::Dimacs { gr, co, lonlat } => {
                let (g, _) = parse_dimacs_gr(BufReader::new(File::open(gr)?), weights)?;
                let c = parse_dimacs_co(BufReader::new(File::open(co)?), g.vertex_count())?;
                (g, if *lonlat { c.project_lonlat_micro() } else { c })
            }
            GraphSource::Road { n, seed } => synth_weights(road_like(*n, *seed), weights, *seed),
            GraphSource::Planar { n, seed } => synth_weights(random_planar(*n, *seed), weights, *seed),
        };
        Ok(Dataset {
            name: src.name(),
            graph,
            coords,
        })
    }
}

fn synth_weights((g, c): (Graph, CoordinateTable), weights: WeightKind, seed: u64) -> (Graph, CoordinateTable) {
    match weights {
        WeightKind::Distance => (g, c),
        WeightKind::Time => (travel_time_weights(&g, &c, seed), c),
    }
}

pub fn parse_weight_kind(s: &str) -> Result<WeightKind, String> {
    match s {
        "distance" | "d" => Ok(WeightKind::Distance),
        "time" | "t" => Ok(WeightKind::Time),
        _ => Err(format!("unknown weight kind `{s}` (expected distance or time)")),
    }
}

/// Object workload of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum Workload {
    Uniform { density: f64 },
    Clustered { clusters: usize, size: usize },
    /// Objects at least `D_max / 2^(buckets-bucket+1)` from the centre;
    /// queries near the centre.
    MinDist { bucket: usize, buckets: usize, size: usize },
    Files(Vec<PathBuf>),
}

impl Workload {
    pub fn describe(&self) -> String {
        match self {
            Workload::Uniform { density } => format!("uniform d={density}"),
            Workload::Clustered { clusters, size } => format!("clustered c={clusters} size={size}"),
            Workload::MinDist { bucket, buckets, size } => format!("min_dist i={bucket} m={buckets} size={size}"),
            Workload::Files(f) => format!("{} file(s)", f.len()),
        }
    }
}

/// One experiment: a network, its index parameters and a query workload.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub graph: GraphSource,
    pub weights: WeightKind,
    pub methods: Vec<Method>,
    pub gtree_fanout: usize,
    /// `None` picks a size-dependent leaf capacity.
    pub gtree_leaf_capacity: Option<usize>,
    pub road_fanout: usize,
    pub road_levels: Option<usize>,
    pub rtree_capacity: usize,
    pub workload: Workload,
    /// Object sets drawn per parameter point.
    pub sets: usize,
    pub queries: usize,
    pub ks: Vec<usize>,
    pub seed: u64,
    pub warmup: usize,
    pub verify: bool,
    pub index_dir: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            graph: GraphSource::Road { n: 10_000, seed: 1 },
            weights: WeightKind::Distance,
            methods: Method::ALL.to_vec(),
            gtree_fanout: 4,
            gtree_leaf_capacity: None,
            road_fanout: 4,
            road_levels: None,
            rtree_capacity: roadknn::rtree::DEFAULT_NODE_CAPACITY,
            workload: Workload::Uniform { density: 0.001 },
            sets: 1,
            queries: 10_000,
            ks: vec![10],
            seed: 1,
            warmup: 100,
            verify: false,
            index_dir: None,
            output: None,
        }
    }
}

/// Every random choice of a run is drawn from one master seed; `stream`
/// separates independent uses.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream);
    rng.next_u64()
}

pub const STREAM_QUERIES: u64 = 1;
/// Object set `i` uses stream `STREAM_OBJECTS + i`.
pub const STREAM_OBJECTS: u64 = 1 << 32;

pub fn index_path(dir: &Path, index: &str) -> PathBuf {
    dir.join(format!("{index}.idx"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sources_parse() {
        assert_eq!("road:500".parse(), Ok(GraphSource::Road { n: 500, seed: 1 }));
        assert_eq!("planar:80:9".parse(), Ok(GraphSource::Planar { n: 80, seed: 9 }));
        let GraphSource::Dimacs { co, .. } = "data/DE.gr".parse().unwrap() else {
            panic!()
        };
        assert_eq!(co, PathBuf::from("data/DE.co"));
        assert!("road:x".parse::<GraphSource>().is_err());
    }

    #[test]
    fn defaults() {
        let s = ExperimentSpec::default();
        assert_eq!(s.ks, vec![10]);
        assert_eq!(s.workload, Workload::Uniform { density: 0.001 });
    }

    #[test]
    fn seeds_differ_per_stream() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_eq!(derive_seed(7, 3), derive_seed(7, 3));
    }
}
