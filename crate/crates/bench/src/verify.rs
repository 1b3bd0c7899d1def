//! Oracle-equivalence driver: random small networks and object sets, every
//! method checked against a plain Dijkstra ranking.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roadknn::engine::{BuildParams, Engine, Networks, ObjectIndexes, Worker};
use roadknn::gtree::GTreeParams;
use roadknn::knn::knn_brute_force;
use roadknn::objects::gen_uniform;
use roadknn::par::{self, Parallelism};
use roadknn::road::{default_levels, RoadParams};
use roadknn::synth::{random_planar, travel_time_weights};
use roadknn::{CoordinateTable, Graph, Method, QueryStats, VertexId, WeightKind};

use crate::run::{HarnessError, Mismatch, Result};
use crate::spec::derive_seed;

pub const DENSITIES: [f64; 2] = [0.01, 0.1];
pub const KS: [usize; 3] = [1, 5, 10];

/// A deliberate index corruption, to check that verification notices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Lowers one G-tree leaf matrix entry by one.
    GtreeMatrix,
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub trials: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub min_vertices: usize,
    pub max_vertices: usize,
    pub queries_per_trial: usize,
    pub fault: Option<Fault>,
    pub parallelism: Parallelism,
    /// `Time` replaces the random weights with travel times.
    pub weights: WeightKind,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            trials: 100,
            seed: 1,
            methods: Method::ALL.to_vec(),
            min_vertices: 50,
            max_vertices: 500,
            queries_per_trial: 10,
            fault: None,
            parallelism: Parallelism::Auto,
            weights: WeightKind::Distance,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub trials: usize,
    pub graphs: usize,
    pub queries: usize,
    /// Method answers compared.
    pub comparisons: usize,
}

/// Runs every trial; the mismatch of the lowest failing trial is returned.
pub fn verify(cfg: &VerifyConfig) -> Result<VerifyReport> {
    let outcomes = par::map(cfg.trials, cfg.parallelism, |t| trial(cfg, t));
    let mut report = VerifyReport {
        trials: cfg.trials,
        ..VerifyReport::default()
    };
    for o in outcomes {
        let r = o?;
        report.graphs += r.graphs;
        report.queries += r.queries;
        report.comparisons += r.comparisons;
    }
    Ok(report)
}

/// Graph of trial `t`: `(graph, coordinates, trial seed)`.
pub fn trial_graph(cfg: &VerifyConfig, t: usize) -> (Graph, CoordinateTable, u64) {
    let seed = derive_seed(cfg.seed, t as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(cfg.min_vertices..=cfg.max_vertices);
    let (g, coords) = random_planar(n, seed);
    let g = match cfg.weights {
        WeightKind::Distance => g,
        WeightKind::Time => travel_time_weights(&g, &coords, seed),
    };
    (g, coords, seed)
}

/// Trial `t`: one graph, both densities, every `k`.
fn trial(cfg: &VerifyConfig, t: usize) -> Result<VerifyReport> {
    let (g, coords, seed) = trial_graph(cfg, t);
    let n = g.vertex_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let p = BuildParams {
        gtree: Some(GTreeParams::new(4, 16)),
        road: Some(RoadParams::new(4, default_levels(n, 4).min(3))),
        ..BuildParams::default()
    };
    let mut net = Networks::build(&g, &coords, &cfg.methods, p)?;
    let mut report = VerifyReport {
        graphs: 1,
        ..VerifyReport::default()
    };
    for (di, &density) in DENSITIES.iter().enumerate() {
        let objects = gen_uniform(&g, density, seed ^ di as u64)?;
        if di == 0 && cfg.fault == Some(Fault::GtreeMatrix) {
            if let Some(idx) = net.gtree.as_mut() {
                corrupt_leaf_entry(idx, objects.ids()[0]);
            }
        }
        let obj = ObjectIndexes::build(objects, &coords, &net);
        let engine = Engine::new(&g, &coords, &net, &obj);
        let mut w = Worker::default();
        let qs: Vec<VertexId> = (0..cfg.queries_per_trial)
            .map(|_| rng.gen_range(0..n as VertexId))
            .collect();
        for &q in &qs {
            for k in KS {
                let want = knn_brute_force(&g, q, k, &obj.objects);
                report.queries += 1;
                for &m in &cfg.methods {
                    let got = engine.query(m, q, k, &mut w, &mut QueryStats::default());
                    report.comparisons += 1;
                    if got != want {
                        return Err(HarnessError::Mismatch(Box::new(Mismatch {
                            graph: format!("planar:{n}:{seed}"),
                            seed,
                            object_set: di,
                            method: m,
                            q,
                            k,
                            expected: want,
                            got,
                        })));
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Lowers the entry from `v` to the first border of its leaf.
fn corrupt_leaf_entry(idx: &mut roadknn::gtree::GTreeIndex, v: VertexId) {
    let leaf = idx.leaf_of(v);
    let w = idx.matrix_width(leaf);
    if w == 0 {
        return;
    }
    let at = idx.matrix_start(leaf) + idx.position_in_leaf(v) * w;
    let m = idx.matrix_mut();
    if m[at] > 0 && m[at] != roadknn::INF {
        m[at] -= 1;
    }
}
