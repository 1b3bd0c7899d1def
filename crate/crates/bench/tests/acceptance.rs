//! Acceptance run: prints one `criterion N: PASS|FAIL` line per criterion.
//!
//! `ROADKNN_ACCEPTANCE_ONLY=1,4` restricts the run to some criteria and
//! `ROADKNN_ACCEPTANCE_STRICT=1` turns any FAIL into a non-zero exit. The
//! default exit status only reflects harness errors, so a criterion that
//! cannot be met on the current machine is reported without hiding the rest.

use std::collections::BTreeMap;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roadknn::dijkstra::{dijkstra_distance, dijkstra_sssp};
use roadknn::engine::Networks;
use roadknn::graph::{euclid_lower_bound, lower_bound_scale, max_speed};
use roadknn::gtree::{
    knn_gtree, knn_gtree_unimproved, AssemblyState, GTreeIndex, GTreeParams, GtreeScratch, OccurrenceList,
};
use roadknn::hierarchy::ObjectHierarchy;
use roadknn::objects::{gen_uniform, ObjectKind};
use roadknn::par::Parallelism;
use roadknn::road::{knn_road_with, restricted_distances, default_levels, AssociationDirectory, RoadIndex, RoadParams, RoadScratch};
use roadknn::rtree::RTree;
use roadknn::silc::{knn_db_enn_with, knn_disbrw_with, Refinement, SilcIndex, SilcParams, SilcScratch};
use roadknn::synth::{random_planar, road_like, travel_time_weights};
use roadknn::{CoordinateTable, Dist, Graph, Method, ObjectSet, QueryStats, VertexId, WeightKind};
use roadknn_bench::run::run_queries;
use roadknn_bench::spec::{Dataset, ExperimentSpec, GraphSource, Workload};
use roadknn_bench::verify::{trial_graph, verify, VerifyConfig};

/// Stand-in for DE: vertex count of the German network, f=4, tau=64, l=7.
const DE_VERTICES: usize = 48_812;
const DE_SEED: u64 = 1;
const MINUTE: Duration = Duration::from_secs(60);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// Shared state of the criteria that run on the DE stand-in.
#[derive(Default)]
struct De {
    data: Option<(Dataset, Networks)>,
}

impl De {
    fn source() -> GraphSource {
        GraphSource::Road {
            n: DE_VERTICES,
            seed: DE_SEED,
        }
    }

    fn spec() -> ExperimentSpec {
        ExperimentSpec {
            graph: Self::source(),
            gtree_fanout: 4,
            gtree_leaf_capacity: Some(64),
            road_fanout: 4,
            road_levels: Some(7),
            ..ExperimentSpec::default()
        }
    }

    /// Builds the G-tree alone when criterion 5 did not run first.
    fn get(&mut self) -> &(Dataset, Networks) {
        self.data.get_or_insert_with(|| {
            let ds = Dataset::load(&Self::source(), WeightKind::Distance).expect("synthetic network");
            let net = Networks {
                gtree: Some(GTreeIndex::build(&ds.graph, GTreeParams::new(4, 64)).expect("G-tree")),
                ..Networks::default()
            };
            (ds, net)
        })
    }
}

fn criterion1() -> Outcome {
    let t = Instant::now();
    let r = verify(&VerifyConfig::default());
    let el = t.elapsed();
    match r {
        Ok(r) => outcome(
            el < 5 * MINUTE,
            format!(
                "{} graphs, {} queries, {} answers id-identical to the Dijkstra ranking in {:.1?}",
                r.graphs, r.queries, r.comparisons, el
            ),
        ),
        Err(e) => outcome(false, e.to_string()),
    }
}

/// Lowest-id neighbour of `s` starting a shortest path to `t`.
fn oracle_first_hop(g: &Graph, s: VertexId, t: VertexId, from_s: &[Dist]) -> VertexId {
    g.neighbors(s)
        .filter(|&(u, w)| w + dijkstra_distance(g, u, t) == from_s[t as usize])
        .map(|(u, _)| u)
        .min()
        .expect("connected")
}

fn criterion2() -> Outcome {
    let t = Instant::now();
    let cfg = VerifyConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut gtree, mut road, mut silc) = (0usize, 0usize, 0usize);
    let mut bad = Vec::new();
    let mut trial = 0;
    while gtree < 200 || road < 200 || silc < 200 {
        let (g, coords, _) = trial_graph(&cfg, trial);
        trial += 1;
        let n = g.vertex_count();
        let gt = GTreeIndex::build(&g, GTreeParams::new(4, 16)).unwrap();
        for _ in 0..40 {
            if gtree >= 200 {
                break;
            }
            let node = rng.gen_range(0..gt.node_count() as u32);
            let (a, b, got) = if gt.is_leaf(node) {
                let bs = gt.borders(node);
                if bs.is_empty() {
                    continue;
                }
                let vs = gt.leaf_vertices(node);
                let (p, j) = (rng.gen_range(0..vs.len()), rng.gen_range(0..bs.len()));
                (vs[p], bs[j], gt.leaf_distance(node, p, j))
            } else {
                let u = gt.union_borders(node);
                let (i, j) = (rng.gen_range(0..u.len()), rng.gen_range(0..u.len()));
                (u[i], u[j], gt.union_distance(node, i, j))
            };
            gtree += 1;
            if got != dijkstra_distance(&g, a, b) {
                bad.push(format!("G-tree node {node} ({a},{b})"));
            }
        }
        let rd = RoadIndex::build(&g, RoadParams::new(4, default_levels(g.vertex_count(), 4).min(3))).unwrap();
        let leaves = rd.leaf_edges();
        for _ in 0..40 {
            if road >= 200 {
                break;
            }
            let r = rng.gen_range(1..rd.rnet_count() as u32);
            let bs = rd.borders(r);
            if bs.is_empty() {
                continue;
            }
            let mut es: Vec<_> = rd
                .descendant_leaves(r)
                .into_iter()
                .flat_map(|l| leaves[l as usize].iter().copied())
                .collect();
            es.sort_unstable();
            es.dedup();
            let (i, j) = (rng.gen_range(0..bs.len()), rng.gen_range(0..bs.len()));
            let want = restricted_distances(n, &es, &bs[i..=i], &bs[j..=j])[0];
            road += 1;
            if rd.shortcut(r, i, j) != want {
                bad.push(format!("ROAD rnet {r} ({i},{j})"));
            }
        }
        if silc < 200 {
            let idx = SilcIndex::build(&g, &coords, SilcParams::default()).unwrap();
            for _ in 0..40 {
                let (s, v) = (rng.gen_range(0..n as VertexId), rng.gen_range(0..n as VertexId));
                if s == v {
                    continue;
                }
                let from_s = dijkstra_sssp(&g, s);
                let d = from_s[v as usize];
                let iv = idx.interval(s, v, &mut QueryStats::default());
                silc += 1;
                if idx.next_hop(s, v) != oracle_first_hop(&g, s, v, &from_s) {
                    bad.push(format!("SILC first hop {s}->{v}"));
                }
                if !(iv.lo <= d && d <= iv.hi) {
                    bad.push(format!("SILC interval {s}->{v}: [{}, {}] misses {d}", iv.lo, iv.hi));
                }
            }
        }
    }
    let el = t.elapsed();
    let detail = format!(
        "{gtree} G-tree entries, {road} ROAD shortcuts, {silc} SILC hops and intervals on {trial} graphs in {el:.1?}"
    );
    if bad.is_empty() {
        outcome(el < 2 * MINUTE, detail)
    } else {
        outcome(false, format!("{detail}; {} wrong, first: {}", bad.len(), bad[0]))
    }
}

fn criterion3() -> Outcome {
    let t = Instant::now();
    let mut wrong = 0usize;
    let mut pairs = 0usize;
    for seed in 0..10 {
        let (g, _) = random_planar(200, 300 + seed);
        let idx = GTreeIndex::build(&g, GTreeParams::new(4, 16)).unwrap();
        let mut st = AssemblyState::new(&idx);
        for s in 0..200 {
            let dist = dijkstra_sssp(&g, s);
            st.reset(&idx, s);
            for v in 0..200 {
                pairs += 1;
                wrong += usize::from(st.distance(&idx, v) != dist[v as usize]);
            }
        }
    }
    let el = t.elapsed();
    outcome(
        wrong == 0 && el < 2 * MINUTE,
        format!("{pairs} pairs on 10 graphs of 200 vertices, {wrong} wrong, {el:.1?}"),
    )
}

/// Counters of an optimised variant against its plain twin.
#[derive(Default)]
struct Ab {
    same: bool,
    runs: u64,
    optimised: u64,
    plain: u64,
    worse: u64,
}

impl Ab {
    fn new() -> Self {
        Ab {
            same: true,
            ..Ab::default()
        }
    }

    fn add(&mut self, same: bool, optimised: u64, plain: u64) {
        self.same &= same;
        self.runs += 1;
        self.optimised += optimised;
        self.plain += plain;
        self.worse += u64::from(optimised > plain);
    }

    fn ok(&self) -> bool {
        self.same && self.worse == 0
    }

    fn show(&self, name: &str, counter: &str) -> String {
        format!(
            "{name}: {} runs, results {}, {counter} {} vs {} ({} runs worse)",
            self.runs,
            if self.same { "identical" } else { "DIFFER" },
            self.optimised,
            self.plain,
            self.worse
        )
    }
}

fn gtree_pair(idx: &GTreeIndex, ol: &OccurrenceList, q: VertexId, k: usize) -> (bool, u64, u64) {
    let mut s = GtreeScratch::new(idx);
    let (mut a, mut b) = (QueryStats::default(), QueryStats::default());
    let r1 = knn_gtree(q, k, idx, ol, &mut s, &mut a);
    let r0 = knn_gtree_unimproved(q, k, idx, ol, &mut s, &mut b);
    (r1 == r0, a.candidates, b.candidates)
}

fn road_pair(idx: &RoadIndex, ad: &AssociationDirectory, q: VertexId, k: usize) -> (bool, u64, u64) {
    let mut s = RoadScratch::new(idx);
    let (mut a, mut b) = (QueryStats::default(), QueryStats::default());
    let r1 = knn_road_with(q, k, idx, ad, &mut s, &mut a, true);
    let r0 = knn_road_with(q, k, idx, ad, &mut s, &mut b, false);
    (r1 == r0, a.queue_inserts, b.queue_inserts)
}

fn silc_pair(idx: &SilcIndex, oh: &ObjectHierarchy, rt: &RTree, q: VertexId, k: usize) -> (bool, u64, u64) {
    let mut s = SilcScratch::new();
    let mut st = [QueryStats::default(); 4];
    let r = [
        knn_disbrw_with(q, k, idx, oh, &mut s, &mut st[0], Refinement::Chain),
        knn_disbrw_with(q, k, idx, oh, &mut s, &mut st[1], Refinement::Plain),
        knn_db_enn_with(q, k, idx, rt, &mut s, &mut st[2], Refinement::Chain),
        knn_db_enn_with(q, k, idx, rt, &mut s, &mut st[3], Refinement::Plain),
    ];
    let same = r.iter().all(|x| *x == r[0]);
    (
        same,
        st[0].refine_lookups + st[2].refine_lookups,
        st[1].refine_lookups + st[3].refine_lookups,
    )
}

fn criterion4() -> Outcome {
    let cfg = VerifyConfig::default();
    let (mut a, mut b, mut c) = (Ab::new(), Ab::new(), Ab::new());
    for t in 0..cfg.trials {
        let (g, coords, seed) = trial_graph(&cfg, t);
        let n = g.vertex_count();
        let gt = GTreeIndex::build(&g, GTreeParams::new(4, 16)).unwrap();
        let rd = RoadIndex::build(&g, RoadParams::new(4, default_levels(g.vertex_count(), 4).min(3))).unwrap();
        let silc = SilcIndex::build(&g, &coords, SilcParams::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for density in [0.01, 0.1] {
            let o = gen_uniform(&g, density, seed).unwrap();
            let (ol, ad) = (OccurrenceList::build(&gt, &o), AssociationDirectory::build(&rd, &o));
            let (oh, rt) = (ObjectHierarchy::build(&o, &coords), RTree::build(&o, &coords));
            for _ in 0..5 {
                let q = rng.gen_range(0..n as VertexId);
                for k in [1, 5, 10] {
                    let (s, x, y) = gtree_pair(&gt, &ol, q, k);
                    a.add(s, x, y);
                    let (s, x, y) = silc_pair(&silc, &oh, &rt, q, k);
                    b.add(s, x, y);
                    let (s, x, y) = road_pair(&rd, &ad, q, k);
                    c.add(s, x, y);
                }
            }
        }
    }
    // constructed instances, one strict decrease each
    let strict_a = {
        let (g, _) = road_like(3_000, 7);
        let gt = GTreeIndex::build(&g, GTreeParams::new(4, 64)).unwrap();
        let o = gen_uniform(&g, 0.5, 7).unwrap();
        let ol = OccurrenceList::build(&gt, &o);
        let q = 100;
        let k = 3;
        let dense = ol.get(gt.leaf_of(q)).len() > k;
        let (same, x, y) = gtree_pair(&gt, &ol, q, k);
        same && dense && x < y
    };
    let strict_b = {
        let edges: Vec<_> = (1..50).map(|v| (v - 1, v, 3)).collect();
        let g = Graph::from_edges(50, &edges, WeightKind::Distance).unwrap();
        let coords = CoordinateTable::from_points((0..50).map(|i| roadknn::Point::new(i as f64, 0.0)).collect());
        let idx = SilcIndex::build(&g, &coords, SilcParams::default()).unwrap();
        let o = ObjectSet::new(vec![49], 50, ObjectKind::File, None).unwrap();
        let (oh, rt) = (ObjectHierarchy::build(&o, &coords), RTree::build(&o, &coords));
        let (same, x, y) = silc_pair(&idx, &oh, &rt, 0, 1);
        same && x < y
    };
    let strict_c = {
        let (g, _) = road_like(3_000, 21);
        let rd = RoadIndex::build(&g, RoadParams::new(4, 4)).unwrap();
        // objects in the first top-level Rnet only, query in the last
        let leaves = rd.leaf_edges();
        let verts = |r: u32| {
            let mut v: Vec<VertexId> = rd
                .descendant_leaves(r)
                .into_iter()
                .flat_map(|l| leaves[l as usize].iter().flat_map(|e| [e.0, e.1]))
                .collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        let kids: Vec<u32> = rd.children(rd.root()).collect();
        let (first, last) = (kids[0], *kids.last().unwrap());
        let (va, vz) = (verts(first), verts(last));
        let objs: Vec<VertexId> = va.iter().copied().filter(|v| !vz.contains(v)).step_by(40).take(5).collect();
        let q = *vz
            .iter()
            .find(|v| !va.contains(v) && !rd.borders(last).contains(v))
            .unwrap();
        let o = ObjectSet::new(objs, 3_000, ObjectKind::File, None).unwrap();
        let ad = AssociationDirectory::build(&rd, &o);
        let (same, x, y) = road_pair(&rd, &ad, q, 3);
        same && x < y
    };
    let detail = format!(
        "(a) {}; strict on dense leaf: {strict_a}. (b) {}; strict on 50-vertex chain: {strict_b}. (c) {}; strict with object-free Rnet: {strict_c}",
        a.show("leaf search", "candidates"),
        b.show("chain refine", "lookups"),
        c.show("visited pruning", "queue inserts"),
    );
    outcome(a.ok() && b.ok() && c.ok() && strict_a && strict_b && strict_c, detail)
}

fn criterion5(de: &mut De) -> Outcome {
    let spec = ExperimentSpec {
        queries: 10_000,
        ks: vec![10],
        workload: Workload::Uniform { density: 0.001 },
        verify: true,
        ..De::spec()
    };
    let ds = Dataset::load(&spec.graph, WeightKind::Distance).unwrap();
    let g = &ds.graph;
    let mut notes = vec![format!(
        "stand-in {} vertices / {} edges ({} arcs)",
        g.vertex_count(),
        g.edge_count(),
        g.arc_count()
    )];
    let mut ms = BTreeMap::new();
    let t = Instant::now();
    let gtree = GTreeIndex::build(g, GTreeParams::new(4, 64));
    ms.insert("gtree".to_string(), t.elapsed().as_secs_f64() * 1e3);
    let t = Instant::now();
    let road = RoadIndex::build(g, RoadParams::new(4, 7));
    ms.insert("road".to_string(), t.elapsed().as_secs_f64() * 1e3);
    let (gtree, road) = match (gtree, road) {
        (Ok(a), Ok(b)) => (a, b),
        (a, b) => return outcome(false, format!("build failed: {:?} {:?}", a.err(), b.err())),
    };
    notes.push(format!(
        "G-tree {:.1} s {} B, ROAD {:.1} s {} B",
        ms["gtree"] / 1e3,
        gtree.byte_size(),
        ms["road"] / 1e3,
        road.byte_size()
    ));

    let silc_with = |par| {
        let t = Instant::now();
        let r = SilcIndex::build(
            g,
            &ds.coords,
            SilcParams {
                parallelism: par,
                ..SilcParams::default()
            },
        );
        (r, t.elapsed())
    };
    let (seq, t1) = silc_with(Parallelism::Sequential);
    let seq = match seq {
        Ok(x) => x,
        Err(e) => return outcome(false, format!("SILC build failed: {e}")),
    };
    let blocks = seq.block_count();
    drop(seq);
    let (par, t4) = silc_with(Parallelism::Threads(4));
    let silc = match par {
        Ok(x) => x,
        Err(e) => return outcome(false, format!("4-worker SILC build failed: {e}")),
    };
    ms.insert("silc".to_string(), t4.as_secs_f64() * 1e3);
    let speedup = t1.as_secs_f64() / t4.as_secs_f64();
    let cores = std::thread::available_parallelism().map_or(1, |c| c.get());
    let silc_ok = t1 < 30 * MINUTE && blocks == silc.block_count();
    let speed_ok = speedup >= 3.0;
    notes.push(format!(
        "SILC {blocks} blocks {} B, 1 worker {:.1} s, 4 workers {:.1} s, speed-up {speedup:.2}x on {cores} core(s)",
        silc.byte_size(),
        t1.as_secs_f64(),
        t4.as_secs_f64()
    ));
    let net = Networks {
        gtree: Some(gtree),
        road: Some(road),
        silc: Some(silc),
    };
    let t = Instant::now();
    let queries = run_queries(&ds, &net, &spec, &ms);
    let queries_ok = match &queries {
        Ok(rows) => {
            let all = rows.len() == Method::ALL.len() && rows.iter().all(|r| r.queries == spec.queries);
            let means: Vec<String> = rows.iter().map(|r| format!("{} {:.0}us", r.method, r.mean_us)).collect();
            notes.push(format!(
                "10000 queries x 7 methods, 0 mismatches, {:.1?}: {}",
                t.elapsed(),
                means.join(", ")
            ));
            all
        }
        Err(e) => {
            notes.push(format!("queries: {e}"));
            false
        }
    };
    if !speed_ok {
        notes.push("speed-up below 3x".into());
    }
    de.data = Some((ds, net));
    outcome(silc_ok && speed_ok && queries_ok, notes.join("; "))
}

fn criterion6(de: &mut De) -> Outcome {
    let (ds, net) = de.get();
    let spec = ExperimentSpec {
        methods: vec![Method::IerDijkstra, Method::IerGtree],
        queries: 2_000,
        ks: vec![10],
        workload: Workload::Uniform { density: 0.0001 },
        verify: true,
        ..De::spec()
    };
    match run_queries(ds, net, &spec, &BTreeMap::new()) {
        Ok(rows) => {
            let mean = |m: Method| rows.iter().find(|r| r.method == m.name()).map(|r| r.mean_us).unwrap();
            let (d, gt) = (mean(Method::IerDijkstra), mean(Method::IerGtree));
            outcome(
                gt * 3.0 <= d,
                format!(
                    "d=0.0001 k=10, {} queries: IER-Dijkstra {d:.0} us, IER-G-tree {gt:.0} us, ratio {:.1}x",
                    spec.queries,
                    d / gt
                ),
            )
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn criterion7() -> Outcome {
    let (g, coords) = road_like(DE_VERTICES, DE_SEED);
    let g = travel_time_weights(&g, &coords, DE_SEED);
    let speed = max_speed(&g, &coords).unwrap();
    let scale = lower_bound_scale(&g, &coords);
    let n = g.vertex_count() as VertexId;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut violations = 0;
    let mut pairs = 0;
    for _ in 0..100 {
        let s = rng.gen_range(0..n);
        let dist = dijkstra_sssp(&g, s);
        for _ in 0..100 {
            let t = rng.gen_range(0..n);
            let d_e = coords.point(s).dist(coords.point(t));
            let d = dist[t as usize];
            pairs += 1;
            if d_e / speed > d as f64 || euclid_lower_bound(d_e, scale) > d {
                violations += 1;
            }
        }
    }
    // IER on the full travel-time network against INE
    let gt = GTreeIndex::build(&g, GTreeParams::new(4, 64)).unwrap();
    let ds = Dataset {
        name: "de-time".into(),
        graph: g,
        coords,
    };
    let net = Networks {
        gtree: Some(gt),
        ..Networks::default()
    };
    let spec = ExperimentSpec {
        methods: vec![Method::IerDijkstra, Method::IerGtree],
        queries: 1_000,
        warmup: 0,
        verify: true,
        ..De::spec()
    };
    let de_ier = run_queries(&ds, &net, &spec, &BTreeMap::new());
    let small = verify(&VerifyConfig {
        weights: WeightKind::Time,
        methods: vec![Method::IerDijkstra, Method::IerGtree, Method::Ine, Method::Road, Method::Gtree],
        ..VerifyConfig::default()
    });
    let mut detail = format!("{pairs} pairs, {violations} with d_E/S > d (S = {speed:.3})");
    let ok_de = match &de_ier {
        Ok(_) => {
            detail += "; 1000 DE travel-time IER queries match INE";
            true
        }
        Err(e) => {
            detail += &format!("; {e}");
            false
        }
    };
    let ok_small = match &small {
        Ok(r) => {
            detail += &format!("; criterion-1 rerun on time weights: {} answers identical", r.comparisons);
            true
        }
        Err(e) => {
            detail += &format!("; {e}");
            false
        }
    };
    outcome(violations == 0 && ok_de && ok_small, detail)
}

fn criterion8() -> Outcome {
    let cfg = VerifyConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut pairs, mut over, mut loose, mut unsound) = (0, 0, 0, 0);
    let mut max_steps = 0usize;
    for t in 0..cfg.trials {
        let (g, coords, _) = trial_graph(&cfg, t);
        let idx = SilcIndex::build(&g, &coords, SilcParams::default()).unwrap();
        let n = g.vertex_count() as VertexId;
        for _ in 0..10 {
            let (s, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
            let d = dijkstra_distance(&g, s, v);
            let hops = idx.path(s, v).len().saturating_sub(1);
            pairs += 1;
            for mode in [Refinement::Plain, Refinement::Chain] {
                let mut st = QueryStats::default();
                let mut iv = idx.interval(s, v, &mut st);
                let mut steps = 0;
                loop {
                    if !(iv.lo <= d && d <= iv.hi) {
                        unsound += 1;
                    }
                    if iv.is_exact() || steps > hops {
                        break;
                    }
                    let before = (iv.lo, iv.hi);
                    idx.refine_step(&mut iv, mode, &mut st);
                    steps += 1;
                    if iv.lo < before.0 || iv.hi > before.1 {
                        loose += 1;
                    }
                }
                if steps > hops || iv.lo != d || iv.hi != d {
                    over += 1;
                }
                max_steps = max_steps.max(steps);
            }
        }
    }
    outcome(
        over == 0 && loose == 0 && unsound == 0,
        format!(
            "{pairs} pairs x 2 refinement modes: {over} not exact within hop count, {loose} loosening steps, {unsound} unsound intervals, longest {max_steps} steps"
        ),
    )
}

fn main() -> ExitCode {
    // the harness may pass libtest flags; they do not apply here
    let only: Option<Vec<u32>> = std::env::var("ROADKNN_ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let strict = std::env::var("ROADKNN_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let wanted = |i: u32| only.as_ref().is_none_or(|o| o.contains(&i));
    let mut de = De::default();
    type Check<'a> = Box<dyn FnMut() -> Outcome + 'a>;
    let de = std::cell::RefCell::new(&mut de);
    let checks: Vec<(u32, &str, Check)> = vec![
        (1, "oracle equivalence", Box::new(criterion1)),
        (2, "index-structure invariants", Box::new(criterion2)),
        (3, "assembly exactness", Box::new(criterion3)),
        (4, "A/B improvement equivalence", Box::new(criterion4)),
        (5, "desk-scale DE run", Box::new(|| criterion5(&mut de.borrow_mut()))),
        (6, "relative IER ordering", Box::new(|| criterion6(&mut de.borrow_mut()))),
        (7, "travel-time soundness", Box::new(criterion7)),
        (8, "interval convergence", Box::new(criterion8)),
    ];
    let mut failed = 0;
    for (i, name, mut check) in checks {
        if !wanted(i) {
            continue;
        }
        let t = Instant::now();
        let r = panic::catch_unwind(AssertUnwindSafe(&mut check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        failed += u32::from(!r.pass);
        println!(
            "criterion {i}: {} {name} ({:.1?}) - {}",
            if r.pass { "PASS" } else { "FAIL" },
            t.elapsed(),
            r.detail
        );
    }
    println!("acceptance: {failed} criteria failed");
    if strict && failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
