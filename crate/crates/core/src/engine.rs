//! Method dispatch over one network and one object set.
//!
//! [`Networks`] holds the per-network indexes, [`ObjectIndexes`] the
//! per-object-set ones; an [`Engine`] borrows both and answers queries for
//! any [`Method`] whose indexes are present.

use crate::dijkstra::DijkstraScratch;
use crate::error::{Error, Result};
use crate::graph::{lower_bound_scale, CoordinateTable, Graph, VertexId};
use crate::gtree::{knn_gtree, GTreeIndex, GTreeParams, GtreeScratch, MGtreeOracle, OccurrenceList};
use crate::hierarchy::ObjectHierarchy;
use crate::ier::{knn_ier, DijkstraOracle};
use crate::ine::knn_ine;
use crate::knn::{KnnResult, Method, QueryStats};
use crate::objects::ObjectSet;
use crate::par::{self, Parallelism};
use crate::road::{knn_road, AssociationDirectory, RoadIndex, RoadParams, RoadScratch};
use crate::rtree::{RTree, DEFAULT_NODE_CAPACITY};
use crate::silc::{knn_db_enn, knn_disbrw, SilcIndex, SilcParams, SilcScratch};

/// Network indexes; each is built only if some requested method needs it.
#[derive(Debug, Default)]
pub struct Networks {
    pub gtree: Option<GTreeIndex>,
    pub road: Option<RoadIndex>,
    pub silc: Option<SilcIndex>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct BuildParams {
    pub gtree: Option<GTreeParams>,
    pub road: Option<RoadParams>,
    pub silc: SilcParams,
}

impl Networks {
    pub fn build(g: &Graph, coords: &CoordinateTable, methods: &[Method], p: BuildParams) -> Result<Networks> {
        let n = g.vertex_count();
        let mut out = Networks::default();
        if methods.iter().any(|m| matches!(m, Method::Gtree | Method::IerGtree)) {
            out.gtree = Some(GTreeIndex::build(g, p.gtree.unwrap_or(GTreeParams::for_size(n)))?);
        }
        if methods.contains(&Method::Road) {
            out.road = Some(RoadIndex::build(g, p.road.unwrap_or(RoadParams::for_size(n)))?);
        }
        if methods.iter().any(|m| m.needs_silc()) {
            out.silc = Some(SilcIndex::build(g, coords, p.silc)?);
        }
        Ok(out)
    }
}

/// Object indexes for one object set.
#[derive(Debug)]
pub struct ObjectIndexes {
    pub objects: ObjectSet,
    pub rtree: RTree,
    pub hierarchy: ObjectHierarchy,
    pub occurrence: Option<OccurrenceList>,
    pub directory: Option<AssociationDirectory>,
}

impl ObjectIndexes {
    pub fn build(objects: ObjectSet, coords: &CoordinateTable, net: &Networks) -> ObjectIndexes {
        Self::with_rtree_capacity(objects, coords, net, DEFAULT_NODE_CAPACITY)
    }

    pub fn with_rtree_capacity(
        objects: ObjectSet,
        coords: &CoordinateTable,
        net: &Networks,
        rtree_capacity: usize,
    ) -> ObjectIndexes {
        ObjectIndexes {
            rtree: RTree::with_capacity(&objects, coords, rtree_capacity),
            hierarchy: ObjectHierarchy::build(&objects, coords),
            occurrence: net.gtree.as_ref().map(|t| OccurrenceList::build(t, &objects)),
            directory: net.road.as_ref().map(|r| AssociationDirectory::build(r, &objects)),
            objects,
        }
    }
}

pub struct Engine<'a> {
    pub g: &'a Graph,
    pub coords: &'a CoordinateTable,
    pub net: &'a Networks,
    pub obj: &'a ObjectIndexes,
    lb_scale: f64,
}

/// Scratch space for one thread, created lazily per method.
#[derive(Default)]
pub struct Worker {
    dijkstra: Option<DijkstraScratch>,
    gtree: Option<GtreeScratch>,
    road: Option<RoadScratch>,
    silc: SilcScratch,
}

impl<'a> Engine<'a> {
    pub fn new(g: &'a Graph, coords: &'a CoordinateTable, net: &'a Networks, obj: &'a ObjectIndexes) -> Self {
        Engine {
            g,
            coords,
            net,
            obj,
            lb_scale: lower_bound_scale(g, coords),
        }
    }

    /// Errors unless every index `m` needs is present.
    pub fn check(&self, m: Method) -> Result<()> {
        let missing = match m {
            Method::Ine | Method::IerDijkstra => None,
            Method::IerGtree => self.net.gtree.is_none().then_some("G-tree"),
            Method::Gtree => (self.net.gtree.is_none() || self.obj.occurrence.is_none()).then_some("G-tree"),
            Method::Road => (self.net.road.is_none() || self.obj.directory.is_none()).then_some("ROAD"),
            Method::DisBrw | Method::DbEnn => self.net.silc.is_none().then_some("SILC"),
        };
        match missing {
            Some(what) => Err(Error::InvalidParameter(format!("method {m} needs a {what} index"))),
            None => Ok(()),
        }
    }

    /// Bytes of every index `m` reads, the graph included for INE.
    pub fn index_bytes(&self, m: Method) -> usize {
        let (net, o) = (self.net, self.obj);
        let gtree = || net.gtree.as_ref().map_or(0, |t| t.byte_size());
        let silc = || net.silc.as_ref().map_or(0, |t| t.byte_size());
        match m {
            Method::Ine => self.g.byte_size(),
            Method::IerDijkstra => self.g.byte_size() + o.rtree.byte_size(),
            Method::IerGtree => gtree() + o.rtree.byte_size(),
            Method::Gtree => gtree() + o.occurrence.as_ref().map_or(0, |x| x.byte_size()),
            Method::Road => {
                net.road.as_ref().map_or(0, |r| r.byte_size()) + o.directory.as_ref().map_or(0, |x| x.byte_size())
            }
            Method::DisBrw => silc() + o.hierarchy.byte_size(),
            Method::DbEnn => silc() + o.rtree.byte_size(),
        }
    }

    /// Answers one query. Panics if the method's indexes are missing.
    pub fn query(&self, m: Method, q: VertexId, k: usize, w: &mut Worker, stats: &mut QueryStats) -> KnnResult {
        let n = self.g.vertex_count();
        let o = self.obj;
        match m {
            Method::Ine => {
                let sc = w.dijkstra.get_or_insert_with(|| DijkstraScratch::new(n));
                knn_ine(self.g, q, k, &o.objects, sc, stats)
            }
            Method::IerDijkstra => {
                let mut oracle = DijkstraOracle::new(self.g);
                knn_ier(q, k, &mut oracle, &o.rtree, self.coords, self.lb_scale, stats)
            }
            Method::IerGtree => {
                let mut oracle = MGtreeOracle::new(self.gtree());
                knn_ier(q, k, &mut oracle, &o.rtree, self.coords, self.lb_scale, stats)
            }
            Method::Gtree => {
                let idx = self.gtree();
                let sc = w.gtree.get_or_insert_with(|| GtreeScratch::new(idx));
                knn_gtree(q, k, idx, o.occurrence.as_ref().expect("occurrence list"), sc, stats)
            }
            Method::Road => {
                let idx = self.net.road.as_ref().expect("ROAD index");
                let sc = w.road.get_or_insert_with(|| RoadScratch::new(idx));
                knn_road(q, k, idx, o.directory.as_ref().expect("association directory"), sc, stats)
            }
            Method::DisBrw => knn_disbrw(q, k, self.silc(), &o.hierarchy, &mut w.silc, stats),
            Method::DbEnn => knn_db_enn(q, k, self.silc(), &o.rtree, &mut w.silc, stats),
        }
    }

    /// Runs `queries` with one worker per thread. Results keep query order.
    pub fn batch(&self, m: Method, queries: &[VertexId], k: usize, par: Parallelism) -> Vec<(KnnResult, QueryStats)> {
        par::map_with_scratch(queries.len(), par, Worker::default, |w, i| {
            let mut st = QueryStats::default();
            let r = self.query(m, queries[i], k, w, &mut st);
            (r, st)
        })
    }

    fn gtree(&self) -> &'a GTreeIndex {
        self.net.gtree.as_ref().expect("G-tree index")
    }

    fn silc(&self) -> &'a SilcIndex {
        self.net.silc.as_ref().expect("SILC index")
    }
}
