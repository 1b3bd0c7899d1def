//! k-nearest-neighbor queries on road networks.
//!
//! The crate holds one immutable [`Graph`] and a family of decoupled indexes
//! that are built once per network ([`gtree::GTreeIndex`], [`road::RoadIndex`],
//! [`silc::SilcIndex`]) or once per object set ([`rtree::RTree`],
//! [`hierarchy::ObjectHierarchy`], occurrence lists and association
//! directories). Each kNN method combines one network index with one object
//! index at query time:
//!
//! | method      | network index | object index            |
//! |-------------|---------------|-------------------------|
//! | INE         | graph         | object bitmap           |
//! | IER         | any oracle    | R-tree                  |
//! | DisBrw      | SILC          | object hierarchy        |
//! | DB-ENN      | SILC          | R-tree                  |
//! | ROAD        | route overlay | association directory   |
//! | G-tree      | G-tree        | occurrence list         |
//!
//! All methods return the same [`KnnResult`] for the same input: the `k`
//! objects with smallest `(distance, vertex id)` key.

pub mod binio;
pub mod dijkstra;
pub mod engine;
pub mod error;
pub mod graph;
pub mod gtree;
pub mod hierarchy;
pub mod ier;
pub mod ine;
pub mod knn;
pub mod objects;
pub mod par;
pub mod partition;
pub mod road;
pub mod rtree;
pub mod search;
pub mod silc;
pub mod synth;

pub use error::{Error, Result};
pub use graph::{CoordinateTable, Dist, Graph, Point, VertexId, WeightKind, INF};
pub use knn::{KnnResult, Method, QueryStats};
pub use objects::ObjectSet;
