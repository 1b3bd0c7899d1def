//! CSV output. Every file starts with `#` comment lines (tool version, seed,
//! dataset) followed by one header row and the records.
//!
//! Query columns:
//!
//! | column | meaning |
//! |---|---|
//! | `method`, `dataset`, `weights`, `vertices` | what ran on what |
//! | `object_kind`, `workload`, `objects`, `sets`, `k`, `queries` | parameter point |
//! | `mean_us`, `p50_us`, `p95_us`, `p99_us` | per-query wall time |
//! | `settled` .. `candidates` | per-query means of the search counters |
//! | `false_hits` | IER rows only |
//! | `index_bytes`, `build_ms` | indexes the method reads |

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use roadknn::QueryStats;

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub method: String,
    pub dataset: String,
    pub weights: String,
    pub vertices: usize,
    pub object_kind: String,
    pub workload: String,
    /// Mean object count over the sets.
    pub objects: f64,
    pub sets: usize,
    pub k: usize,
    pub queries: usize,
    pub mean_us: f64,
    pub p50_us: f64,
    pub p95_us: f64,
    pub p99_us: f64,
    /// Counter sums over all queries.
    pub stats: QueryStats,
    /// Mean false hits per query, IER only.
    pub false_hits: Option<f64>,
    pub index_bytes: usize,
    pub build_ms: Option<f64>,
}

impl RunRecord {
    pub const COLUMNS: [&'static str; 25] = [
        "method",
        "dataset",
        "weights",
        "vertices",
        "object_kind",
        "workload",
        "objects",
        "sets",
        "k",
        "queries",
        "mean_us",
        "p50_us",
        "p95_us",
        "p99_us",
        "settled",
        "queue_inserts",
        "oracle_calls",
        "path_cost",
        "vertices_bypassed",
        "refine_lookups",
        "cursor_pulls",
        "candidates",
        "false_hits",
        "index_bytes",
        "build_ms",
    ];

    pub fn row(&self) -> Vec<String> {
        let q = self.queries.max(1) as f64;
        let mean = |x: u64| format!("{:.3}", x as f64 / q);
        let s = &self.stats;
        vec![
            self.method.clone(),
            self.dataset.clone(),
            self.weights.clone(),
            self.vertices.to_string(),
            self.object_kind.clone(),
            self.workload.clone(),
            format!("{:.1}", self.objects),
            self.sets.to_string(),
            self.k.to_string(),
            self.queries.to_string(),
            format!("{:.3}", self.mean_us),
            format!("{:.3}", self.p50_us),
            format!("{:.3}", self.p95_us),
            format!("{:.3}", self.p99_us),
            mean(s.settled),
            mean(s.queue_inserts),
            mean(s.oracle_calls),
            mean(s.path_cost),
            mean(s.vertices_bypassed),
            mean(s.refine_lookups),
            mean(s.cursor_pulls),
            mean(s.candidates),
            self.false_hits.map_or_else(String::new, |x| format!("{x:.3}")),
            self.index_bytes.to_string(),
            self.build_ms.map_or_else(String::new, |x| format!("{x:.1}")),
        ]
    }
}

/// One row per built network index.
#[derive(Debug, Clone, PartialEq)]
pub struct BuildRecord {
    pub index: String,
    pub dataset: String,
    pub vertices: usize,
    pub edges: usize,
    pub params: String,
    pub bytes: usize,
    pub build_ms: f64,
    pub file: String,
}

impl BuildRecord {
    pub const COLUMNS: [&'static str; 8] = ["index", "dataset", "vertices", "edges", "params", "bytes", "build_ms", "file"];

    pub fn row(&self) -> Vec<String> {
        vec![
            self.index.clone(),
            self.dataset.clone(),
            self.vertices.to_string(),
            self.edges.to_string(),
            self.params.clone(),
            self.bytes.to_string(),
            format!("{:.1}", self.build_ms),
            self.file.clone(),
        ]
    }
}

/// Writes `# key: value` lines, the header row, then `rows`.
pub fn write_csv<W: Write>(mut w: W, comments: &[(&str, String)], columns: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
    for (k, v) in comments {
        writeln!(w, "# {k}: {v}")?;
    }
    let mut out = csv::Writer::from_writer(w);
    out.write_record(columns)?;
    for r in rows {
        out.write_record(r)?;
    }
    out.flush()
}

/// [`write_csv`] to `path`, or to stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, comments: &[(&str, String)], columns: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
    match path {
        Some(p) => write_csv(BufWriter::new(File::create(p)?), comments, columns, rows),
        None => write_csv(io::stdout().lock(), comments, columns, rows),
    }
}

/// Nearest-rank percentile of sorted samples.
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let rank = ((p / 100.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comment_lines_precede_the_header() {
        let mut buf = Vec::new();
        let rows = vec![vec!["a,b".to_string(), "1".into()]];
        write_csv(&mut buf, &[("seed", "7".into())], &["x", "y"], &rows).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "# seed: 7\nx,y\n\"a,b\",1\n");
    }

    #[test]
    fn nearest_rank() {
        let xs: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(percentile(&xs, 50.0), 50.0);
        assert_eq!(percentile(&xs, 99.0), 99.0);
        assert_eq!(percentile(&xs, 100.0), 100.0);
        assert_eq!(percentile(&[3.0], 95.0), 3.0);
    }

    #[test]
    fn row_matches_columns() {
        let r = RunRecord {
            method: "ine".into(),
            dataset: "d".into(),
            weights: "distance".into(),
            vertices: 10,
            object_kind: "uniform".into(),
            workload: "uniform d=0.1".into(),
            objects: 1.0,
            sets: 1,
            k: 1,
            queries: 2,
            mean_us: 1.0,
            p50_us: 1.0,
            p95_us: 1.0,
            p99_us: 1.0,
            stats: QueryStats::default(),
            false_hits: None,
            index_bytes: 0,
            build_ms: None,
        };
        assert_eq!(r.row().len(), RunRecord::COLUMNS.len());
    }
}
