//! Experiment harness for `roadknn`: index builds, object workloads, timed
//! query suites with CSV output, and oracle verification.

pub mod record;
pub mod run;
pub mod spec;
pub mod verify;

pub use record::{BuildRecord, RunRecord};
pub use run::{HarnessError, Mismatch};
pub use spec::{Dataset, ExperimentSpec, GraphSource, Workload};
