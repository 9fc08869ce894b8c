//! Experiment harness: configuration, ladders, replicated runs and CSV
//! output for the Toeplitz Monte Carlo benchmarks.

pub mod config;
pub mod ladder;
pub mod record;
pub mod runner;
pub mod verify;

pub use config::{Benchmark, ExperimentConfig, Settings};
pub use ladder::{Ladder, Relation, Triple};
pub use record::{attach_efficiency, emit_csv, format_significant, render_csv, ExperimentRecord, CSV_HEADER};
pub use runner::{run, with_threads};
pub use verify::{render_checks, verify_anova, Check};
