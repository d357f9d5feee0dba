//! Benchmark harness behind the `bench` binary: seeded trial suites,
//! success/completion tables, and random-search weight tuning.

pub mod suite;
pub mod tune;

pub use suite::{
    run_benchmark, BenchmarkSuite, ControllerMode, EntryOverrides, ResultRow, ResultTable,
    RunOptions, SuiteEntry,
};
pub use tune::{tune_weights, TuneOptions, TunePoint};
