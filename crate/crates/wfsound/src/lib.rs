//! Soundness pipelines over workflow nets: the generalised-soundness
//! semi-decision, the structural procedure, the free-choice decision,
//! certificate checking, a benchmark harness and the command line.

pub mod bench;
pub mod cli;
pub mod decompose;
pub mod pipelines;
pub mod verdict;
pub mod verify;

pub use bench::{run_bench_suite, run_instances, suite_instances, BenchParams, BenchRow, Instance, Suite};
pub use pipelines::{
    analyze, analyze_boundedness, analyze_continuous, analyze_free_choice, analyze_generalised, analyze_k_sound,
    analyze_quasi_sound, analyze_structural, continuous_soundness, soundness_collapses, AnalysisError, AnalysisOptions,
};
pub use verdict::{Certificate, KReport, Outcome, Property, StageTiming, Verdict};
pub use verify::verify_verdict;
