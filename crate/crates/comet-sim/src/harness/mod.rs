//! Closed-loop simulation, benchmark metrics, deterministic batch trials,
//! and result export.

pub mod bench;
pub mod corridor;
pub mod exec;
pub mod metrics;
pub mod output;
pub mod plot;
pub mod sim;

pub use bench::{run_benchmark, BatchReport, BenchConfig, CellStats};
pub use corridor::{corridor_scenario, CorridorConfig};
pub use exec::ExecMode;
pub use metrics::{metric_avg_deviation, metric_freezing_rate, metric_normalized_path_length};
pub use sim::{run_trial, StepRecord, TrialResult};
