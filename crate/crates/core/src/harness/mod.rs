//! Monte Carlo experiments: metrics, sweeps and result files.

pub mod metrics;
pub mod report;
pub mod sweep;

pub use metrics::{channel_nmse, match_paths, nmse, nmse_complex, to_db};
pub use report::{emit_results, manifest_json, manifest_path, rows_from_csv, rows_to_csv};
pub use sweep::{run_sweep, run_trial, SweepOutcome, SweepRow, SweepSpec, TrialRecord, FAMILIES};
