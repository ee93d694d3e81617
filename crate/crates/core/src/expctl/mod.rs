//! Experiment controller: configuration, sweeps, persistence and figure manifests.

pub mod config;
pub mod figures;
pub mod output;
pub mod sweep;

pub use config::{parse_config, AnalysisKind, ExperimentConfig, SignalKind, SweepParameter};
pub use figures::{figure, run_figure, Budget, Figure, FigureJob, FIGURES};
pub use output::{emit_csv, sidecar_path, CsvTable, Metadata};
pub use sweep::{run_sweep, InfoMetrics, Outcome, PidSummary, SweepRecord};

/// Overrides the worker thread count.
pub const THREADS_ENV: &str = "KERR_RES_THREADS";

/// Sizes the global rayon pool from [`THREADS_ENV`] when set.
pub fn init_thread_pool() -> crate::Result<()> {
    let Ok(text) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = text
        .trim()
        .parse()
        .map_err(|_| crate::Error::Config { path: THREADS_ENV.into(), message: format!("not a thread count: `{text}`") })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| crate::Error::Config { path: THREADS_ENV.into(), message: e.to_string() })
}
