//! Command-line front end: scenario configs, suite orchestration, report files.

pub mod config;
pub mod error;
pub mod fields;
pub mod report;
pub mod runner;

/// Sizes the global thread pool from `CDC_THREADS` when set.
pub fn init_threads() {
    if let Some(n) = std::env::var("CDC_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}
