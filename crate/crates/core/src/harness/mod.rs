//! Dataset generation, training, grid evaluation and reporting.

mod aggregate;
mod config;
mod dataset;
mod grid;
mod report;
mod run;

pub use aggregate::{aggregate, ReportTable, SplitStats, StrategyRow};
pub use config::{DatasetConfig, EvalConfig, ExperimentConfig, HaltPolicy};
pub use dataset::{gen_dataset, sample_start, DemoStart};
pub use grid::{evaluate_grid, run_grid, EvalRecord, GridCell, GridKind, GridSpec};
pub use report::{read_records, write_records, write_report, write_tables, render_chart};
pub use run::{train_strategy, TrainedStrategy};

/// Mix `parts` into `base` (SplitMix64 finalizer per part) so that every
/// sub-stream gets an independent, reproducible seed.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mut z = base;
    for &p in parts {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(p.wrapping_mul(0xbf58_476d_1ce4_e5b9));
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
    }
    z
}
