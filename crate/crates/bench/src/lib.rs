//! Shared fixtures for the solver benchmarks.

use debtrun_core::Grid;

/// Moderate grid: fine enough to exercise Newton, small enough to iterate.
pub fn bench_grid() -> Grid {
    Grid::new(6.0, 200, 500).expect("valid grid")
}
