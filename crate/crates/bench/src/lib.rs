//! Benchmark-only crate; see `benches/`.

use rsu_trust::fuzzy::LookupGrid;

/// Inputs spread over the default grid: (dpb, si, rc).
pub fn sample_inputs() -> Vec<(f64, u8, f64)> {
    let g = LookupGrid::default();
    g.keys().into_iter().step_by(37).collect()
}
