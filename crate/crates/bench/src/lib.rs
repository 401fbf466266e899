//! Shared fixtures for the benchmarks.

use markerflow_core::preset::Preset;
use markerflow_core::{Grid, MarkerSet};

/// `cells3` markers at `β = 40` on an `n × n` grid.
pub fn cells3(n: usize) -> MarkerSet {
    Preset::Cells3
        .build(Grid::new(n).expect("power-of-two grid"), 40.0)
        .expect("preset builds")
}

#[cfg(test)]
mod tests {
    #[test]
    fn fixture_builds() {
        assert_eq!(super::cells3(32).k(), 3);
    }
}
