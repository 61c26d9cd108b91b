//! Shared fixtures for the optimizer benchmarks.

use lipcert::geometry::MidpointGrid;
use lipcert::registry::{lookup, RegistryEntry};
use lipcert::{Domain, Point};

pub fn entry(label: &str) -> RegistryEntry {
    lookup(label, 1.0).expect("registry label")
}

/// Midpoint grid of the unit cube, as used by the complexity estimators.
pub fn cube_grid(dim: usize, step: f64) -> Vec<Point> {
    MidpointGrid::new(&Domain::unit_cube(dim), step, 1 << 22)
        .expect("grid fits")
        .points
}
