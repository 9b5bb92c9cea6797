//! Shared fixtures for the kernel benchmarks.

use std::sync::Arc;

use wpme_core::{GridFunction, ProblemParams, RadialGrid, WeightSpec};

pub fn workhorse() -> ProblemParams {
    ProblemParams::new(3, 2.0, WeightSpec::pure_power(1.0).unwrap()).unwrap()
}

pub fn solver_grid(params: &ProblemParams) -> Arc<RadialGrid> {
    RadialGrid::build(params, 50.0, 400, 1.0).unwrap()
}

pub fn far_grid(params: &ProblemParams) -> Arc<RadialGrid> {
    RadialGrid::build(params, 1e3, 800, 1.02).unwrap()
}

pub fn norm_grid(params: &ProblemParams) -> Arc<RadialGrid> {
    RadialGrid::build(params, 256.0, 2000, 1.004).unwrap()
}

pub fn bumpy(grid: &Arc<RadialGrid>) -> GridFunction {
    GridFunction::from_fn(grid, |y| (1.0 + y).ln() * (0.5 * y).sin().abs() + (8.0 - y).max(0.0) / 8.0)
}
