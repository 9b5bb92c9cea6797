//! Radial finite-volume laboratory for the weighted porous medium equation
//!
//!   ρ(x) uₜ = Δ(uᵐ),   ρ(x) ~ |x|^{-γ},  γ ∈ [0, 2),  m > 1,
//!
//! on ℝ^N restricted to radial data. The crate provides the weighted norm
//! machinery on growth-class data, closed-form and shooting-constructed
//! solution families, a monotone implicit finite-volume time integrator
//! with blow-up detection, and a harness of named verification experiments.

pub mod error;
pub mod grid;
pub mod harness;
pub mod model;
pub mod norms;
pub mod profiles;
pub mod solver;

pub use error::{Error, Result};
pub use grid::{integrate_weighted, GridFunction, RadialGrid};
pub use model::{
    derive_exponents, existence_time, unit_sphere_area, weight_cell_mass, Exponents,
    ProblemParams, WeightKind, WeightSpec,
};
pub use norms::{CutoffProfile, NormReport, PhiAlpha};
pub use profiles::{Barrier, EllipticProfile, ExplicitFamily};
pub use solver::{BcValue, BoundaryCondition, Event, SolverOptions, Trajectory};
