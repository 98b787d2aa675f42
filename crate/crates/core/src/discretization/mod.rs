//! Quadrature grids, the u₀ profile, weight fields and the discrete log kernel.

pub mod grid;
pub mod kernel;
pub mod profile;
pub mod quadrature;
pub mod weight;

pub use grid::{Chart, GridConfig, OuterRule, PatchRule, QuadratureGrid};
pub use kernel::KernelOperator;
pub use profile::{u0, u0_at};
pub use weight::WeightField;
