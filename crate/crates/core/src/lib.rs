pub mod diagnostics;
pub mod discretization;
pub mod equation;
pub mod error;
pub mod liouville;
pub mod oracle;
pub mod problem;
pub mod solver;
pub mod toda;

pub use error::{Error, Result};
