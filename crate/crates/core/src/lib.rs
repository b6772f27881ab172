// NaN must fail range checks, so `!(x > 0.0)` is intended.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod bound;
pub mod cli;
pub mod error;
pub mod numerics;
pub mod oracle;
pub mod potential;
pub mod scattering;
pub mod settings;
pub mod verify;

pub use error::{Error, Result};
pub use potential::{PotentialParams, SideParams, UnitSystem};
pub use settings::{BranchConvention, NuBranch, SolverSettings};
