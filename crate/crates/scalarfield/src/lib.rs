//! Variational solver and verification harness for the nonlinear scalar field
//! equation −Δu = g(u) on ℝᴺ under Berestycki–Lions conditions.
//!
//! Least-energy radial and nonradial solutions are computed by minimizing the
//! action on the Pohozaev constraint in symmetry-reduced coordinates. The
//! crate also ships an independent radial shooting oracle, a constructive
//! profile-decomposition engine for bounded sequences with Lions-type
//! vanishing diagnostics, and a batch CLI (`solve`, `decompose`, `oracle`,
//! `verify`, `sweep`).
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod cli;
pub mod field;
pub mod functionals;
pub mod grid;
pub mod interp1d;
pub mod nonlinearity;
pub mod oracle;
pub mod profiles;
pub mod solver;
pub mod symmetry;

pub use field::Field;
pub use grid::{ReducedGrid, SectorKind, SymmetrySector};
pub use nonlinearity::NonlinearitySpec;
