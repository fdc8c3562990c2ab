//! Incremental pressure-correction finite element solvers for the
//! incompressible Navier–Stokes equations on uniform structured grids.
//!
//! Three time-stepping variants share one set of pre-assembled Q1 operators:
//!
//! * **implicit**: backward Euler momentum step with linearised convection,
//! * **explicit**: forward Euler momentum step, consistent mass inverse,
//! * **explicit\***: forward Euler with the interpolated convective term
//!   `I_h(u ⊗ u)` and a lumped mass, i.e. sparse matrix-vector products only.
//!
//! Each step is followed by a pure-Neumann pressure-increment Poisson solve
//! and a velocity correction. The [`harness`] module drives manufactured
//! solution studies and writes CSV reports.
//!
//! The numerical core is generic over the scalar type ([`Real`], implemented
//! for `f32` and `f64`); the aliases below fix it to `f64`.

pub mod error;
pub mod fem;
pub mod grid;
pub mod harness;
pub mod krylov;
pub mod metrics;
pub mod mms;
pub mod operators;
pub mod real;
pub mod scheme;
pub mod sparse;
pub mod tensor;

pub use error::{Error, Result};
pub use real::Real;

pub type StructuredGrid = grid::StructuredGrid<f64>;
pub type CsrMatrix = sparse::CsrMatrix<f64>;
pub type NodalField = fem::NodalField<f64>;
pub type FieldVector = operators::FieldVector<f64>;
pub type OperatorSet = operators::OperatorSet<f64>;
pub type ManufacturedCase = mms::ManufacturedCase<f64>;
pub type SchemeState = scheme::SchemeState<f64>;
pub type ErrorReport = metrics::ErrorReport;

pub use krylov::{SolveReport, SolverConfig};
pub use scheme::SchemeKind;
