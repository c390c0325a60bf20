//! Deterministic convergence classification for integral functionals
//! `∫_0^ζ f(Y_u) du` of one-dimensional diffusions, with Monte Carlo
//! machinery that checks each verdict on simulated paths.
//!
//! The pipeline is: [`coeffspec`] parses and validates a problem, [`quad`]
//! decides finiteness of the improper integrals involved, [`scale`] builds
//! the scale function, and [`classify`] turns those pieces into a
//! [`classify::ConvergenceReport`]. [`simkit`] simulates paths and compares.

pub mod classify;
pub mod coeffspec;
pub mod quad;
pub mod scale;
pub mod ser;
pub mod simkit;

pub use classify::{full_verdict, ConvergenceReport, EventVerdict};
pub use coeffspec::{parse_expr, validate_problem, Expr, Problem, StateSpace};
pub use quad::Tolerances;
