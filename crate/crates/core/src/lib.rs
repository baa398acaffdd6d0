//! Checkerboard incircular nets.
//!
//! Oriented lines of the plane are points `(v, w, d)` of the Blaschke
//! cylinder `v^2 + w^2 = 1`; oriented circles are planes. A checkerboard
//! IC-net is a grid of lines in which every second quadrilateral has a
//! circle in oriented contact with its four sides. The nets are produced
//! from a pencil of quadrics containing the cylinder: consecutive lines of
//! a family are joined by generators of the pencil's hyperboloids.
//!
//! Modules, bottom-up:
//!
//! - [`elliptic`]: Jacobi functions, the quarter period and the identities
//!   the closed-form nets rely on.
//! - [`laguerre`]: oriented lines and circles, contact, incircles, and
//!   Laguerre transformations.
//! - [`pencil`]: quadric and conic forms, pencil classification and
//!   normalization to the confocal form.
//! - [`confocal`]: explicit elliptic and hyperbolic nets, intersection
//!   points, circle centres, discrete confocal coordinates.
//! - [`dynamics`]: the symmetric QRT map and the biquadratic recurrence
//!   behind generalized nets.
//! - [`net`]: the generic stepper, net assembly, incircle filling and
//!   verification.
//!
//! Cell-level work in [`net`] runs on rayon when the `parallel` feature is
//! enabled (the default); every entry point also takes an [`Execution`] so
//! the sequential path stays available for comparison.

// Negated comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod confocal;
pub mod dynamics;
pub mod elliptic;
pub mod exec;
pub mod laguerre;
pub mod net;
pub mod pencil;

pub use exec::Execution;
pub use laguerre::{OrientedCircle, OrientedLine};
