//! Independent numerical oracles for the icnet test suites.
//!
//! Nothing in here calls into `icnet`: the oracles use plain quadrature,
//! bisection, Gaussian elimination and dense sampling so that they fail
//! differently from the library when something is wrong.

pub mod catalogue;
pub mod linalg;
pub mod quadrature;
pub mod sampling;

pub use catalogue::{golden_catalogue, GoldenConic};
pub use linalg::{det, solve};
pub use quadrature::{complete_k, incomplete_f, jacobi_by_inversion};
pub use sampling::{classify_by_sampling, sampled_base_points, SampledPoint};
