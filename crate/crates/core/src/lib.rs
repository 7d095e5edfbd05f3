//! Local computations for Lagrangian torus fibrations in Donagi-Markman
//! normal form: period frames of a potential, Betti coordinates of sections,
//! torsion-point search, cubic-form classification and the degenerate
//! Monge-Ampère foliation checks.

pub mod betti;
pub mod cubic;
pub mod elliptic;
pub mod error;
pub mod foliation;
pub mod forms;
pub mod io;
pub mod linalg;
pub mod period;
pub mod poly;
pub mod scalar;
pub mod selftest;

pub use error::{Error, Result};
pub use forms::{contract, form_rank, CubicForm, QuadraticForm, DEFAULT_RANK_TOL};
pub use poly::MVPoly;
pub use scalar::{Complex64, GaussRat, Scalar, ScalarMode};
pub use betti::{BettiConfig, NewtonConfig, Section, TorsionHit};
pub use cubic::ClassificationReport;
pub use elliptic::{EllipticFamily, MonodromyProblem};
pub use foliation::{FiberTrace, LeafReport};
pub use period::{BaseBox, Potential};
