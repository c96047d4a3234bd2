//! Geometry of private query answering: sensitivity polytopes, Gaussian mean
//! width, and the Gaussian / projection mechanisms for the mean point problem.
//!
//! The crate is organized around four pieces:
//!
//! - [`geometry`]: symmetric convex bodies (explicit vertex hulls and the
//!   analytic ball / scaled cube / cross-polytope families), support
//!   functions, Minkowski gauges, Monte Carlo width estimators, and Euclidean
//!   projection via conditional gradient.
//! - [`workload`]: linear query workloads over a finite universe, their
//!   sensitivity polytopes, and the signed Caratheodory machinery used by the
//!   mean-point/query-release reduction.
//! - [`mechanisms`]: the Gaussian and projection mechanisms, both reduction
//!   directions, and a seeded Monte Carlo harness for empirical error and
//!   sample complexity.
//! - [`analysis`]: bound-formula calculators (all asymptotic constants fixed
//!   to 1), regime classification, and Gelfand-width probes at small
//!   dimension.
//!
//! All randomized operations take an explicit seed and are deterministic
//! functions of their inputs and that seed.

pub mod analysis;
pub mod error;
pub mod geometry;
pub mod mechanisms;
pub mod rng;
pub mod simplex;
pub mod workload;

pub use error::{Error, Result};
pub use geometry::{BodyKind, ConvexBody, SubspaceBasis, WidthEstimate};
pub use mechanisms::{noise_multiplier, MechanismResult, PrivacyParams};
pub use workload::{Database, SignedCombination, Workload};
