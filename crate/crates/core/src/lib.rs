//! Branching random walks in random space-time environments and their
//! directed polymers.
//!
//! - [`envmodel`]: offspring laws, environment laws, thinning, the lazy
//!   i.i.d. environment.
//! - [`particles`]: the coupled particle engine with truncation.
//! - [`polymer`]: exact partition functions and free-energy estimates.
//! - [`renorm`]: diamonds, the block event and orthant/face statistics.
//! - [`experiments`]: Monte Carlo estimators, sweeps, FKG tests, diagnostics.
//! - [`config`]: run configuration files.

pub mod config;
pub mod envmodel;
pub mod error;
pub mod experiments;
pub mod lattice;
pub mod particles;
pub mod polymer;
pub mod renorm;
pub mod rng;
pub mod stats;

pub use envmodel::{
    validate, Dichotomy, Environment, EnvironmentLaw, ExplicitEnvironment, OffspringLaw,
    QuenchedEnvironment, ValidationReport,
};
pub use error::{Error, Result};
pub use lattice::Site;
pub use particles::{Configuration, RunSpec, Trajectory, TruncationBox};
