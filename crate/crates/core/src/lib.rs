//! # shipfc
//!
//! Data-driven ship fuel-consumption modeling from daily noon reports fused
//! with gridded ocean and atmosphere data.
//!
//! The crate is organized along the workflow:
//!
//! - [`report`]: noon-report tables to typed [`report::VoyageRecord`]s
//!   (DDM positions, local-noon timestamps, compass categories, drafts).
//! - [`grid`]: regular lat/lon/time rasters, daily averaging, nearest-cell
//!   sampling and gap repair.
//! - [`pipeline`]: the ordered cleaning/derivation/fusion steps that produce a
//!   numeric training matrix ([`pipeline::FusedDataset`]).
//! - [`models`]: ridge regression, CART random forest, ε-insensitive SVR and
//!   second-order gradient boosting, all written from scratch.
//! - [`eval`]: metrics, k-fold cross-validation, grid search and the
//!   baseline/advanced comparison tables.
//! - [`synth`]: seeded synthetic voyages with a known fuel law, used as the
//!   ground truth for end-to-end tests.
//!
//! Numerical code is generic over [`Scalar`] (`f32` and `f64`); the aliases
//! below pin the common `f64` instantiations.

pub mod config;
pub mod error;
pub mod eval;
pub mod grid;
pub mod models;
pub mod pipeline;
pub mod report;
pub mod scalar;
pub mod synth;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// `f64` design matrix.
pub type Matrix = models::DesignMatrix<f64>;
/// `f32` design matrix.
pub type Matrix32 = models::DesignMatrix<f32>;
pub type Ridge = models::RidgeModel<f64>;
pub type Tree = models::TreeModel<f64>;
pub type Forest = models::ForestModel<f64>;
pub type Svr = models::SvrModel<f64>;
pub type Boosted = models::BoostedModel<f64>;
pub type Fitted = models::FittedModel<f64>;

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
