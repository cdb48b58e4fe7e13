//! Subspace clustering with functional-link neural network self-representation.
//!
//! The pipeline is: scale (and optionally PCA-reduce) the data, build a k-nn
//! Laplacian, learn a self-representation `Z` with [`models::fit_flnnsc`] or
//! [`models::fit_ccsc`], turn `Z` into an affinity graph and cluster it with
//! [`spectral::spectral_cluster`], then score the labels with [`metrics`].

pub mod data;
pub mod error;
pub mod flnn;
pub mod graph;
pub mod linalg;
pub mod metrics;
pub mod models;
pub mod spectral;

pub use error::{Error, Result};
pub use linalg::{LinalgError, Matrix};
