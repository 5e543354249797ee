//! Complex word identification with normalized kernel SVMs.
//!
//! The pipeline reads CWI-format TSV splits ([`corpus`]), loads WordNet and
//! word embeddings ([`resources`]), turns each target into a sparse feature
//! vector ([`features`]), builds normalized linear or RBF Gram matrices
//! ([`kernel`]) and fits a C-SVC or ν-SVR by SMO ([`learn`]). [`metrics`]
//! scores predictions; the `cwi` binary wires it together.

pub mod corpus;
pub mod error;
pub mod features;
pub mod kernel;
pub mod learn;
pub mod metrics;
pub mod numeric;
pub mod resources;
pub mod sparse;

#[cfg(feature = "cli")]
pub mod cli;

pub use error::{Error, Result};
