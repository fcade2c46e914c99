//! Adaptive testing over discrete Bayesian and credal networks.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: variables, point and interval tables, network validation, the
//!   model file format and the bundled question banks.
//! - [`bn`]: exact posterior inference by variable elimination.
//! - [`credal`]: lower/upper posterior probabilities in interval credal networks.
//! - [`linprog`]: a dense simplex solver and the mode-cell LP builder used to
//!   bound the conditional deviation from the mode.
//! - [`scores`]: entropy and deviation-from-the-mode scores with their
//!   conditional and credal variants.
//! - [`engine`]: the stop / pick / answer / evaluate testing loop.
//! - [`sim`]: simulated students, experiment arms and metrics export.

pub mod bn;
pub mod credal;
pub mod engine;
pub mod error;
pub mod linprog;
pub mod model;
pub mod scores;
pub mod sim;

pub use error::{Error, Result};
pub use model::{
    AnyNetwork, BayesianNetwork, CredalNetwork, IntervalPmf, Pmf, Role, VarId, Variable,
};
