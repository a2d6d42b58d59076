//! Big Five personality prediction from social-network behavior logs.
//!
//! The pipeline scores BFI-44 inventories into trait scores, extracts a
//! 41-slot behavior feature vector per user, discretizes trait scores into
//! low/mid/high classes with mean ± σ thresholds, and learns one C4.5
//! decision tree per trait. [`synth`] produces cohorts with planted
//! trait-behavior links so the whole chain can be exercised end to end.

pub mod c45;
pub mod cli;
pub mod discretize;
pub mod emotion;
pub mod error;
pub mod eval;
pub mod features;
pub mod inventory;
pub mod io;
pub mod synth;

pub use error::{Error, Result};
pub use inventory::Dimension;
