//! Proprioceptive state/action frames for rail-mounted manipulators.
//!
//! The crate compares three ways of presenting rail joints to a chunked
//! behavior-cloning policy:
//!
//! - `abs-abs`: absolute state, absolute action targets;
//! - `eps-eps`: state and targets relative to the episode's first state;
//! - `zero-chunk`: no rail state, targets relative to the state at chunk issuance.
//!
//! Modules follow the data flow: [`episode`] holds the demonstration format
//! and normalization, [`representation`] the encoders, [`railsim`] the
//! kinematic task with its scripted expert and rubric, [`policy`] the MLP
//! chunk regressor and its training loop, and [`harness`] the dataset
//! generation, grid evaluation and reporting used by the CLI.

pub mod episode;
pub mod error;
pub mod exec;
pub mod harness;
pub mod policy;
pub mod railsim;
pub mod representation;

pub use error::{Error, Result};
pub use exec::Execution;
