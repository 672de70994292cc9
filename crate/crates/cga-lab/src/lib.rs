//! A desk-scale simulation and verification laboratory for the compact
//! genetic algorithm (cGA) on OneMax and jump functions.
//!
//! The crate provides:
//!
//! * an exact-grid frequency model and the cGA iteration ([`frequency`],
//!   [`engine`]);
//! * the benchmark objectives ([`objective`]);
//! * exact distribution oracles for small instances ([`oracle`]);
//! * potential functions and one-step drift probes ([`potential`]);
//! * one executable check per analysed claim ([`verify`]);
//! * experiment orchestration, CSV persistence and the CLI ([`experiment`],
//!   [`cli`]).

pub mod cli;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod frequency;
pub mod objective;
pub mod oracle;
pub mod potential;
pub mod rng;
pub mod verify;

pub use error::{LabError, Result};
pub use frequency::{BitString, BoundaryMode, FrequencyVector, GridSpec};
pub use objective::Objective;
