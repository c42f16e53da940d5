//! Estimating yearly technology improvement rates for hybrid corn from
//! patent records, patent-reported yield trials and state field tests.
//!
//! Three independent estimates are supported: exponential fits to yield
//! series, a regression on citation timing (K1), and a regression on
//! citation-network position (K2).

pub mod citation;
pub mod cli;
pub mod constants;
pub mod data;
pub mod error;
pub mod network;
pub mod rank;
pub mod regression;
pub mod stats;
pub mod synthetic;
pub mod title;
pub mod trend;
pub mod yields;

pub use error::{Error, Result};
