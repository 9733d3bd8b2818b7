//! Balanced node configurations for saddle towers: the force map on neck
//! positions, polynomial constructions of balanced configurations, and
//! solvers and diagnostics on top of them.

pub mod config;
pub mod engine;
pub mod error;
pub mod forces;
pub mod poly;

pub use config::{Configuration, LayerResidues};
pub use error::{Error, ErrorClass, Result};
