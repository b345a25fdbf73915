//! Floquet simulation of ergodic-localized junctions in a periodically driven
//! chain of interacting bosons.

pub mod basis;
pub mod classical;
pub mod config;
pub mod error;
pub mod floquet;
pub mod graph;
pub mod jw;
pub mod linalg;
pub mod model;
pub mod output;
pub mod runner;
pub mod spectral;
pub mod spectroscopy;

pub use error::{Error, Result};
