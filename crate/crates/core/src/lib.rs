//! Ising-model toolkit: instance generators for several coupling-graph
//! families, spectral simplicity analysis, Hopfield-Tank analogue dynamics,
//! exact solvers, and the experiment harness driving them.

pub mod emit;
pub mod error;
pub mod exact;
pub mod experiment;
pub mod generate;
pub mod hopfield;
pub mod instance;
pub mod planar;
pub mod seed;
pub mod spectral;

pub use error::{Error, Result};
pub use instance::{Adjacency, Edge, IsingInstance, Meta, SpinConfig};
