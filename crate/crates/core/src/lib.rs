//! Simulation of non-abelian holonomic gates in a driven four-level system
//! under piecewise-constant control-field noise.

pub mod error;
pub mod experiments;
pub mod fidelity;
pub mod holonomy;
pub mod linalg;
pub mod model;
pub mod noise;
pub mod propagate;
pub mod quadrature;
pub mod rng;

pub use error::{Error, Result};
