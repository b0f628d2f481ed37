//! Simulation of a driven superconducting qubit whose control parameters
//! sweep a closed two-parameter manifold around a degeneracy point.
//!
//! The crate computes the Berry curvature of the manifold three independent
//! ways (closed form, spectral formula, and the linear response of a slowly
//! ramped trajectory), integrates it into the first Chern number to locate
//! the topological transition as the degeneracy leaves the manifold, and
//! reproduces the fidelity ripples of the equal superposition state across
//! the transition. A first-order adiabatic perturbation oracle provides
//! independent checks of the dynamics.
//!
//! Start with the runnable examples:
//!
//! ```bash
//! cargo run --release -p ripple-sim --example chern_transition
//! cargo run --release -p ripple-sim --example fidelity_ripple
//! ```
//!
//! or the CLI (`ripple-sim chern`, `ripple-sim validate`, ...), which emits
//! deterministic CSV/JSON tables.

pub mod berry;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod perturbation;
mod quad;
pub mod spin;
pub mod sweep;
pub mod validate;

pub use error::{Result, SimError};
pub use spin::DriveParams;
