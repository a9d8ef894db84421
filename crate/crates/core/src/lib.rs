//! Pricing a portfolio of products with linearly interacting demands.
//!
//! Expected demand is `a + B p` for a symmetric sensitivity matrix `B` with
//! negative, strictly dominant diagonal. The crate computes, in closed
//! form, the centralized revenue-optimal prices and the unique equilibrium
//! of the game where every product prices for itself, and quantifies the
//! revenue lost to decentralization (the price of anarchy) exactly,
//! through the spectrum of a normalized interaction matrix.
//!
//! Modules:
//!
//! - [`demand`]: demand systems and structural validation
//! - [`linalg`]: the symmetric eigen/SPD kernel everything runs on
//! - [`equilibrium`]: closed-form optimum, equilibrium, payoffs
//! - [`poa`]: efficiency-loss analysis, from the dominance bound to exact
//!   spectral values and worst-case intercepts
//! - [`instances`]: canonical market generators (uniform, star, seeded
//!   random)
//! - [`dynamics`]: best-response iteration and gradient play
//! - [`oracle`]: independent brute-force checks of every closed form
//!
//! All types are immutable after construction and every operation is a
//! pure function, so values can be shared freely across threads.

pub mod demand;
pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod instances;
pub mod linalg;
pub mod oracle;
pub mod poa;

// Matrix and vector types appear throughout the public API; re-export the
// crate so callers build against the same version.
pub use nalgebra;

pub use demand::{DemandSystem, DominanceProfile, InstanceJson};
pub use equilibrium::{EquilibriumPair, PriceVector};
pub use error::{Error, Result};
pub use poa::{PoaMatrices, PoaReport};
