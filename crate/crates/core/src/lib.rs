//! Out-of-time-order correlators of coupled, perturbed quantum cat maps.
//!
//! The crate is organised bottom-up:
//!
//! - [`torus`]: kinematics of the torus Hilbert space (position/momentum grids,
//!   coherent states, bipartite composition, partial traces, entropies).
//! - [`maps`]: classical perturbed cat maps and their quantum propagators.
//! - [`bases`]: complete Hilbert–Schmidt-orthonormal operator bases
//!   (Pauli strings, translations, reflections, Kirkwood).
//! - [`otoc`]: time series of OTOCs over a basis and the entropy identity
//!   `1 - Σ_M C_M(t) = S_L(t)`, plus chord/Wigner/Kirkwood representations.
//! - [`relevance`]: ranking of basis elements by integrated OTOC area, the
//!   relevance cutoff and phase-space footprints.
//! - [`cli`]: configuration, batch commands and artifact writers.

pub mod bases;
pub mod cli;
pub mod error;
pub mod maps;
pub mod otoc;
pub mod relevance;
pub mod torus;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
