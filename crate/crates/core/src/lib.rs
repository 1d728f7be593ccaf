//! Spectral computations on wreath products and random Schrödinger operators.
//!
//! The convolution operator `M = L_{m̂_Γ + m̂_Λ}` on `Λ ≀ Γ` and the random
//! operator `H(ω) = L_{m_Γ} + V(ω)` on `Γ`, with i.i.d. potentials following
//! the spectral measure of `L_{m_Λ}`, share their averaged spectral measure.
//! This crate computes both sides exactly or numerically:
//!
//! - [`group`]: normal forms for `Z`, `Z^d`, free groups, the Heisenberg
//!   group, `Z/n`, and wreath products of these.
//! - [`measure`]: finitely supported measures and the wreath measure.
//! - [`walk`]: exact return moments, the annealed walk expansion, and a
//!   brute-force word oracle.
//! - [`schrodinger`]: truncated operators, potential sampling, and density of
//!   states estimates.
//! - [`finite`]: matrix-level unitary equivalence for finite groups.
//! - [`green`]: resolvent identities, Wegner bound probing, Parseval checks.
//! - [`lifshitz`]: heat kernel inequalities and band-edge diagnostics.

pub mod error;
pub mod finite;
pub mod green;
pub mod group;
pub mod lifshitz;
pub mod measure;
pub mod rng;
pub mod schrodinger;
pub mod walk;
pub mod weight;

pub use error::{Error, Result};
pub use group::{word_length, Group, GroupElement, GroupSpec, LampConfig, WreathElement, WreathProduct};
pub use measure::{wreath_measure, FiniteMeasure};
pub use walk::{
    annealed_moments, lamp_moment_table, plancherel_moments, word_enumeration_oracle, LampMomentTable, MomentSequence,
};
pub use weight::Weight;
