//! Numerics for the semiclassical trace formula at a totally degenerate
//! critical energy level.
//!
//! The crate computes the spectral sum
//! `γ(E_c, h) = Σ φ((λ_j(h) − E_c)/h)` from eigenvalues of model operators
//! and compares it with the closed-form leading term
//! `h^{2n/k − n} Λ₀`, where
//!
//! ```text
//! Λ₀ = (1/k) ⟨φ(t + p₁(z₀)), t_±^{(2n−k)/k}⟩ (2π)^{-n} ∫_{S^{2n−1}} |𝔭_k(θ)|^{-2n/k} dθ.
//! ```
//!
//! Supporting pieces are checked independently: Taylor jets of the
//! Hamiltonian flow, the Hamilton–Jacobi generating function, and the
//! degenerate stationary-phase expansion for phases `±χ₀χ₁^k`.

// `!(x > 0.0)` comparisons also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision, clippy::type_complexity)]

pub mod acceptance;
pub mod error;
pub mod fit;
pub mod flow;
pub mod jets;
pub mod linalg;
pub mod oscint;
pub mod quad;
pub mod spectrum;
pub mod symbols;
pub mod trace;

pub use error::{Error, Result};
