//! Saturation (τ-closure) and weak/strong behavioural equivalence for finite
//! transition systems with unobservable moves.
//!
//! Systems are finite-support weight matrices `X -> W^(A_τ × Y)` over an
//! ω-continuous positively ordered semiring `W` (boolean, arithmetic `[0,∞]`,
//! `ℕ ∪ {∞}`, tropical), composed in the Kleisli style where a label algebra
//! decides how consecutive moves concatenate. Saturation is the least solution
//! of `x = f ∨ x ∘ α`; weak bisimilarity is partition refinement against the
//! saturated system. A separate engine covers Segala-style systems whose rows
//! are finitely generated convex sets of weight functions, in exact rational
//! arithmetic throughout.

pub mod bisim;
pub mod cli;
pub mod error;
pub mod saturation;
pub mod segala;
pub mod semiring;
pub mod wlts;

pub use error::Error;

/// Crate result alias.
pub type Result<T> = std::result::Result<T, Error>;
