//! Exact symbolic verification engine for non-local Poisson vertex
//! (super)algebras and logarithmic-vertex-algebra mode algebras.
//!
//! The crate evaluates λ-brackets on differential superpolynomials,
//! verifies the axioms (sesqui-linearity, skew-symmetry, Leibniz, Jacobi)
//! through a seven-component canonical decomposition with independent
//! iterated-expansion oracles, and realizes concrete logarithmic vertex
//! algebras together with their associated-graded brackets.

pub mod binom;
pub mod bracket;
pub mod examples;
pub mod logva;
pub mod parse;
pub mod q;
pub mod report;
pub mod series;
pub mod superpoly;
