//! Explicit optimal locally repairable codes of minimum distance 5 and length
//! `(q-1)^2` over GF(q), built as Cartesian evaluation codes on
//! `F_q* × F_q*`.
//!
//! - [`field`]: GF(p^m) arithmetic.
//! - [`matrix`]: dense linear algebra over a field.
//! - [`construct`]: monomial basis, evaluation domain, generator and parity
//!   check matrices, interpolation.
//! - [`codec`]: encoding, local repair, erasure and error decoding.
//! - [`verify`]: machine checks of distance, locality, the rank lemma and
//!   the bounds.
//! - [`cli`]: file formats and the command-line front end.

pub mod cli;
pub mod codec;
pub mod construct;
pub mod field;
pub mod matrix;
pub mod simulate;
pub mod verify;

pub use construct::{CodeParams, LrcCode};
pub use field::{Fe, Field, FieldSpec};
pub use matrix::Matrix;
