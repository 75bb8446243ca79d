//! Elated and happy digit maps.
//!
//! The elated map sends `n` with base-b digits `a_k … a_0` to
//! `a_k · Σ a_i^e`; the happy map drops the leading factor. This crate
//! enumerates their cycles, computes heights and the smallest numbers of a
//! given height, finds shortest preimage sets, builds certificates for long
//! runs of attracted numbers, and verifies numbers with millions of digits
//! through the symbolic integers in [`towerint`].

pub mod cycles;
pub mod digitmap;
pub mod error;
pub mod heights;
pub mod preimage;
pub mod sequences;
pub mod towerint;

pub use digitmap::{Base, DigitMap, Exponent, MapKind};
pub use error::{Error, Result};
