//! Rigorous bounds on normalized point counts of abelian varieties over
//! finite fields, via auxiliary functions on totally real algebraic integers.

pub mod auxbound;
pub mod chebyshev;
pub mod config;
pub mod enumerate;
pub mod error;
pub mod exact;
pub mod interval;
pub mod lpopt;
pub mod paperlab;
pub mod weil;

pub use error::{Error, Result};
