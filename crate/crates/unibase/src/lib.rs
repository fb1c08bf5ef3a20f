#![forbid(unsafe_code)]

//! Exact-arithmetic toolkit for unique `q`-expansions over `{0, .., M}`.

pub mod digits;
pub mod error;
pub mod evalroot;
pub mod parry;

pub use error::{Error, Result};
