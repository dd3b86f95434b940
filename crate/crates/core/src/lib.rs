//! Search for hard-to-round cases of elementary functions.
//!
//! A binade of floating-point arguments is cut into domains, `f` is replaced
//! on each domain by an integer polynomial, and a continued-fraction lower
//! bound on `{b - a·x}` rules out most domains without visiting their points.

pub mod contfrac;
pub mod divergence;
pub mod error;
pub mod fixedpoint;
pub mod fpmodel;
pub mod function;
pub mod interval;
pub mod lowerbound;
pub mod oracle;
pub mod pipeline;
pub mod polygen;

pub use error::{Error, Result};
