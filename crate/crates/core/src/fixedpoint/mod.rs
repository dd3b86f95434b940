//! Fixed-point fractions and fixed-width multi-precision integers.

mod mpint;
mod ufrac;

pub use mpint::{MpInt, DEFAULT_LIMBS};
pub use ufrac::{frac_add_mod1, frac_div, frac_sub_mod1, DivisionMode, FracWidth, UFrac};
