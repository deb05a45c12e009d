//! Weyl functions of symmetric operators, their Nevanlinna and Stieltjes
//! classes, and regularity certificates for couplings of two nonnegative
//! operators in a Kreĭn space.

// `!(x > 0.0)` guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod coupling;
pub mod error;
pub mod mobius;
pub mod nevanlinna;
pub mod ode;
pub mod pipeline;
pub mod properties;
pub mod quad;
pub mod rkhs;
pub mod sl_weyl;
pub mod sweep;

pub use error::{Error, Result};
