//! Fractional-order control toolkit.
//!
//! Closed loops built from a fractional plant
//! `1 / (a2 s^alpha + a1 s^beta + a0)` and either a `PD^delta`
//! (`K + Td s^delta`) or a `PI^lambda` (`K + Ti s^-lambda`) controller.
//!
//! - [`glcalc`]: Grünwald–Letnikov coefficients and sampled fractional derivatives.
//! - [`model`]: plants, controllers, state-space models, characteristic polynomials.
//! - [`simulate`]: Euler state-space solver and a direct GL solver of the scalar loop equation.
//! - [`charpoly`]: principal-branch evaluation, root finding and stability classification.
//! - [`design`]: pole-placement synthesis of `PD^delta`, integer PD and `PI^lambda` controllers.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod charpoly;
pub mod design;
mod error;
pub mod glcalc;
pub mod model;
pub mod simulate;

pub use error::{Error, Result};

pub use num_complex::Complex64;
