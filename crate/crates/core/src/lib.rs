//! Morrey-Lorentz quasi-norms, maximal and fractional operators, and
//! atomic decompositions on exactly represented dyadic step functions.
//!
//! Every norm here is evaluated exactly (up to floating rounding) on step
//! functions; operators that produce non-step output are sampled at cell
//! centers of an evaluation grid. The [`harness`] module drives randomized
//! verification suites for the inequalities relating these quantities.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod atoms;
pub mod dyadic;
pub mod error;
pub mod harness;
pub mod lorentz;
pub mod morrey;
pub mod olsen;
pub mod operators;
pub mod quad;

pub use dyadic::{enumerate_cubes, DyadicCube, GridIndexSet, StepFunction, Window};
pub use error::{Error, Result};
pub use lorentz::{LorentzParams, RearrangementProfile};
pub use morrey::MorreyLorentzParams;

/// Left side, right side and their quotient for an inequality `lhs ≲ rhs`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatioReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

impl RatioReport {
    /// `0/0` is reported as ratio 0; a positive left side over a zero right side as `+∞`.
    pub fn new(lhs: f64, rhs: f64) -> Self {
        let ratio = if lhs == 0.0 {
            0.0
        } else if rhs == 0.0 {
            f64::INFINITY
        } else {
            lhs / rhs
        };
        Self { lhs, rhs, ratio }
    }
}
