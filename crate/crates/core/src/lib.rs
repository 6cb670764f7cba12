//! Commutativity of cascade connections of second-order linear time-varying
//! systems.
//!
//! The crate covers four layers:
//!
//! - [`expr`]: a small expression language for time-varying coefficients with
//!   exact symbolic differentiation.
//! - [`model`]: piecewise-smooth (possibly switched) coefficients and the
//!   order-0/1/2 systems built from them.
//! - [`synthesis`] and [`conditions`]: construction of commutative partners
//!   from the constants `(k2, k1, k0)` and evaluation of the relaxed and
//!   non-relaxed commutativity conditions.
//! - [`sim`] and [`metrics`]: fixed-step RK4 simulation of both cascade
//!   orderings and the deviation measures used to confirm or refute a verdict.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line and all IO live in the companion `ltv-commute-cli` crate.

#![no_std]
// `!(a < b)` is deliberate wherever NaN must be rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod conditions;
mod error;
pub mod expr;
pub mod linalg;
pub(crate) mod math;
pub mod metrics;
pub mod model;
pub mod sim;
pub mod synthesis;

pub use error::{Error, Result};
pub use expr::{EvalError, Expression, ParseError};
pub use model::{
    CommutativityConstants, InitialState, LtvSystem, PiecewiseCoefficient, Side, SwitchingSignal,
};
