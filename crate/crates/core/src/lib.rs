//! Multi-stage orthogonal-pilot unsourced random access over Rayleigh
//! block-fading channels with multi-antenna receivers.
//!
//! The crate is organised along the signal path:
//!
//! - [`pilots`]: Sylvester-Hadamard pilot codebook.
//! - [`polar`]: polar codes with CRC-aided list decoding.
//! - [`txchain`]: slot signal assembly, including group interleaving and
//!   sub-frame repetition.
//! - [`channel`]: Rayleigh block-fading MIMO multiple-access channel.
//! - [`rxchain`]: iterative receiver with least-squares SIC.
//! - [`analysis`]: closed-form performance predictors.
//! - [`harness`]: Monte Carlo driver and result output.
//! - [`validation`]: statistical checks shared by the acceptance suite and
//!   the `validate` CLI subcommand.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod channel;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod pilots;
pub mod polar;
pub mod rxchain;
pub mod txchain;
pub mod validation;

pub use error::{Error, Result};
pub use num_complex::Complex64;
