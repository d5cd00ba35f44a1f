//! Core library for a signed integer-valued autoregressive process of order
//! one, built from a Pegram mixture of extended binomial thinning and Skellam
//! innovations (MESINAR(1)).
//!
//! The crate is organised in four layers:
//!
//! * [`specfun`]: log-space modified Bessel functions and the regularized
//!   confluent hypergeometric function ₀F̃₁, the numeric substrate of every
//!   probability mass function here.
//! * [`dist`]: Skellam, extended binomial and Bessel distributions with
//!   exact samplers, plus the extended binomial thinning operator.
//! * [`model`]: the MESINAR(1) transition kernel, simulation, conditional
//!   and stationary moments, the numerical stationary distribution, and the
//!   additive PDINAR(1) comparator kernel.
//! * [`estimate`]: conditional maximum likelihood with analytic scores,
//!   modified Yule–Walker estimation, observed information and standard
//!   errors, and information criteria.
//!
//! Everything is `no_std`-compatible (with `alloc`); disable the default
//! `std` feature for embedded use. All functions are pure except the
//! samplers, which mutate only the random stream handed to them.

#![cfg_attr(not(feature = "std"), no_std)]
// Validation deliberately uses the negated form `!(x >= 0.0)` so that NaN
// fails the check along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod dist;
pub mod error;
pub mod estimate;
pub mod model;
pub mod specfun;

pub use error::Error;
