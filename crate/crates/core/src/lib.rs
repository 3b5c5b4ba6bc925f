//! Minimax (uniform-norm) approximation driven by alternating sequences.
//!
//! The crate computes best or near-best approximations of a continuous
//! function on a closed interval by polynomials and by polynomial splines
//! with fixed or free knots. Every fit carries a verifiable certificate:
//! a β-alternating sequence for polynomials, or a counting condition on
//! such a sequence for splines.
//!
//! It is `no_std` and only needs `alloc`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

mod error;
mod search;

pub mod alternance;
pub mod poly_approx;
pub mod polynomial;
pub mod scalar;
pub mod spline;
pub mod spline_fixed;
pub mod spline_free;

pub use alternance::{
    build_beta_alternance, build_beta_alternance_with, count_k, min_polynomial_deviation_check,
    AlternatingSequence, BetaAlternatingPoints, Sign,
};
pub use error::{Error, Result};
pub use poly_approx::{remez_fit, FitParams, FitReport, FitStatus};
pub use polynomial::Polynomial;
pub use scalar::{
    eval, extrema, inverse_modulus, recentre, Builtin, EvaluableFunction,
    ExtremumEstimate, Function, Interval, Sampling, Scan,
};
pub use spline::{spline_eval, KnotVector, Spline};
pub use spline_fixed::{fixed_knot_fit, CsCertificate, IntermediaryOutcome, SplineFitReport};
pub use spline_free::{check_w_minimality, descend, FreeKnotConfig, FreeKnotParams, Verdict};
