//! Numerics for transmitting a Cartesian reference frame with `N` spin-½
//! particles and for objectifying it among several observers.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is pure
//! computation; file formats, the command line and threading live in the
//! `refobj` companion crate.
//!
//! Module map:
//!
//! * [`su2`]: group elements, the covering map onto rotations, Haar
//!   quadrature and Haar sampling.
//! * [`encoding`]: the optimal encoding coefficients, the tridiagonal
//!   eigensystem behind them, irrep multiplicities and `‖B‖²`.
//! * [`likelihood`]: the decoding density `p(θ)`, sampling of decoded frames
//!   and the transmission error.
//! * [`agreement`]: priors, multi-observer rounds, covariant-agreement
//!   metrics and delta-convergence probes.
//! * [`disturbance`]: the constant λ, finite-`N` fidelity and trace-distance
//!   bounds.
//! * [`stats`]: sample summaries and Kolmogorov–Smirnov statistics.
//! * [`oracle`]: brute-force state vectors in the `2^N` product space for
//!   `N ≤ 6`.
#![no_std]
// Whenever std is in the crate graph its inherent float methods shadow
// `num_traits::Float`.
#![allow(unused_imports)]
// NaN must fail validation, hence `!(x > 0.0)` style guards.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod agreement;
pub mod disturbance;
pub mod encoding;
mod error;
pub mod likelihood;
pub mod oracle;
pub mod quadrature;
pub mod rng;
pub mod stats;
pub mod su2;

pub use error::{Error, Result};
