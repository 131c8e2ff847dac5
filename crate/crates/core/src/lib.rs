//! Rate-compatible Raptor-like LDPC (RL-LDPC) codes for reverse reconciliation
//! in continuous-variable QKD post-processing.
//!
//! The crate covers the whole classical pipeline:
//!
//! * [`ensemble`]: multi-edge-type degree distributions, rates and rate planning.
//! * [`matrix`]: construction of the rate-0.02 base parity-check matrix,
//!   puncturing/extension, statistics and alist I/O.
//! * [`reconcile`]: eight-dimensional multidimensional reconciliation.
//! * [`decoder`]: flooding sum-product decoding towards a target syndrome.
//! * [`channel`]: Gaussian source, AWGN channel, SNR estimation and the
//!   fibre-distance SNR model.
//! * [`keyrate`]: finite-size secret key rate.
//! * [`sim`]: the seeded end-to-end frame-error-rate pipeline.
//! * [`cli`]: the command-line front end used by the `rlldpc` binary.
//!
//! With the default `parallel` feature, batch decoding and Monte Carlo sweeps
//! run frames on the rayon thread pool. Results are bit-identical to the
//! sequential path, which is always available through the `*_sequential`
//! entry points.

pub mod channel;
pub mod cli;
pub mod decoder;
pub mod ensemble;
mod error;
pub mod keyrate;
pub mod matrix;
mod par;
pub mod privacy;
pub mod reconcile;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
