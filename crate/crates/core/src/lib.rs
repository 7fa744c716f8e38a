//! Plane forests with a prescribed degree sequence: lattice-path codecs, an
//! exact uniform sampler, simulation of the Brownian limit objects, and
//! Monte Carlo checks of the forest limit laws.
//!
//! Module overview:
//! - [`degseq`]: degree sequences, `d(s)`, empirical and truncated moments.
//! - [`lattice`]: lattice bridges, first-passage bridges, cyclic shifts,
//!   coding walks.
//! - [`codec`]: plane trees/forests and the walk bijections; exact counting
//!   and enumeration.
//! - [`sampler`]: uniform marked cyclic forests and plane forests.
//! - [`realtree`]: coding pseudometrics, tree metrics, brute-force GH/GHP.
//! - [`limit`]: Brownian paths, reflection, ranked excursions, the
//!   first-passage law.
//! - [`stats`]: KS and chi-square helpers.
//! - [`verify`]: experiment runners producing [`verify::ExperimentReport`]s.
//!
//! All randomness comes from [`rng`] substreams, so every result is a pure
//! function of its inputs and seed.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod codec;
pub mod degseq;
pub mod error;
pub mod lattice;
pub mod limit;
pub mod realtree;
pub mod rng;
pub mod sampler;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
