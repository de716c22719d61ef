//! Percolation clusters on perfect binary trees, read as prefix codes.
//!
//! Each edge of a perfect binary tree is open with probability `p`. The open
//! cluster containing the root is a Bienaymé-Galton-Watson tree with offspring
//! law `{q², 2pq, p²}`, and its leaves form an instantaneous binary code
//! (left turn = `0`, right turn = `1`) weighted by the Bernoulli measure `pⁿ`.
//!
//! The crate is split by concern:
//!
//! * [`analytic`]: closed forms (generating functions, moments, extinction,
//!   expected entropy and codeword length).
//! * [`percolate`]: seeded cluster sampling and per-generation tallies.
//! * [`codec`]: codebook extraction, Kraft sums, encode/decode.
//! * [`infomeasure`]: per-configuration normalization, entropy and length.
//! * [`oracle`]: exact distributions by polynomial composition and brute
//!   force enumeration.
//! * [`ensemble`]: parallel, reproducible Monte Carlo ensembles and sweeps.
//! * [`cli`]: the `treecode` command line.

pub mod analytic;
pub mod cli;
pub mod codec;
pub mod dump;
pub mod ensemble;
mod error;
#[cfg(test)]
mod fixtures;
pub mod infomeasure;
pub mod oracle;
pub mod percolate;

pub use analytic::{ModelParams, MomentPair};
pub use codec::{BitString, CodeBook};
pub use ensemble::{EnsembleConfig, EnsembleStats};
pub use error::{DecodeError, Error, Result};
pub use infomeasure::ConfigMeasures;
pub use percolate::{Cluster, GenerationTally};
