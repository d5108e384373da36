//! Exact waiting times for runs of a symbol, and path sums of complete
//! m-ary trees.
//!
//! Draw symbols uniformly from an `m`-letter alphabet until `n` copies of a
//! fixed symbol appear in a row, and let `xi` be the number of draws. Then
//! `E[xi] = T` and `Var[xi] = (m - 1) * S`, where `T` is the edge count of the
//! complete m-ary tree of height `n` and `S` the sum over all ordered node
//! pairs of the length of their common path to the root. For `m = 2`, `S`
//! (and so `Var[xi]`) is OEIS A286778.
//!
//! * [`transfer`]: exact transfer-matrix distribution and matrix-form moments.
//! * [`closed_form`]: integer closed forms for `T`, `E`, `E[xi^2]`, `Var`, `S`.
//! * [`tree`]: `S` by pair enumeration, edge contributions, and depth counts.
//! * [`spectral`]: characteristic-polynomial roots and the spectral radius of `W`.
//! * [`simulator`]: reproducible Monte Carlo of the process.
//! * [`verify`]: identity sweeps across the two routes.

pub mod closed_form;
pub mod error;
pub mod matrix;
pub mod params;
pub mod rational;
pub mod simulator;
pub mod spectral;
pub mod transfer;
pub mod tree;
pub mod verify;

pub use closed_form::MomentReport;
pub use error::{Error, Result};
pub use matrix::RationalMatrix;
pub use params::Params;
pub use rational::ExactRational;
pub use simulator::SimReport;
pub use spectral::{RootOptions, RootReport};
pub use transfer::{DistributionTable, TransferEngine};
pub use tree::{TreeMethod, TreeModel, TreeReport};
pub use verify::{IdentitySweep, VerifyCell};

pub use num_bigint::BigInt;
