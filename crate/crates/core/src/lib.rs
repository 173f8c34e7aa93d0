//! Grassmannian subspace packings for convolutional kernel initialization.
//!
//! - [`grassmann`]: subspaces, principal angles, chordal and Fubini–Study distances.
//! - [`packing`]: max-min packing search and Rankin bounds.
//! - [`codebook_io`]: codebook files and convolutional kernel export.
//! - [`analysis`]: per-kernel statistics and distance spectra.

// `!(x > y)` is used deliberately so that NaN takes the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod codebook_io;
pub mod error;
pub mod grassmann;
pub mod packing;

pub use error::{Error, Result};
pub use grassmann::{distance, pairwise_distances, principal_angles, Metric, PrincipalAngles, Subspace};
pub use packing::{
    generalized_rankin_bound, optimize, random_codebook, rankin_bound, refine, Codebook,
    PackingProblem,
};
