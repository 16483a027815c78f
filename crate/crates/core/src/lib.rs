//! Simulator for multiphoton interference in a time-bin quantum walk.
//!
//! Light enters a walk of birefringent layers, each a polarization coin
//! followed by a polarization-dependent one-bin delay. Gaussian inputs
//! (attenuated coherent, thermal, two-mode squeezed vacuum, squashed pairs)
//! are propagated exactly in the covariance picture, demultiplexed by
//! lossy Kerr gates and detected by threshold detectors. A truncated
//! Fock-space simulator cross-checks every click probability on small walks.

// `!(x >= 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod detection;
pub mod error;
pub mod experiments;
pub mod fock;
pub mod gaussian;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod par;
pub mod walk;

pub use error::{Error, Result};
