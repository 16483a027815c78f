//! Truncated Fock-space reference simulator.
//!
//! Slow and exact up to the photon-number cutoff; used to cross-check the
//! Gaussian engine on small walks.

mod basis;
mod decompose;
mod oracle;
mod permanent;
mod quadrature;
mod state;

pub use basis::{compositions, sector_dim, Ladder, Occupation};
pub use decompose::{input_decompose, input_decompose_with, source_modes, DecomposeOptions};
pub use oracle::{oracle_pattern_prob, FockOracle, LabelSets, OracleOptions, OracleSetup};
pub use permanent::{permanent, permanent_multiset};
pub use quadrature::gauss_hermite;
pub use state::{
    evolve, evolve_by_permanents, transition_amplitude, FockState, MixedFockState, DEFAULT_LEAK_BOUND,
};
