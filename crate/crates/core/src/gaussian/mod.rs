//! Gaussian states: preparation, passive optics, loss and marginals.

mod source;
mod state;

pub use source::{check_collisions, idler_count, prepare, SourceKind, SourceSpec};
pub use state::{GaussianState, ModeLabel};
