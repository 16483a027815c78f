//! Config files, distribution files and the command line.

pub mod cli;
pub mod config;
pub mod output;

pub use config::RunConfig;
pub use output::{OutputDoc, Payload};
