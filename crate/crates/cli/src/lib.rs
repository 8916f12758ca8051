//! File formats, the exhaustive verification oracle, command implementations
//! and the benchmark harness behind the `cellgraph` binary.

pub mod bench;
pub mod commands;
pub mod error;
pub mod formats;
pub mod oracle;

pub use error::{CliError, Result};
