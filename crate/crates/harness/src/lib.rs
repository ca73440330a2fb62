//! Command-line driver, benchmarks and the interactive session protocol.

pub mod bench;
pub mod play;
#[cfg(feature = "server")]
pub mod server;
pub mod session;
