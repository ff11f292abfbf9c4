//! Library surface of the command-line crate: configuration loading and the
//! pipeline stages, shared by the binary and by integration tests.

pub mod config;
pub mod pipeline;
