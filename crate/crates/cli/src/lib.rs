//! Command line front end and JSON game service for `evasilab`.

pub mod commands;
pub mod server;

pub use commands::{run, Cli};
