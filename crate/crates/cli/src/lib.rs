//! Command-line driver: scenario files in, comma-separated tables out.

pub mod cli;
pub mod commands;
pub mod error;
pub mod scenario;
pub mod table;

pub use cli::run;
