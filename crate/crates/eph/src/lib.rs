//! Command-line front end: configuration, subcommands, acceptance
//! experiments and output bookkeeping.

pub mod commands;
pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
