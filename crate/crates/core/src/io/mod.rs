//! Configuration, initial data and output files.

pub mod config;
pub mod initial;
pub mod output;
