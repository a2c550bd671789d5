//! Library surface of the command-line runner, kept separate from the
//! binary so integration tests can drive sweeps in-process.

pub mod config;
pub mod manifest;
pub mod runner;
