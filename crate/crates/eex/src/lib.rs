//! File formats, checkpoints, and the `eex` command line on top of
//! [`eex_core`].

pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod io;
pub mod pipeline;
pub mod report;
pub mod synthetic;

pub use eex_core;
