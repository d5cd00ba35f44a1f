//! IO, configuration, reporting and the Monte Carlo study engine sitting on
//! top of `mesinar-core`. The `mesinar` binary dispatches into this crate.

pub mod config;
pub mod describe;
pub mod error;
pub mod mcstudy;
pub mod report;
pub mod series_io;

pub use error::CliError;
