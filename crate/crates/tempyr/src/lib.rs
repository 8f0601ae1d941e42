//! File formats, reports, benchmarks and the command-line front end for
//! [`tempyr_core`].

pub mod bench;
pub mod cli;
pub mod error;
pub mod flo;
mod fsutil;
pub mod manifest;
pub mod png;
pub mod report;
pub mod upconvert;

pub use error::{Error, Result};
