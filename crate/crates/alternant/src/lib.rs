//! Command line tools, file formats and reference solvers built on
//! `alternant-core`.

pub mod cli;
pub mod io;
pub mod oracle;
pub mod report;

pub use cli::{run, RunConfig};
