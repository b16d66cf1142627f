//! Command-line front end: panel files, run configuration, reports and the
//! `test`, `simulate`, `size`, `power` and `clt` subcommands.

pub mod commands;
pub mod config;
pub mod panel_io;
pub mod report;

pub use commands::{run, Cli};
pub use config::RunConfig;
pub use panel_io::{emit, ingest, ingest_reader, IngestError};
