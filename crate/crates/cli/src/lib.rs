//! Library side of the `rotsym` command-line tool: CSV ingestion, kernel
//! density summaries and the command implementations.

pub mod commands;
pub mod describe;
pub mod ingest;
