//! Std companion to `i2i-core`: file formats, configuration, the experiment
//! grid, remote chat-completion ports, the HTTP server, and the `i2i` CLI.

pub mod cli;
pub mod config;
pub mod grid;
pub mod index_file;
pub mod ingest;
pub mod manifest;
pub mod model_io;
pub mod remote;
pub mod report;
pub mod runner;
pub mod server;
