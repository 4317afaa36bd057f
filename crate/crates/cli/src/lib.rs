//! Library side of the `unitheta` command: grammar, configuration, cache,
//! manifests and the verification suites.

pub mod cache;
pub mod cli;
pub mod commands;
pub mod config;
pub mod manifest;
pub mod suites;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Eval(#[from] unitheta_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}
