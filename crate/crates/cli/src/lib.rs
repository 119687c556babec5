//! Library side of the `texcollect` command-line tool.

pub mod commands;
pub mod config;

pub use commands::{
    cmd_classify, cmd_crop, cmd_curate, cmd_extract, cmd_fisher, run_classify, run_curate,
    run_fisher, Outcome,
};
pub use config::{Overrides, RunConfig};
