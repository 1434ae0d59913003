//! Library half of the `cosim` command-line tool; the binary in `main.rs`
//! only parses arguments and maps errors to exit codes. Keeping the command
//! implementations in a library lets integration tests drive them in
//! process.

pub mod commands;

pub use commands::{
    cmd_benchmark, cmd_compare, cmd_convergence, cmd_mpc, cmd_run, cmd_validate, CliError,
    RunOptions,
};
