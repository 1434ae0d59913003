//! Co-simulation and predictive-control engine for multi-source energy plants.
//!
//! The crate is organised around a small set of subsystems:
//!
//! - [`time`] — exact integer time bookkeeping, time-vectors and CSV I/O;
//! - [`zone`] — the shared exchange zone through which modules communicate;
//! - [`engine`] — the multi-rate explicit co-simulation master;
//! - [`logic`] — the block-diagram rule-based-control engine;
//! - [`milp`] — MILP modeller, bounded-variable simplex and branch-and-bound;
//! - [`mpc`] — rolling-horizon predictive-control driver;
//! - [`plants`] — district-heating plant models, formulators and baselines;
//! - [`scenario`] — scenario files tying everything together.

pub mod engine;
pub mod logic;
pub mod milp;
pub mod mpc;
pub mod plants;
pub mod scenario;
pub mod time;
pub mod zone;
