//! Rule-based-control block engine.
//!
//! A controller is a block diagram: a directed dependency graph linking the
//! inputs and outputs of generic blocks (PID, switches, relays, delays ...).
//! Compilation removes the arcs leaving unit-delay blocks and topologically
//! sorts the remainder into a fixed task order; any cycle without a delay
//! block is rejected as an algebraic loop. The compiled plan is executed once
//! per step, and the whole controller can be wrapped as a co-simulation
//! module.

mod blocks;
mod graph;
mod sim;
mod text;

pub use blocks::{BlockState, BlockType, PidParams};
pub use graph::{
    compile, step, BlockDecl, Connection, ExecutionPlan, ExternalInput, ExternalOutput,
    LogicError, LogicGraph, PortRef, StepOutput,
};
pub use sim::LogicModule;
pub use text::parse_logic_model;
