//! Simulation, metering and crossing-sequence analysis for one-tape
//! off-line Turing machines, plus compiled unary recognizers and the
//! number-theoretic oracles used to check them.

pub mod catalog;
pub mod crossing;
pub mod exec;
pub mod format;
pub mod fuzz;
pub mod gadget;
pub mod machine;
pub mod metering;
pub mod nfa;
pub mod oracles;

pub use exec::{
    accepts, enumerate_computations, initial_configuration, run_deterministic, run_observed, run_scripted, successors,
    Acceptance, Computations, Configuration, Enumeration, Exhaustion, GuessScript, Outcome, ReplayError, RunError,
    RunSummary, StepView, Trace,
};
pub use format::{parse_machine, write_machine, FormatError};
pub use machine::{
    validate_machine, Halt, MachineBuilder, MachineParts, MachineSpec, Move, StateId, SymbolId, Transition, Violation,
};
