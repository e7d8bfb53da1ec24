//! Shifted-counter gadgets compiled into one-tape machines.
//!
//! A [`GadgetProgram`] is a list of phases acting on a window of cells that
//! holds binary numbers, one bit per track, least significant digit leftmost.
//! Counting phases drag the window along behind the head, so every number
//! stays next to the position it describes. [`compile`] turns a program into
//! a [`MachineSpec`] over the product alphabet described in [`cell`].

mod build;
pub mod cell;
mod control;
mod flatten;

use thiserror::Error;

use crate::exec::Configuration;
use crate::machine::{MachineSpec, StateId, SymbolId};

pub use cell::{Cell, Kind, Mark, Win};

/// What a track stores. Flag tracks are replicated on every window cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackRole {
    Counter,
    Stored,
    Flag,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrackDef {
    pub name: String,
    pub role: TrackRole,
}

/// Binary tracks of the counter window.
///
/// The input track, the origin flag and the sieve track P are part of every
/// cell and are not listed here.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TrackLayout {
    tracks: Vec<TrackDef>,
}

pub const MAX_TRACKS: usize = 8;

impl TrackLayout {
    pub fn new() -> Self {
        Self::default()
    }

    fn with(mut self, name: &str, role: TrackRole) -> Self {
        self.tracks.push(TrackDef {
            name: name.to_string(),
            role,
        });
        self
    }

    pub fn counter(self, name: &str) -> Self {
        self.with(name, TrackRole::Counter)
    }

    pub fn stored(self, name: &str) -> Self {
        self.with(name, TrackRole::Stored)
    }

    pub fn flag(self, name: &str) -> Self {
        self.with(name, TrackRole::Flag)
    }

    pub fn tracks(&self) -> &[TrackDef] {
        &self.tracks
    }

    pub fn len(&self) -> usize {
        self.tracks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tracks.is_empty()
    }

    pub fn index(&self, name: &str) -> Option<u8> {
        self.tracks.iter().position(|t| t.name == name).map(|i| i as u8)
    }

    pub(crate) fn flag_mask(&self) -> u8 {
        self.tracks
            .iter()
            .enumerate()
            .filter(|(_, t)| t.role == TrackRole::Flag)
            .fold(0, |m, (i, _)| m | 1 << i)
    }
}

/// When a counter is incremented.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tick {
    EveryCell,
    /// Once per reset of `source`; the wrap is parked on the `pending` flag
    /// track until the next pass over the window.
    OnWrapOf {
        source: String,
        pending: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counter {
    pub track: String,
    pub tick: Tick,
    /// Compare-and-reset against this track: reaching its value resets to 0.
    pub reset_at: Option<String>,
}

impl Counter {
    pub fn every_cell(track: &str) -> Self {
        Counter {
            track: track.to_string(),
            tick: Tick::EveryCell,
            reset_at: None,
        }
    }

    pub fn on_wrap_of(track: &str, source: &str, pending: &str) -> Self {
        Counter {
            track: track.to_string(),
            tick: Tick::OnWrapOf {
                source: source.to_string(),
                pending: pending.to_string(),
            },
            reset_at: None,
        }
    }

    pub fn modulo(mut self, modulus: &str) -> Self {
        self.reset_at = Some(modulus.to_string());
        self
    }
}

/// Sieve marking, applied to the position where the first counter resets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Marking {
    None,
    /// Mark with X.
    Multiples,
    /// When `flag` is set: unmarked becomes X, anything else becomes Y.
    PrimeGated {
        flag: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountFactor {
    /// Counter base; only 2 is supported.
    pub base: u32,
    pub counters: Vec<Counter>,
    pub marking: Marking,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Candidates {
    Unmarked,
    UnmarkedOrX,
}

/// Moves `target` to the first candidate position beyond its current value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NextPrimeScan {
    pub counter: String,
    pub target: String,
    pub candidates: Candidates,
    /// Set when the candidate found was unmarked.
    pub prime_flag: Option<String>,
}

/// Writes `power` = 2^s and `target` with 2^s < target < 2^(s+1), s >= 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuessBinary {
    pub power: String,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pred {
    True,
    Zero(String),
    Eq(String, String),
    PowerOfTwo(String),
    Not(Box<Pred>),
    And(Box<Pred>, Box<Pred>),
    Or(Box<Pred>, Box<Pred>),
}

impl Pred {
    pub fn zero(t: &str) -> Pred {
        Pred::Zero(t.to_string())
    }

    pub fn nonzero(t: &str) -> Pred {
        Pred::zero(t).not()
    }

    pub fn power_of_two(t: &str) -> Pred {
        Pred::PowerOfTwo(t.to_string())
    }

    pub fn eq(a: &str, b: &str) -> Pred {
        Pred::Eq(a.to_string(), b.to_string())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Pred {
        Pred::Not(Box::new(self))
    }

    pub fn and(self, other: Pred) -> Pred {
        Pred::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Pred) -> Pred {
        Pred::Or(Box::new(self), Box::new(other))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Phase {
    /// Writes constants onto the window at the origin.
    Load(Vec<(String, u64)>),
    CountFactor(CountFactor),
    NextPrimeScan(NextPrimeScan),
    /// Returns the window to the origin, zeroing tracks not in `keep`.
    ShiftBack {
        keep: Vec<String>,
    },
    /// Accepts iff the track holds a power of two, rejects otherwise.
    PowerOfTwoTest(String),
    GuessBinary(GuessBinary),
    AcceptIf(Pred),
    RejectIf(Pred),
    LoopWhile(Pred, Vec<Phase>),
}

impl Phase {
    pub fn label(&self) -> &'static str {
        match self {
            Phase::Load(_) => "Load",
            Phase::CountFactor(_) => "CountFactor",
            Phase::NextPrimeScan(_) => "NextPrimeScan",
            Phase::ShiftBack { .. } => "ShiftBack",
            Phase::PowerOfTwoTest(_) => "PowerOfTwoTest",
            Phase::GuessBinary(_) => "GuessBinary",
            Phase::AcceptIf(_) => "AcceptIf",
            Phase::RejectIf(_) => "RejectIf",
            Phase::LoopWhile(..) => "LoopWhile",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GadgetProgram {
    pub phases: Vec<Phase>,
    /// Verdict when control falls off the end of the program.
    pub otherwise_accept: bool,
}

impl GadgetProgram {
    pub fn new(phases: Vec<Phase>) -> Self {
        GadgetProgram {
            phases,
            otherwise_accept: false,
        }
    }

    pub fn otherwise_accept(mut self) -> Self {
        self.otherwise_accept = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("{prev} cannot be followed by {next}: {reason}")]
    Chain { prev: String, next: String, reason: String },
    #[error("unknown track {0}")]
    UnknownTrack(String),
    #[error("counter base {0} is not supported, only base 2")]
    Base(u32),
    #[error("layout has {0} tracks, at most {MAX_TRACKS} are supported")]
    TooManyTracks(usize),
    #[error("value {value} does not fit a window of {width} cells")]
    Width { value: u64, width: usize },
    #[error("loop body does no work")]
    EmptyLoop,
}

/// Coarse description of a flattened program step, for observers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    Load,
    Guess,
    Count,
    Scan,
    ShiftBack,
    Test,
    Jump,
    Halt,
}

/// A compiled program together with the decoding tables for its alphabet.
#[derive(Debug, Clone)]
pub struct CompiledMachine {
    pub spec: MachineSpec,
    pub layout: TrackLayout,
    cells: Vec<Option<Cell>>,
    pcs: Vec<Option<usize>>,
    kinds: Vec<StepKind>,
}

impl CompiledMachine {
    /// Decoded cell for a symbol; `None` for the blank.
    pub fn cell(&self, s: SymbolId) -> Option<Cell> {
        self.cells.get(s.index()).copied().flatten()
    }

    /// Index of the flattened step a control state belongs to.
    pub fn pc(&self, s: StateId) -> Option<usize> {
        self.pcs.get(s.index()).copied().flatten()
    }

    pub fn step_kind(&self, pc: usize) -> Option<StepKind> {
        self.kinds.get(pc).copied()
    }

    pub fn steps(&self) -> &[StepKind] {
        &self.kinds
    }

    /// Input a^n.
    pub fn input(&self, n: usize) -> Vec<SymbolId> {
        vec![self.spec.input_symbols()[0]; n]
    }

    /// Leftmost window cell of a configuration.
    pub fn window_start(&self, config: &Configuration) -> Option<usize> {
        config
            .tape
            .iter()
            .position(|&s| self.cell(s).is_some_and(|c| c.in_window()))
    }

    /// Value of a track in the window of a configuration.
    pub fn track_value(&self, config: &Configuration, track: &str) -> Option<u64> {
        let t = self.layout.index(track)?;
        let start = self.window_start(config)?;
        let mut value = 0u64;
        for (i, &s) in config.tape[start..].iter().enumerate() {
            let c = self.cell(s)?;
            if !c.in_window() {
                return None;
            }
            if c.bit(t) {
                value |= 1 << i;
            }
            if c.win == Win::Last {
                return Some(value);
            }
        }
        None
    }

    /// Sieve marks by position; entry i describes the number i+1.
    pub fn marks(&self, config: &Configuration) -> Vec<Mark> {
        config
            .tape
            .iter()
            .map(|&s| self.cell(s).map_or(Mark::None, |c| c.mark))
            .collect()
    }
}

/// Compiles a program into a machine over the input alphabet {a}.
pub fn compile(program: &GadgetProgram, layout: &TrackLayout) -> Result<CompiledMachine, CompileError> {
    if layout.len() > MAX_TRACKS {
        return Err(CompileError::TooManyTracks(layout.len()));
    }
    let flat = flatten::flatten(program, layout)?;
    build::build(&flat, layout)
}
