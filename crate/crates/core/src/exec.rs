//! Running machines: single deterministic runs, scripted nondeterministic
//! runs, and exhaustive enumeration of computations.
//!
//! A `Left` move on cell 0 has no successor, so a computation whose only
//! options are such moves hangs there.

use std::fmt;

use thiserror::Error;

use crate::machine::{Halt, MachineSpec, Move, StateId, SymbolId, Transition};

/// An instantaneous description. The tape covers cells `0..=frontier()`;
/// anything further right is blank and unvisited.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub state: StateId,
    pub head: usize,
    pub tape: Vec<SymbolId>,
}

impl Configuration {
    pub fn frontier(&self) -> usize {
        self.tape.len() - 1
    }

    pub fn scanned(&self) -> SymbolId {
        self.tape[self.head]
    }

    /// Applies `t`, which must match the scanned cell. Returns `false` (and
    /// leaves `self` untouched) for a left move on cell 0.
    #[inline]
    pub fn apply(&mut self, t: &Transition, blank: SymbolId) -> bool {
        match t.mv {
            Move::Left if self.head == 0 => return false,
            Move::Left => {
                self.tape[self.head] = t.write;
                self.head -= 1;
            }
            Move::Right => {
                self.tape[self.head] = t.write;
                self.head += 1;
                if self.head == self.tape.len() {
                    self.tape.push(blank);
                }
            }
            Move::Stay => self.tape[self.head] = t.write,
        }
        self.state = t.to;
        true
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RunError {
    #[error("input symbol #{position} is not in the input alphabet")]
    InvalidInput { position: usize },
    #[error("step {step}: {choices} transitions apply in state {state} on a deterministic run")]
    NotDeterministic {
        step: u64,
        state: String,
        head: usize,
        choices: usize,
    },
    #[error("step {step}: script choice {choice} but only {available} transitions apply")]
    BadChoice { step: u64, choice: usize, available: usize },
    #[error("step {step}: guess script exhausted")]
    ScriptExhausted { step: u64 },
}

pub fn initial_configuration(spec: &MachineSpec, input: &[SymbolId]) -> Result<Configuration, RunError> {
    if let Some(position) = input.iter().position(|s| !spec.is_input_symbol(*s)) {
        return Err(RunError::InvalidInput { position });
    }
    let tape = if input.is_empty() {
        vec![spec.blank()]
    } else {
        input.to_vec()
    };
    Ok(Configuration {
        state: spec.initial(),
        head: 0,
        tape,
    })
}

/// Every configuration reachable in one move, paired with the transition used.
pub fn successors(spec: &MachineSpec, c: &Configuration) -> Vec<(u32, Configuration)> {
    if spec.is_halting(c.state) {
        return Vec::new();
    }
    spec.applicable(c.state, c.scanned())
        .iter()
        .filter_map(|&id| {
            let mut next = c.clone();
            next.apply(spec.transition(id), spec.blank()).then_some((id, next))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    Accepted,
    Rejected,
    Hung,
    FuelExhausted,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Accepted => "accepted",
            Outcome::Rejected => "rejected",
            Outcome::Hung => "hung",
            Outcome::FuelExhausted => "fuel-exhausted",
        }
    }

    pub fn is_halted(self) -> bool {
        matches!(self, Outcome::Accepted | Outcome::Rejected)
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One complete computation, stored as the sequence of transitions taken.
/// Intermediate configurations are recovered by [`Trace::replay`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub input: Vec<SymbolId>,
    pub steps: Vec<u32>,
    pub outcome: Outcome,
    pub last: Configuration,
}

/// One move seen during a replay.
#[derive(Clone, Copy, Debug)]
pub struct StepView {
    pub index: usize,
    pub transition: u32,
    pub state_before: StateId,
    pub head_before: usize,
    pub state_after: StateId,
    pub head_after: usize,
    pub mv: Move,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReplayError {
    #[error("step {step}: transition #{transition} does not apply")]
    Inapplicable { step: usize, transition: u32 },
    #[error("replay ends in a different configuration than recorded")]
    LastMismatch,
    #[error("recorded outcome {recorded} but replay yields {actual}")]
    OutcomeMismatch { recorded: Outcome, actual: Outcome },
    #[error(transparent)]
    Input(#[from] RunError),
}

impl Trace {
    pub fn time(&self) -> u64 {
        self.steps.len() as u64
    }

    /// Re-executes the recorded transitions, reporting each move to `visit`.
    pub fn replay(
        &self,
        spec: &MachineSpec,
        mut visit: impl FnMut(&Configuration, StepView),
    ) -> Result<Configuration, ReplayError> {
        let mut c = initial_configuration(spec, &self.input)?;
        for (index, &id) in self.steps.iter().enumerate() {
            let t = spec
                .transitions()
                .get(id as usize)
                .filter(|t| !spec.is_halting(c.state) && t.from == c.state && t.read == c.scanned())
                .ok_or(ReplayError::Inapplicable {
                    step: index,
                    transition: id,
                })?;
            let (state_before, head_before) = (c.state, c.head);
            if !c.apply(t, spec.blank()) {
                return Err(ReplayError::Inapplicable {
                    step: index,
                    transition: id,
                });
            }
            visit(
                &c,
                StepView {
                    index,
                    transition: id,
                    state_before,
                    head_before,
                    state_after: c.state,
                    head_after: c.head,
                    mv: t.mv,
                },
            );
        }
        Ok(c)
    }

    /// Checks that the recorded steps are a legal computation ending in the
    /// recorded configuration with a consistent outcome.
    pub fn check(&self, spec: &MachineSpec) -> Result<(), ReplayError> {
        let last = self.replay(spec, |_, _| {})?;
        if last != self.last {
            return Err(ReplayError::LastMismatch);
        }
        let actual = match spec.halt(last.state) {
            Halt::Accept => Outcome::Accepted,
            Halt::Reject => Outcome::Rejected,
            Halt::Running if successors(spec, &last).is_empty() => Outcome::Hung,
            Halt::Running => Outcome::FuelExhausted,
        };
        if actual != self.outcome {
            return Err(ReplayError::OutcomeMismatch {
                recorded: self.outcome,
                actual,
            });
        }
        Ok(())
    }
}

/// What a scripted run does once its recorded choices run out.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exhaustion {
    Fail,
    FirstDeclared,
}

/// Resolutions of nondeterministic choices: each entry indexes the list of
/// applicable transitions (declaration order) at the next branch point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GuessScript {
    pub choices: Vec<usize>,
    pub on_exhausted: Exhaustion,
}

impl GuessScript {
    pub fn new(choices: Vec<usize>) -> Self {
        GuessScript {
            choices,
            on_exhausted: Exhaustion::Fail,
        }
    }

    pub fn empty() -> Self {
        GuessScript::new(Vec::new())
    }

    /// Comma-separated choice indices, e.g. `1,0,2`.
    pub fn to_text(&self) -> String {
        self.choices.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
    }

    pub fn parse(text: &str) -> Option<GuessScript> {
        let text = text.trim();
        if text.is_empty() {
            return Some(GuessScript::empty());
        }
        text.split(',')
            .map(|t| t.trim().parse().ok())
            .collect::<Option<Vec<usize>>>()
            .map(GuessScript::new)
    }
}

/// Outcome of a run that keeps only aggregate data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunSummary {
    pub outcome: Outcome,
    pub time: u64,
    pub last: Configuration,
}

/// Drives one computation. `choose` resolves branch points, `observe` sees
/// every move after it happens.
pub(crate) fn drive(
    spec: &MachineSpec,
    mut c: Configuration,
    fuel: u64,
    mut choose: impl FnMut(u64, &[u32]) -> Result<usize, RunError>,
    mut observe: impl FnMut(&Configuration, StepView),
) -> Result<RunSummary, RunError> {
    let blank = spec.blank();
    let mut time = 0u64;
    let mut viable: Vec<u32> = Vec::new();
    loop {
        match spec.halt(c.state) {
            Halt::Accept => return Ok(finish(Outcome::Accepted, time, c)),
            Halt::Reject => return Ok(finish(Outcome::Rejected, time, c)),
            Halt::Running => {}
        }
        let all = spec.applicable(c.state, c.scanned());
        let id = if c.head > 0 && all.len() == 1 {
            all[0]
        } else {
            viable.clear();
            viable.extend(
                all.iter()
                    .copied()
                    .filter(|&id| !(c.head == 0 && spec.transition(id).mv == Move::Left)),
            );
            match viable.len() {
                0 => return Ok(finish(Outcome::Hung, time, c)),
                1 => viable[0],
                _ => viable[choose(time, &viable)?],
            }
        };
        if time == fuel {
            return Ok(finish(Outcome::FuelExhausted, time, c));
        }
        let t = spec.transition(id);
        let (state_before, head_before) = (c.state, c.head);
        c.apply(t, blank);
        observe(
            &c,
            StepView {
                index: time as usize,
                transition: id,
                state_before,
                head_before,
                state_after: c.state,
                head_after: c.head,
                mv: t.mv,
            },
        );
        time += 1;
    }
}

fn finish(outcome: Outcome, time: u64, last: Configuration) -> RunSummary {
    RunSummary { outcome, time, last }
}

fn scripted_chooser(script: &GuessScript) -> impl FnMut(u64, &[u32]) -> Result<usize, RunError> + '_ {
    let mut next = 0usize;
    move |step, options| {
        let choice = match script.choices.get(next) {
            Some(&c) => c,
            None => match script.on_exhausted {
                Exhaustion::Fail => return Err(RunError::ScriptExhausted { step }),
                Exhaustion::FirstDeclared => 0,
            },
        };
        next += 1;
        if choice >= options.len() {
            return Err(RunError::BadChoice {
                step,
                choice,
                available: options.len(),
            });
        }
        Ok(choice)
    }
}

fn deterministic_chooser(spec: &MachineSpec) -> impl FnMut(u64, &[u32]) -> Result<usize, RunError> + '_ {
    move |step, options| {
        let t = spec.transition(options[0]);
        Err(RunError::NotDeterministic {
            step,
            state: spec.state_name(t.from).to_string(),
            head: 0,
            choices: options.len(),
        })
    }
}

fn recorded(
    spec: &MachineSpec,
    input: &[SymbolId],
    fuel: u64,
    choose: impl FnMut(u64, &[u32]) -> Result<usize, RunError>,
) -> Result<Trace, RunError> {
    let c = initial_configuration(spec, input)?;
    let mut steps = Vec::new();
    let summary = drive(spec, c, fuel, choose, |_, v| steps.push(v.transition))?;
    Ok(Trace {
        input: input.to_vec(),
        steps,
        outcome: summary.outcome,
        last: summary.last,
    })
}

/// Follows the unique successor until the machine stops or `fuel` moves have been made.
pub fn run_deterministic(spec: &MachineSpec, input: &[SymbolId], fuel: u64) -> Result<Trace, RunError> {
    recorded(spec, input, fuel, deterministic_chooser(spec)).map_err(|e| with_head(spec, input, e))
}

/// Like [`run_deterministic`] but branch points consume `script` choices.
pub fn run_scripted(
    spec: &MachineSpec,
    input: &[SymbolId],
    script: &GuessScript,
    fuel: u64,
) -> Result<Trace, RunError> {
    recorded(spec, input, fuel, scripted_chooser(script))
}

/// Runs without recording the trace; `observe` sees every move.
pub fn run_observed(
    spec: &MachineSpec,
    input: &[SymbolId],
    script: Option<&GuessScript>,
    fuel: u64,
    observe: impl FnMut(&Configuration, StepView),
) -> Result<RunSummary, RunError> {
    let c = initial_configuration(spec, input)?;
    match script {
        Some(s) => drive(spec, c, fuel, scripted_chooser(s), observe),
        None => drive(spec, c, fuel, deterministic_chooser(spec), observe).map_err(|e| with_head(spec, input, e)),
    }
}

// The chooser cannot see the head; recover it for the error report.
fn with_head(spec: &MachineSpec, input: &[SymbolId], e: RunError) -> RunError {
    if let RunError::NotDeterministic {
        step, state, choices, ..
    } = e
    {
        let mut head = 0;
        if let Ok(c) = initial_configuration(spec, input) {
            let _ = drive(spec, c, step, |_, _| Ok(0), |c, _| head = c.head);
        }
        return RunError::NotDeterministic {
            step,
            state,
            head,
            choices,
        };
    }
    e
}

/// Result of [`enumerate_computations`].
#[derive(Clone, Debug)]
pub struct Enumeration {
    pub traces: Vec<Trace>,
    /// Set when `max_branches` stopped the enumeration before every
    /// computation was produced.
    pub truncated: bool,
}

impl Enumeration {
    /// True when every maximal computation finished within the fuel budget
    /// and nothing was cut off by the branch cap.
    pub fn is_complete(&self) -> bool {
        !self.truncated && self.traces.iter().all(|t| t.outcome != Outcome::FuelExhausted)
    }
}

struct Frame {
    config: Configuration,
    depth: usize,
    options: Vec<u32>,
    next: usize,
}

/// Depth-first enumeration of every computation, alternatives taken in
/// declaration order. Computations longer than `fuel` are cut off and
/// reported as [`Outcome::FuelExhausted`].
pub struct Computations<'a> {
    spec: &'a MachineSpec,
    input: Vec<SymbolId>,
    fuel: u64,
    max_branches: usize,
    produced: usize,
    stack: Vec<Frame>,
    path: Vec<u32>,
    current: Option<Configuration>,
    truncated: bool,
    done: bool,
}

impl<'a> Computations<'a> {
    pub fn new(spec: &'a MachineSpec, input: &[SymbolId], fuel: u64, max_branches: usize) -> Result<Self, RunError> {
        let c = initial_configuration(spec, input)?;
        Ok(Computations {
            spec,
            input: input.to_vec(),
            fuel,
            max_branches,
            produced: 0,
            stack: Vec::new(),
            path: Vec::new(),
            current: Some(c),
            truncated: false,
            done: false,
        })
    }

    pub fn truncated(&self) -> bool {
        self.truncated
    }

    fn resume(&mut self) -> Option<Configuration> {
        while let Some(frame) = self.stack.last_mut() {
            if frame.next < frame.options.len() {
                let id = frame.options[frame.next];
                frame.next += 1;
                let mut c = frame.config.clone();
                self.path.truncate(frame.depth);
                c.apply(self.spec.transition(id), self.spec.blank());
                self.path.push(id);
                if frame.next == frame.options.len() {
                    self.stack.pop();
                }
                return Some(c);
            }
            self.stack.pop();
        }
        None
    }
}

impl Iterator for Computations<'_> {
    type Item = Trace;

    fn next(&mut self) -> Option<Trace> {
        if self.done {
            return None;
        }
        if self.produced == self.max_branches {
            self.done = true;
            self.truncated = self.current.is_some() || !self.stack.is_empty();
            return None;
        }
        let spec = self.spec;
        let mut c = match self.current.take() {
            Some(c) => c,
            None => match self.resume() {
                Some(c) => c,
                None => {
                    self.done = true;
                    return None;
                }
            },
        };
        let outcome = loop {
            match spec.halt(c.state) {
                Halt::Accept => break Outcome::Accepted,
                Halt::Reject => break Outcome::Rejected,
                Halt::Running => {}
            }
            let options: Vec<u32> = spec
                .applicable(c.state, c.scanned())
                .iter()
                .copied()
                .filter(|&id| !(c.head == 0 && spec.transition(id).mv == Move::Left))
                .collect();
            if options.is_empty() {
                break Outcome::Hung;
            }
            if self.path.len() as u64 == self.fuel {
                break Outcome::FuelExhausted;
            }
            if options.len() > 1 {
                self.stack.push(Frame {
                    config: c.clone(),
                    depth: self.path.len(),
                    options: options.clone(),
                    next: 1,
                });
            }
            c.apply(spec.transition(options[0]), spec.blank());
            self.path.push(options[0]);
        };
        self.produced += 1;
        Some(Trace {
            input: self.input.clone(),
            steps: self.path.clone(),
            outcome,
            last: c,
        })
    }
}

/// Collects every computation on `input`, stopping after `max_branches`.
pub fn enumerate_computations(
    spec: &MachineSpec,
    input: &[SymbolId],
    fuel: u64,
    max_branches: usize,
) -> Result<Enumeration, RunError> {
    let mut it = Computations::new(spec, input, fuel, max_branches)?;
    let traces: Vec<Trace> = it.by_ref().collect();
    Ok(Enumeration {
        traces,
        truncated: it.truncated(),
    })
}

/// Whether some computation accepts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Acceptance {
    Accepts,
    Rejects,
    /// No accepting computation was found, but fuel or the branch cap cut
    /// the search short.
    Inconclusive,
}

pub fn accepts(spec: &MachineSpec, input: &[SymbolId], fuel: u64, max_branches: usize) -> Result<Acceptance, RunError> {
    let mut it = Computations::new(spec, input, fuel, max_branches)?;
    let mut complete = true;
    for t in it.by_ref() {
        match t.outcome {
            Outcome::Accepted => return Ok(Acceptance::Accepts),
            Outcome::FuelExhausted => complete = false,
            _ => {}
        }
    }
    Ok(if complete && !it.truncated() {
        Acceptance::Rejects
    } else {
        Acceptance::Inconclusive
    })
}
