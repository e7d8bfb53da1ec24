//! Local analysis of a single tape square from the crossing sequences at its
//! two boundaries, and recombination of computations that share a crossing
//! sequence.
//!
//! A square sees the head arrive from the left in the states listed at odd
//! positions of its left sequence and leave to the left in the states at
//! even positions. Every return from the right must be in a state that some
//! `Left` transition can produce, so those are the only states guessed.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::exec::{initial_configuration, Outcome, ReplayError, Trace};
use crate::machine::{Halt, MachineSpec, Move, StateId, SymbolId};
use crate::metering::{extract_crossing_sequences, Crossings};

/// How a local run ends inside the square, if it does.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Terminal {
    /// The head leaves the square for good.
    None,
    AcceptedInSquare,
    RejectedInSquare,
    /// No move applies (including a `Left` move on cell 0).
    HungInSquare,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LocalRunOutcome {
    pub right_sequence: Vec<StateId>,
    pub terminal: Terminal,
    pub left_consumed: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LocalRuns {
    pub outcomes: Vec<LocalRunOutcome>,
    /// Some behaviour was dropped because its right sequence exceeded the cap.
    pub truncated: bool,
}

/// What the local exploration is allowed to emit to the right.
enum Target<'a> {
    Any,
    Exactly(&'a [StateId]),
}

struct Explorer<'a> {
    spec: &'a MachineSpec,
    left: &'a [StateId],
    k_cap: usize,
    left_edge: bool,
    returns: Vec<StateId>,
    chain_cap: usize,
    target: Target<'a>,
}

enum Node {
    InCell {
        q: StateId,
        c: SymbolId,
        consumed: usize,
        right: Vec<StateId>,
        chain: Vec<(StateId, SymbolId)>,
    },
    OutRight {
        c: SymbolId,
        consumed: usize,
        right: Vec<StateId>,
    },
}

impl Explorer<'_> {
    fn may_emit(&self, right: &[StateId], s: StateId) -> bool {
        match self.target {
            Target::Any => true,
            Target::Exactly(t) => t.get(right.len()) == Some(&s),
        }
    }

    fn may_finish(&self, right: &[StateId]) -> bool {
        match self.target {
            Target::Any => true,
            Target::Exactly(t) => t == right,
        }
    }

    /// Depth-first search over local behaviours. `emit` returns `true` to stop early.
    fn run(&self, symbol: SymbolId, truncated: &mut bool, mut emit: impl FnMut(LocalRunOutcome) -> bool) {
        let Some(&entry) = self.left.first() else {
            emit(LocalRunOutcome {
                right_sequence: Vec::new(),
                terminal: Terminal::None,
                left_consumed: 0,
            });
            return;
        };
        let spec = self.spec;
        let mut stack = vec![Node::InCell {
            q: entry,
            c: symbol,
            consumed: 1,
            right: Vec::new(),
            chain: Vec::new(),
        }];
        while let Some(node) = stack.pop() {
            match node {
                Node::InCell {
                    q,
                    c,
                    consumed,
                    right,
                    chain,
                } => {
                    let done = consumed == self.left.len();
                    let halted = match spec.halt(q) {
                        Halt::Accept => Some(Terminal::AcceptedInSquare),
                        Halt::Reject => Some(Terminal::RejectedInSquare),
                        Halt::Running => None,
                    };
                    if let Some(terminal) = halted {
                        if done && self.may_finish(&right) && emit(outcome(right, terminal, consumed)) {
                            return;
                        }
                        continue;
                    }
                    let options: Vec<u32> = spec
                        .applicable(q, c)
                        .iter()
                        .copied()
                        .filter(|&id| !(self.left_edge && spec.transition(id).mv == Move::Left))
                        .collect();
                    if options.is_empty() {
                        if done && self.may_finish(&right) && emit(outcome(right, Terminal::HungInSquare, consumed)) {
                            return;
                        }
                        continue;
                    }
                    // Pushed in reverse so declaration order is explored first.
                    for &id in options.iter().rev() {
                        let t = spec.transition(id);
                        match t.mv {
                            Move::Stay => {
                                if chain.len() >= self.chain_cap || chain.contains(&(t.to, t.write)) {
                                    continue;
                                }
                                let mut chain = chain.clone();
                                if chain.is_empty() {
                                    chain.push((q, c));
                                }
                                chain.push((t.to, t.write));
                                stack.push(Node::InCell {
                                    q: t.to,
                                    c: t.write,
                                    consumed,
                                    right: right.clone(),
                                    chain,
                                });
                            }
                            Move::Left => {
                                if self.left.get(consumed) != Some(&t.to) {
                                    continue;
                                }
                                let consumed = consumed + 1;
                                match self.left.get(consumed) {
                                    None => {
                                        if self.may_finish(&right)
                                            && emit(outcome(right.clone(), Terminal::None, consumed))
                                        {
                                            return;
                                        }
                                    }
                                    Some(&back) => stack.push(Node::InCell {
                                        q: back,
                                        c: t.write,
                                        consumed: consumed + 1,
                                        right: right.clone(),
                                        chain: Vec::new(),
                                    }),
                                }
                            }
                            Move::Right => {
                                if right.len() == self.k_cap {
                                    *truncated = true;
                                    continue;
                                }
                                if !self.may_emit(&right, t.to) {
                                    continue;
                                }
                                let mut right = right.clone();
                                right.push(t.to);
                                stack.push(Node::OutRight {
                                    c: t.write,
                                    consumed,
                                    right,
                                });
                            }
                        }
                    }
                }
                Node::OutRight { c, consumed, right } => {
                    for &r in self.returns.iter().rev() {
                        if right.len() == self.k_cap {
                            *truncated = true;
                            break;
                        }
                        if !self.may_emit(&right, r) {
                            continue;
                        }
                        let mut back = right.clone();
                        back.push(r);
                        stack.push(Node::InCell {
                            q: r,
                            c,
                            consumed,
                            right: back,
                            chain: Vec::new(),
                        });
                    }
                    if consumed == self.left.len()
                        && self.may_finish(&right)
                        && emit(outcome(right, Terminal::None, consumed))
                    {
                        return;
                    }
                }
            }
        }
    }
}

fn outcome(right_sequence: Vec<StateId>, terminal: Terminal, left_consumed: usize) -> LocalRunOutcome {
    LocalRunOutcome {
        right_sequence,
        terminal,
        left_consumed,
    }
}

fn explorer<'a>(
    spec: &'a MachineSpec,
    left: &'a [StateId],
    k_cap: usize,
    left_edge: bool,
    target: Target<'a>,
) -> Explorer<'a> {
    Explorer {
        spec,
        left,
        k_cap,
        left_edge,
        returns: spec.left_move_targets(),
        chain_cap: spec.state_count() * spec.symbol_count(),
        target,
    }
}

/// Every behaviour of a square holding `symbol` whose left boundary has
/// crossing sequence `left`, with right sequences of length at most `k_cap`.
///
/// Only outcomes that use up the whole left sequence are reported.
/// Stationary chains longer than `|Q|·|Γ|`, or that repeat a
/// (state, symbol) pair, are pruned.
pub fn local_runs(spec: &MachineSpec, left: &[StateId], symbol: SymbolId, k_cap: usize) -> LocalRuns {
    local_runs_at(spec, left, symbol, k_cap, false)
}

/// [`local_runs`] for a square that may be cell 0, where `Left` moves hang.
pub fn local_runs_at(
    spec: &MachineSpec,
    left: &[StateId],
    symbol: SymbolId,
    k_cap: usize,
    left_edge: bool,
) -> LocalRuns {
    let ex = explorer(spec, left, k_cap, left_edge, Target::Any);
    let mut found = BTreeSet::new();
    let mut truncated = false;
    ex.run(symbol, &mut truncated, |o| {
        found.insert(o);
        false
    });
    LocalRuns {
        outcomes: found.into_iter().collect(),
        truncated,
    }
}

/// True iff some local run over `symbol` consumes all of `left` and emits
/// exactly `right`. A run that halts inside the square counts, since the
/// square where a computation stops must pass this test too.
pub fn compatible(spec: &MachineSpec, left: &[StateId], right: &[StateId], symbol: SymbolId, k_cap: usize) -> bool {
    compatible_at(spec, left, right, symbol, k_cap, false)
}

pub fn compatible_at(
    spec: &MachineSpec,
    left: &[StateId],
    right: &[StateId],
    symbol: SymbolId,
    k_cap: usize,
    left_edge: bool,
) -> bool {
    if right.len() > k_cap {
        return false;
    }
    let ex = explorer(spec, left, k_cap, left_edge, Target::Exactly(right));
    let mut hit = false;
    let mut truncated = false;
    ex.run(symbol, &mut truncated, |_| {
        hit = true;
        true
    });
    hit
}

/// One failed check from [`check_trace`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SoundnessViolation {
    /// Total crossings differ from the number of head moves.
    Conservation {
        crossings: usize,
        moves: usize,
    },
    Incompatible {
        cell: usize,
    },
    Parity {
        boundary: usize,
        length: usize,
        head: usize,
    },
}

impl fmt::Display for SoundnessViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SoundnessViolation::Conservation { crossings, moves } => {
                write!(f, "{crossings} crossings but {moves} head moves")
            }
            SoundnessViolation::Incompatible { cell } => {
                write!(f, "cell {cell}: boundary sequences are not locally compatible")
            }
            SoundnessViolation::Parity { boundary, length, head } => write!(
                f,
                "boundary {boundary}: sequence length {length} disagrees with final head {head}"
            ),
        }
    }
}

/// Checks a finished trace against the crossing-sequence laws: crossings
/// equal head moves, every visited square is locally compatible with its
/// boundary sequences, and sequence parity says which side the head ends on.
pub fn check_trace(spec: &MachineSpec, trace: &Trace) -> Vec<SoundnessViolation> {
    let mut out = Vec::new();
    let cs = extract_crossing_sequences(spec, trace);
    let moves = trace
        .steps
        .iter()
        .filter(|&&id| spec.transition(id).mv != Move::Stay)
        .count();
    if cs.total() != moves {
        out.push(SoundnessViolation::Conservation {
            crossings: cs.total(),
            moves,
        });
    }
    if trace.outcome == Outcome::FuelExhausted {
        return out;
    }
    let k = cs.max_len().max(1);
    let virtual_edge = [spec.initial()];
    let frontier = trace.last.frontier();
    for cell in 0..=frontier {
        let left: &[StateId] = if cell == 0 { &virtual_edge } else { cs.at(cell) };
        let symbol = trace.input.get(cell).copied().unwrap_or(spec.blank());
        if !compatible_at(spec, left, cs.at(cell + 1), symbol, k, cell == 0) {
            out.push(SoundnessViolation::Incompatible { cell });
        }
    }
    let head = trace.last.head;
    for boundary in 1..=frontier + 1 {
        let length = cs.at(boundary).len();
        if (length % 2 == 1) != (head >= boundary) {
            out.push(SoundnessViolation::Parity { boundary, length, head });
        }
    }
    out
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpliceError {
    #[error("splice boundaries must be at least 1 (got {0})")]
    BoundaryZero(usize),
    #[error("boundary {boundary} lies beyond the input of length {len}")]
    BeyondInput { boundary: usize, len: usize },
    #[error("cannot splice a computation that ran out of fuel")]
    Unfinished,
    #[error("crossing sequences differ: {first:?} at boundary {b1} vs {second:?} at boundary {b2}")]
    Mismatch {
        b1: usize,
        first: Vec<String>,
        b2: usize,
        second: Vec<String>,
    },
    #[error("spliced computation failed replay: {0}")]
    Replay(#[from] ReplayError),
}

/// Which computation supplied the last segment of a splice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ending {
    /// The shared sequence has odd length: the run ends right of the cut.
    SuffixSide,
    /// Even length: the run ends left of the cut.
    PrefixSide,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Splice {
    pub trace: Trace,
    pub shared: Vec<StateId>,
    pub ending: Ending,
}

/// Splits a trace's step list at every crossing of `boundary`. Segment `i`
/// ends with the `i`-th crossing move; even segments run left of the
/// boundary, odd ones right of it.
fn segments(spec: &MachineSpec, trace: &Trace, boundary: usize) -> Result<Vec<Vec<u32>>, ReplayError> {
    let mut cuts = Vec::new();
    trace.replay(spec, |_, v| {
        let crossed = match v.mv {
            Move::Right => v.head_before + 1 == boundary,
            Move::Left => v.head_before == boundary,
            Move::Stay => false,
        };
        if crossed {
            cuts.push(v.index + 1);
        }
    })?;
    let mut out = Vec::new();
    let mut start = 0;
    for c in cuts {
        out.push(trace.steps[start..c].to_vec());
        start = c;
    }
    out.push(trace.steps[start..].to_vec());
    Ok(out)
}

/// Cut-and-paste: `first` runs on `uv` with `|u| = b1`, `second` runs on
/// `u'v'` with `|u'| = b2`. When both have the same crossing sequence at
/// their cut, the result is a computation on `u'v` that behaves like
/// `second` left of the cut and like `first` right of it.
pub fn cut_and_paste(
    spec: &MachineSpec,
    first: &Trace,
    b1: usize,
    second: &Trace,
    b2: usize,
) -> Result<Splice, SpliceError> {
    for b in [b1, b2] {
        if b == 0 {
            return Err(SpliceError::BoundaryZero(b));
        }
    }
    if b1 > first.input.len() {
        return Err(SpliceError::BeyondInput {
            boundary: b1,
            len: first.input.len(),
        });
    }
    if b2 > second.input.len() {
        return Err(SpliceError::BeyondInput {
            boundary: b2,
            len: second.input.len(),
        });
    }
    if first.outcome == Outcome::FuelExhausted || second.outcome == Outcome::FuelExhausted {
        return Err(SpliceError::Unfinished);
    }
    let c1: Crossings = extract_crossing_sequences(spec, first);
    let c2: Crossings = extract_crossing_sequences(spec, second);
    if c1.at(b1) != c2.at(b2) {
        let names = |s: &[StateId]| s.iter().map(|q| spec.state_name(*q).to_string()).collect();
        return Err(SpliceError::Mismatch {
            b1,
            first: names(c1.at(b1)),
            b2,
            second: names(c2.at(b2)),
        });
    }
    let shared = c1.at(b1).to_vec();
    let right = segments(spec, first, b1)?;
    let left = segments(spec, second, b2)?;
    let mut steps = Vec::with_capacity(first.steps.len() + second.steps.len());
    for i in 0..=shared.len() {
        let part = if i % 2 == 0 { &left[i] } else { &right[i] };
        steps.extend_from_slice(part);
    }
    let mut input = second.input[..b2].to_vec();
    input.extend_from_slice(&first.input[b1..]);
    let ending = if shared.len() % 2 == 1 {
        Ending::SuffixSide
    } else {
        Ending::PrefixSide
    };
    let outcome = match ending {
        Ending::SuffixSide => first.outcome,
        Ending::PrefixSide => second.outcome,
    };
    let mut trace = Trace {
        last: initial_configuration(spec, &input).map_err(ReplayError::from)?,
        input,
        steps,
        outcome,
    };
    trace.last = trace.replay(spec, |_, _| {})?;
    trace.check(spec)?;
    Ok(Splice { trace, shared, ending })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::run_deterministic;
    use crate::machine::MachineBuilder;

    fn sweeper() -> MachineSpec {
        let mut b = MachineBuilder::new();
        b.blank("_");
        b.input_symbol("a");
        b.initial("q0");
        b.accepting("acc");
        b.rule("q0", "a", "q0", "a", Move::Right);
        b.rule("q0", "_", "acc", "a", Move::Stay);
        b.build()
    }

    fn sym(spec: &MachineSpec, name: &str) -> SymbolId {
        spec.symbol_by_name(name).unwrap()
    }

    #[test]
    fn sweeper_square_passes_head_right() {
        let spec = sweeper();
        let q0 = spec.initial();
        let runs = local_runs(&spec, &[q0], sym(&spec, "a"), 3);
        assert_eq!(
            runs.outcomes,
            vec![LocalRunOutcome {
                right_sequence: vec![q0],
                terminal: Terminal::None,
                left_consumed: 1
            }]
        );
        assert!(compatible(&spec, &[q0], &[q0], sym(&spec, "a"), 1));
        assert!(!compatible(&spec, &[q0], &[], sym(&spec, "a"), 1));
    }

    #[test]
    fn acceptance_inside_square() {
        let spec = sweeper();
        let runs = local_runs(&spec, &[spec.initial()], spec.blank(), 1);
        assert_eq!(runs.outcomes.len(), 1);
        assert_eq!(runs.outcomes[0].terminal, Terminal::AcceptedInSquare);
        assert!(runs.outcomes[0].right_sequence.is_empty());
    }

    #[test]
    fn stationary_loop_is_pruned() {
        let mut b = MachineBuilder::new();
        b.blank("_");
        b.input_symbol("a");
        b.initial("q0");
        b.accepting("acc");
        b.rule("q0", "a", "q0", "a", Move::Stay);
        let spec = b.build();
        let runs = local_runs(&spec, &[spec.initial()], sym(&spec, "a"), 4);
        assert!(runs.outcomes.is_empty());
    }

    #[test]
    fn right_sequences_beyond_cap_are_flagged() {
        let spec = sweeper();
        let runs = local_runs(&spec, &[spec.initial()], sym(&spec, "a"), 0);
        assert!(runs.outcomes.is_empty());
        assert!(runs.truncated);
    }

    #[test]
    fn untouched_square_has_empty_outcome() {
        let spec = sweeper();
        let runs = local_runs(&spec, &[], sym(&spec, "a"), 2);
        assert_eq!(runs.outcomes.len(), 1);
        assert_eq!(runs.outcomes[0].left_consumed, 0);
    }

    fn bounce() -> MachineSpec {
        // Walks right to the blank, turns, walks back and accepts on cell 0.
        let mut b = MachineBuilder::new();
        b.blank("_");
        b.input_symbol("a");
        b.symbol("A");
        b.initial("go");
        b.accepting("acc");
        b.rule("go", "a", "go", "a", Move::Right);
        b.rule("go", "_", "back", "A", Move::Left);
        b.rule("back", "a", "back", "a", Move::Left);
        b.rule("back", "a", "acc", "a", Move::Stay);
        b.build()
    }

    #[test]
    fn traces_satisfy_crossing_laws() {
        for spec in [sweeper(), bounce()] {
            for n in 0..5 {
                let input = vec![spec.input_symbols()[0]; n];
                let Ok(t) = run_deterministic(&spec, &input, 100) else {
                    continue;
                };
                assert_eq!(check_trace(&spec, &t), vec![], "n = {n}");
            }
        }
    }

    #[test]
    fn splice_with_itself_is_identity() {
        let spec = sweeper();
        let a = spec.input_symbols()[0];
        let t = run_deterministic(&spec, &[a; 4], 100).unwrap();
        let s = cut_and_paste(&spec, &t, 2, &t, 2).unwrap();
        assert_eq!(s.trace, t);
        assert_eq!(s.ending, Ending::SuffixSide);
    }

    #[test]
    fn sweeper_splices_across_lengths() {
        let spec = sweeper();
        let a = spec.input_symbols()[0];
        let t3 = run_deterministic(&spec, &[a; 3], 100).unwrap();
        let t5 = run_deterministic(&spec, &[a; 5], 100).unwrap();
        // Prefix a^1 of the a^3 run, suffix a^2 of the a^5 run.
        let s = cut_and_paste(&spec, &t5, 3, &t3, 1).unwrap();
        assert_eq!(s.trace.input.len(), 3);
        assert_eq!(s.trace.outcome, Outcome::Accepted);
        let s = cut_and_paste(&spec, &t3, 1, &t5, 3).unwrap();
        assert_eq!(s.trace.input.len(), 5);
        assert_eq!(s.trace.outcome, Outcome::Accepted);
    }

    #[test]
    fn mismatched_sequences_refuse_to_splice() {
        let mut b = MachineBuilder::new();
        b.blank("_");
        b.input_symbol("a");
        b.initial("even");
        b.accepting("acc");
        b.rule("even", "a", "odd", "a", Move::Right);
        b.rule("odd", "a", "even", "a", Move::Right);
        b.rule("even", "_", "acc", "a", Move::Stay);
        let spec = b.build();
        let a = spec.input_symbols()[0];
        let t2 = run_deterministic(&spec, &[a; 2], 100).unwrap();
        let t4 = run_deterministic(&spec, &[a; 4], 100).unwrap();
        match cut_and_paste(&spec, &t2, 1, &t4, 2) {
            Err(SpliceError::Mismatch { first, second, .. }) => {
                assert_eq!((first, second), (vec!["odd".to_string()], vec!["even".to_string()]));
            }
            other => panic!("expected mismatch, got {other:?}"),
        }
        assert!(matches!(
            cut_and_paste(&spec, &t2, 3, &t4, 1),
            Err(SpliceError::BeyondInput { .. })
        ));
        assert!(matches!(
            cut_and_paste(&spec, &t2, 0, &t4, 1),
            Err(SpliceError::BoundaryZero(0))
        ));
        let s = cut_and_paste(&spec, &t2, 1, &t4, 3).unwrap();
        assert_eq!((s.trace.input.len(), s.trace.outcome), (4, Outcome::Accepted));
    }
}
