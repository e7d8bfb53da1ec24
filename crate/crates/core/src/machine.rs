//! The one-tape off-line machine model: states, tape alphabet, transition relation.

use std::collections::HashMap;
use std::fmt;

/// Index of a control state inside a [`MachineSpec`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub u32);

/// Index of a tape symbol inside a [`MachineSpec`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolId(pub u32);

impl StateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl SymbolId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Move {
    Left,
    Right,
    Stay,
}

impl Move {
    pub fn letter(self) -> char {
        match self {
            Move::Left => 'L',
            Move::Right => 'R',
            Move::Stay => 'S',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Transition {
    pub from: StateId,
    pub read: SymbolId,
    pub to: StateId,
    pub write: SymbolId,
    pub mv: Move,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Halt {
    Running,
    Accept,
    Reject,
}

/// Raw description of a machine. Nothing here is checked; see [`validate_machine`].
#[derive(Clone, Debug, Default)]
pub struct MachineParts {
    pub states: Vec<String>,
    pub symbols: Vec<String>,
    pub input_symbols: Vec<SymbolId>,
    pub blank: SymbolId,
    pub initial: StateId,
    pub accepting: Vec<StateId>,
    pub rejecting: Vec<StateId>,
    pub transitions: Vec<Transition>,
}

/// A nondeterministic one-tape off-line Turing machine.
///
/// Transition declaration order is significant: it fixes the order in which
/// alternatives are explored and the meaning of guess-script indices.
#[derive(Clone)]
pub struct MachineSpec {
    parts: MachineParts,
    halting: Vec<Halt>,
    // (state, symbol) -> transition ids, CSR layout over a dense state x symbol grid.
    offsets: Vec<u32>,
    ids: Vec<u32>,
    deterministic: bool,
}

impl fmt::Debug for MachineSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MachineSpec")
            .field("states", &self.parts.states.len())
            .field("symbols", &self.parts.symbols.len())
            .field("transitions", &self.parts.transitions.len())
            .finish()
    }
}

impl MachineSpec {
    /// Builds the dispatch index. Transitions referring to undeclared states or
    /// symbols are kept in the declaration list but are never dispatched.
    pub fn new(parts: MachineParts) -> MachineSpec {
        let ns = parts.states.len();
        let ng = parts.symbols.len();
        let mut halting = vec![Halt::Running; ns];
        for s in &parts.accepting {
            if s.index() < ns {
                halting[s.index()] = Halt::Accept;
            }
        }
        for s in &parts.rejecting {
            if s.index() < ns {
                halting[s.index()] = Halt::Reject;
            }
        }
        let in_range =
            |t: &Transition| t.from.index() < ns && t.to.index() < ns && t.read.index() < ng && t.write.index() < ng;
        let mut counts = vec![0u32; ns * ng + 1];
        for t in parts.transitions.iter().filter(|t| in_range(t)) {
            counts[t.from.index() * ng + t.read.index() + 1] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let offsets = counts.clone();
        let mut fill = counts;
        let mut ids = vec![0u32; *offsets.last().unwrap_or(&0) as usize];
        for (i, t) in parts.transitions.iter().enumerate() {
            if in_range(t) {
                let slot = t.from.index() * ng + t.read.index();
                ids[fill[slot] as usize] = i as u32;
                fill[slot] += 1;
            }
        }
        let deterministic = offsets.windows(2).all(|w| w[1] - w[0] <= 1);
        MachineSpec {
            parts,
            halting,
            offsets,
            ids,
            deterministic,
        }
    }

    pub fn parts(&self) -> &MachineParts {
        &self.parts
    }

    pub fn state_count(&self) -> usize {
        self.parts.states.len()
    }

    pub fn symbol_count(&self) -> usize {
        self.parts.symbols.len()
    }

    pub fn state_name(&self, s: StateId) -> &str {
        self.parts.states.get(s.index()).map(String::as_str).unwrap_or("?")
    }

    pub fn symbol_name(&self, s: SymbolId) -> &str {
        self.parts.symbols.get(s.index()).map(String::as_str).unwrap_or("?")
    }

    pub fn state_by_name(&self, name: &str) -> Option<StateId> {
        self.parts
            .states
            .iter()
            .position(|s| s == name)
            .map(|i| StateId(i as u32))
    }

    pub fn symbol_by_name(&self, name: &str) -> Option<SymbolId> {
        self.parts
            .symbols
            .iter()
            .position(|s| s == name)
            .map(|i| SymbolId(i as u32))
    }

    pub fn blank(&self) -> SymbolId {
        self.parts.blank
    }

    pub fn initial(&self) -> StateId {
        self.parts.initial
    }

    pub fn input_symbols(&self) -> &[SymbolId] {
        &self.parts.input_symbols
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.parts.transitions
    }

    pub fn transition(&self, id: u32) -> &Transition {
        &self.parts.transitions[id as usize]
    }

    pub fn halt(&self, s: StateId) -> Halt {
        self.halting.get(s.index()).copied().unwrap_or(Halt::Running)
    }

    pub fn is_accepting(&self, s: StateId) -> bool {
        self.halt(s) == Halt::Accept
    }

    pub fn is_halting(&self, s: StateId) -> bool {
        self.halt(s) != Halt::Running
    }

    /// Transition ids applicable to `(state, read)`, in declaration order.
    #[inline]
    pub fn applicable(&self, state: StateId, read: SymbolId) -> &[u32] {
        let ng = self.parts.symbols.len();
        let slot = state.index() * ng + read.index();
        let lo = self.offsets[slot] as usize;
        let hi = self.offsets[slot + 1] as usize;
        &self.ids[lo..hi]
    }

    /// True when no `(state, symbol)` pair has more than one transition.
    pub fn is_deterministic(&self) -> bool {
        self.deterministic
    }

    pub fn is_input_symbol(&self, s: SymbolId) -> bool {
        self.parts.input_symbols.contains(&s)
    }

    /// Parses a string of single-character input symbol names, or
    /// whitespace-separated names when the string contains spaces.
    pub fn parse_input(&self, text: &str) -> Option<Vec<SymbolId>> {
        let tokens: Vec<&str> = if text.contains(char::is_whitespace) {
            text.split_whitespace().collect()
        } else {
            text.char_indices().map(|(i, c)| &text[i..i + c.len_utf8()]).collect()
        };
        tokens
            .into_iter()
            .map(|t| self.symbol_by_name(t).filter(|s| self.is_input_symbol(*s)))
            .collect()
    }

    pub fn format_input(&self, input: &[SymbolId]) -> String {
        let names: Vec<&str> = input.iter().map(|s| self.symbol_name(*s)).collect();
        if names.iter().all(|n| n.chars().count() == 1) {
            names.concat()
        } else {
            names.join(" ")
        }
    }

    /// Every transition that moves the head left ends in one of these states.
    pub fn left_move_targets(&self) -> Vec<StateId> {
        let mut seen = vec![false; self.state_count()];
        for t in &self.parts.transitions {
            if t.mv == Move::Left && t.to.index() < seen.len() {
                seen[t.to.index()] = true;
            }
        }
        seen.iter()
            .enumerate()
            .filter(|(_, s)| **s)
            .map(|(i, _)| StateId(i as u32))
            .collect()
    }
}

/// Incremental construction by name.
#[derive(Default)]
pub struct MachineBuilder {
    parts: MachineParts,
    state_index: HashMap<String, StateId>,
    symbol_index: HashMap<String, SymbolId>,
    blank_set: bool,
}

impl MachineBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn state(&mut self, name: &str) -> StateId {
        if let Some(id) = self.state_index.get(name) {
            return *id;
        }
        let id = StateId(self.parts.states.len() as u32);
        self.parts.states.push(name.to_string());
        self.state_index.insert(name.to_string(), id);
        id
    }

    pub fn symbol(&mut self, name: &str) -> SymbolId {
        if let Some(id) = self.symbol_index.get(name) {
            return *id;
        }
        let id = SymbolId(self.parts.symbols.len() as u32);
        self.parts.symbols.push(name.to_string());
        self.symbol_index.insert(name.to_string(), id);
        id
    }

    pub fn has_state(&self, name: &str) -> bool {
        self.state_index.contains_key(name)
    }

    pub fn has_symbol(&self, name: &str) -> bool {
        self.symbol_index.contains_key(name)
    }

    pub fn input_symbol(&mut self, name: &str) -> SymbolId {
        let id = self.symbol(name);
        if !self.parts.input_symbols.contains(&id) {
            self.parts.input_symbols.push(id);
        }
        id
    }

    pub fn blank(&mut self, name: &str) -> SymbolId {
        let id = self.symbol(name);
        self.parts.blank = id;
        self.blank_set = true;
        id
    }

    pub fn initial(&mut self, name: &str) -> StateId {
        let id = self.state(name);
        self.parts.initial = id;
        id
    }

    pub fn accepting(&mut self, name: &str) -> StateId {
        let id = self.state(name);
        if !self.parts.accepting.contains(&id) {
            self.parts.accepting.push(id);
        }
        id
    }

    pub fn rejecting(&mut self, name: &str) -> StateId {
        let id = self.state(name);
        if !self.parts.rejecting.contains(&id) {
            self.parts.rejecting.push(id);
        }
        id
    }

    pub fn rule(&mut self, from: &str, read: &str, to: &str, write: &str, mv: Move) -> &mut Self {
        let t = Transition {
            from: self.state(from),
            read: self.symbol(read),
            to: self.state(to),
            write: self.symbol(write),
            mv,
        };
        self.parts.transitions.push(t);
        self
    }

    pub fn push(&mut self, t: Transition) {
        self.parts.transitions.push(t);
    }

    pub fn build(self) -> MachineSpec {
        MachineSpec::new(self.parts)
    }
}

/// One way a machine description breaks the model's rules.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    WritesBlank { transition: usize },
    LeavesHaltingState { transition: usize, state: String },
    UndeclaredState { transition: usize },
    UndeclaredSymbol { transition: usize },
    AcceptAndReject { state: String },
    UndeclaredInitial,
    UndeclaredHalting { index: usize },
    UndeclaredBlank,
    BlankIsInput,
    UndeclaredInputSymbol { index: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::WritesBlank { transition } => {
                write!(f, "transition #{transition} writes the blank symbol")
            }
            Violation::LeavesHaltingState { transition, state } => {
                write!(f, "transition #{transition} leaves halting state {state}")
            }
            Violation::UndeclaredState { transition } => {
                write!(f, "transition #{transition} refers to an undeclared state")
            }
            Violation::UndeclaredSymbol { transition } => {
                write!(f, "transition #{transition} refers to an undeclared symbol")
            }
            Violation::AcceptAndReject { state } => {
                write!(f, "state {state} is both accepting and rejecting")
            }
            Violation::UndeclaredInitial => write!(f, "initial state is not declared"),
            Violation::UndeclaredHalting { index } => {
                write!(f, "halting state #{index} is not declared")
            }
            Violation::UndeclaredBlank => write!(f, "blank symbol is not declared"),
            Violation::BlankIsInput => write!(f, "blank symbol is listed as an input symbol"),
            Violation::UndeclaredInputSymbol { index } => {
                write!(f, "input symbol #{index} is not declared")
            }
        }
    }
}

/// Checks every structural rule of the model; an empty report means the spec is well formed.
pub fn validate_machine(spec: &MachineSpec) -> Vec<Violation> {
    let p = spec.parts();
    let ns = p.states.len();
    let ng = p.symbols.len();
    let mut out = Vec::new();
    if p.initial.index() >= ns {
        out.push(Violation::UndeclaredInitial);
    }
    if p.blank.index() >= ng {
        out.push(Violation::UndeclaredBlank);
    }
    for (i, s) in p.input_symbols.iter().enumerate() {
        if s.index() >= ng {
            out.push(Violation::UndeclaredInputSymbol { index: i });
        } else if *s == p.blank {
            out.push(Violation::BlankIsInput);
        }
    }
    for (i, s) in p.accepting.iter().chain(&p.rejecting).enumerate() {
        if s.index() >= ns {
            out.push(Violation::UndeclaredHalting { index: i });
        }
    }
    for s in &p.accepting {
        if p.rejecting.contains(s) {
            out.push(Violation::AcceptAndReject {
                state: spec.state_name(*s).to_string(),
            });
        }
    }
    for (i, t) in p.transitions.iter().enumerate() {
        if t.from.index() >= ns || t.to.index() >= ns {
            out.push(Violation::UndeclaredState { transition: i });
            continue;
        }
        if t.read.index() >= ng || t.write.index() >= ng {
            out.push(Violation::UndeclaredSymbol { transition: i });
            continue;
        }
        if t.write == p.blank {
            out.push(Violation::WritesBlank { transition: i });
        }
        if spec.is_halting(t.from) {
            out.push(Violation::LeavesHaltingState {
                transition: i,
                state: spec.state_name(t.from).to_string(),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn acceptor() -> MachineBuilder {
        let mut b = MachineBuilder::new();
        b.blank("_");
        b.input_symbol("a");
        b.initial("q0");
        b.accepting("acc");
        b
    }

    #[test]
    fn well_formed_single_state_acceptor_has_no_violations() {
        let mut b = MachineBuilder::new();
        b.blank("_");
        b.input_symbol("a");
        b.initial("q0");
        b.accepting("q0");
        assert!(validate_machine(&b.build()).is_empty());
    }

    #[test]
    fn blank_write_is_reported() {
        let mut b = acceptor();
        b.rule("q0", "a", "acc", "_", Move::Right);
        let report = validate_machine(&b.build());
        assert_eq!(report, vec![Violation::WritesBlank { transition: 0 }]);
    }

    #[test]
    fn transition_out_of_accepting_state_is_reported() {
        let mut b = acceptor();
        b.rule("acc", "a", "q0", "a", Move::Right);
        let report = validate_machine(&b.build());
        assert!(matches!(
            report.as_slice(),
            [Violation::LeavesHaltingState { transition: 0, .. }]
        ));
    }

    #[test]
    fn undeclared_references_are_reported() {
        let mut parts = acceptor().build().parts().clone();
        parts.transitions.push(Transition {
            from: StateId(0),
            read: SymbolId(9),
            to: StateId(0),
            write: SymbolId(1),
            mv: Move::Stay,
        });
        parts.transitions.push(Transition {
            from: StateId(7),
            read: SymbolId(1),
            to: StateId(0),
            write: SymbolId(1),
            mv: Move::Stay,
        });
        let spec = MachineSpec::new(parts);
        let report = validate_machine(&spec);
        assert_eq!(
            report,
            vec![
                Violation::UndeclaredSymbol { transition: 0 },
                Violation::UndeclaredState { transition: 1 }
            ]
        );
        assert!(spec.applicable(StateId(0), SymbolId(1)).is_empty());
    }

    #[test]
    fn dispatch_keeps_declaration_order() {
        let mut b = acceptor();
        b.rule("q0", "a", "q1", "a", Move::Right);
        b.rule("q0", "a", "q0", "a", Move::Stay);
        b.rule("q0", "_", "acc", "a", Move::Stay);
        let spec = b.build();
        let a = spec.symbol_by_name("a").unwrap();
        assert_eq!(spec.applicable(spec.initial(), a), &[0, 1]);
        assert!(!spec.is_deterministic());
    }
}
