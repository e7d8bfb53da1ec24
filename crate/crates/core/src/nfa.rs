//! The finite automaton whose states are bounded crossing sequences.
//!
//! Reading the input left to right, the automaton guesses the crossing
//! sequence at each boundary and checks each square locally. A state also
//! records whether the guessed computation has already accepted inside the
//! input; if so the blank region to the right only has to be left cleanly.
//! Otherwise it must accept there.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use crate::crossing::{local_runs, LocalRunOutcome, Terminal};
use crate::exec::{accepts, Acceptance, RunError};
use crate::format::{is_name, FormatError};
use crate::machine::{MachineSpec, StateId, SymbolId};

type Seq = Vec<StateId>;

/// Demand-driven least fixpoints over the blank region to the right of the input.
pub struct BlankRegion<'a> {
    spec: &'a MachineSpec,
    k: usize,
    edges: HashMap<Seq, Vec<LocalRunOutcome>>,
    closable: HashMap<Seq, bool>,
    accepting: HashMap<Seq, bool>,
    truncated: bool,
}

impl<'a> BlankRegion<'a> {
    pub fn new(spec: &'a MachineSpec, k: usize) -> Self {
        BlankRegion {
            spec,
            k,
            edges: HashMap::new(),
            closable: HashMap::new(),
            accepting: HashMap::new(),
            truncated: false,
        }
    }

    /// Whether some local run was cut at the length bound.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    fn outcomes(&mut self, c: &Seq) -> &[LocalRunOutcome] {
        if !self.edges.contains_key(c) {
            let runs = local_runs(self.spec, c, self.spec.blank(), self.k);
            self.truncated |= runs.truncated;
            self.edges.insert(c.clone(), runs.outcomes);
        }
        &self.edges[c]
    }

    /// Sequences reachable from `c` by passing through blank squares.
    fn region(&mut self, c: &Seq) -> Vec<Seq> {
        let mut seen: HashMap<Seq, ()> = HashMap::new();
        let mut order = Vec::new();
        let mut queue = VecDeque::from([c.clone()]);
        seen.insert(c.clone(), ());
        while let Some(s) = queue.pop_front() {
            let next: Vec<Seq> = self
                .outcomes(&s)
                .iter()
                .filter(|o| o.terminal == Terminal::None)
                .map(|o| o.right_sequence.clone())
                .collect();
            for r in next {
                if seen.insert(r.clone(), ()).is_none() {
                    queue.push_back(r);
                }
            }
            order.push(s);
        }
        order
    }

    fn solve(&mut self, nodes: &[Seq], seed: impl Fn(&mut Self, &Seq) -> bool) -> HashMap<Seq, bool> {
        let mut good: HashMap<Seq, bool> = nodes.iter().map(|s| (s.clone(), false)).collect();
        for s in nodes {
            if seed(self, s) {
                good.insert(s.clone(), true);
            }
        }
        loop {
            let mut changed = false;
            for s in nodes {
                if good[s] {
                    continue;
                }
                let hit = self.edges[s]
                    .iter()
                    .any(|o| o.terminal == Terminal::None && good.get(&o.right_sequence) == Some(&true));
                if hit {
                    good.insert(s.clone(), true);
                    changed = true;
                }
            }
            if !changed {
                return good;
            }
        }
    }

    /// The blank region can be crossed with left boundary sequence `c`
    /// without halting and with finitely many squares visited.
    pub fn closable(&mut self, c: &Seq) -> bool {
        if let Some(&v) = self.closable.get(c) {
            return v;
        }
        let nodes = self.region(c);
        let solved = self.solve(&nodes, |_, s| s.is_empty());
        self.closable.extend(solved);
        self.closable[c]
    }

    /// Some computation starting with boundary sequence `c` accepts in the
    /// blank region.
    pub fn accepting(&mut self, c: &Seq) -> bool {
        if let Some(&v) = self.accepting.get(c) {
            return v;
        }
        let nodes = self.region(c);
        let solved = self.solve(&nodes, |me, s| {
            let halts: Vec<Seq> = me.edges[s]
                .iter()
                .filter(|o| o.terminal == Terminal::AcceptedInSquare)
                .map(|o| o.right_sequence.clone())
                .collect();
            halts.iter().any(|r| me.closable(r))
        });
        self.accepting.extend(solved);
        self.accepting[c]
    }
}

/// All sequences of length at most `k` over the machine's states, in
/// shortlex order.
pub fn sequences_upto(states: usize, k: usize) -> Vec<Seq> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..k {
        let mut next = Vec::new();
        for s in &layer {
            for q in 0..states {
                let mut t: Seq = s.clone();
                t.push(StateId(q as u32));
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Every sequence of length at most `k` that leads to acceptance when only
/// blanks lie to its right.
pub fn blank_accepting_set(spec: &MachineSpec, k: usize) -> Vec<Seq> {
    let mut region = BlankRegion::new(spec, k);
    sequences_upto(spec.state_count(), k)
        .into_iter()
        .filter(|c| region.accepting(c))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NfaNode {
    pub seq: Vec<String>,
    /// The computation has already accepted to the left.
    pub halted: bool,
}

impl NfaNode {
    pub fn render(&self) -> String {
        let inner: Vec<String> = self.seq.iter().map(|s| format!("\"{s}\"")).collect();
        format!("({}){}", inner.join(", "), if self.halted { "!" } else { "" })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NfaSpec {
    pub k: usize,
    pub alphabet: Vec<String>,
    pub states: Vec<NfaNode>,
    pub initial: usize,
    pub finals: Vec<bool>,
    /// `delta[state][letter]`: sorted target states.
    pub delta: Vec<Vec<Vec<usize>>>,
    /// Some local behaviour exceeded `k` and was left out.
    pub truncated: bool,
}

impl NfaSpec {
    pub fn final_count(&self) -> usize {
        self.finals.iter().filter(|f| **f).count()
    }

    pub fn transition_count(&self) -> usize {
        self.delta.iter().flatten().map(Vec::len).sum()
    }

    pub fn letter(&self, name: &str) -> Option<usize> {
        self.alphabet.iter().position(|a| a == name)
    }

    /// Parses a word the same way machine inputs are parsed.
    pub fn parse_word(&self, text: &str) -> Option<Vec<usize>> {
        let tokens: Vec<&str> = if text.contains(char::is_whitespace) {
            text.split_whitespace().collect()
        } else {
            text.char_indices().map(|(i, c)| &text[i..i + c.len_utf8()]).collect()
        };
        tokens.into_iter().map(|t| self.letter(t)).collect()
    }
}

/// Builds the crossing-sequence automaton for sequences of length at most
/// `k`, keeping only states reachable from `(q0)`.
pub fn build_crossing_nfa(spec: &MachineSpec, k: usize) -> NfaSpec {
    let sigma: Vec<SymbolId> = spec.input_symbols().to_vec();
    let mut index: HashMap<(Seq, bool), usize> = HashMap::new();
    let mut nodes: Vec<(Seq, bool)> = Vec::new();
    let mut delta: Vec<Vec<Vec<usize>>> = Vec::new();
    let mut truncated = false;
    let start = (vec![spec.initial()], false);
    index.insert(start.clone(), 0);
    nodes.push(start);
    let mut i = 0;
    while i < nodes.len() {
        let (seq, halted) = nodes[i].clone();
        let mut row = Vec::with_capacity(sigma.len());
        for &a in &sigma {
            let runs = local_runs(spec, &seq, a, k);
            truncated |= runs.truncated;
            let mut targets: Vec<usize> = Vec::new();
            for o in runs.outcomes {
                let next_halted = match (o.terminal, halted) {
                    (Terminal::None, h) => h,
                    (Terminal::AcceptedInSquare, false) => true,
                    _ => continue,
                };
                let key = (o.right_sequence, next_halted);
                let id = *index.entry(key.clone()).or_insert_with(|| {
                    nodes.push(key);
                    nodes.len() - 1
                });
                targets.push(id);
            }
            targets.sort_unstable();
            targets.dedup();
            row.push(targets);
        }
        delta.push(row);
        i += 1;
    }
    let mut blank = BlankRegion::new(spec, k);
    let finals: Vec<bool> = nodes
        .iter()
        .map(|(seq, halted)| {
            if *halted {
                blank.closable(seq)
            } else {
                blank.accepting(seq)
            }
        })
        .collect();
    truncated |= blank.truncated();
    let name = |q: &StateId| spec.state_name(*q).to_string();
    NfaSpec {
        k,
        alphabet: sigma.iter().map(|s| spec.symbol_name(*s).to_string()).collect(),
        states: nodes
            .iter()
            .map(|(seq, halted)| NfaNode {
                seq: seq.iter().map(name).collect(),
                halted: *halted,
            })
            .collect(),
        initial: 0,
        finals,
        delta,
        truncated,
    }
}

/// Subset simulation. Letters index `nfa.alphabet`.
pub fn nfa_run(nfa: &NfaSpec, word: &[usize]) -> bool {
    let n = nfa.states.len();
    let mut current = vec![false; n];
    current[nfa.initial] = true;
    for &a in word {
        let mut next = vec![false; n];
        for (s, on) in current.iter().enumerate() {
            if *on {
                if let Some(targets) = nfa.delta[s].get(a) {
                    for &t in targets {
                        next[t] = true;
                    }
                }
            }
        }
        current = next;
        if !current.iter().any(|x| *x) {
            return false;
        }
    }
    current.iter().zip(&nfa.finals).any(|(on, f)| *on && *f)
}

pub fn write_nfa(nfa: &NfaSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "k: {}", nfa.k);
    let _ = writeln!(out, "alphabet: {}", nfa.alphabet.join(" "));
    let _ = writeln!(out, "initial: {}", nfa.states[nfa.initial].render());
    let finals: Vec<String> = nfa
        .states
        .iter()
        .zip(&nfa.finals)
        .filter(|(_, f)| **f)
        .map(|(s, _)| s.render())
        .collect();
    let _ = writeln!(out, "final: {}", finals.join(" "));
    out.push_str("transitions:\n");
    for (s, row) in nfa.delta.iter().enumerate() {
        for (a, targets) in row.iter().enumerate() {
            for &t in targets {
                let _ = writeln!(
                    out,
                    "{} {} -> {}",
                    nfa.states[s].render(),
                    nfa.alphabet[a],
                    nfa.states[t].render()
                );
            }
        }
    }
    out
}

/// Reads one `("q0", "q1")!` node; returns it with the unread rest.
fn parse_node(text: &str) -> Option<(NfaNode, &str)> {
    let t = text.trim_start().strip_prefix('(')?;
    let close = t.find(')')?;
    let inner = &t[..close];
    let mut seq = Vec::new();
    if !inner.trim().is_empty() {
        for part in inner.split(',') {
            let name = part.trim().strip_prefix('"')?.strip_suffix('"')?;
            if name.is_empty() || name.contains('"') {
                return None;
            }
            seq.push(name.to_string());
        }
    }
    let rest = &t[close + 1..];
    let (halted, rest) = match rest.strip_prefix('!') {
        Some(r) => (true, r),
        None => (false, rest),
    };
    Some((NfaNode { seq, halted }, rest))
}

pub fn parse_nfa(text: &str) -> Result<NfaSpec, FormatError> {
    let err = |line: usize, message: &str| FormatError {
        line,
        message: message.to_string(),
    };
    let mut k = None;
    let mut alphabet: Option<Vec<String>> = None;
    let mut initial: Option<NfaNode> = None;
    let mut finals: Vec<NfaNode> = Vec::new();
    let mut edges: Vec<(NfaNode, String, NfaNode)> = Vec::new();
    let mut in_transitions = false;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if in_transitions && line.starts_with('(') {
            let (from, rest) = parse_node(line).ok_or_else(|| err(line_no, "malformed source state"))?;
            let (letter, rest) = rest.split_once("->").ok_or_else(|| err(line_no, "expected `->`"))?;
            let letter = letter.trim();
            if !is_name(letter) {
                return Err(err(line_no, "malformed letter"));
            }
            let (to, rest) = parse_node(rest).ok_or_else(|| err(line_no, "malformed target state"))?;
            if !rest.trim().is_empty() {
                return Err(err(line_no, "trailing text"));
            }
            edges.push((from, letter.to_string(), to));
            continue;
        }
        let (key, value) = line.split_once(':').ok_or_else(|| err(line_no, "unrecognised line"))?;
        match key.trim() {
            "k" => k = Some(value.trim().parse::<usize>().map_err(|_| err(line_no, "bad k"))?),
            "alphabet" => alphabet = Some(value.split_whitespace().map(str::to_string).collect()),
            "initial" => {
                let (node, rest) = parse_node(value).ok_or_else(|| err(line_no, "malformed initial state"))?;
                if !rest.trim().is_empty() {
                    return Err(err(line_no, "trailing text"));
                }
                initial = Some(node);
            }
            "final" => {
                let mut rest = value;
                while !rest.trim().is_empty() {
                    let (node, r) = parse_node(rest).ok_or_else(|| err(line_no, "malformed final state"))?;
                    finals.push(node);
                    rest = r;
                }
            }
            "transitions" => in_transitions = true,
            _ => return Err(err(line_no, "unknown section")),
        }
    }
    let last = text.lines().count().max(1);
    let k = k.ok_or_else(|| err(last, "missing `k:`"))?;
    let alphabet = alphabet.ok_or_else(|| err(last, "missing `alphabet:`"))?;
    let initial = initial.ok_or_else(|| err(last, "missing `initial:`"))?;
    let mut states: Vec<NfaNode> = vec![initial];
    let mut index: HashMap<NfaNode, usize> = HashMap::from([(states[0].clone(), 0)]);
    let mut intern = |n: NfaNode, states: &mut Vec<NfaNode>| {
        *index.entry(n.clone()).or_insert_with(|| {
            states.push(n);
            states.len() - 1
        })
    };
    let mut raw_edges = Vec::new();
    for (from, letter, to) in edges {
        let a = alphabet
            .iter()
            .position(|x| *x == letter)
            .ok_or_else(|| err(last, "transition on a letter outside the alphabet"))?;
        let f = intern(from, &mut states);
        let t = intern(to, &mut states);
        raw_edges.push((f, a, t));
    }
    let final_ids: Vec<usize> = finals.into_iter().map(|n| intern(n, &mut states)).collect();
    let mut delta = vec![vec![Vec::new(); alphabet.len()]; states.len()];
    for (f, a, t) in raw_edges {
        delta[f][a].push(t);
    }
    for row in &mut delta {
        for targets in row.iter_mut() {
            targets.sort_unstable();
            targets.dedup();
        }
    }
    let mut is_final = vec![false; states.len()];
    for f in final_ids {
        is_final[f] = true;
    }
    Ok(NfaSpec {
        k,
        alphabet,
        states,
        initial: 0,
        finals: is_final,
        delta,
        truncated: false,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Disagreement {
    pub word: String,
    pub length: usize,
    pub machine: bool,
    pub nfa: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Comparison {
    /// First word in shortlex order on which the two differ.
    pub disagreement: Option<Disagreement>,
    /// Words the machine could not decide within fuel or the branch cap.
    pub inconclusive: Vec<String>,
    pub checked: usize,
}

/// Compares machine acceptance with `nfa_run` on every word up to
/// `max_len`, stopping at the first difference.
pub fn compare_machine_nfa(
    spec: &MachineSpec,
    nfa: &NfaSpec,
    max_len: usize,
    fuel: u64,
    max_branches: usize,
) -> Result<Comparison, RunError> {
    let letters: Vec<SymbolId> = nfa
        .alphabet
        .iter()
        .map(|name| {
            spec.symbol_by_name(name)
                .filter(|s| spec.is_input_symbol(*s))
                .ok_or(RunError::InvalidInput { position: 0 })
        })
        .collect::<Result<_, _>>()?;
    let mut report = Comparison::default();
    for len in 0..=max_len {
        let count = (letters.len() as u128).checked_pow(len as u32).unwrap_or(u128::MAX);
        if letters.is_empty() && len > 0 {
            break;
        }
        let mut digits = vec![0usize; len];
        for _ in 0..count {
            let input: Vec<SymbolId> = digits.iter().map(|&d| letters[d]).collect();
            let word = spec.format_input(&input);
            report.checked += 1;
            let by_nfa = nfa_run(nfa, &digits);
            match accepts(spec, &input, fuel, max_branches)? {
                Acceptance::Inconclusive => report.inconclusive.push(word),
                verdict => {
                    let by_machine = verdict == Acceptance::Accepts;
                    if by_machine != by_nfa {
                        report.disagreement = Some(Disagreement {
                            word,
                            length: len,
                            machine: by_machine,
                            nfa: by_nfa,
                        });
                        return Ok(report);
                    }
                }
            }
            for d in digits.iter_mut().rev() {
                *d += 1;
                if *d < letters.len() {
                    break;
                }
                *d = 0;
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{MachineBuilder, Move};

    fn modulo(m: usize) -> MachineSpec {
        let mut b = MachineBuilder::new();
        b.blank("_");
        b.input_symbol("a");
        b.initial("r0");
        b.accepting("acc");
        b.rejecting("rej");
        for i in 0..m {
            let (from, to) = (format!("r{i}"), format!("r{}", (i + 1) % m));
            b.rule(&from, "a", &to, "a", Move::Right);
            let end = if i == 0 { "acc" } else { "rej" };
            b.rule(&from, "_", end, "a", Move::Stay);
        }
        b.build()
    }

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

    #[test]
    fn blank_acceptance_seeds() {
        let spec = sweeper();
        let set = blank_accepting_set(&spec, 1);
        assert!(set.contains(&vec![spec.initial()]));
        assert!(!set.contains(&vec![]));
        let mut b = MachineBuilder::new();
        b.blank("_");
        b.input_symbol("a");
        b.initial("q0");
        b.rule("q0", "_", "q0", "a", Move::Right);
        assert!(blank_accepting_set(&b.build(), 2).is_empty());
    }

    #[test]
    fn blank_sets_grow_with_k() {
        let spec = modulo(3);
        let small = blank_accepting_set(&spec, 1);
        let large = blank_accepting_set(&spec, 2);
        assert!(small.iter().all(|s| large.contains(s)));
    }

    #[test]
    fn mod3_nfa_matches_machine() {
        let spec = modulo(3);
        let nfa = build_crossing_nfa(&spec, 1);
        assert!(nfa.states.len() <= 4);
        for n in 0..=20 {
            assert_eq!(nfa_run(&nfa, &vec![0; n]), n % 3 == 0, "n = {n}");
        }
        let cmp = compare_machine_nfa(&spec, &nfa, 20, 1000, 10).unwrap();
        assert_eq!(cmp.disagreement, None);
        assert_eq!(cmp.checked, 21);
    }

    #[test]
    fn mod3_nfa_against_mod2_machine() {
        let nfa = build_crossing_nfa(&modulo(3), 1);
        let cmp = compare_machine_nfa(&modulo(2), &nfa, 20, 1000, 10).unwrap();
        let d = cmp.disagreement.unwrap();
        assert_eq!((d.word.as_str(), d.machine, d.nfa), ("aa", true, false));
    }

    #[test]
    fn empty_word_depends_on_initial_finality() {
        let nfa = build_crossing_nfa(&sweeper(), 1);
        assert!(nfa_run(&nfa, &[]));
        let nfa = build_crossing_nfa(&modulo(2), 0);
        assert!(nfa_run(&nfa, &[]));
        assert!(!nfa_run(&nfa, &[0, 0]));
        let mut b = MachineBuilder::new();
        b.blank("_");
        b.input_symbol("a");
        b.initial("q0");
        b.accepting("acc");
        b.rule("q0", "a", "acc", "a", Move::Stay);
        let nfa = build_crossing_nfa(&b.build(), 1);
        assert!(!nfa_run(&nfa, &[]));
        assert!(nfa_run(&nfa, &[0, 0, 0]));
    }

    #[test]
    fn guessing_a_return_does_not_fake_acceptance() {
        // Moves right, and some other rule moves left into `acc`; the sink
        // construction would accept "a" here, the machine does not.
        let mut b = MachineBuilder::new();
        b.blank("_");
        b.input_symbol("a");
        b.initial("q0");
        b.accepting("acc");
        b.rule("q0", "a", "q1", "a", Move::Right);
        b.rule("q1", "a", "acc", "a", Move::Left);
        let spec = b.build();
        let nfa = build_crossing_nfa(&spec, 2);
        let cmp = compare_machine_nfa(&spec, &nfa, 6, 100, 10).unwrap();
        assert_eq!(cmp.disagreement, None);
        assert!(!nfa_run(&nfa, &[0]));
        assert!(nfa_run(&nfa, &[0, 0]));
    }

    #[test]
    fn export_round_trip() {
        let nfa = build_crossing_nfa(&modulo(3), 2);
        let text = write_nfa(&nfa);
        let back = parse_nfa(&text).unwrap();
        for n in 0..12 {
            assert_eq!(nfa_run(&back, &vec![0; n]), nfa_run(&nfa, &vec![0; n]));
        }
        assert_eq!(write_nfa(&back).lines().count(), text.lines().count());
        assert!(parse_nfa("k: 1\nalphabet: a\n").is_err());
    }
}
