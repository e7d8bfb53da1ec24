//! Enumerates reachable control states and written cells into a machine.

use std::collections::HashMap;

use super::cell::Cell;
use super::control::{Act, Action, Control, Ctrl};
use super::flatten::Op;
use super::{CompileError, CompiledMachine, TrackLayout};
use crate::machine::{MachineParts, MachineSpec, StateId, SymbolId, Transition};

const BLANK: &str = "_";

struct Interner<K> {
    ids: HashMap<K, u32>,
    items: Vec<K>,
}

impl<K: Clone + Eq + std::hash::Hash> Interner<K> {
    fn new() -> Self {
        Interner {
            ids: HashMap::new(),
            items: Vec::new(),
        }
    }

    fn id(&mut self, k: K) -> u32 {
        if let Some(&i) = self.ids.get(&k) {
            return i;
        }
        let i = self.items.len() as u32;
        self.ids.insert(k.clone(), i);
        self.items.push(k);
        i
    }
}

fn resolve(control: &Control, ctrl: Ctrl, read: Option<Cell>) -> Result<Vec<Act>, CompileError> {
    let mut cur = ctrl;
    // Delegation never revisits a state unless a loop body is empty.
    for _ in 0..=control.ops.len() * 4 + 8 {
        match control.step(cur, read) {
            None => return Ok(Vec::new()),
            Some(Action::Moves(acts)) => return Ok(acts),
            Some(Action::Delegate(next)) => cur = next,
        }
    }
    Err(CompileError::EmptyLoop)
}

pub(crate) fn build(ops: &[Op], layout: &TrackLayout) -> Result<CompiledMachine, CompileError> {
    let control = Control {
        ops,
        flags: layout.flag_mask(),
    };
    let mut states: Interner<Ctrl> = Interner::new();
    let mut symbols: Interner<Option<Cell>> = Interner::new();
    symbols.id(None);
    symbols.id(Some(Cell::PRISTINE));
    let accept = states.id(Ctrl::Accept);
    let reject = states.id(Ctrl::Reject);
    let initial = states.id(Ctrl::Start(0));

    let mut transitions = Vec::new();
    let mut done: Vec<usize> = Vec::new();
    loop {
        let mut progress = false;
        let mut s = 0;
        while s < states.items.len() {
            done.resize(states.items.len(), 0);
            let ctrl = states.items[s];
            while done[s] < symbols.items.len() {
                let sym = done[s];
                done[s] += 1;
                progress = true;
                if matches!(ctrl, Ctrl::Accept | Ctrl::Reject) {
                    continue;
                }
                let read = symbols.items[sym];
                for a in resolve(&control, ctrl, read)? {
                    let to = states.id(a.next);
                    let write = symbols.id(Some(a.write));
                    transitions.push(Transition {
                        from: StateId(s as u32),
                        read: SymbolId(sym as u32),
                        to: StateId(to),
                        write: SymbolId(write),
                        mv: a.mv,
                    });
                }
            }
            s += 1;
        }
        if !progress {
            break;
        }
    }

    let width = layout.len();
    let parts = MachineParts {
        states: states.items.iter().map(|c| c.name(width)).collect(),
        symbols: symbols
            .items
            .iter()
            .map(|c| c.map_or(BLANK.to_string(), |c| c.name(width)))
            .collect(),
        input_symbols: vec![SymbolId(1)],
        blank: SymbolId(0),
        initial: StateId(initial),
        accepting: vec![StateId(accept)],
        rejecting: vec![StateId(reject)],
        transitions,
    };
    Ok(CompiledMachine {
        spec: MachineSpec::new(parts),
        layout: layout.clone(),
        cells: symbols.items.clone(),
        pcs: states.items.iter().map(|c| c.pc()).collect(),
        kinds: ops.iter().map(Op::kind).collect(),
    })
}
