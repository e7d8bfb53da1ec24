//! Seeded random small machines.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::machine::{MachineBuilder, MachineSpec, Move};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuzzConfig {
    /// Total states, halting ones included.
    pub max_states: usize,
    /// Total tape symbols, blank included.
    pub max_symbols: usize,
    /// Most transitions per (state, symbol) pair.
    pub max_choices: usize,
    /// Chance that a (state, symbol) pair has any transition.
    pub density: f64,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            max_states: 4,
            max_symbols: 3,
            max_choices: 2,
            density: 0.8,
        }
    }
}

const MOVES: [Move; 3] = [Move::Left, Move::Right, Move::Stay];

/// One random machine. There is always an accepting state; a rejecting state
/// is added when room allows and the coin says so.
pub fn random_machine(rng: &mut impl Rng, cfg: &FuzzConfig) -> MachineSpec {
    assert!(
        cfg.max_states >= 2 && cfg.max_symbols >= 2,
        "need room for q0, acc, blank and a"
    );
    let mut b = MachineBuilder::new();
    b.blank("_");
    b.input_symbol("a");
    let mut symbols = vec!["_".to_string(), "a".to_string()];
    if cfg.max_symbols >= 3 && rng.gen_bool(0.7) {
        if rng.gen_bool(0.5) {
            b.input_symbol("b");
        } else {
            b.symbol("b");
        }
        symbols.push("b".into());
    }
    let with_reject = cfg.max_states >= 3 && rng.gen_bool(0.5);
    let working = rng.gen_range(1..=cfg.max_states - 1 - usize::from(with_reject));
    let names: Vec<String> = (0..working).map(|i| format!("q{i}")).collect();
    b.initial("q0");
    for n in &names {
        b.state(n);
    }
    b.accepting("acc");
    let mut targets = names.clone();
    targets.push("acc".into());
    if with_reject {
        b.rejecting("rej");
        targets.push("rej".into());
    }
    for from in &names {
        for read in &symbols {
            if !rng.gen_bool(cfg.density) {
                continue;
            }
            for _ in 0..rng.gen_range(1..=cfg.max_choices) {
                let to = targets.choose(rng).expect("targets");
                let write = symbols[rng.gen_range(1..symbols.len())].clone();
                let mv = *MOVES.choose(rng).expect("moves");
                b.rule(from, read, to, &write, mv);
            }
        }
    }
    b.build()
}

/// `count` machines from `seed`, skipping those `keep` rejects. Gives up
/// after `count * 100` draws.
pub fn corpus(seed: u64, count: usize, cfg: &FuzzConfig, keep: impl Fn(&MachineSpec) -> bool) -> Vec<MachineSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut draws = 0;
    while out.len() < count && draws < count * 100 {
        draws += 1;
        let m = random_machine(&mut rng, cfg);
        if keep(&m) {
            out.push(m);
        }
    }
    out
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::validate_machine;

    #[test]
    fn machines_respect_size_limits_and_validate() {
        let cfg = FuzzConfig::default();
        for m in corpus(7, 200, &cfg, |_| true) {
            assert!(m.state_count() <= 4);
            assert!(m.symbol_count() <= 3);
            assert!(validate_machine(&m).is_empty());
        }
    }

    #[test]
    fn same_seed_same_corpus() {
        let cfg = FuzzConfig::default();
        let a: Vec<String> = corpus(3, 20, &cfg, |_| true)
            .iter()
            .map(crate::format::write_machine)
            .collect();
        let b: Vec<String> = corpus(3, 20, &cfg, |_| true)
            .iter()
            .map(crate::format::write_machine)
            .collect();
        assert_eq!(a, b);
    }
}
