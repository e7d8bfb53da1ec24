//! Named machines with their reference languages and expected bounds.

use crate::exec::GuessScript;
use crate::gadget::{
    compile, Candidates, CompiledMachine, CountFactor, Counter, GadgetProgram, GuessBinary, Marking, NextPrimeScan,
    Phase, Pred, TrackLayout,
};
use crate::machine::{MachineBuilder, MachineSpec, Move};
use crate::metering::growth::Shape;
use crate::metering::MeasureKind;
use crate::oracles::{self, OracleError};

/// Reference membership test for the language a catalog machine decides.
#[derive(Clone, Copy)]
pub enum Oracle {
    /// Over inputs a^n.
    Unary(fn(u64) -> bool),
    /// Over words given as symbol names.
    Word(fn(&[&str]) -> bool),
}

impl Oracle {
    pub fn unary(&self, n: u64) -> Option<bool> {
        match self {
            Oracle::Unary(f) => Some(f(n)),
            Oracle::Word(_) => None,
        }
    }
}

impl std::fmt::Debug for Oracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Oracle::Unary(_) => f.write_str("Oracle::Unary"),
            Oracle::Word(_) => f.write_str("Oracle::Word"),
        }
    }
}

/// Expected growth of a measure: `value(n) = O(shape(n))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bound {
    pub kind: MeasureKind,
    pub shape: Shape,
}

pub type ScriptProvider = fn(u64) -> Result<GuessScript, OracleError>;

#[derive(Debug, Clone)]
pub struct MachineCatalogEntry {
    pub name: &'static str,
    pub summary: &'static str,
    pub spec: MachineSpec,
    /// Present for machines built by the gadget compiler.
    pub compiled: Option<CompiledMachine>,
    pub oracle: Oracle,
    pub time_bound: Bound,
    pub crossing_bound: Bound,
    /// Crossing sequences never exceed this length, on any input.
    pub crossing_k: Option<usize>,
    pub script: Option<ScriptProvider>,
}

fn entry(name: &'static str, summary: &'static str, spec: MachineSpec, oracle: Oracle) -> MachineCatalogEntry {
    MachineCatalogEntry {
        name,
        summary,
        spec,
        compiled: None,
        oracle,
        time_bound: Bound {
            kind: MeasureKind::Strong,
            shape: Shape::Linear,
        },
        crossing_bound: Bound {
            kind: MeasureKind::Strong,
            shape: Shape::Constant,
        },
        crossing_k: Some(1),
        script: None,
    }
}

fn unary_builder() -> MachineBuilder {
    let mut b = MachineBuilder::new();
    b.blank("_");
    b.input_symbol("a");
    b
}

/// Accepts every a^n in one left-to-right pass.
pub fn sweeper() -> MachineCatalogEntry {
    let mut b = unary_builder();
    b.initial("q0");
    b.accepting("acc");
    b.rule("q0", "a", "q0", "a", Move::Right);
    b.rule("q0", "_", "acc", "a", Move::Stay);
    entry("sweeper", "accepts a^n for every n", b.build(), Oracle::Unary(|_| true))
}

/// Accepts a^n with m | n in one pass.
pub fn modulo_sweeper(m: usize) -> MachineSpec {
    assert!(m >= 1, "modulus must be positive");
    let mut b = unary_builder();
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

pub fn mod3() -> MachineCatalogEntry {
    entry(
        "mod3",
        "accepts a^n with 3 | n",
        modulo_sweeper(3),
        Oracle::Unary(|n| n % 3 == 0),
    )
}

pub fn mod2() -> MachineCatalogEntry {
    entry(
        "mod2",
        "accepts a^n with n even",
        modulo_sweeper(2),
        Oracle::Unary(|n| n % 2 == 0),
    )
}

/// Checks parity on the way right, then walks back and accepts on cell 0.
pub fn bounce() -> MachineCatalogEntry {
    let mut b = unary_builder();
    b.symbol("A");
    b.symbol("S");
    b.initial("start");
    b.accepting("acc");
    b.rejecting("rej");
    b.rule("start", "a", "o", "S", Move::Right);
    b.rule("start", "_", "acc", "A", Move::Stay);
    b.rule("e", "a", "o", "a", Move::Right);
    b.rule("o", "a", "e", "a", Move::Right);
    b.rule("o", "_", "rej", "A", Move::Stay);
    b.rule("e", "_", "back", "A", Move::Left);
    b.rule("back", "a", "back", "a", Move::Left);
    b.rule("back", "S", "acc", "S", Move::Stay);
    let mut e = entry(
        "bounce",
        "accepts a^n with n even, returning to cell 0 before halting",
        b.build(),
        Oracle::Unary(|n| n % 2 == 0),
    );
    e.crossing_k = Some(2);
    e
}

/// Guesses which a is the last letter; accepts words over {a, b} ending in a.
pub fn last_a() -> MachineCatalogEntry {
    let mut b = MachineBuilder::new();
    b.blank("_");
    b.input_symbol("a");
    b.input_symbol("b");
    b.initial("scan");
    b.accepting("acc");
    b.rule("scan", "a", "scan", "a", Move::Right);
    b.rule("scan", "b", "scan", "b", Move::Right);
    b.rule("scan", "a", "end", "a", Move::Right);
    b.rule("end", "_", "acc", "a", Move::Stay);
    let mut e = entry(
        "last-a",
        "guesses the last letter; accepts words ending in a",
        b.build(),
        Oracle::Word(|w| w.last() == Some(&"a")),
    );
    e.time_bound.kind = MeasureKind::Accept;
    e
}

fn l0_count() -> Phase {
    Phase::CountFactor(CountFactor {
        base: 2,
        counters: vec![
            Counter::every_cell("c").modulo("T"),
            Counter::on_wrap_of("b", "c", "pend").modulo("T"),
        ],
        marking: Marking::Multiples,
    })
}

/// Program deciding L0: n is divisible by p_1..p_t and by no p_i^2, and not by p_(t+1).
pub fn program_l0() -> (GadgetProgram, TrackLayout) {
    let layout = TrackLayout::new().counter("c").counter("b").stored("T").flag("pend");
    let keep = || Phase::ShiftBack { keep: vec!["T".into()] };
    let program = GadgetProgram::new(vec![
        Phase::Load(vec![("T".into(), 2)]),
        l0_count(),
        Phase::RejectIf(Pred::nonzero("c")),
        Phase::RejectIf(Pred::zero("b")),
        Phase::LoopWhile(
            Pred::True,
            vec![
                keep(),
                Phase::NextPrimeScan(NextPrimeScan {
                    counter: "c".into(),
                    target: "T".into(),
                    candidates: Candidates::Unmarked,
                    prime_flag: None,
                }),
                keep(),
                l0_count(),
                Phase::AcceptIf(Pred::nonzero("c")),
                Phase::RejectIf(Pred::zero("b")),
            ],
        ),
    ]);
    (program, layout)
}

/// Program deciding L_AM: divides by prime powers in increasing order and
/// tests the first one that fails for being a power of 2.
pub fn program_lam() -> (GadgetProgram, TrackLayout) {
    let layout = TrackLayout::new().counter("c").stored("T").flag("F");
    let keep = || Phase::ShiftBack {
        keep: vec!["T".into(), "F".into()],
    };
    let program = GadgetProgram::new(vec![
        Phase::Load(vec![("T".into(), 2), ("F".into(), 1)]),
        Phase::LoopWhile(
            Pred::True,
            vec![
                Phase::CountFactor(CountFactor {
                    base: 2,
                    counters: vec![Counter::every_cell("c").modulo("T")],
                    marking: Marking::PrimeGated { flag: "F".into() },
                }),
                Phase::AcceptIf(Pred::nonzero("c").and(Pred::power_of_two("T"))),
                Phase::RejectIf(Pred::nonzero("c")),
                keep(),
                Phase::NextPrimeScan(NextPrimeScan {
                    counter: "c".into(),
                    target: "T".into(),
                    candidates: Candidates::UnmarkedOrX,
                    prime_flag: Some("F".into()),
                }),
                keep(),
            ],
        ),
    ]);
    (program, layout)
}

/// Program accepting a^n iff some guessed (s, t) has 2^s | n and t ∤ n.
pub fn program_colam() -> (GadgetProgram, TrackLayout) {
    let layout = TrackLayout::new().counter("cp").counter("ct").stored("pw").stored("t");
    let program = GadgetProgram::new(vec![
        Phase::GuessBinary(GuessBinary {
            power: "pw".into(),
            target: "t".into(),
        }),
        Phase::CountFactor(CountFactor {
            base: 2,
            counters: vec![
                Counter::every_cell("cp").modulo("pw"),
                Counter::every_cell("ct").modulo("t"),
            ],
            marking: Marking::None,
        }),
        Phase::AcceptIf(Pred::zero("cp").and(Pred::nonzero("ct"))),
    ]);
    (program, layout)
}

fn compiled_entry(
    name: &'static str,
    summary: &'static str,
    (program, layout): (GadgetProgram, TrackLayout),
    oracle: fn(u64) -> bool,
) -> MachineCatalogEntry {
    let compiled = compile(&program, &layout).expect("catalog programs compile");
    MachineCatalogEntry {
        name,
        summary,
        spec: compiled.spec.clone(),
        compiled: Some(compiled),
        oracle: Oracle::Unary(oracle),
        time_bound: Bound {
            kind: MeasureKind::Strong,
            shape: Shape::NLogN,
        },
        crossing_bound: Bound {
            kind: MeasureKind::Strong,
            shape: Shape::Linear,
        },
        crossing_k: None,
        script: None,
    }
}

pub fn machine_l0() -> MachineCatalogEntry {
    compiled_entry(
        "L0",
        "deterministic sieve: 2..p_t divide n, no p_i^2 does, p_(t+1) does not",
        program_l0(),
        oracles::member_l0,
    )
}

pub fn machine_lam() -> MachineCatalogEntry {
    compiled_entry(
        "LAM",
        "deterministic: the least non-divisor of n is a power of 2",
        program_lam(),
        oracles::member_lam,
    )
}

pub fn machine_colam() -> MachineCatalogEntry {
    let mut e = compiled_entry(
        "coLAM",
        "nondeterministic: the least non-divisor of n is not a power of 2",
        program_colam(),
        oracles::member_colam,
    );
    e.time_bound = Bound {
        kind: MeasureKind::Weak,
        shape: Shape::NLogLogN,
    };
    e.crossing_bound = Bound {
        kind: MeasureKind::Weak,
        shape: Shape::LogLogN,
    };
    e.script = Some(guess_script_colam);
    e
}

/// Choices that make the coLAM machine guess s = floor(log2 q(n)) and t = q(n).
///
/// Cells 0..s take the low bits of t (choice 0 or 1); cell s takes the
/// leading digit (choice 2).
pub fn guess_script_colam(n: u64) -> Result<GuessScript, OracleError> {
    let (s, t) = oracles::colam_witness(n)?;
    let mut choices: Vec<usize> = (0..s).map(|i| (t >> i & 1) as usize).collect();
    choices.push(2);
    Ok(GuessScript::new(choices))
}

pub const NAMES: [&str; 8] = ["sweeper", "mod3", "mod2", "bounce", "last-a", "L0", "LAM", "coLAM"];

pub fn by_name(name: &str) -> Option<MachineCatalogEntry> {
    Some(match name {
        "sweeper" => sweeper(),
        "mod3" => mod3(),
        "mod2" => mod2(),
        "bounce" => bounce(),
        "last-a" => last_a(),
        "L0" => machine_l0(),
        "LAM" => machine_lam(),
        "coLAM" => machine_colam(),
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::{run_deterministic, run_scripted, Outcome};

    fn decide(e: &MachineCatalogEntry, n: usize) -> Outcome {
        let input = vec![e.spec.input_symbols()[0]; n];
        run_deterministic(&e.spec, &input, 10_000_000).unwrap().outcome
    }

    #[test]
    fn small_machines_match_their_languages() {
        for e in [sweeper(), mod3(), mod2(), bounce()] {
            for n in 0..12u64 {
                let want = e.oracle.unary(n).unwrap();
                assert_eq!(decide(&e, n as usize) == Outcome::Accepted, want, "{} on a^{n}", e.name);
            }
        }
    }

    #[test]
    fn l0_examples() {
        let e = machine_l0();
        assert_eq!(decide(&e, 2), Outcome::Accepted);
        assert_eq!(decide(&e, 4), Outcome::Rejected);
        assert_eq!(decide(&e, 6), Outcome::Accepted);
    }

    #[test]
    fn lam_examples() {
        let e = machine_lam();
        assert_eq!(decide(&e, 6), Outcome::Accepted);
        assert_eq!(decide(&e, 2), Outcome::Rejected);
        assert_eq!(decide(&e, 1), Outcome::Accepted);
    }

    #[test]
    fn colam_scripts() {
        let e = machine_colam();
        assert_eq!(guess_script_colam(2).unwrap().choices, vec![1, 2]);
        assert_eq!(guess_script_colam(12).unwrap().choices, vec![1, 0, 2]);
        assert!(guess_script_colam(6).is_err());
        for n in [2usize, 12] {
            let script = guess_script_colam(n as u64).unwrap();
            let input = vec![e.spec.input_symbols()[0]; n];
            let t = run_scripted(&e.spec, &input, &script, 100_000).unwrap();
            assert_eq!(t.outcome, Outcome::Accepted, "a^{n}");
        }
    }
}
