//! Reference answers that do not go through the machine simulator: number
//! theory for the unary languages, a brute-force measure evaluator, and the
//! minimal unary DFA consistent with a finite language slice.

use thiserror::Error;

use crate::machine::{Halt, MachineSpec, Move, SymbolId};
use crate::metering::{MeasureKind, Resource};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("q(0) is undefined: every integer divides 0")]
    ZeroHasNoNondivisor,
    #[error("power-of-two test is defined for k >= 2, got {0}")]
    BelowTwo(u64),
    #[error("n = {n}: q(n) = {q} is a power of 2, so there is no witness")]
    NoWitness { n: u64, q: u64 },
    #[error("computation tree has more than {0} leaves")]
    TooManyLeaves(usize),
    #[error("input symbol #{0} is not in the input alphabet")]
    InvalidInput(usize),
}

/// `q(n)`: the least `k >= 2` that does not divide `n`.
pub fn smallest_nondivisor(n: u64) -> Result<u64, OracleError> {
    if n == 0 {
        return Err(OracleError::ZeroHasNoNondivisor);
    }
    Ok((2..).find(|k| !n.is_multiple_of(*k)).expect("some k does not divide n"))
}

/// True iff `k = 2^m` with `m >= 1`.
pub fn is_power_of_two(k: u64) -> Result<bool, OracleError> {
    if k < 2 {
        return Err(OracleError::BelowTwo(k));
    }
    Ok(k.is_power_of_two())
}

pub fn primes_upto(m: u64) -> Vec<u64> {
    if m < 2 {
        return Vec::new();
    }
    let m = m as usize;
    let mut composite = vec![false; m + 1];
    let mut primes = Vec::new();
    for i in 2..=m {
        if composite[i] {
            continue;
        }
        primes.push(i as u64);
        let mut j = i * i;
        while j <= m {
            composite[j] = true;
            j += i;
        }
    }
    primes
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

/// Least prime strictly greater than `p`.
pub fn next_prime(p: u64) -> u64 {
    (p + 1..).find(|&k| is_prime(k)).expect("primes are unbounded")
}

/// True iff `n = p^e` for a prime `p` and `e >= 1`.
pub fn is_prime_power(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let p = (2..).find(|d| n.is_multiple_of(*d)).expect("n >= 2 has a divisor");
    let mut m = n;
    while m.is_multiple_of(p) {
        m /= p;
    }
    m == 1
}

/// `n` is divisible by the first `t >= 1` primes, by none of their squares,
/// and not by the next prime. `n = 0` is not a member.
pub fn member_l0(n: u64) -> bool {
    if n == 0 {
        return false;
    }
    let mut t = 0;
    let mut p = 2;
    loop {
        if !n.is_multiple_of(p) {
            return t >= 1;
        }
        if n.is_multiple_of(p * p) {
            return false;
        }
        t += 1;
        p = next_prime(p);
    }
}

/// `q(n)` is a power of two. `n = 0` is not a member.
pub fn member_lam(n: u64) -> bool {
    n != 0 && smallest_nondivisor(n).map(|q| q.is_power_of_two()).unwrap_or(false)
}

/// Complement of [`member_lam`] among `n >= 1`. `n = 0` is not a member.
pub fn member_colam(n: u64) -> bool {
    n != 0 && !member_lam(n)
}

/// Searches for `(s, t)` with `2^s < t < 2^(s+1)`, `2^s | n` and `t ∤ n`.
pub fn colam_pair_search(n: u64) -> Option<(u32, u64)> {
    if n == 0 {
        return None;
    }
    let mut s = 1;
    while s < 63 && n.is_multiple_of(1u64 << s) {
        let lo = 1u64 << s;
        if let Some(t) = (lo + 1..2 * lo).find(|t| !n.is_multiple_of(*t)) {
            return Some((s, t));
        }
        s += 1;
    }
    None
}

/// The witness used by the guessing machine: `t = q(n)` and `2^s < t < 2^(s+1)`.
pub fn colam_witness(n: u64) -> Result<(u32, u64), OracleError> {
    let q = smallest_nondivisor(n)?;
    if q.is_power_of_two() {
        return Err(OracleError::NoWitness { n, q });
    }
    Ok((63 - q.leading_zeros(), q))
}

/// Membership booleans for lengths `0..=n_max`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnaryBits {
    pub bits: Vec<bool>,
}

impl UnaryBits {
    pub fn from_fn(n_max: usize, f: impl Fn(u64) -> bool) -> Self {
        UnaryBits {
            bits: (0..=n_max as u64).map(f).collect(),
        }
    }

    pub fn n_max(&self) -> usize {
        self.bits.len().saturating_sub(1)
    }

    pub fn truncate(&self, n_max: usize) -> UnaryBits {
        UnaryBits {
            bits: self.bits[..=n_max.min(self.n_max())].to_vec(),
        }
    }

    /// One `0`/`1` line per length.
    pub fn to_text(&self) -> String {
        self.bits.iter().map(|&b| if b { "1\n" } else { "0\n" }).collect()
    }

    pub fn from_text(text: &str) -> Option<UnaryBits> {
        let bits = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| match l {
                "0" => Some(false),
                "1" => Some(true),
                _ => None,
            })
            .collect::<Option<Vec<bool>>>()?;
        (!bits.is_empty()).then_some(UnaryBits { bits })
    }
}

/// States of the smallest tail-plus-cycle unary DFA agreeing with `bits` on
/// every length up to `n_max`.
pub fn min_consistent_unary_dfa(bits: &UnaryBits) -> usize {
    let b = &bits.bits;
    let n_max = bits.n_max();
    (1..=n_max + 1)
        .map(|p| {
            let tail = (0..=n_max.saturating_sub(p))
                .rev()
                .find(|&i| i + p <= n_max && b[i] != b[i + p])
                .map_or(0, |i| i + 1);
            tail + p
        })
        .min()
        .unwrap_or(1)
}

/// `⌈(n + 3) / 2⌉`.
pub fn karp_bound(n: usize) -> usize {
    (n + 4) / 2
}

/// Minimal consistent DFA size against the Karp bound at one length.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KarpRow {
    pub n: usize,
    pub min_dfa: usize,
    pub bound: usize,
}

impl KarpRow {
    pub fn is_witness(&self) -> bool {
        self.min_dfa >= self.bound
    }
}

/// One row per `n` in `ns` (clipped to `bits.n_max()`), each using the
/// prefix of `bits` up to `n`.
pub fn karp_rows(bits: &UnaryBits, ns: impl IntoIterator<Item = usize>) -> Vec<KarpRow> {
    ns.into_iter()
        .filter(|&n| n <= bits.n_max())
        .map(|n| KarpRow {
            n,
            min_dfa: min_consistent_unary_dfa(&bits.truncate(n)),
            bound: karp_bound(n),
        })
        .collect()
}

/// Result of [`brute_force_measure`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BruteMeasure {
    pub value: u64,
    pub accepted: bool,
    /// No computation was cut off by fuel.
    pub complete: bool,
    pub leaves: usize,
}

struct Walker<'a> {
    spec: &'a MachineSpec,
    resource: Resource,
    fuel: u64,
    max_leaves: usize,
    crossings: Vec<(usize, u32)>,
    max_all: u64,
    max_acc: Option<u64>,
    min_acc: Option<u64>,
    complete: bool,
    leaves: usize,
}

impl Walker<'_> {
    fn longest_crossing(&self) -> u64 {
        self.crossings.iter().map(|c| c.1 as u64).max().unwrap_or(0)
    }

    fn bump(&mut self, boundary: usize, delta: i32) {
        match self.crossings.iter_mut().find(|c| c.0 == boundary) {
            Some(c) => c.1 = (c.1 as i32 + delta) as u32,
            None => self.crossings.push((boundary, delta as u32)),
        }
    }

    fn leaf(&mut self, steps: u64, accepted: bool) -> Result<(), OracleError> {
        self.leaves += 1;
        if self.leaves > self.max_leaves {
            return Err(OracleError::TooManyLeaves(self.max_leaves));
        }
        let v = match self.resource {
            Resource::Time => steps,
            Resource::Crossing => self.longest_crossing(),
        };
        self.max_all = self.max_all.max(v);
        if accepted {
            self.max_acc = Some(self.max_acc.map_or(v, |m| m.max(v)));
            self.min_acc = Some(self.min_acc.map_or(v, |m| m.min(v)));
        }
        Ok(())
    }

    fn walk(
        &mut self,
        state: crate::machine::StateId,
        head: usize,
        tape: &mut Vec<SymbolId>,
        steps: u64,
    ) -> Result<(), OracleError> {
        match self.spec.halt(state) {
            Halt::Accept => return self.leaf(steps, true),
            Halt::Reject => return self.leaf(steps, false),
            Halt::Running => {}
        }
        let read = tape.get(head).copied().unwrap_or(self.spec.blank());
        // Linear scan of the declaration list, independent of the dispatch index.
        let moves: Vec<_> = self
            .spec
            .transitions()
            .iter()
            .filter(|t| t.from == state && t.read == read && !(head == 0 && t.mv == Move::Left))
            .copied()
            .collect();
        if moves.is_empty() {
            return self.leaf(steps, false);
        }
        if steps == self.fuel {
            self.complete = false;
            return self.leaf(steps, false);
        }
        for t in moves {
            let grew = head == tape.len();
            if grew {
                tape.push(self.spec.blank());
            }
            let old = tape[head];
            tape[head] = t.write;
            let (next, boundary) = match t.mv {
                Move::Left => (head - 1, Some(head)),
                Move::Right => (head + 1, Some(head + 1)),
                Move::Stay => (head, None),
            };
            if let Some(b) = boundary {
                self.bump(b, 1);
            }
            let r = self.walk(t.to, next, tape, steps + 1);
            if let Some(b) = boundary {
                self.bump(b, -1);
            }
            tape[head] = old;
            if grew {
                tape.pop();
            }
            r?;
        }
        Ok(())
    }
}

/// Exact strong / accept / weak value by recursive expansion of the whole
/// computation tree. Written separately from the enumerator in `exec` so the
/// two can check each other.
pub fn brute_force_measure(
    spec: &MachineSpec,
    input: &[SymbolId],
    resource: Resource,
    kind: MeasureKind,
    fuel: u64,
    max_leaves: usize,
) -> Result<BruteMeasure, OracleError> {
    if let Some(i) = input.iter().position(|s| !spec.input_symbols().contains(s)) {
        return Err(OracleError::InvalidInput(i));
    }
    let mut w = Walker {
        spec,
        resource,
        fuel,
        max_leaves,
        crossings: Vec::new(),
        max_all: 0,
        max_acc: None,
        min_acc: None,
        complete: true,
        leaves: 0,
    };
    let mut tape = input.to_vec();
    w.walk(spec.initial(), 0, &mut tape, 0)?;
    let value = match kind {
        MeasureKind::Strong => w.max_all,
        MeasureKind::Accept => w.max_acc.unwrap_or(0),
        MeasureKind::Weak => w.min_acc.unwrap_or(0),
    };
    Ok(BruteMeasure {
        value,
        accepted: w.max_acc.is_some(),
        complete: w.complete,
        leaves: w.leaves,
    })
}
