//! Finite control of compiled gadgets.
//!
//! Every phase starts and ends with the head on the leftmost window cell.
//! A counting step ("advance") is a forward pass that copies each window cell
//! one square to the right while adding the carry, followed by a backward
//! pass that applies resets and sieve marks and stops on the new leftmost cell.

use super::cell::{Cell, Kind, Mark, Win};
use super::flatten::{eval, Atom, CounterRt, MarkRt, Op, Target, TickRt};
use super::Candidates;
use crate::machine::Move;

/// Digit rewrite applied by backward passes: copy, then clear, then set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub(crate) struct Fx {
    pub copy: Option<(u8, u8)>,
    pub zero: u8,
    pub set: u8,
}

impl Fx {
    pub fn apply(self, d: u8) -> u8 {
        let mut d = d;
        if let Some((src, dst)) = self.copy {
            d = (d & !(1 << dst)) | ((d >> src & 1) << dst);
        }
        (d & !self.zero) | self.set
    }

    fn name(self) -> String {
        let copy = self.copy.map_or("n".to_string(), |(s, t)| format!("{s}{t}"));
        format!("{copy}-{:x}-{:x}", self.zero, self.set)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum MarkAct {
    Keep,
    X,
    Xy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum Adv {
    Count,
    ScanA,
    ScanB { hit: bool, prime: bool },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum Stage {
    First,
    Mid { held: u8, carry: u8, eq: u8 },
    Tail { held: u8, carry: u8, eq: u8 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum Resume {
    Start(usize),
    CountStart(usize),
    ScanA(usize),
    ScanB(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum Job {
    Settle,
    Clear(u8),
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum Ctrl {
    Accept,
    Reject,
    Start(usize),
    ToOrigin(usize),
    Load {
        pc: usize,
        i: usize,
    },
    Guess {
        pc: usize,
        first: bool,
        seen_one: bool,
    },
    CountStart(usize),
    ScanB(usize),
    Fwd {
        pc: usize,
        adv: Adv,
        stage: Stage,
    },
    Back {
        pc: usize,
        fx: Fx,
        mark: MarkAct,
        resume: Resume,
    },
    InFwd {
        pc: usize,
        job: Job,
        first: bool,
        carry: u8,
        eq: u8,
        scan: u32,
    },
    InBack {
        pc: usize,
        fx: Fx,
        resume: Resume,
    },
    SbHead(usize),
    SbSeek(usize),
    SbShift {
        pc: usize,
        held: Option<u8>,
        make_last: bool,
    },
}

pub(crate) struct Act {
    pub write: Cell,
    pub mv: Move,
    pub next: Ctrl,
}

pub(crate) enum Action {
    Delegate(Ctrl),
    Moves(Vec<Act>),
}

fn act(write: Cell, mv: Move, next: Ctrl) -> Option<Action> {
    Some(Action::Moves(vec![Act { write, mv, next }]))
}

fn resume(r: Resume) -> Ctrl {
    match r {
        Resume::Start(p) => Ctrl::Start(p),
        Resume::CountStart(p) => Ctrl::CountStart(p),
        Resume::ScanA(p) => Ctrl::Fwd {
            pc: p,
            adv: Adv::ScanA,
            stage: Stage::First,
        },
        Resume::ScanB(p) => Ctrl::ScanB(p),
    }
}

fn written(read: Option<Cell>) -> Cell {
    read.unwrap_or(Cell::BEYOND)
}

fn bits(v: u8, n: usize) -> String {
    (0..n).map(|i| if v >> i & 1 == 1 { '1' } else { '0' }).collect()
}

impl Ctrl {
    pub fn pc(&self) -> Option<usize> {
        match *self {
            Ctrl::Accept | Ctrl::Reject => None,
            Ctrl::Start(pc)
            | Ctrl::ToOrigin(pc)
            | Ctrl::CountStart(pc)
            | Ctrl::ScanB(pc)
            | Ctrl::SbHead(pc)
            | Ctrl::SbSeek(pc) => Some(pc),
            Ctrl::Load { pc, .. }
            | Ctrl::Guess { pc, .. }
            | Ctrl::Fwd { pc, .. }
            | Ctrl::Back { pc, .. }
            | Ctrl::InFwd { pc, .. }
            | Ctrl::InBack { pc, .. }
            | Ctrl::SbShift { pc, .. } => Some(pc),
        }
    }

    pub fn name(&self, width: usize) -> String {
        let resume_name = |r: &Resume| match r {
            Resume::Start(p) => format!("s{p}"),
            Resume::CountStart(p) => format!("c{p}"),
            Resume::ScanA(p) => format!("a{p}"),
            Resume::ScanB(p) => format!("b{p}"),
        };
        match self {
            Ctrl::Accept => "accept".into(),
            Ctrl::Reject => "reject".into(),
            Ctrl::Start(p) => format!("p{p}.start"),
            Ctrl::ToOrigin(p) => format!("p{p}.home"),
            Ctrl::Load { pc, i } => format!("p{pc}.load{i}"),
            Ctrl::Guess { pc, first, seen_one } => {
                format!("p{pc}.guess{}{}", u8::from(*first), u8::from(*seen_one))
            }
            Ctrl::CountStart(p) => format!("p{p}.count"),
            Ctrl::ScanB(p) => format!("p{p}.scanb"),
            Ctrl::Fwd { pc, adv, stage } => {
                let adv = match adv {
                    Adv::Count => "cnt".to_string(),
                    Adv::ScanA => "sa".to_string(),
                    Adv::ScanB { hit, prime } => format!("sb{}{}", u8::from(*hit), u8::from(*prime)),
                };
                let stage = match stage {
                    Stage::First => "first".to_string(),
                    Stage::Mid { held, carry, eq } => {
                        format!("mid.{}.{carry:x}.{eq:x}", bits(*held, width))
                    }
                    Stage::Tail { held, carry, eq } => {
                        format!("tail.{}.{carry:x}.{eq:x}", bits(*held, width))
                    }
                };
                format!("p{pc}.{adv}.{stage}")
            }
            Ctrl::Back { pc, fx, mark, resume } => {
                let m = match mark {
                    MarkAct::Keep => "k",
                    MarkAct::X => "x",
                    MarkAct::Xy => "xy",
                };
                format!("p{pc}.back.{}.{m}.{}", fx.name(), resume_name(resume))
            }
            Ctrl::InFwd {
                pc,
                job,
                first,
                carry,
                eq,
                scan,
            } => {
                let job = match job {
                    Job::Settle => "settle".to_string(),
                    Job::Clear(k) => format!("clear{k:x}"),
                    Job::Test => "test".to_string(),
                };
                format!("p{pc}.{job}.{}.{carry:x}.{eq:x}.{scan:x}", u8::from(*first))
            }
            Ctrl::InBack { pc, fx, resume } => {
                format!("p{pc}.inback.{}.{}", fx.name(), resume_name(resume))
            }
            Ctrl::SbHead(p) => format!("p{p}.sbhead"),
            Ctrl::SbSeek(p) => format!("p{p}.sbseek"),
            Ctrl::SbShift { pc, held, make_last } => match held {
                None => format!("p{pc}.sb.none"),
                Some(h) => format!("p{pc}.sb.{}.{}", bits(*h, width), u8::from(*make_last)),
            },
        }
    }
}

pub(crate) struct Control<'a> {
    pub ops: &'a [Op],
    pub flags: u8,
}

/// Adds the carries into one cell. Returns new digits, carries and equalities.
fn absorb(counters: &[CounterRt], d: u8, carry: u8, eq: u8, clear: u8) -> (u8, u8, u8) {
    let mut out = d;
    let mut carry_out = 0u8;
    let mut eq_out = eq;
    for (i, c) in counters.iter().enumerate() {
        let s = (d >> c.bit & 1) + (carry >> i & 1);
        out = (out & !(1 << c.bit)) | ((s & 1) << c.bit);
        carry_out |= (s >> 1) << i;
        if let Some(m) = c.modulus {
            if s & 1 != d >> m & 1 {
                eq_out &= !(1 << i);
            }
        }
    }
    (out & !clear, carry_out, eq_out)
}

fn carry_in(counters: &[CounterRt], d: u8, settle: bool) -> u8 {
    counters.iter().enumerate().fold(0, |acc, (i, c)| {
        let bit = match c.tick {
            TickRt::Always => u8::from(!settle),
            TickRt::Pending(p) => d >> p & 1,
        };
        acc | bit << i
    })
}

fn pending_counters(counters: &[CounterRt]) -> u8 {
    counters
        .iter()
        .enumerate()
        .filter(|(_, c)| matches!(c.tick, TickRt::Pending(_)))
        .fold(0, |m, (i, _)| m | 1 << i)
}

fn modulus_mask(counters: &[CounterRt]) -> u8 {
    counters
        .iter()
        .enumerate()
        .filter(|(_, c)| c.modulus.is_some())
        .fold(0, |m, (i, _)| m | 1 << i)
}

/// Resets and pending raises after the counters in `wrapped` hit their moduli.
fn wrap_fx(counters: &[CounterRt], wrapped: u8) -> Fx {
    let mut fx = Fx::default();
    for (i, c) in counters.iter().enumerate() {
        if wrapped >> i & 1 == 1 {
            if c.resets {
                fx.zero |= 1 << c.bit;
            }
            fx.set |= c.raises;
        }
    }
    fx
}

fn scan_init(atoms: &[Atom]) -> u32 {
    atoms.iter().enumerate().fold(0, |acc, (i, a)| {
        let v = match a {
            Atom::Zero(_) | Atom::Eq(..) => 1,
            Atom::Pow2(_) => 0,
        };
        acc | v << (2 * i)
    })
}

fn scan_step(atoms: &[Atom], scan: u32, d: u8) -> u32 {
    atoms.iter().enumerate().fold(0, |acc, (i, a)| {
        let s = scan >> (2 * i) & 3;
        let v = match *a {
            Atom::Zero(t) => s & u32::from(d >> t & 1 == 0),
            Atom::Eq(x, y) => s & u32::from(d >> x & 1 == d >> y & 1),
            Atom::Pow2(t) => (s + u32::from(d >> t & 1)).min(2),
        };
        acc | v << (2 * i)
    })
}

fn scan_values(atoms: &[Atom], scan: u32) -> Vec<bool> {
    (0..atoms.len()).map(|i| scan >> (2 * i) & 3 == 1).collect()
}

impl Control<'_> {
    fn count_counters(&self, pc: usize) -> &[CounterRt] {
        match &self.ops[pc] {
            Op::Count { counters, .. } => counters,
            _ => &[],
        }
    }

    fn scan_counter(&self, pc: usize, adv: Adv) -> [CounterRt; 1] {
        let Op::Scan { counter, target, .. } = self.ops[pc] else {
            unreachable!("scan state outside a scan step")
        };
        [CounterRt {
            bit: counter,
            tick: TickRt::Always,
            modulus: (adv == Adv::ScanA).then_some(target),
            resets: false,
            raises: 0,
        }]
    }

    fn pending_mask(&self, pc: usize) -> u8 {
        match self.ops[pc] {
            Op::Count { pending, .. } => pending,
            _ => 0,
        }
    }

    pub fn step(&self, ctrl: Ctrl, read: Option<Cell>) -> Option<Action> {
        match ctrl {
            Ctrl::Accept | Ctrl::Reject => None,
            Ctrl::Start(pc) => self.start(pc, read),
            Ctrl::ToOrigin(pc) => {
                let c = read?;
                if c.origin {
                    Some(Action::Delegate(Ctrl::Start(pc)))
                } else {
                    act(c, Move::Left, ctrl)
                }
            }
            Ctrl::Load { pc, i } => {
                let Op::Load { pattern } = &self.ops[pc] else {
                    return None;
                };
                if i == 0 && read.is_none() {
                    return act(Cell::BEYOND, Move::Stay, Ctrl::Reject);
                }
                let c = written(read);
                if c.in_window() || c.origin {
                    return None;
                }
                let last = i + 1 == pattern.len();
                let cell = Cell {
                    origin: i == 0,
                    ..c.with(if last { Win::Last } else { Win::In }, pattern[i])
                };
                if !last {
                    act(cell, Move::Right, Ctrl::Load { pc, i: i + 1 })
                } else if i == 0 {
                    act(cell, Move::Stay, Ctrl::Start(pc + 1))
                } else {
                    act(cell, Move::Left, Ctrl::ToOrigin(pc + 1))
                }
            }
            Ctrl::Guess { pc, first, seen_one } => {
                let Op::Guess { power, target } = self.ops[pc] else {
                    return None;
                };
                match read {
                    Some(c) if c.kind == Kind::Input && !c.in_window() => {
                        let base = Cell { origin: first, ..c };
                        let mut acts = Vec::new();
                        for b in [false, true] {
                            acts.push(Act {
                                write: base.with(Win::In, u8::from(b) << target),
                                mv: Move::Right,
                                next: Ctrl::Guess {
                                    pc,
                                    first: false,
                                    seen_one: seen_one || b,
                                },
                            });
                        }
                        if !first && seen_one {
                            acts.push(Act {
                                write: base.with(Win::Last, 1 << target | 1 << power),
                                mv: Move::Left,
                                next: Ctrl::ToOrigin(pc + 1),
                            });
                        }
                        Some(Action::Moves(acts))
                    }
                    Some(c) if c.in_window() => None,
                    other => act(written(other), Move::Stay, Ctrl::Reject),
                }
            }
            Ctrl::CountStart(pc) => {
                let c = read.filter(|c| c.in_window())?;
                let Op::Count { settle, .. } = self.ops[pc] else {
                    return None;
                };
                Some(Action::Delegate(match c.kind {
                    Kind::Input => Ctrl::Fwd {
                        pc,
                        adv: Adv::Count,
                        stage: Stage::First,
                    },
                    Kind::Beyond if settle => Ctrl::InFwd {
                        pc,
                        job: Job::Settle,
                        first: true,
                        carry: 0,
                        eq: 0,
                        scan: 0,
                    },
                    Kind::Beyond => Ctrl::Start(pc + 1),
                }))
            }
            Ctrl::ScanB(pc) => {
                let c = read.filter(|c| c.in_window())?;
                let Op::Scan { candidates, .. } = self.ops[pc] else {
                    return None;
                };
                let (hit, prime) = match (c.kind, c.mark) {
                    (Kind::Beyond, _) | (_, Mark::None) => (true, true),
                    (_, Mark::X) => (candidates == Candidates::UnmarkedOrX, false),
                    (_, Mark::Y) => (false, false),
                };
                Some(Action::Delegate(Ctrl::Fwd {
                    pc,
                    adv: Adv::ScanB {
                        hit,
                        prime: hit && prime,
                    },
                    stage: Stage::First,
                }))
            }
            Ctrl::Fwd { pc, adv, stage } => self.forward(pc, adv, stage, read),
            Ctrl::Back {
                fx, mark, resume: r, ..
            } => {
                let c = read?;
                if c.in_window() {
                    return act(c.with(c.win, fx.apply(c.digits)), Move::Left, ctrl);
                }
                let m = match (mark, c.mark) {
                    (MarkAct::Keep, m) => m,
                    (MarkAct::X, Mark::None) => Mark::X,
                    (MarkAct::X, m) => m,
                    (MarkAct::Xy, Mark::None) => Mark::X,
                    (MarkAct::Xy, _) => Mark::Y,
                };
                act(Cell { mark: m, ..c }, Move::Right, resume(r))
            }
            Ctrl::InFwd {
                pc,
                job,
                first,
                carry,
                eq,
                scan,
            } => self.in_place(pc, job, first, carry, eq, scan, read),
            Ctrl::InBack { fx, resume: r, .. } => {
                let c = read?;
                if !c.in_window() {
                    return act(c, Move::Right, resume(r));
                }
                let w = c.with(c.win, fx.apply(c.digits));
                if c.origin {
                    act(w, Move::Stay, resume(r))
                } else {
                    act(w, Move::Left, ctrl)
                }
            }
            Ctrl::SbHead(pc) => {
                let c = read.filter(|c| c.in_window())?;
                let Op::ShiftBack { keep } = self.ops[pc] else {
                    return None;
                };
                if !c.origin {
                    return Some(Action::Delegate(Ctrl::SbSeek(pc)));
                }
                Some(Action::Delegate(Ctrl::InFwd {
                    pc,
                    job: Job::Clear(keep),
                    first: true,
                    carry: 0,
                    eq: 0,
                    scan: 0,
                }))
            }
            Ctrl::SbSeek(pc) => {
                let c = read.filter(|c| c.in_window())?;
                if c.win == Win::Last {
                    Some(Action::Delegate(Ctrl::SbShift {
                        pc,
                        held: None,
                        make_last: false,
                    }))
                } else {
                    act(c, Move::Right, ctrl)
                }
            }
            Ctrl::SbShift { pc, held, make_last } => {
                let Op::ShiftBack { keep } = self.ops[pc] else {
                    return None;
                };
                let c = read?;
                match held {
                    None => {
                        if c.win != Win::Last {
                            return None;
                        }
                        act(
                            c.with(Win::Out, 0),
                            Move::Left,
                            Ctrl::SbShift {
                                pc,
                                held: Some(c.digits & keep),
                                make_last: true,
                            },
                        )
                    }
                    Some(h) => {
                        let win = if make_last { Win::Last } else { Win::In };
                        if c.in_window() {
                            if c.win == Win::Last {
                                return None;
                            }
                            return act(
                                c.with(win, h),
                                Move::Left,
                                Ctrl::SbShift {
                                    pc,
                                    held: Some(c.digits & keep),
                                    make_last: false,
                                },
                            );
                        }
                        let w = c.with(win, h);
                        if c.origin {
                            act(w, Move::Stay, Ctrl::Start(pc + 1))
                        } else if make_last {
                            act(
                                w,
                                Move::Stay,
                                Ctrl::SbShift {
                                    pc,
                                    held: None,
                                    make_last: false,
                                },
                            )
                        } else {
                            act(w, Move::Right, Ctrl::SbSeek(pc))
                        }
                    }
                }
            }
        }
    }

    fn start(&self, pc: usize, read: Option<Cell>) -> Option<Action> {
        let next = match &self.ops[pc] {
            Op::Load { .. } => Ctrl::Load { pc, i: 0 },
            Op::Guess { .. } => Ctrl::Guess {
                pc,
                first: true,
                seen_one: false,
            },
            Op::Count { .. } => Ctrl::CountStart(pc),
            Op::Scan { .. } => Ctrl::Fwd {
                pc,
                adv: Adv::ScanA,
                stage: Stage::First,
            },
            Op::ShiftBack { .. } => Ctrl::SbHead(pc),
            Op::Test { atoms, .. } => Ctrl::InFwd {
                pc,
                job: Job::Test,
                first: true,
                carry: 0,
                eq: 0,
                scan: scan_init(atoms),
            },
            Op::Jump(p) => Ctrl::Start(*p),
            Op::Halt(accept) => {
                let to = if *accept { Ctrl::Accept } else { Ctrl::Reject };
                return act(written(read), Move::Stay, to);
            }
        };
        Some(Action::Delegate(next))
    }

    fn forward(&self, pc: usize, adv: Adv, stage: Stage, read: Option<Cell>) -> Option<Action> {
        let scan_storage;
        let counters: &[CounterRt] = match adv {
            Adv::Count => self.count_counters(pc),
            _ => {
                scan_storage = self.scan_counter(pc, adv);
                &scan_storage
            }
        };
        let clear = self.pending_mask(pc);
        match stage {
            Stage::First => {
                let c = read.filter(|c| c.in_window())?;
                let (d, carry, eq) = absorb(counters, c.digits, carry_in(counters, c.digits, false), u8::MAX, clear);
                let next = if c.win == Win::Last {
                    Stage::Tail { held: d, carry, eq }
                } else {
                    Stage::Mid { held: d, carry, eq }
                };
                act(c.with(Win::Out, 0), Move::Right, Ctrl::Fwd { pc, adv, stage: next })
            }
            Stage::Mid { held, carry, eq } => {
                let c = read.filter(|c| c.in_window())?;
                let (d, carry, eq) = absorb(counters, c.digits, carry, eq, clear);
                let next = if c.win == Win::Last {
                    Stage::Tail { held: d, carry, eq }
                } else {
                    Stage::Mid { held: d, carry, eq }
                };
                act(c.with(Win::In, held), Move::Right, Ctrl::Fwd { pc, adv, stage: next })
            }
            Stage::Tail { held, carry, eq } => {
                let c = written(read);
                if c.in_window() {
                    return None;
                }
                if carry != 0 {
                    let (d, carry, eq) = absorb(counters, held & self.flags, carry, eq, clear);
                    return act(
                        c.with(Win::In, held),
                        Move::Right,
                        Ctrl::Fwd {
                            pc,
                            adv,
                            stage: Stage::Tail { held: d, carry, eq },
                        },
                    );
                }
                let (fx, mark, r) = self.finish(pc, adv, counters, held, eq);
                act(
                    c.with(Win::Last, fx.apply(held)),
                    Move::Left,
                    Ctrl::Back {
                        pc,
                        fx,
                        mark,
                        resume: r,
                    },
                )
            }
        }
    }

    /// Effects of a completed advance.
    fn finish(&self, pc: usize, adv: Adv, counters: &[CounterRt], held: u8, eq: u8) -> (Fx, MarkAct, Resume) {
        let wrapped = eq & modulus_mask(counters);
        match (adv, &self.ops[pc]) {
            (Adv::Count, Op::Count { marking, .. }) => {
                let mark = if wrapped & 1 == 0 {
                    MarkAct::Keep
                } else {
                    match *marking {
                        MarkRt::None => MarkAct::Keep,
                        MarkRt::X => MarkAct::X,
                        MarkRt::Gated(f) if held >> f & 1 == 1 => MarkAct::Xy,
                        MarkRt::Gated(_) => MarkAct::Keep,
                    }
                };
                (wrap_fx(counters, wrapped), mark, Resume::CountStart(pc))
            }
            (Adv::ScanA, _) => {
                let r = if wrapped & 1 == 1 {
                    Resume::ScanB(pc)
                } else {
                    Resume::ScanA(pc)
                };
                (Fx::default(), MarkAct::Keep, r)
            }
            (Adv::ScanB { hit: false, .. }, _) => (Fx::default(), MarkAct::Keep, Resume::ScanB(pc)),
            (
                Adv::ScanB { hit: true, prime },
                Op::Scan {
                    counter, target, flag, ..
                },
            ) => {
                let mut fx = Fx {
                    copy: Some((*counter, *target)),
                    zero: 1 << counter,
                    set: 0,
                };
                if let Some(f) = *flag {
                    if prime {
                        fx.set |= 1 << f;
                    } else {
                        fx.zero |= 1 << f;
                    }
                }
                (fx, MarkAct::Keep, Resume::Start(pc + 1))
            }
            _ => unreachable!("advance outside a counting step"),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn in_place(
        &self,
        pc: usize,
        job: Job,
        first: bool,
        carry: u8,
        eq: u8,
        scan: u32,
        read: Option<Cell>,
    ) -> Option<Action> {
        let c = read.filter(|c| c.in_window())?;
        let last = c.win == Win::Last;
        let (digits, next, fx, target) = match job {
            Job::Settle => {
                let counters = self.count_counters(pc);
                let carry = if first {
                    carry_in(counters, c.digits, true)
                } else {
                    carry
                };
                let eq = if first { u8::MAX } else { eq };
                let (d, carry, eq) = absorb(counters, c.digits, carry, eq, self.pending_mask(pc));
                let mut fx = Fx::default();
                if last {
                    let wrapped = eq & modulus_mask(counters) & pending_counters(counters);
                    fx = wrap_fx(counters, wrapped);
                    fx.set = 0;
                }
                (
                    fx.apply(d),
                    Ctrl::InFwd {
                        pc,
                        job,
                        first: false,
                        carry,
                        eq,
                        scan,
                    },
                    fx,
                    Target::Pc(pc + 1),
                )
            }
            Job::Clear(keep) => {
                let next = Ctrl::InFwd {
                    pc,
                    job,
                    first: false,
                    carry,
                    eq,
                    scan,
                };
                (c.digits & keep, next, Fx::default(), Target::Pc(pc + 1))
            }
            Job::Test => {
                let Op::Test {
                    atoms,
                    expr,
                    then,
                    otherwise,
                } = &self.ops[pc]
                else {
                    return None;
                };
                let scan = scan_step(atoms, scan, c.digits);
                let target = if eval(expr, &scan_values(atoms, scan)) {
                    *then
                } else {
                    *otherwise
                };
                (
                    c.digits,
                    Ctrl::InFwd {
                        pc,
                        job,
                        first: false,
                        carry,
                        eq,
                        scan,
                    },
                    Fx::default(),
                    target,
                )
            }
        };
        let w = c.with(c.win, digits);
        if !last {
            return act(w, Move::Right, next);
        }
        let r = match target {
            Target::Accept => return act(w, Move::Stay, Ctrl::Accept),
            Target::Reject => return act(w, Move::Stay, Ctrl::Reject),
            Target::Pc(p) => Resume::Start(p),
        };
        if c.origin {
            act(w, Move::Stay, resume(r))
        } else {
            act(w, Move::Left, Ctrl::InBack { pc, fx, resume: r })
        }
    }
}
