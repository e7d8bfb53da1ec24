//! Lowering of phase lists to a flat step list, with contract checking.

use super::{
    Candidates, CompileError, CountFactor, GadgetProgram, Marking, Phase, Pred, StepKind, Tick, TrackLayout, TrackRole,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum TickRt {
    Always,
    Pending(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) struct CounterRt {
    pub bit: u8,
    pub tick: TickRt,
    pub modulus: Option<u8>,
    pub resets: bool,
    /// Pending bits to raise when this counter wraps.
    pub raises: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum MarkRt {
    None,
    X,
    Gated(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum Atom {
    Zero(u8),
    Eq(u8, u8),
    Pow2(u8),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Expr {
    True,
    Atom(usize),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum Target {
    Pc(usize),
    Accept,
    Reject,
}

#[derive(Debug, Clone)]
pub(crate) enum Op {
    Load {
        pattern: Vec<u8>,
    },
    Guess {
        power: u8,
        target: u8,
    },
    Count {
        counters: Vec<CounterRt>,
        marking: MarkRt,
        settle: bool,
        pending: u8,
    },
    Scan {
        counter: u8,
        target: u8,
        candidates: Candidates,
        flag: Option<u8>,
    },
    ShiftBack {
        keep: u8,
    },
    Test {
        atoms: Vec<Atom>,
        expr: Expr,
        then: Target,
        otherwise: Target,
    },
    Jump(usize),
    Halt(bool),
}

impl Op {
    pub fn kind(&self) -> StepKind {
        match self {
            Op::Load { .. } => StepKind::Load,
            Op::Guess { .. } => StepKind::Guess,
            Op::Count { .. } => StepKind::Count,
            Op::Scan { .. } => StepKind::Scan,
            Op::ShiftBack { .. } => StepKind::ShiftBack,
            Op::Test { .. } => StepKind::Test,
            Op::Jump(_) => StepKind::Jump,
            Op::Halt(_) => StepKind::Halt,
        }
    }
}

pub(crate) fn eval(expr: &Expr, atoms: &[bool]) -> bool {
    match expr {
        Expr::True => true,
        Expr::Atom(i) => atoms[*i],
        Expr::Not(e) => !eval(e, atoms),
        Expr::And(a, b) => eval(a, atoms) && eval(b, atoms),
        Expr::Or(a, b) => eval(a, atoms) || eval(b, atoms),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Window {
    Absent,
    Origin,
    Elsewhere,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Val {
    Unset,
    Zero,
    Set,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Abstract {
    window: Window,
    tracks: Vec<Val>,
}

impl Abstract {
    fn join(&self, other: &Abstract) -> Abstract {
        let window = if self.window == other.window {
            self.window
        } else {
            Window::Elsewhere
        };
        let tracks = self
            .tracks
            .iter()
            .zip(&other.tracks)
            .map(|(a, b)| match (a, b) {
                (Val::Unset, _) | (_, Val::Unset) => Val::Unset,
                (Val::Zero, Val::Zero) => Val::Zero,
                _ => Val::Set,
            })
            .collect();
        Abstract { window, tracks }
    }
}

struct Lowering<'a> {
    layout: &'a TrackLayout,
    ops: Vec<Op>,
    prev: &'static str,
}

fn chain(prev: &str, next: &str, reason: impl Into<String>) -> CompileError {
    CompileError::Chain {
        prev: prev.to_string(),
        next: next.to_string(),
        reason: reason.into(),
    }
}

impl<'a> Lowering<'a> {
    fn track(&self, name: &str) -> Result<u8, CompileError> {
        self.layout
            .index(name)
            .ok_or_else(|| CompileError::UnknownTrack(name.to_string()))
    }

    fn fail(&self, phase: &Phase, reason: impl Into<String>) -> CompileError {
        chain(self.prev, phase.label(), reason)
    }

    fn need_window(&self, st: &Abstract, phase: &Phase, at_origin: bool) -> Result<(), CompileError> {
        match st.window {
            Window::Absent => Err(self.fail(phase, "no window has been written")),
            Window::Elsewhere if at_origin => Err(self.fail(phase, "window is not at the origin")),
            _ => Ok(()),
        }
    }

    fn need_set(&self, st: &Abstract, phase: &Phase, t: u8, what: &str) -> Result<(), CompileError> {
        match st.tracks[t as usize] {
            Val::Set => Ok(()),
            _ => Err(self.fail(
                phase,
                format!(
                    "{what} track {} is not initialised",
                    self.layout.tracks()[t as usize].name
                ),
            )),
        }
    }

    fn need_readable(&self, st: &Abstract, phase: &Phase, t: u8) -> Result<(), CompileError> {
        if st.tracks[t as usize] == Val::Unset {
            return Err(self.fail(
                phase,
                format!("track {} is not initialised", self.layout.tracks()[t as usize].name),
            ));
        }
        Ok(())
    }

    fn atoms(&self, pred: &Pred, atoms: &mut Vec<Atom>) -> Result<Expr, CompileError> {
        let atom = |a: Atom, atoms: &mut Vec<Atom>| {
            let i = atoms.iter().position(|x| *x == a).unwrap_or_else(|| {
                atoms.push(a);
                atoms.len() - 1
            });
            Expr::Atom(i)
        };
        Ok(match pred {
            Pred::True => Expr::True,
            Pred::Zero(t) => atom(Atom::Zero(self.track(t)?), atoms),
            Pred::Eq(a, b) => atom(Atom::Eq(self.track(a)?, self.track(b)?), atoms),
            Pred::PowerOfTwo(t) => atom(Atom::Pow2(self.track(t)?), atoms),
            Pred::Not(p) => Expr::Not(Box::new(self.atoms(p, atoms)?)),
            Pred::And(a, b) => Expr::And(Box::new(self.atoms(a, atoms)?), Box::new(self.atoms(b, atoms)?)),
            Pred::Or(a, b) => Expr::Or(Box::new(self.atoms(a, atoms)?), Box::new(self.atoms(b, atoms)?)),
        })
    }

    fn test(
        &mut self,
        st: &Abstract,
        phase: &Phase,
        pred: &Pred,
        then: Target,
        otherwise: Target,
    ) -> Result<(), CompileError> {
        self.need_window(st, phase, false)?;
        let mut atoms = Vec::new();
        let expr = self.atoms(pred, &mut atoms)?;
        for a in &atoms {
            match *a {
                Atom::Zero(t) | Atom::Pow2(t) => self.need_readable(st, phase, t)?,
                Atom::Eq(a, b) => {
                    self.need_readable(st, phase, a)?;
                    self.need_readable(st, phase, b)?;
                }
            }
        }
        self.ops.push(Op::Test {
            atoms,
            expr,
            then,
            otherwise,
        });
        Ok(())
    }

    fn count(&mut self, st: &mut Abstract, phase: &Phase, cf: &CountFactor) -> Result<(), CompileError> {
        if cf.base != 2 {
            return Err(CompileError::Base(cf.base));
        }
        self.need_window(st, phase, true)?;
        if cf.counters.is_empty() {
            return Err(self.fail(phase, "no counters"));
        }
        let mut rts: Vec<CounterRt> = Vec::new();
        let mut pending = 0u8;
        for c in &cf.counters {
            let bit = self.track(&c.track)?;
            self.need_readable(st, phase, bit)?;
            let modulus = match &c.reset_at {
                Some(m) => {
                    let m = self.track(m)?;
                    self.need_set(st, phase, m, "modulus")?;
                    Some(m)
                }
                None => None,
            };
            let tick = match &c.tick {
                Tick::EveryCell => TickRt::Always,
                Tick::OnWrapOf { source, pending: p } => {
                    let src = self.track(source)?;
                    let p = self.track(p)?;
                    if self.layout.tracks()[p as usize].role != TrackRole::Flag {
                        return Err(self.fail(
                            phase,
                            format!("pending track {} is not a flag", self.layout.tracks()[p as usize].name),
                        ));
                    }
                    let Some(i) = rts.iter().position(|r| r.bit == src && r.modulus.is_some()) else {
                        return Err(self.fail(phase, format!("{source} is not an earlier resetting counter")));
                    };
                    rts[i].raises |= 1 << p;
                    pending |= 1 << p;
                    TickRt::Pending(p)
                }
            };
            rts.push(CounterRt {
                bit,
                tick,
                modulus,
                resets: modulus.is_some(),
                raises: 0,
            });
        }
        let marking = match &cf.marking {
            Marking::None => MarkRt::None,
            Marking::Multiples => MarkRt::X,
            Marking::PrimeGated { flag } => {
                let f = self.track(flag)?;
                self.need_readable(st, phase, f)?;
                MarkRt::Gated(f)
            }
        };
        if marking != MarkRt::None && rts[0].modulus.is_none() {
            return Err(self.fail(phase, "marking needs a resetting first counter"));
        }
        for r in &rts {
            st.tracks[r.bit as usize] = Val::Set;
        }
        for p in 0..8 {
            if pending >> p & 1 == 1 {
                st.tracks[p] = Val::Zero;
            }
        }
        st.window = Window::Elsewhere;
        self.ops.push(Op::Count {
            counters: rts,
            marking,
            settle: pending != 0,
            pending,
        });
        Ok(())
    }

    fn lower(&mut self, phases: &[Phase], st: &mut Abstract) -> Result<(), CompileError> {
        for phase in phases {
            self.phase(phase, st)?;
            self.prev = phase.label();
        }
        Ok(())
    }

    fn phase(&mut self, phase: &Phase, st: &mut Abstract) -> Result<(), CompileError> {
        let width = self.layout.len();
        match phase {
            Phase::Load(values) => {
                if st.window != Window::Absent {
                    return Err(self.fail(phase, "a window already exists"));
                }
                let mut assigned = Vec::new();
                let mut cells = 1usize;
                for (name, v) in values {
                    let t = self.track(name)?;
                    let bits = (64 - v.leading_zeros()) as usize;
                    if self.layout.tracks()[t as usize].role == TrackRole::Flag && *v > 1 {
                        return Err(CompileError::Width { value: *v, width: 1 });
                    }
                    cells = cells.max(bits);
                    assigned.push((t, *v));
                }
                let flags = self.layout.flag_mask();
                let mut pattern = vec![0u8; cells];
                for (t, v) in &assigned {
                    for (i, cell) in pattern.iter_mut().enumerate() {
                        let on = if flags >> t & 1 == 1 { *v == 1 } else { v >> i & 1 == 1 };
                        if on {
                            *cell |= 1 << t;
                        }
                    }
                }
                st.tracks = vec![Val::Zero; width];
                for (t, v) in assigned {
                    st.tracks[t as usize] = if v == 0 { Val::Zero } else { Val::Set };
                }
                st.window = Window::Origin;
                self.ops.push(Op::Load { pattern });
            }
            Phase::GuessBinary(g) => {
                if st.window != Window::Absent {
                    return Err(self.fail(phase, "a window already exists"));
                }
                let power = self.track(&g.power)?;
                let target = self.track(&g.target)?;
                st.tracks = vec![Val::Zero; width];
                st.tracks[power as usize] = Val::Set;
                st.tracks[target as usize] = Val::Set;
                st.window = Window::Origin;
                self.ops.push(Op::Guess { power, target });
            }
            Phase::CountFactor(cf) => self.count(st, phase, cf)?,
            Phase::NextPrimeScan(s) => {
                self.need_window(st, phase, true)?;
                let counter = self.track(&s.counter)?;
                let target = self.track(&s.target)?;
                self.need_set(st, phase, target, "target")?;
                if st.tracks[counter as usize] != Val::Zero {
                    return Err(self.fail(phase, format!("counter {} is not zero", s.counter)));
                }
                let flag = match &s.prime_flag {
                    Some(f) => {
                        let f = self.track(f)?;
                        if self.layout.tracks()[f as usize].role != TrackRole::Flag {
                            return Err(self.fail(
                                phase,
                                format!("{} is not a flag track", s.prime_flag.as_deref().unwrap_or("")),
                            ));
                        }
                        st.tracks[f as usize] = Val::Set;
                        Some(f)
                    }
                    None => None,
                };
                st.window = Window::Elsewhere;
                self.ops.push(Op::Scan {
                    counter,
                    target,
                    candidates: s.candidates,
                    flag,
                });
            }
            Phase::ShiftBack { keep } => {
                self.need_window(st, phase, false)?;
                let mut mask = 0u8;
                for k in keep {
                    mask |= 1 << self.track(k)?;
                }
                for (i, v) in st.tracks.iter_mut().enumerate() {
                    if mask >> i & 1 == 0 {
                        *v = Val::Zero;
                    }
                }
                st.window = Window::Origin;
                self.ops.push(Op::ShiftBack { keep: mask });
            }
            Phase::PowerOfTwoTest(t) => {
                let pred = Pred::PowerOfTwo(t.clone());
                self.test(st, phase, &pred, Target::Accept, Target::Reject)?;
            }
            Phase::AcceptIf(p) => {
                let next = Target::Pc(self.ops.len() + 1);
                self.test(st, phase, p, Target::Accept, next)?;
            }
            Phase::RejectIf(p) => {
                let next = Target::Pc(self.ops.len() + 1);
                self.test(st, phase, p, Target::Reject, next)?;
            }
            Phase::LoopWhile(cond, body) => {
                // Iterate the abstract state to a fixpoint over the back edge.
                let entry = st.clone();
                let mut head = entry.clone();
                let start = self.ops.len();
                loop {
                    self.ops.truncate(start);
                    let prev = self.prev;
                    let unconditional = *cond == Pred::True;
                    if !unconditional {
                        self.test(&head, phase, cond, Target::Pc(0), Target::Pc(0))?;
                    }
                    let mut inner = head.clone();
                    self.prev = phase.label();
                    self.lower(body, &mut inner)?;
                    self.prev = prev;
                    let body_start = start + usize::from(!unconditional);
                    if self.ops.len() == body_start {
                        return Err(CompileError::EmptyLoop);
                    }
                    self.ops.push(Op::Jump(start));
                    let end = self.ops.len();
                    if let Some(Op::Test { then, otherwise, .. }) = self.ops.get_mut(start).filter(|_| !unconditional) {
                        *then = Target::Pc(body_start);
                        *otherwise = Target::Pc(end);
                    }
                    let joined = entry.join(&inner);
                    if joined == head {
                        *st = head;
                        break;
                    }
                    head = joined;
                }
            }
        }
        Ok(())
    }
}

/// Flat step list; the last entry is the fall-through verdict.
pub(crate) fn flatten(program: &GadgetProgram, layout: &TrackLayout) -> Result<Vec<Op>, CompileError> {
    let mut low = Lowering {
        layout,
        ops: Vec::new(),
        prev: "start",
    };
    let mut st = Abstract {
        window: Window::Absent,
        tracks: vec![Val::Unset; layout.len()],
    };
    low.lower(&program.phases, &mut st)?;
    low.ops.push(Op::Halt(program.otherwise_accept));
    Ok(low.ops)
}
