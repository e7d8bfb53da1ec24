//! Time and crossing resources of computations, and the strong / accept /
//! weak measures built from them.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;

use thiserror::Error;

use crate::exec::{
    enumerate_computations, run_observed, Configuration, GuessScript, Outcome, RunError, StepView, Trace,
};
use crate::machine::{MachineSpec, Move, StateId, SymbolId};

/// Boundary crossed by a move from cell `head`: boundary `i` separates
/// cells `i - 1` and `i`, so boundaries start at 1.
#[inline]
pub fn crossed_boundary(head: usize, mv: Move) -> Option<usize> {
    match mv {
        Move::Right => Some(head + 1),
        Move::Left => Some(head),
        Move::Stay => None,
    }
}

/// The states entered at each crossing of one boundary, in time order.
/// Odd positions (1st, 3rd, ...) are left-to-right crossings.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CrossingSequence {
    pub boundary: usize,
    pub states: Vec<StateId>,
}

impl CrossingSequence {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// True when the head finishes to the right of the boundary.
    pub fn ends_right(&self) -> bool {
        self.states.len() % 2 == 1
    }

    pub fn render(&self, spec: &MachineSpec) -> String {
        let names: Vec<&str> = self.states.iter().map(|s| spec.state_name(*s)).collect();
        format!("({})", names.join(", "))
    }
}

/// Crossing sequences of a trace keyed by boundary. Only crossed
/// boundaries appear.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Crossings {
    pub sequences: BTreeMap<usize, CrossingSequence>,
    /// The trace stopped on fuel, so the sequences may be prefixes.
    pub partial: bool,
}

impl Crossings {
    pub fn at(&self, boundary: usize) -> &[StateId] {
        self.sequences
            .get(&boundary)
            .map(|c| c.states.as_slice())
            .unwrap_or(&[])
    }

    pub fn max_len(&self) -> usize {
        self.sequences.values().map(CrossingSequence::len).max().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.sequences.values().map(CrossingSequence::len).sum()
    }
}

pub fn extract_crossing_sequences(spec: &MachineSpec, trace: &Trace) -> Crossings {
    let mut sequences: BTreeMap<usize, CrossingSequence> = BTreeMap::new();
    let _ = trace.replay(spec, |_, v| {
        if let Some(b) = crossed_boundary(v.head_before, v.mv) {
            sequences
                .entry(b)
                .or_insert_with(|| CrossingSequence {
                    boundary: b,
                    states: Vec::new(),
                })
                .states
                .push(v.state_after);
        }
    });
    Crossings {
        sequences,
        partial: trace.outcome == Outcome::FuelExhausted,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResourceReport {
    pub time: u64,
    pub max_crossing: usize,
    pub left_moves: u64,
    pub right_moves: u64,
    pub crossings: Crossings,
    pub outcome: Outcome,
}

pub fn trace_resources(spec: &MachineSpec, trace: &Trace) -> ResourceReport {
    let crossings = extract_crossing_sequences(spec, trace);
    let (mut left_moves, mut right_moves) = (0, 0);
    for &id in &trace.steps {
        match spec.transition(id).mv {
            Move::Left => left_moves += 1,
            Move::Right => right_moves += 1,
            Move::Stay => {}
        }
    }
    ResourceReport {
        time: trace.time(),
        max_crossing: crossings.max_len(),
        left_moves,
        right_moves,
        crossings,
        outcome: trace.outcome,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Resource {
    Time,
    Crossing,
}

impl Resource {
    pub fn as_str(self) -> &'static str {
        match self {
            Resource::Time => "time",
            Resource::Crossing => "crossing",
        }
    }

    pub fn parse(s: &str) -> Option<Resource> {
        match s {
            "time" => Some(Resource::Time),
            "crossing" => Some(Resource::Crossing),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MeasureKind {
    Strong,
    Accept,
    Weak,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 3] = [MeasureKind::Strong, MeasureKind::Accept, MeasureKind::Weak];

    pub fn as_str(self) -> &'static str {
        match self {
            MeasureKind::Strong => "strong",
            MeasureKind::Accept => "accept",
            MeasureKind::Weak => "weak",
        }
    }

    pub fn parse(s: &str) -> Option<MeasureKind> {
        match s {
            "strong" => Some(MeasureKind::Strong),
            "accept" => Some(MeasureKind::Accept),
            "weak" => Some(MeasureKind::Weak),
            _ => None,
        }
    }
}

/// How far a reported value can be trusted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Exactness {
    Exact,
    LowerBound,
    UpperBound,
    Unknown,
}

impl Exactness {
    pub fn as_str(self) -> &'static str {
        match self {
            Exactness::Exact => "exact",
            Exactness::LowerBound => "lower-bound",
            Exactness::UpperBound => "upper-bound",
            Exactness::Unknown => "unknown",
        }
    }

    /// Exactness of a maximum over several values.
    pub fn join(self, other: Exactness) -> Exactness {
        match (self, other) {
            (Exactness::Exact, x) | (x, Exactness::Exact) => x,
            (a, b) if a == b => a,
            _ => Exactness::Unknown,
        }
    }
}

impl fmt::Display for Exactness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Whether an accepting computation was seen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Accepted,
    Rejected,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Accepted => "accepted",
            Verdict::Rejected => "rejected",
            Verdict::Inconclusive => "inconclusive",
        }
    }

    fn join(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::Accepted, _) | (_, Verdict::Accepted) => Verdict::Accepted,
            (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => Verdict::Inconclusive,
            _ => Verdict::Rejected,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Measured {
    pub value: u64,
    pub exactness: Exactness,
    pub verdict: Verdict,
}

/// Resource of one run, gathered without storing the trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunCost {
    pub time: u64,
    pub max_crossing: usize,
    pub outcome: Outcome,
}

impl RunCost {
    pub fn get(&self, r: Resource) -> u64 {
        match r {
            Resource::Time => self.time,
            Resource::Crossing => self.max_crossing as u64,
        }
    }
}

/// Tallies crossings per boundary as moves stream past.
#[derive(Default)]
pub struct CrossingTally {
    counts: Vec<u32>,
    max: u32,
}

impl CrossingTally {
    #[inline]
    pub fn record(&mut self, v: &StepView) {
        if let Some(b) = crossed_boundary(v.head_before, v.mv) {
            if b >= self.counts.len() {
                self.counts.resize(b + 1, 0);
            }
            self.counts[b] += 1;
            self.max = self.max.max(self.counts[b]);
        }
    }

    pub fn max(&self) -> usize {
        self.max as usize
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }
}

/// Runs deterministically (or along `script`) and returns time and maximal
/// crossing-sequence length without recording the computation.
pub fn run_cost(
    spec: &MachineSpec,
    input: &[SymbolId],
    script: Option<&GuessScript>,
    fuel: u64,
) -> Result<RunCost, RunError> {
    let mut tally = CrossingTally::default();
    let summary = run_observed(spec, input, script, fuel, |_: &Configuration, v| tally.record(&v))?;
    Ok(RunCost {
        time: summary.time,
        max_crossing: tally.max(),
        outcome: summary.outcome,
    })
}

fn cost_of(spec: &MachineSpec, trace: &Trace) -> RunCost {
    let mut tally = CrossingTally::default();
    let _ = trace.replay(spec, |_, v| tally.record(&v));
    RunCost {
        time: trace.time(),
        max_crossing: tally.max(),
        outcome: trace.outcome,
    }
}

/// Folds per-computation costs into one measure value.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Aggregate {
    max_all: u64,
    max_acc: Option<u64>,
    min_acc: Option<u64>,
    fuel_cut: bool,
}

impl Aggregate {
    pub(crate) fn new() -> Self {
        Aggregate {
            max_all: 0,
            max_acc: None,
            min_acc: None,
            fuel_cut: false,
        }
    }

    pub(crate) fn add(&mut self, value: u64, outcome: Outcome) {
        self.max_all = self.max_all.max(value);
        match outcome {
            Outcome::Accepted => {
                self.max_acc = Some(self.max_acc.map_or(value, |m| m.max(value)));
                self.min_acc = Some(self.min_acc.map_or(value, |m| m.min(value)));
            }
            Outcome::FuelExhausted => self.fuel_cut = true,
            _ => {}
        }
    }

    /// `complete` says whether every computation was seen in full.
    pub(crate) fn finish(self, kind: MeasureKind, complete: bool) -> Measured {
        let verdict = match (self.max_acc, complete) {
            (Some(_), _) => Verdict::Accepted,
            (None, true) => Verdict::Rejected,
            (None, false) => Verdict::Inconclusive,
        };
        let (value, exactness) = match kind {
            MeasureKind::Strong => (self.max_all, lower_unless(complete)),
            MeasureKind::Accept => (self.max_acc.unwrap_or(0), lower_unless(complete)),
            MeasureKind::Weak => match (self.min_acc, complete) {
                (v, true) => (v.unwrap_or(0), Exactness::Exact),
                (Some(v), false) => (v, Exactness::UpperBound),
                (None, false) => (0, Exactness::Unknown),
            },
        };
        Measured {
            value,
            exactness,
            verdict,
        }
    }
}

fn lower_unless(complete: bool) -> Exactness {
    if complete {
        Exactness::Exact
    } else {
        Exactness::LowerBound
    }
}

/// Strong, accept or weak value of `resource` on one input.
///
/// Deterministic machines take a single streaming run. Otherwise every
/// computation is enumerated; fuel or the branch cap turn the result into a
/// bound, as recorded in [`Measured::exactness`].
pub fn measure_input(
    spec: &MachineSpec,
    input: &[SymbolId],
    resource: Resource,
    kind: MeasureKind,
    fuel: u64,
    max_branches: usize,
) -> Result<Measured, RunError> {
    let mut agg = Aggregate::new();
    let complete = if spec.is_deterministic() {
        let cost = run_cost(spec, input, None, fuel)?;
        agg.add(cost.get(resource), cost.outcome);
        cost.outcome != Outcome::FuelExhausted
    } else {
        let all = enumerate_computations(spec, input, fuel, max_branches)?;
        for t in &all.traces {
            agg.add(cost_of(spec, t).get(resource), t.outcome);
        }
        all.is_complete()
    };
    Ok(agg.finish(kind, complete))
}

/// Measure from a single scripted computation. Only the weak measure gets
/// an upper bound out of this; strong and accept get lower bounds.
pub fn measure_scripted(
    spec: &MachineSpec,
    input: &[SymbolId],
    script: &GuessScript,
    resource: Resource,
    kind: MeasureKind,
    fuel: u64,
) -> Result<Measured, RunError> {
    let cost = run_cost(spec, input, Some(script), fuel)?;
    let value = cost.get(resource);
    let accepted = cost.outcome == Outcome::Accepted;
    let verdict = if accepted {
        Verdict::Accepted
    } else {
        Verdict::Inconclusive
    };
    let (value, exactness) = match (kind, accepted) {
        (MeasureKind::Strong, _) => (value, Exactness::LowerBound),
        (MeasureKind::Accept, true) => (value, Exactness::LowerBound),
        (MeasureKind::Weak, true) => (value, Exactness::UpperBound),
        (_, false) => (0, Exactness::Unknown),
    };
    Ok(Measured {
        value,
        exactness,
        verdict,
    })
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MeterError {
    #[error("{count} inputs of length {n} exceed the cap of {cap}")]
    InputSpaceTooLarge { n: usize, count: u128, cap: u64 },
    #[error("machine has an empty input alphabet")]
    NoInputSymbols,
    #[error("no guess script for n = {n}")]
    MissingScript { n: usize },
    #[error(transparent)]
    Run(#[from] RunError),
}

/// Limits for exhaustive measurement.
#[derive(Clone, Copy, Debug)]
pub struct Budget {
    pub fuel: u64,
    pub max_branches: usize,
    pub max_inputs: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            fuel: 100_000,
            max_branches: 10_000,
            max_inputs: 1 << 16,
        }
    }
}

/// Every string of length `n` over the input alphabet, in shortlex order of
/// declared symbols.
pub fn inputs_of_length(spec: &MachineSpec, n: usize) -> impl Iterator<Item = Vec<SymbolId>> + '_ {
    let sigma = spec.input_symbols();
    let k = sigma.len();
    let mut digits = vec![0usize; n];
    let mut done = k == 0 && n > 0;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let word = digits.iter().map(|&d| sigma[d]).collect();
        done = true;
        for d in digits.iter_mut().rev() {
            *d += 1;
            if *d < k {
                done = false;
                break;
            }
            *d = 0;
        }
        Some(word)
    })
}

/// `r(n)`: the maximum of [`measure_input`] over all inputs of length `n`.
pub fn measure_length(
    spec: &MachineSpec,
    n: usize,
    resource: Resource,
    kind: MeasureKind,
    budget: Budget,
) -> Result<Measured, MeterError> {
    let k = spec.input_symbols().len();
    if k == 0 {
        return Err(MeterError::NoInputSymbols);
    }
    let count = (k as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if count > budget.max_inputs as u128 {
        return Err(MeterError::InputSpaceTooLarge {
            n,
            count,
            cap: budget.max_inputs,
        });
    }
    let mut best: Option<Measured> = None;
    for input in inputs_of_length(spec, n) {
        let m = measure_input(spec, &input, resource, kind, budget.fuel, budget.max_branches)?;
        best = Some(match best {
            None => m,
            Some(b) => Measured {
                value: b.value.max(m.value),
                exactness: b.exactness.join(m.exactness),
                verdict: b.verdict.join(m.verdict),
            },
        });
    }
    Ok(best.expect("at least one input"))
}

/// How [`profile_range`] obtains computations.
pub enum Runner<'a> {
    /// Exhaustive enumeration under a budget.
    Enumerate(Budget),
    /// One scripted computation per length; the machine must be unary.
    /// Lengths for which the provider has no script are reported with
    /// unknown exactness.
    Scripts {
        fuel: u64,
        provider: &'a dyn Fn(usize) -> Option<GuessScript>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProfileRow {
    pub n: usize,
    pub resource: Resource,
    pub kind: MeasureKind,
    pub value: u64,
    pub exactness: Exactness,
    pub outcome: String,
}

pub fn profile_range(
    spec: &MachineSpec,
    ns: &[usize],
    resource: Resource,
    kind: MeasureKind,
    runner: &Runner<'_>,
) -> Result<Vec<ProfileRow>, MeterError> {
    let mut sorted = ns.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut rows = Vec::with_capacity(sorted.len());
    for n in sorted {
        let (value, exactness, outcome) = match runner {
            Runner::Enumerate(budget) => {
                let m = measure_length(spec, n, resource, kind, *budget)?;
                (m.value, m.exactness, m.verdict.as_str().to_string())
            }
            Runner::Scripts { fuel, provider } => {
                let letter = *spec.input_symbols().first().ok_or(MeterError::NoInputSymbols)?;
                match provider(n) {
                    Some(script) => {
                        let m = measure_scripted(spec, &vec![letter; n], &script, resource, kind, *fuel)?;
                        (m.value, m.exactness, m.verdict.as_str().to_string())
                    }
                    None => (0, Exactness::Unknown, "unscripted".to_string()),
                }
            }
        };
        rows.push(ProfileRow {
            n,
            resource,
            kind,
            value,
            exactness,
            outcome,
        });
    }
    Ok(rows)
}

pub const CSV_HEADER: &str = "n,resource,measure,value,exactness,outcome";

pub fn profile_csv(rows: &[ProfileRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.n,
            r.resource.as_str(),
            r.kind.as_str(),
            r.value,
            r.exactness.as_str(),
            r.outcome
        );
    }
    out
}

/// Parses CSV produced by [`profile_csv`].
pub fn parse_profile_csv(text: &str) -> Option<Vec<ProfileRow>> {
    let mut lines = text.lines();
    if lines.next()?.trim() != CSV_HEADER {
        return None;
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let f: Vec<&str> = l.trim().split(',').collect();
            if f.len() != 6 {
                return None;
            }
            let exactness = match f[4] {
                "exact" => Exactness::Exact,
                "lower-bound" => Exactness::LowerBound,
                "upper-bound" => Exactness::UpperBound,
                "unknown" => Exactness::Unknown,
                _ => return None,
            };
            Some(ProfileRow {
                n: f[0].parse().ok()?,
                resource: Resource::parse(f[1])?,
                kind: MeasureKind::parse(f[2])?,
                value: f[3].parse().ok()?,
                exactness,
                outcome: f[5].to_string(),
            })
        })
        .collect()
}

/// Ratio checks of measured values against a growth function.
pub mod growth {
    /// A named bound shape `g(n)`.
    #[derive(Clone, Copy, Debug, PartialEq, Eq)]
    pub enum Shape {
        Constant,
        Linear,
        NLogN,
        NLogLogN,
        LogLogN,
        KLogK,
    }

    impl Shape {
        pub fn eval(self, n: f64) -> f64 {
            match self {
                Shape::Constant => 1.0,
                Shape::Linear => n,
                Shape::NLogN | Shape::KLogK => n * n.log2(),
                Shape::NLogLogN => n * n.log2().log2(),
                Shape::LogLogN => n.log2().log2(),
            }
        }

        pub fn parse(s: &str) -> Option<Shape> {
            match s {
                "1" => Some(Shape::Constant),
                "n" => Some(Shape::Linear),
                "nlogn" => Some(Shape::NLogN),
                "nloglogn" => Some(Shape::NLogLogN),
                "loglogn" => Some(Shape::LogLogN),
                _ => None,
            }
        }
    }

    /// `C = y / g(x)` at the reference point.
    pub fn fit_scale(x: f64, y: f64, shape: Shape) -> f64 {
        y / shape.eval(x)
    }

    /// Least-squares `(A, B)` for `y ~ A * g(x) + B`. With a single distinct
    /// abscissa the slope is zero.
    pub fn fit_affine(points: &[(f64, f64)], shape: Shape) -> (f64, f64) {
        let m = points.len() as f64;
        let gx: Vec<f64> = points.iter().map(|p| shape.eval(p.0)).collect();
        let mean_g = gx.iter().sum::<f64>() / m;
        let mean_y = points.iter().map(|p| p.1).sum::<f64>() / m;
        let sxx: f64 = gx.iter().map(|g| (g - mean_g).powi(2)).sum();
        if sxx == 0.0 {
            return (0.0, mean_y);
        }
        let sxy: f64 = gx.iter().zip(points).map(|(g, p)| (g - mean_g) * (p.1 - mean_y)).sum();
        let a = sxy / sxx;
        (a, mean_y - a * mean_g)
    }

    /// Upper envelope `(A, B)` for `y <= A * g(x) + B`: the least-squares
    /// slope with the intercept raised until every point lies below.
    pub fn fit_envelope(points: &[(f64, f64)], shape: Shape) -> (f64, f64) {
        let (a, _) = fit_affine(points, shape);
        let a = a.max(0.0);
        let b = points
            .iter()
            .map(|p| p.1 - a * shape.eval(p.0))
            .fold(f64::NEG_INFINITY, f64::max);
        (a, b)
    }

    /// Points whose value exceeds `slack * bound(x)`.
    pub fn violations(points: &[(f64, f64)], bound: impl Fn(f64) -> f64, slack: f64) -> Vec<(f64, f64, f64)> {
        points
            .iter()
            .filter_map(|&(x, y)| {
                let limit = slack * bound(x);
                (y > limit).then_some((x, y, limit))
            })
            .collect()
    }

    /// Indices `i` where `y[i+1]/x[i+1] <= y[i]/x[i]`.
    pub fn non_increasing_ratio_steps(points: &[(f64, f64)]) -> Vec<usize> {
        points
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[1].1 / w[1].0 <= w[0].1 / w[0].0)
            .map(|(i, _)| i)
            .collect()
    }
}
