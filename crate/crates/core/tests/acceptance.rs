//! Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero when any
//! criterion fails.

use std::collections::BTreeMap;
use std::process::ExitCode;

use rand::seq::SliceRandom;
use rand::Rng;

use tmlab::catalog::{
    bounce, guess_script_colam, machine_colam, machine_l0, machine_lam, mod2, mod3, sweeper, MachineCatalogEntry,
};
use tmlab::crossing::{check_trace, cut_and_paste, Ending, SoundnessViolation};
use tmlab::fuzz::{corpus, rng, FuzzConfig};
use tmlab::gadget::{compile, CountFactor, Counter, GadgetProgram, Marking, Phase, TrackLayout};
use tmlab::metering::growth::{fit_envelope, Shape};
use tmlab::metering::{
    extract_crossing_sequences, inputs_of_length, measure_input, trace_resources, Exactness, MeasureKind, Resource,
};
use tmlab::nfa::{build_crossing_nfa, compare_machine_nfa};
use tmlab::oracles::{brute_force_measure, karp_rows, member_lam, UnaryBits};
use tmlab::{enumerate_computations, run_deterministic, run_scripted, MachineSpec, Outcome, Trace};

const CATALOG_N_MAX: u64 = 2048;
const EXHAUSTIVE_N_MAX: u64 = 12;
const EXHAUSTIVE_FUEL: u64 = 10_000;
const EXHAUSTIVE_BRANCHES: usize = 1_000_000;
const DECIDE_FUEL: u64 = 100_000_000;

const COUNT_EXPONENTS: std::ops::RangeInclusive<u32> = 4..=12;
const TIME_EXPONENTS: std::ops::RangeInclusive<u32> = 6..=12;
const SLACK: f64 = 2.0;

const COLAM_FIT_MAX: u64 = 1 << 8;
const COLAM_N_MAX: u64 = 1 << 16;
const COLAM_WINDOW: u64 = 32;
/// log2 log2 n vanishes at n = 2, so time ratios are fitted from n = 4 up.
const COLAM_TIME_FIT_MIN: u64 = 4;

const FUZZ_SEED: u64 = 0x5eed_cafe;
const FUZZ_MACHINES: usize = 1000;
const FUZZ_MAX_LEN: usize = 5;
const FUZZ_FUEL: u64 = 20;
const FUZZ_BRANCHES: usize = 4096;

const NFA_MAX_LEN: usize = 20;
const NFA_COLAM_K: std::ops::RangeInclusive<usize> = 1..=3;

const SPLICES: usize = 100;
const SPLICE_SEED: u64 = 0xc0ffee;

const PRIME_POWER_N_MAX: u64 = 100_000;
const CHARACTERISATION_N_MAX: u64 = 10_000;

const KARP_N_MAX: usize = 512;
const KARP_WITNESSES: usize = 5;

// Test-local number theory, written without the library's oracles.

fn least_nondivisor(n: u64) -> u64 {
    let mut k = 2;
    while n.is_multiple_of(k) {
        k += 1;
    }
    k
}

fn is_prime(k: u64) -> bool {
    k >= 2 && (2..).take_while(|d| d * d <= k).all(|d| !k.is_multiple_of(d))
}

fn is_prime_power(k: u64) -> bool {
    let Some(p) = (2..=k).find(|d| k.is_multiple_of(*d)) else {
        return false;
    };
    let mut m = k;
    while m.is_multiple_of(p) {
        m /= p;
    }
    m == 1 && is_prime(p)
}

fn in_l0(n: u64) -> bool {
    if n == 0 {
        return false;
    }
    let mut p = 2;
    let mut t = 0;
    loop {
        if !n.is_multiple_of(p) {
            return t >= 1;
        }
        if n.is_multiple_of(p * p) {
            return false;
        }
        t += 1;
        p += 1;
        while !is_prime(p) {
            p += 1;
        }
    }
}

fn in_lam(n: u64) -> bool {
    n >= 1 && least_nondivisor(n).is_power_of_two()
}

fn in_colam(n: u64) -> bool {
    n >= 1 && !in_lam(n)
}

/// Direct search for s >= 1 and 2^s < t < 2^(s+1) with 2^s | n and t ∤ n.
fn has_pair(n: u64) -> bool {
    (1..40u32)
        .take_while(|&s| n.is_multiple_of(1u64 << s))
        .any(|s| ((1u64 << s) + 1..1u64 << (s + 1)).any(|t| !n.is_multiple_of(t)))
}

struct Report {
    lines: Vec<(usize, bool, String)>,
}

impl Report {
    fn record(&mut self, id: usize, pass: bool, detail: String) {
        println!("criterion {id:>2}: {} {detail}", if pass { "PASS" } else { "FAIL" });
        self.lines.push((id, pass, detail));
    }
}

fn unary(spec: &MachineSpec, n: u64) -> Vec<tmlab::SymbolId> {
    vec![spec.input_symbols()[0]; n as usize]
}

fn criterion_1(r: &mut Report) {
    let mut errors = Vec::new();
    for (entry, oracle) in [(machine_l0(), in_l0 as fn(u64) -> bool), (machine_lam(), in_lam)] {
        for n in 1..=CATALOG_N_MAX {
            let t = run_deterministic(&entry.spec, &unary(&entry.spec, n), DECIDE_FUEL).expect("runs");
            let accepted = t.outcome == Outcome::Accepted;
            if accepted != oracle(n) || !t.outcome.is_halted() {
                errors.push(format!("{} a^{n}: {}", entry.name, t.outcome.as_str()));
            }
        }
    }
    let co = machine_colam();
    let mut scripted = 0;
    for n in (1..=CATALOG_N_MAX).filter(|&n| in_colam(n)) {
        let script = guess_script_colam(n).expect("witness exists");
        let t = run_scripted(&co.spec, &unary(&co.spec, n), &script, DECIDE_FUEL).expect("runs");
        if t.outcome != Outcome::Accepted {
            errors.push(format!("coLAM a^{n} under script: {}", t.outcome.as_str()));
        }
        scripted += 1;
    }
    let mut exhaustive = 0;
    for n in (1..=EXHAUSTIVE_N_MAX).filter(|&n| !in_colam(n)) {
        let e = enumerate_computations(&co.spec, &unary(&co.spec, n), EXHAUSTIVE_FUEL, EXHAUSTIVE_BRANCHES)
            .expect("enumerates");
        if !e.is_complete() {
            errors.push(format!("coLAM a^{n}: enumeration incomplete"));
        }
        if e.traces.iter().any(|t| t.outcome == Outcome::Accepted) {
            errors.push(format!("coLAM a^{n}: accepting computation found"));
        }
        exhaustive += 1;
    }
    let detail = format!(
        "L0/LAM decided for n=1..{CATALOG_N_MAX}; coLAM scripted accepts {scripted}; {exhaustive} non-members exhausted{}",
        if errors.is_empty() { String::new() } else { format!("; errors: {:?}", &errors[..errors.len().min(5)]) }
    );
    r.record(1, errors.is_empty(), detail);
}

fn criterion_2(r: &mut Report) {
    let layout = TrackLayout::new().counter("c");
    let program = GadgetProgram::new(vec![
        Phase::Load(vec![("c".into(), 0)]),
        Phase::CountFactor(CountFactor {
            base: 2,
            counters: vec![Counter::every_cell("c")],
            marking: Marking::None,
        }),
    ])
    .otherwise_accept();
    let m = compile(&program, &layout).expect("compiles");
    let steps: Vec<(f64, f64)> = COUNT_EXPONENTS
        .map(|e| {
            let k = 1usize << e;
            let t = run_deterministic(&m.spec, &m.input(k), DECIDE_FUEL).expect("runs");
            (k as f64, t.time() as f64)
        })
        .collect();
    let c = steps[0].1 / Shape::KLogK.eval(steps[0].0);
    let worst = steps[1..]
        .iter()
        .map(|&(k, s)| s / (c * Shape::KLogK.eval(k)))
        .fold(0.0, f64::max);
    r.record(
        2,
        worst <= SLACK,
        format!("C={c:.3} at k=16; worst steps/(C k log k) over k=32..4096 is {worst:.3} (limit {SLACK})"),
    );
}

fn criterion_3(r: &mut Report) {
    let mut ok_bound = true;
    let mut ok_growth = true;
    let mut parts = Vec::new();
    for entry in [machine_l0(), machine_lam()] {
        let pts: Vec<(f64, f64)> = TIME_EXPONENTS
            .map(|e| {
                let n = 1u64 << e;
                let m = measure_input(
                    &entry.spec,
                    &unary(&entry.spec, n),
                    Resource::Time,
                    MeasureKind::Strong,
                    DECIDE_FUEL,
                    1,
                )
                .expect("measures");
                assert_eq!(m.exactness, Exactness::Exact);
                (n as f64, m.value as f64)
            })
            .collect();
        let c = pts[0].1 / Shape::NLogN.eval(pts[0].0);
        let worst = pts
            .iter()
            .map(|&(n, t)| t / (c * Shape::NLogN.eval(n)))
            .fold(0.0, f64::max);
        let ratios: Vec<f64> = pts.iter().map(|&(n, t)| t / n).collect();
        let increasing = ratios.windows(2).all(|w| w[1] > w[0]);
        ok_bound &= worst <= SLACK;
        ok_growth &= increasing;
        parts.push(format!(
            "{}: worst t/(C n log n)={worst:.3}, t(n)/n {}",
            entry.name,
            ratios.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(">")
        ));
        if increasing {
            let last = parts.pop().expect("pushed");
            parts.push(last.replace('>', "<"));
        }
    }
    let verdict = match (ok_bound, ok_growth) {
        (true, true) => "bound and super-linearity hold".to_string(),
        (true, false) => "bound holds; t(n)/n does not strictly increase".to_string(),
        (false, _) => "n log n bound violated".to_string(),
    };
    r.record(3, ok_bound && ok_growth, format!("{verdict}; {}", parts.join("; ")));
}

fn colam_sample() -> Vec<u64> {
    let mut ns: Vec<u64> = (2..=COLAM_FIT_MAX).collect();
    for k in 9..=16u32 {
        let c = 1u64 << k;
        ns.extend(c.saturating_sub(COLAM_WINDOW)..=(c + COLAM_WINDOW).min(COLAM_N_MAX));
    }
    // Multiples of 840 = lcm(8, 3, 5, 7) are where s = 3 witnesses live.
    ns.extend((1..=COLAM_N_MAX / 840).map(|i| i * 840));
    ns.sort_unstable();
    ns.dedup();
    ns.retain(|&n| n <= COLAM_N_MAX && in_colam(n));
    ns
}

fn criterion_4(r: &mut Report) {
    let co = machine_colam();
    let mut cross = Vec::new();
    let mut time = Vec::new();
    for n in colam_sample() {
        let script = guess_script_colam(n).expect("witness");
        let t = run_scripted(&co.spec, &unary(&co.spec, n), &script, DECIDE_FUEL).expect("runs");
        assert_eq!(t.outcome, Outcome::Accepted);
        let rep = trace_resources(&co.spec, &t);
        cross.push((n as f64, rep.max_crossing as f64));
        time.push((n as f64, rep.time as f64));
    }
    let fit_max = COLAM_FIT_MAX as f64;
    let fit: Vec<(f64, f64)> = cross.iter().copied().filter(|p| p.0 <= fit_max).collect();
    let (a, b) = fit_envelope(&fit, Shape::LogLogN);
    let cross_bad: Vec<_> = cross
        .iter()
        .filter(|p| p.0 > fit_max && p.1 > SLACK * (a * Shape::LogLogN.eval(p.0) + b))
        .collect();
    let c = time
        .iter()
        .filter(|p| p.0 >= COLAM_TIME_FIT_MIN as f64 && p.0 <= fit_max)
        .map(|p| p.1 / Shape::NLogLogN.eval(p.0))
        .fold(0.0, f64::max);
    let time_bad: Vec<_> = time
        .iter()
        .filter(|p| p.0 > fit_max && p.1 > SLACK * c * Shape::NLogLogN.eval(p.0))
        .collect();
    let max_cross = cross.iter().map(|p| p.1).fold(0.0, f64::max);
    r.record(
        4,
        cross_bad.is_empty() && time_bad.is_empty(),
        format!(
            "{} accepted n sampled; crossing fit A={a:.3} B={b:.3}, max crossing {max_cross}; time C={c:.3}; violations: crossing {} time {}",
            cross.len(),
            cross_bad.len(),
            time_bad.len()
        ),
    );
}

/// Machines whose computation trees stay within the branch cap on every
/// input up to the fuzz length.
fn fuzz_corpus() -> Vec<MachineSpec> {
    corpus(FUZZ_SEED, FUZZ_MACHINES, &FuzzConfig::default(), |m| {
        (0..=FUZZ_MAX_LEN).all(|len| {
            inputs_of_length(m, len)
                .all(|w| enumerate_computations(m, &w, FUZZ_FUEL, FUZZ_BRANCHES).is_ok_and(|e| !e.truncated))
        })
    })
}

fn all_words(m: &MachineSpec) -> Vec<Vec<tmlab::SymbolId>> {
    (0..=FUZZ_MAX_LEN)
        .flat_map(|len| inputs_of_length(m, len).collect::<Vec<_>>())
        .collect()
}

fn criterion_5(r: &mut Report, machines: &[MachineSpec]) {
    let mut traces = 0usize;
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    let mut first = None;
    for (i, m) in machines.iter().enumerate() {
        for w in all_words(m) {
            let e = enumerate_computations(m, &w, FUZZ_FUEL, FUZZ_BRANCHES).expect("enumerates");
            for t in &e.traces {
                traces += 1;
                for v in check_trace(m, t) {
                    let key = match v {
                        SoundnessViolation::Conservation { .. } => "conservation",
                        SoundnessViolation::Incompatible { .. } => "compatibility",
                        SoundnessViolation::Parity { .. } => "parity",
                    };
                    *counts.entry(key).or_default() += 1;
                    first.get_or_insert_with(|| format!("machine {i}: {v}"));
                }
            }
        }
    }
    let total: usize = counts.values().sum();
    r.record(
        5,
        machines.len() >= FUZZ_MACHINES && total == 0,
        format!(
            "{} machines, {traces} traces; violations conservation={} compatibility={} parity={}{}",
            machines.len(),
            counts.get("conservation").unwrap_or(&0),
            counts.get("compatibility").unwrap_or(&0),
            counts.get("parity").unwrap_or(&0),
            first.map(|f| format!("; first: {f}")).unwrap_or_default()
        ),
    );
}

fn criterion_6(r: &mut Report, machines: &[MachineSpec]) {
    let mut compared = 0usize;
    let mut exact = 0usize;
    let mut mismatches = Vec::new();
    for (i, m) in machines.iter().enumerate() {
        for w in all_words(m) {
            for resource in [Resource::Time, Resource::Crossing] {
                for kind in MeasureKind::ALL {
                    let got = measure_input(m, &w, resource, kind, FUZZ_FUEL, FUZZ_BRANCHES).expect("measures");
                    let want = brute_force_measure(m, &w, resource, kind, FUZZ_FUEL, FUZZ_BRANCHES).expect("expands");
                    compared += 1;
                    let flag_ok = (got.exactness == Exactness::Exact) == want.complete;
                    let value_ok = !want.complete || got.value == want.value;
                    if want.complete {
                        exact += 1;
                    }
                    if !(flag_ok && value_ok) {
                        mismatches.push(format!(
                            "machine {i} input {:?} {} {}: {} {:?} vs {} complete={}",
                            m.format_input(&w),
                            resource.as_str(),
                            kind.as_str(),
                            got.value,
                            got.exactness,
                            want.value,
                            want.complete
                        ));
                    }
                }
            }
        }
    }
    r.record(
        6,
        mismatches.is_empty(),
        format!(
            "{compared} comparisons ({exact} with complete trees, exact flag required there and absent elsewhere); mismatches {}{}",
            mismatches.len(),
            mismatches.first().map(|f| format!("; first: {f}")).unwrap_or_default()
        ),
    );
}

fn criterion_7(r: &mut Report) {
    let mut ok = true;
    let mut parts = Vec::new();
    let constant: Vec<MachineCatalogEntry> = vec![sweeper(), mod3(), mod2(), bounce()];
    for e in &constant {
        let k = e.crossing_k.expect("constant crossing");
        let nfa = build_crossing_nfa(&e.spec, k);
        let c =
            compare_machine_nfa(&e.spec, &nfa, NFA_MAX_LEN, EXHAUSTIVE_FUEL, EXHAUSTIVE_BRANCHES).expect("compares");
        let agree = c.disagreement.is_none() && c.inconclusive.is_empty() && !nfa.truncated;
        ok &= agree;
        parts.push(format!(
            "{} k={k} {} states {}",
            e.name,
            nfa.states.len(),
            if agree { "agrees" } else { "DISAGREES" }
        ));
    }
    let co = machine_colam();
    for k in NFA_COLAM_K {
        let nfa = build_crossing_nfa(&co.spec, k);
        let c =
            compare_machine_nfa(&co.spec, &nfa, NFA_MAX_LEN, EXHAUSTIVE_FUEL, EXHAUSTIVE_BRANCHES).expect("compares");
        match c.disagreement {
            Some(d) => parts.push(format!(
                "coLAM k={k} differs at length {} (machine {}, nfa {})",
                d.length, d.machine, d.nfa
            )),
            None => {
                ok = false;
                parts.push(format!("coLAM k={k} no disagreement up to {NFA_MAX_LEN}"));
            }
        }
    }
    r.record(7, ok, parts.join("; "));
}

fn criterion_8(r: &mut Report, machines: &[MachineSpec]) {
    let mut rng = rng(SPLICE_SEED);
    let mut done = 0usize;
    let mut failures = Vec::new();
    let mut identities = 0usize;
    let mut order: Vec<usize> = (0..machines.len()).collect();
    order.shuffle(&mut rng);
    'machines: for &i in &order {
        let m = &machines[i];
        // Finished traces with at least one letter, keyed by crossing sequence.
        let mut by_seq: BTreeMap<Vec<u32>, Vec<(usize, usize)>> = BTreeMap::new();
        let mut traces: Vec<Trace> = Vec::new();
        for w in all_words(m).into_iter().filter(|w| !w.is_empty()) {
            let e = enumerate_computations(m, &w, FUZZ_FUEL, FUZZ_BRANCHES).expect("enumerates");
            for t in e.traces.into_iter().filter(|t| t.outcome != Outcome::FuelExhausted) {
                let cs = extract_crossing_sequences(m, &t);
                for b in 1..=t.input.len() {
                    let key = cs.at(b).iter().map(|q| q.0).collect();
                    by_seq.entry(key).or_default().push((traces.len(), b));
                }
                traces.push(t);
            }
        }
        let groups: Vec<&Vec<(usize, usize)>> = by_seq.values().filter(|g| g.len() >= 2).collect();
        if groups.is_empty() {
            continue;
        }
        for _ in 0..2 {
            let g = groups[rng.gen_range(0..groups.len())];
            let (t1, b1) = g[rng.gen_range(0..g.len())];
            let (t2, b2) = g[rng.gen_range(0..g.len())];
            let (first, second) = (&traces[t1], &traces[t2]);
            match cut_and_paste(m, first, b1, second, b2) {
                Ok(s) => {
                    let expected = match s.ending {
                        Ending::SuffixSide => first.outcome,
                        Ending::PrefixSide => second.outcome,
                    };
                    let parity_ok = (s.shared.len() % 2 == 1) == (s.ending == Ending::SuffixSide);
                    let mut input = second.input[..b2].to_vec();
                    input.extend_from_slice(&first.input[b1..]);
                    if s.trace.check(m).is_err() || s.trace.outcome != expected || !parity_ok || s.trace.input != input
                    {
                        failures.push(format!("machine {i}: splice ({t1},{b1})+({t2},{b2})"));
                    }
                }
                Err(e) => failures.push(format!("machine {i}: {e}")),
            }
            let own = cut_and_paste(m, first, b1, first, b1);
            match own {
                Ok(s) if s.trace == *first => identities += 1,
                _ => failures.push(format!("machine {i}: self-splice at {b1} is not the identity")),
            }
            done += 1;
            if done >= SPLICES {
                break 'machines;
            }
        }
    }
    r.record(
        8,
        done >= SPLICES && failures.is_empty(),
        format!(
            "{done} splices, {identities} self-splice identities; failures {}{}",
            failures.len(),
            failures.first().map(|f| format!("; first: {f}")).unwrap_or_default()
        ),
    );
}

fn criterion_9(r: &mut Report) {
    let not_prime_power: Vec<u64> = (1..=PRIME_POWER_N_MAX)
        .filter(|&n| !is_prime_power(least_nondivisor(n)))
        .take(5)
        .collect();
    let library_q: Vec<u64> = (1..=PRIME_POWER_N_MAX)
        .filter(|&n| tmlab::oracles::smallest_nondivisor(n) != Ok(least_nondivisor(n)))
        .take(5)
        .collect();
    let mismatched: Vec<u64> = (1..=CHARACTERISATION_N_MAX)
        .filter(|&n| {
            let membership = tmlab::oracles::member_colam(n);
            has_pair(n) != membership || tmlab::oracles::colam_pair_search(n).is_some() != membership
        })
        .take(5)
        .collect();
    r.record(
        9,
        not_prime_power.is_empty() && library_q.is_empty() && mismatched.is_empty(),
        format!(
            "q(n) prime power for n<={PRIME_POWER_N_MAX} (exceptions {not_prime_power:?}, library q disagreements {library_q:?}); (s,t) characterisation vs membership n<={CHARACTERISATION_N_MAX}: mismatches {mismatched:?}"
        ),
    );
}

fn criterion_10(r: &mut Report) {
    let bits = UnaryBits::from_fn(KARP_N_MAX, member_lam);
    let rows = karp_rows(&bits, 0..=KARP_N_MAX);
    let witnesses: Vec<usize> = rows.iter().filter(|r| r.is_witness()).map(|r| r.n).collect();
    let wrong: Vec<usize> = rows
        .iter()
        .filter(|r| r.bound != (r.n + 3).div_ceil(2))
        .map(|r| r.n)
        .collect();
    r.record(
        10,
        witnesses.len() >= KARP_WITNESSES && wrong.is_empty(),
        format!(
            "{} witnesses n<={KARP_N_MAX} with min DFA >= ceil((n+3)/2); first {:?}",
            witnesses.len(),
            &witnesses[..witnesses.len().min(10)]
        ),
    );
}

fn main() -> ExitCode {
    let mut r = Report { lines: Vec::new() };
    criterion_1(&mut r);
    criterion_2(&mut r);
    criterion_3(&mut r);
    criterion_4(&mut r);
    let machines = fuzz_corpus();
    criterion_5(&mut r, &machines);
    criterion_6(&mut r, &machines);
    criterion_7(&mut r);
    criterion_8(&mut r, &machines);
    criterion_9(&mut r);
    criterion_10(&mut r);
    let failed: Vec<usize> = r.lines.iter().filter(|l| !l.1).map(|l| l.0).collect();
    println!(
        "acceptance: {} of {} criteria pass{}",
        r.lines.len() - failed.len(),
        r.lines.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!("; failing {failed:?}")
        }
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
