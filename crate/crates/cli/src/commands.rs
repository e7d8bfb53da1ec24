use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use tmlab::catalog;
use tmlab::crossing::{cut_and_paste, Ending};
use tmlab::metering::growth::Shape;
use tmlab::metering::{
    parse_profile_csv, profile_csv, profile_range, trace_resources, Budget, MeasureKind, ProfileRow, Resource, Runner,
};
use tmlab::nfa::{build_crossing_nfa, compare_machine_nfa, write_nfa};
use tmlab::oracles::{karp_rows, member_colam, member_l0, member_lam, UnaryBits};
use tmlab::{enumerate_computations, run_deterministic, run_scripted, MachineSpec, Outcome, SymbolId, Trace};

use crate::config::{Experiment, LabConfig};
use crate::report::{self, CheckResult, CheckSpec, Fit};
use crate::select::{self, Selected};
use crate::{CheckArgs, CheckFileArgs, KarpArgs, NfaArgs, ProfileArgs, RunArgs, SpliceArgs, Status};

fn write_out(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

enum ScriptSource<'a> {
    None,
    File(&'a Path),
    Oracle,
}

/// One computation on `input`: scripted when a script is given, the unique
/// run of a deterministic machine, or else the first accepting (failing
/// that, the first) computation found by enumeration.
fn computation(
    sel: &Selected,
    input: &[SymbolId],
    script: ScriptSource<'_>,
    fuel: u64,
    max_branches: usize,
) -> Result<(Trace, String)> {
    let spec = &sel.spec;
    let script = match script {
        ScriptSource::None => None,
        ScriptSource::File(p) => Some(select::script_file(p)?),
        ScriptSource::Oracle => {
            if input.iter().any(|&s| s != input[0]) {
                bail!("oracle scripts need a unary input");
            }
            Some(select::oracle_script(sel, input.len())?)
        }
    };
    if let Some(script) = script {
        let t = run_scripted(spec, input, &script, fuel)?;
        return Ok((t, format!("scripted ({} choices)", script.choices.len())));
    }
    if spec.is_deterministic() {
        return Ok((run_deterministic(spec, input, fuel)?, "deterministic".into()));
    }
    let e = enumerate_computations(spec, input, fuel, max_branches)?;
    let count = e.traces.len();
    let accepting = e.traces.iter().filter(|t| t.outcome == Outcome::Accepted).count();
    let note = format!(
        "nondeterministic: {count} computations{}, {accepting} accepting",
        if e.truncated { " (branch cap hit)" } else { "" }
    );
    let pick = e
        .traces
        .iter()
        .position(|t| t.outcome == Outcome::Accepted)
        .unwrap_or(0);
    let trace = e.traces.into_iter().nth(pick).context("no computation produced")?;
    Ok((trace, note))
}

pub fn run(cfg: &LabConfig, a: RunArgs) -> Result<Status> {
    let sel = select::machine(&a.machine)?;
    let input = match (a.n, &a.input) {
        (Some(n), _) => select::unary(&sel.spec, n)?,
        (None, Some(w)) => select::word(&sel.spec, w)?,
        (None, None) => bail!("give --n or --input"),
    };
    let script = match (&a.script, a.oracle_script) {
        (Some(p), _) => ScriptSource::File(p),
        (None, true) => ScriptSource::Oracle,
        (None, false) => ScriptSource::None,
    };
    let fuel = a.fuel.unwrap_or(cfg.fuel);
    let (trace, how) = computation(&sel, &input, script, fuel, cfg.max_branches)?;
    let rep = trace_resources(&sel.spec, &trace);
    println!("machine: {}", sel.name);
    println!("input length: {}", input.len());
    println!("run: {how}");
    println!("outcome: {}", outcome_label(trace.outcome));
    println!("time: {}", rep.time);
    println!("max crossing: {}", rep.max_crossing);
    println!("moves: {} left, {} right", rep.left_moves, rep.right_moves);
    if a.crossings {
        let last = rep.crossings.sequences.keys().next_back().copied().unwrap_or(0);
        let lens: Vec<String> = (0..=last).map(|b| rep.crossings.at(b).len().to_string()).collect();
        println!("crossing lengths by boundary: {}", lens.join(" "));
    }
    Ok(Status::Ok)
}

fn outcome_label(o: Outcome) -> &'static str {
    match o {
        Outcome::Accepted => "Accepted",
        Outcome::Rejected => "Rejected",
        Outcome::Hung => "Hung",
        Outcome::FuelExhausted => "FuelExhausted",
    }
}

fn check_spec(
    cfg: &LabConfig,
    args: &CheckArgs,
    exp: Option<&Experiment>,
    first_n: usize,
) -> Result<Option<CheckSpec>> {
    let Some(shape) = args.check.clone().or_else(|| exp.and_then(|e| e.check.clone())) else {
        return Ok(None);
    };
    let shape =
        Shape::parse(&shape).with_context(|| format!("unknown shape {shape:?} (1, n, nlogn, nloglogn, loglogn)"))?;
    let fit = match (args.fit_upto, args.fit_at.or_else(|| exp.and_then(|e| e.fit_at))) {
        (Some(upto), _) => Fit::Envelope { upto },
        (None, at) => Fit::Scale {
            at: at.unwrap_or(first_n),
        },
    };
    let slack = args.slack.or_else(|| exp.and_then(|e| e.slack)).unwrap_or(cfg.slack);
    if slack.is_nan() || slack < 1.0 {
        bail!("slack must be at least 1");
    }
    Ok(Some(CheckSpec {
        shape,
        fit,
        slack,
        increasing: args.increasing || exp.and_then(|e| e.increasing).unwrap_or(false),
    }))
}

fn summarize(spec: &CheckSpec, r: &CheckResult) -> (String, Status) {
    let mut s = format!("fit: value <= {:.4} * g(n) + {:.4}, slack {}; ", r.a, r.b, spec.slack);
    if r.violations.is_empty() {
        s.push_str("bound holds");
    } else {
        let _ = write!(s, "{} rows exceed the bound", r.violations.len());
        for (n, v, limit) in r.violations.iter().take(5) {
            let _ = write!(s, "; n={n} value={v} limit={limit:.1}");
        }
    }
    if spec.increasing {
        if r.flat_steps.is_empty() {
            s.push_str("; value/n strictly increasing");
        } else {
            let _ = write!(
                s,
                "; value/n fails to increase at {} steps, first {:?}",
                r.flat_steps.len(),
                r.flat_steps[0]
            );
        }
    }
    let status = if r.passed() {
        Status::Ok
    } else {
        Status::Failed(format!("ratio check failed: {s}"))
    };
    (s, status)
}

pub fn profile(cfg: &LabConfig, a: ProfileArgs) -> Result<Status> {
    let exp = a.experiment.as_deref().map(|name| cfg.experiment(name)).transpose()?;
    let pick =
        |flag: &Option<String>, field: fn(&Experiment) -> Option<String>| flag.clone().or_else(|| exp.and_then(field));
    let machine = pick(&a.machine, |e| e.machine.clone()).context("give --machine or an experiment")?;
    let ns = select::lengths(&pick(&a.n, |e| e.n.clone()).context("give --n or an experiment")?)?;
    let resource = pick(&a.resource, |e| e.resource.clone()).unwrap_or_else(|| "time".into());
    let resource = Resource::parse(&resource).with_context(|| format!("unknown resource {resource:?}"))?;
    let measure = pick(&a.measure, |e| e.measure.clone()).unwrap_or_else(|| "strong".into());
    let kind = MeasureKind::parse(&measure).with_context(|| format!("unknown measure {measure:?}"))?;
    let fuel = a.fuel.or_else(|| exp.and_then(|e| e.fuel)).unwrap_or(cfg.fuel);
    let max_branches = a
        .max_branches
        .or_else(|| exp.and_then(|e| e.max_branches))
        .unwrap_or(cfg.max_branches);
    let out = a
        .out
        .clone()
        .or_else(|| exp.and_then(|e| e.out.clone()).map(Into::into));
    let scripted = a.oracle_script || exp.and_then(|e| e.oracle_script).unwrap_or(false);
    let check = check_spec(cfg, &a.check, exp, ns[0])?;

    let sel = select::machine(&machine)?;
    let provider = |n: usize| select::oracle_script(&sel, n).ok();
    if scripted && sel.script.is_none() {
        bail!("{} has no oracle script provider", sel.name);
    }
    let runner = if scripted {
        Runner::Scripts {
            fuel,
            provider: &provider,
        }
    } else {
        Runner::Enumerate(Budget {
            fuel,
            max_branches,
            max_inputs: cfg.max_inputs,
        })
    };
    let rows = profile_range(&sel.spec, &ns, resource, kind, &runner)?;
    let csv = profile_csv(&rows);
    match &out {
        Some(p) => write_out(p, &csv)?,
        None => print!("{csv}"),
    }
    let result = check.as_ref().map(|spec| report::check(&rows, spec)).transpose()?;
    if let Some(plot) = &a.plot {
        let csv_path = out.as_ref().context("--plot needs --out for the CSV it plots")?;
        let title = format!("{} {} {}", sel.name, resource.as_str(), kind.as_str());
        let script = report::gnuplot(
            &csv_path.display().to_string(),
            &title,
            check.as_ref().zip(result.as_ref()),
        );
        write_out(plot, &script)?;
    }
    match (check, result) {
        (Some(spec), Some(r)) => {
            let (line, status) = summarize(&spec, &r);
            eprintln!("{line}");
            Ok(status)
        }
        _ => Ok(Status::Ok),
    }
}

pub fn check_file(cfg: &LabConfig, a: CheckFileArgs) -> Result<Status> {
    let text = std::fs::read_to_string(&a.csv).with_context(|| format!("reading {}", a.csv.display()))?;
    let rows: Vec<ProfileRow> =
        parse_profile_csv(&text).with_context(|| format!("{} is not a profile CSV", a.csv.display()))?;
    let first = rows.first().map(|r| r.n).context("CSV has no rows")?;
    let spec = check_spec(cfg, &a.check, None, first)?.context("give --check SHAPE")?;
    let r = report::check(&rows, &spec)?;
    let (line, status) = summarize(&spec, &r);
    println!("{line}");
    Ok(status)
}

pub fn nfa(cfg: &LabConfig, a: NfaArgs) -> Result<Status> {
    let sel = select::machine(&a.machine)?;
    let k = match a.k {
        Some(k) => k,
        None => catalog::by_name(&a.machine)
            .and_then(|e| e.crossing_k)
            .context("give --k; this machine has no known crossing bound")?,
    };
    let nfa = build_crossing_nfa(&sel.spec, k);
    println!(
        "nfa: k={k}, {} states, {} final, {} transitions{}",
        nfa.states.len(),
        nfa.final_count(),
        nfa.transition_count(),
        if nfa.truncated {
            ", truncated (some local runs exceed k)"
        } else {
            ""
        }
    );
    if let Some(p) = &a.export {
        write_out(p, &write_nfa(&nfa))?;
    }
    if k == 0 {
        println!("degenerate: k = 0 bounds no crossing sequence, comparison skipped");
        return Ok(Status::Ok);
    }
    let fuel = a.fuel.unwrap_or(cfg.fuel);
    let max_branches = a.max_branches.unwrap_or(cfg.max_branches);
    let c = compare_machine_nfa(&sel.spec, &nfa, a.max_len, fuel, max_branches)?;
    if let Some(d) = c.disagreement {
        println!(
            "disagreement at length {} on {:?}: machine {}, nfa {}",
            d.length,
            d.word,
            verdict(d.machine),
            verdict(d.nfa)
        );
        return Ok(if a.expect_disagreement {
            Status::Ok
        } else {
            Status::Failed(format!("machine and NFA disagree at length {}", d.length))
        });
    }
    if !c.inconclusive.is_empty() {
        println!(
            "{} words undecided within fuel, first {:?}",
            c.inconclusive.len(),
            c.inconclusive[0]
        );
        return Ok(Status::Failed("comparison inconclusive".into()));
    }
    println!("agreement on all {} words up to length {}", c.checked, a.max_len);
    Ok(if a.expect_disagreement {
        Status::Failed(format!("no disagreement up to length {}", a.max_len))
    } else {
        Status::Ok
    })
}

fn verdict(accepts: bool) -> &'static str {
    if accepts {
        "accepts"
    } else {
        "rejects"
    }
}

fn language(name: &str) -> Result<fn(u64) -> bool> {
    Ok(match name {
        "L0" => member_l0,
        "LAM" => member_lam,
        "coLAM" => member_colam,
        _ => bail!("unknown language {name:?} (L0, LAM, coLAM)"),
    })
}

pub fn karp(a: KarpArgs) -> Result<Status> {
    let bits = match (&a.language, &a.bits) {
        (Some(name), _) => UnaryBits::from_fn(a.n_max, language(name)?),
        (None, Some(p)) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let bits = UnaryBits::from_text(&text).with_context(|| format!("{} is not a 0/1 bit file", p.display()))?;
            if bits.n_max() < a.n_max {
                bail!("{} covers n <= {} only", p.display(), bits.n_max());
            }
            bits.truncate(a.n_max)
        }
        (None, None) => bail!("give --language or --bits"),
    };
    let rows = karp_rows(&bits, 0..=a.n_max);
    let mut csv = String::from("n,min_dfa,karp_bound,meets\n");
    println!("{:>6} {:>8} {:>10} {:>6}", "n", "min_dfa", "karp_bound", "meets");
    for r in &rows {
        let _ = writeln!(csv, "{},{},{},{}", r.n, r.min_dfa, r.bound, r.is_witness());
        if !a.witnesses_only || r.is_witness() {
            println!(
                "{:>6} {:>8} {:>10} {:>6}",
                r.n,
                r.min_dfa,
                r.bound,
                if r.is_witness() { "yes" } else { "no" }
            );
        }
    }
    if let Some(p) = &a.out {
        write_out(p, &csv)?;
    }
    let found = rows.iter().filter(|r| r.is_witness()).count();
    println!("witnesses: {found}");
    match a.min_witnesses {
        Some(m) if found < m => Ok(Status::Failed(format!("{found} witnesses, wanted at least {m}"))),
        _ => Ok(Status::Ok),
    }
}

fn render_seq(spec: &MachineSpec, seq: &[tmlab::StateId]) -> String {
    let names: Vec<&str> = seq.iter().map(|&q| spec.state_name(q)).collect();
    format!("({})", names.join(", "))
}

pub fn splice(cfg: &LabConfig, a: SpliceArgs) -> Result<Status> {
    let sel = select::machine(&a.machine)?;
    let fuel = a.fuel.unwrap_or(cfg.fuel);
    let w1 = select::word(&sel.spec, &a.input1)?;
    let w2 = select::word(&sel.spec, &a.input2)?;
    let (s1, s2) = if a.oracle_script {
        (ScriptSource::Oracle, ScriptSource::Oracle)
    } else {
        (
            a.script1.as_deref().map_or(ScriptSource::None, ScriptSource::File),
            a.script2.as_deref().map_or(ScriptSource::None, ScriptSource::File),
        )
    };
    let (first, how1) = computation(&sel, &w1, s1, fuel, cfg.max_branches)?;
    let (second, how2) = computation(&sel, &w2, s2, fuel, cfg.max_branches)?;
    println!(
        "first:  {} ({how1}), {}",
        sel.spec.format_input(&w1),
        outcome_label(first.outcome)
    );
    println!(
        "second: {} ({how2}), {}",
        sel.spec.format_input(&w2),
        outcome_label(second.outcome)
    );
    let s = match cut_and_paste(&sel.spec, &first, a.b1, &second, a.b2) {
        Ok(s) => s,
        Err(e) => {
            println!("splice error: {e}");
            return Ok(Status::Failed(format!("splice failed: {e}")));
        }
    };
    let rule = match s.ending {
        Ending::SuffixSide => "odd length, the run ends right of the cut with the first computation's outcome",
        Ending::PrefixSide => "even length, the run ends left of the cut with the second computation's outcome",
    };
    println!(
        "shared crossing sequence: {} ({rule})",
        render_seq(&sel.spec, &s.shared)
    );
    println!("spliced input: {}", sel.spec.format_input(&s.trace.input));
    println!(
        "spliced outcome: {}, time {}",
        outcome_label(s.trace.outcome),
        s.trace.time()
    );
    match s.trace.check(&sel.spec) {
        Ok(()) => println!("replay: valid"),
        Err(e) => return Ok(Status::Failed(format!("spliced computation does not replay: {e}"))),
    }
    if s.trace == first {
        println!("identical to the first computation");
    }
    Ok(Status::Ok)
}
