//! Plain-text machine descriptions.
//!
//! ```text
//! # comments run to end of line
//! states: q0 q1 acc rej
//! input: a b
//! tape: X Y          # extra work symbols; input symbols and blank are implied
//! blank: _
//! initial: q0
//! accept: acc
//! reject: rej
//! transitions:
//! (q0, a) -> (q1, X, R)
//! (q1, _) -> (acc, Y, S)
//! ```
//!
//! Names are any run of characters other than whitespace, `(`, `)`, `,`, `#`
//! and `"`. Transitions keep the order in which they appear. Every header
//! key except `tape` and `reject` is required, and transitions may only
//! mention declared names.

use std::fmt::Write as _;

use thiserror::Error;

use crate::machine::{MachineBuilder, MachineSpec, Move};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError {
        line,
        message: message.into(),
    }
}

pub(crate) fn is_name(s: &str) -> bool {
    !s.is_empty()
        && !s
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, '(' | ')' | ',' | '#' | '"'))
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

/// Parses a `(a, b, c)` group into its comma-separated parts.
pub(crate) fn tuple(text: &str) -> Option<Vec<&str>> {
    let t = text.trim();
    let inner = t.strip_prefix('(')?.strip_suffix(')')?;
    Some(inner.split(',').map(str::trim).collect())
}

pub fn parse_machine(text: &str) -> Result<MachineSpec, FormatError> {
    let mut b = MachineBuilder::new();
    let mut declared_states: Vec<String> = Vec::new();
    let mut input: Option<Vec<String>> = None;
    let mut tape: Vec<String> = Vec::new();
    let mut blank: Option<String> = None;
    let mut initial: Option<(usize, String)> = None;
    let mut accept: Vec<(usize, String)> = Vec::new();
    let mut reject: Vec<(usize, String)> = Vec::new();
    let mut rules: Vec<(usize, [String; 4], Move)> = Vec::new();
    let mut saw_states = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('(') {
            let (lhs, rhs) = line
                .split_once("->")
                .ok_or_else(|| err(line_no, "expected `(state, read) -> (state, write, move)`"))?;
            let l = tuple(lhs).ok_or_else(|| err(line_no, "malformed left-hand side"))?;
            let r = tuple(rhs).ok_or_else(|| err(line_no, "malformed right-hand side"))?;
            if l.len() != 2 || r.len() != 3 {
                return Err(err(line_no, "expected 2 fields before `->` and 3 after"));
            }
            for name in l.iter().chain(&r[..2]) {
                if !is_name(name) {
                    return Err(err(line_no, format!("invalid name `{name}`")));
                }
            }
            let mv = match r[2] {
                "L" => Move::Left,
                "R" => Move::Right,
                "S" => Move::Stay,
                other => return Err(err(line_no, format!("unknown move `{other}`"))),
            };
            rules.push((line_no, [l[0].into(), l[1].into(), r[0].into(), r[1].into()], mv));
            continue;
        }
        let (key, value) = line
            .split_once(':')
            .ok_or_else(|| err(line_no, format!("unrecognised line `{line}`")))?;
        let names: Vec<String> = value.split_whitespace().map(str::to_string).collect();
        if let Some(bad) = names.iter().find(|n| !is_name(n)) {
            return Err(err(line_no, format!("invalid name `{bad}`")));
        }
        let single = |names: &[String]| -> Result<String, FormatError> {
            match names {
                [one] => Ok(one.clone()),
                _ => Err(err(line_no, format!("`{}` takes exactly one name", key.trim()))),
            }
        };
        match key.trim() {
            "states" => {
                saw_states = true;
                declared_states.extend(names);
            }
            "input" => input.get_or_insert_with(Vec::new).extend(names),
            "tape" => tape.extend(names),
            "blank" => blank = Some(single(&names)?),
            "initial" => initial = Some((line_no, single(&names)?)),
            "accept" => accept.extend(names.into_iter().map(|n| (line_no, n))),
            "reject" => reject.extend(names.into_iter().map(|n| (line_no, n))),
            "transitions" => {
                if !names.is_empty() {
                    return Err(err(line_no, "`transitions:` takes no values"));
                }
            }
            other => return Err(err(line_no, format!("unknown section `{other}`"))),
        }
    }

    let last = text.lines().count().max(1);
    if !saw_states {
        return Err(err(last, "missing `states:` section"));
    }
    let input = input.ok_or_else(|| err(last, "missing `input:` section"))?;
    let blank = blank.ok_or_else(|| err(last, "missing `blank:` section"))?;
    let (init_line, initial) = initial.ok_or_else(|| err(last, "missing `initial:` section"))?;

    for s in &declared_states {
        b.state(s);
    }
    b.blank(&blank);
    for s in &input {
        if *s == blank {
            return Err(err(last, "the blank symbol cannot be an input symbol"));
        }
        b.input_symbol(s);
    }
    for s in &tape {
        b.symbol(s);
    }
    let known_state = |b: &MachineBuilder, line: usize, s: &str| {
        if b.has_state(s) {
            Ok(())
        } else {
            Err(err(line, format!("undeclared state `{s}`")))
        }
    };
    known_state(&b, init_line, &initial)?;
    b.initial(&initial);
    for (line, s) in &accept {
        known_state(&b, *line, s)?;
        b.accepting(s);
    }
    for (line, s) in &reject {
        known_state(&b, *line, s)?;
        b.rejecting(s);
    }
    for (line, [from, read, to, write], mv) in &rules {
        known_state(&b, *line, from)?;
        known_state(&b, *line, to)?;
        for sym in [read, write] {
            if !b.has_symbol(sym) {
                return Err(err(*line, format!("undeclared symbol `{sym}`")));
            }
        }
        b.rule(from, read, to, write, *mv);
    }
    Ok(b.build())
}

pub fn write_machine(spec: &MachineSpec) -> String {
    let p = spec.parts();
    let mut out = String::new();
    let join = |ids: &mut dyn Iterator<Item = &str>| ids.collect::<Vec<_>>().join(" ");
    let _ = writeln!(out, "states: {}", join(&mut p.states.iter().map(String::as_str)));
    let _ = writeln!(
        out,
        "input: {}",
        join(&mut p.input_symbols.iter().map(|s| spec.symbol_name(*s)))
    );
    let extra: Vec<&str> = p
        .symbols
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != p.blank.index() && !p.input_symbols.iter().any(|s| s.index() == *i))
        .map(|(_, n)| n.as_str())
        .collect();
    if !extra.is_empty() {
        let _ = writeln!(out, "tape: {}", extra.join(" "));
    }
    let _ = writeln!(out, "blank: {}", spec.symbol_name(p.blank));
    let _ = writeln!(out, "initial: {}", spec.state_name(p.initial));
    if !p.accepting.is_empty() {
        let _ = writeln!(
            out,
            "accept: {}",
            join(&mut p.accepting.iter().map(|s| spec.state_name(*s)))
        );
    }
    if !p.rejecting.is_empty() {
        let _ = writeln!(
            out,
            "reject: {}",
            join(&mut p.rejecting.iter().map(|s| spec.state_name(*s)))
        );
    }
    out.push_str("transitions:\n");
    for t in &p.transitions {
        let _ = writeln!(
            out,
            "({}, {}) -> ({}, {}, {})",
            spec.state_name(t.from),
            spec.symbol_name(t.read),
            spec.state_name(t.to),
            spec.symbol_name(t.write),
            t.mv.letter()
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::validate_machine;

    const SWEEP: &str = "\
# accepts every string over {a}
states: q0 acc
input: a
blank: _
initial: q0
accept: acc
transitions:
(q0, a) -> (q0, a, R)
(q0, _) -> (acc, a, S)   # never writes the blank
";

    #[test]
    fn parses_and_writes_back() {
        let spec = parse_machine(SWEEP).unwrap();
        assert!(validate_machine(&spec).is_empty());
        assert_eq!(spec.state_count(), 2);
        assert_eq!(spec.transitions().len(), 2);
        let again = parse_machine(&write_machine(&spec)).unwrap();
        assert_eq!(write_machine(&again), write_machine(&spec));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad = SWEEP.replace("(q0, a) -> (q0, a, R)", "(q0, a) -> (q9, a, R)");
        let e = parse_machine(&bad).unwrap_err();
        assert_eq!(e.line, 8);
        assert!(e.message.contains("q9"));

        let bad = SWEEP.replace("(q0, a) -> (q0, a, R)", "(q0, a) -> (q0, a, X)");
        assert_eq!(parse_machine(&bad).unwrap_err().line, 8);

        let bad = SWEEP.replace("blank: _", "blank _");
        assert_eq!(parse_machine(&bad).unwrap_err().line, 4);
    }

    #[test]
    fn missing_sections_are_reported() {
        let bad = SWEEP.replace("initial: q0\n", "");
        assert!(parse_machine(&bad).unwrap_err().message.contains("initial"));
    }
}
