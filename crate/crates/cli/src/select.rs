//! Resolving machine selectors, input words and length lists.

use std::path::Path;

use anyhow::{bail, Context, Result};
use tmlab::catalog::{self, MachineCatalogEntry, ScriptProvider};
use tmlab::{parse_machine, GuessScript, MachineSpec, SymbolId};

pub struct Selected {
    pub name: String,
    pub spec: MachineSpec,
    pub script: Option<ScriptProvider>,
}

/// A catalog name, or else a path to a machine description file.
pub fn machine(selector: &str) -> Result<Selected> {
    if let Some(MachineCatalogEntry { name, spec, script, .. }) = catalog::by_name(selector) {
        return Ok(Selected {
            name: name.to_string(),
            spec,
            script,
        });
    }
    let path = Path::new(selector);
    if !path.exists() {
        bail!(
            "{selector:?} is neither a catalog machine ({}) nor a file",
            catalog::NAMES.join(", ")
        );
    }
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {selector}"))?;
    let spec = parse_machine(&text).with_context(|| format!("parsing {selector}"))?;
    Ok(Selected {
        name: selector.to_string(),
        spec,
        script: None,
    })
}

/// Parses an input word. `x^N` repeats the single letter `x` N times.
pub fn word(spec: &MachineSpec, text: &str) -> Result<Vec<SymbolId>> {
    if let Some((letter, count)) = text.split_once('^') {
        let count: usize = count
            .trim()
            .parse()
            .with_context(|| format!("bad repeat count in {text:?}"))?;
        let one = spec
            .parse_input(letter.trim())
            .filter(|w| w.len() == 1)
            .with_context(|| format!("{letter:?} is not an input letter"))?;
        return Ok(vec![one[0]; count]);
    }
    spec.parse_input(text)
        .with_context(|| format!("{text:?} is not a word over the input alphabet"))
}

/// `n` copies of the first input letter.
pub fn unary(spec: &MachineSpec, n: usize) -> Result<Vec<SymbolId>> {
    let a = *spec.input_symbols().first().context("machine has no input letters")?;
    Ok(vec![a; n])
}

pub fn script_file(path: &Path) -> Result<GuessScript> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    GuessScript::parse(&text).with_context(|| format!("{} is not a guess script", path.display()))
}

/// Catalog-provided witness script for `a^n`.
pub fn oracle_script(sel: &Selected, n: usize) -> Result<GuessScript> {
    let provider = sel
        .script
        .with_context(|| format!("{} has no oracle script provider", sel.name))?;
    provider(n as u64).map_err(|e| anyhow::anyhow!("no oracle script for n = {n}: {e}"))
}

/// Length lists: comma-separated items, each `a`, `a..b` (inclusive) or
/// `2^a..2^b` (powers of two).
pub fn lengths(text: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item.split_once("..") {
            None => out.push(number(item)?),
            Some((a, b)) => match (a.strip_prefix("2^"), b.strip_prefix("2^")) {
                (Some(x), Some(y)) => {
                    let (x, y): (u32, u32) = (x.parse()?, y.parse()?);
                    if y >= usize::BITS || x > y {
                        bail!("bad power range {item:?}");
                    }
                    out.extend((x..=y).map(|e| 1usize << e));
                }
                (None, None) => {
                    let (a, b) = (number(a)?, number(b)?);
                    if a > b {
                        bail!("empty range {item:?}");
                    }
                    out.extend(a..=b);
                }
                _ => bail!("mixed range {item:?}: use 2^a..2^b or a..b"),
            },
        }
    }
    if out.is_empty() {
        bail!("empty length list");
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn number(s: &str) -> Result<usize> {
    if let Some(e) = s.strip_prefix("2^") {
        let e: u32 = e.parse().with_context(|| format!("bad exponent in {s:?}"))?;
        return 1usize.checked_shl(e).with_context(|| format!("{s} overflows"));
    }
    s.parse().with_context(|| format!("{s:?} is not a length"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn length_lists() {
        assert_eq!(lengths("2^6..2^8").unwrap(), vec![64, 128, 256]);
        assert_eq!(lengths("3, 1..2, 2^2").unwrap(), vec![1, 2, 3, 4]);
        assert!(lengths("").is_err());
        assert!(lengths(" , ").is_err());
        assert!(lengths("5..2").is_err());
        assert!(lengths("2^3..9").is_err());
        assert!(lengths("x").is_err());
    }

    #[test]
    fn words_and_repeats() {
        let sel = machine("sweeper").unwrap();
        assert_eq!(word(&sel.spec, "a^3").unwrap().len(), 3);
        assert_eq!(word(&sel.spec, "aa").unwrap().len(), 2);
        assert_eq!(word(&sel.spec, "").unwrap().len(), 0);
        assert!(word(&sel.spec, "ab").is_err());
        assert!(word(&sel.spec, "a^x").is_err());
    }

    #[test]
    fn unknown_selector() {
        assert!(machine("no-such-machine").is_err());
    }
}
