//! Browser bindings: run a catalog machine, profile it over a few lengths,
//! and print the Karp table for a unary language. Every export returns JSON.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use tmlab::catalog;
use tmlab::metering::{profile_range, trace_resources, Budget, MeasureKind, Resource, Runner};
use tmlab::oracles::{karp_rows, member_colam, member_l0, member_lam, UnaryBits};
use tmlab::{run_deterministic, run_scripted, Outcome};

const FUEL: u64 = 50_000_000;
const MAX_N: usize = 1 << 14;
const MAX_KARP_N: usize = 1024;
const MAX_PROFILE_POINTS: usize = 64;

#[derive(Serialize, Debug, PartialEq)]
pub struct RunReport {
    pub machine: String,
    pub n: usize,
    pub outcome: String,
    pub scripted: bool,
    pub time: u64,
    pub max_crossing: usize,
    /// Crossing-sequence length per boundary, from 0 to the rightmost crossed.
    pub crossings: Vec<usize>,
}

#[derive(Serialize, Debug, PartialEq)]
pub struct KarpEntry {
    pub n: usize,
    pub min_dfa: usize,
    pub bound: usize,
    pub witness: bool,
}

#[derive(Serialize, Debug, PartialEq)]
pub struct ProfilePoint {
    pub n: usize,
    pub value: u64,
    pub exactness: String,
    pub outcome: String,
}

fn outcome_name(o: Outcome) -> &'static str {
    match o {
        Outcome::Accepted => "accepted",
        Outcome::Rejected => "rejected",
        Outcome::Hung => "hung",
        Outcome::FuelExhausted => "out of fuel",
    }
}

fn entry(name: &str) -> Result<catalog::MachineCatalogEntry, String> {
    catalog::by_name(name).ok_or_else(|| format!("unknown machine {name:?}"))
}

/// Runs `a^n`. Nondeterministic machines follow their witness script when
/// one exists and are reported as rejecting otherwise.
pub fn run_report(name: &str, n: usize) -> Result<RunReport, String> {
    if n > MAX_N {
        return Err(format!("n is capped at {MAX_N} in the browser"));
    }
    let e = entry(name)?;
    let a = *e.spec.input_symbols().first().ok_or("machine has no input letter")?;
    let input = vec![a; n];
    let (trace, scripted) = match (e.spec.is_deterministic(), e.script) {
        (true, _) => (
            run_deterministic(&e.spec, &input, FUEL).map_err(|e| e.to_string())?,
            false,
        ),
        (false, Some(provider)) => match provider(n as u64) {
            Ok(script) => (
                run_scripted(&e.spec, &input, &script, FUEL).map_err(|e| e.to_string())?,
                true,
            ),
            Err(_) => {
                return Ok(RunReport {
                    machine: e.name.into(),
                    n,
                    outcome: "rejected (no accepting computation)".into(),
                    scripted: false,
                    time: 0,
                    max_crossing: 0,
                    crossings: Vec::new(),
                })
            }
        },
        (false, None) => return Err(format!("{name} is nondeterministic and has no witness scripts")),
    };
    let rep = trace_resources(&e.spec, &trace);
    let last = rep
        .crossings
        .sequences
        .keys()
        .next_back()
        .copied()
        .unwrap_or(0)
        .max(n + 1);
    Ok(RunReport {
        machine: e.name.into(),
        n,
        outcome: outcome_name(trace.outcome).into(),
        scripted,
        time: rep.time,
        max_crossing: rep.max_crossing,
        crossings: (0..=last).map(|b| rep.crossings.at(b).len()).collect(),
    })
}

pub fn karp_entries(language: &str, n_max: usize) -> Result<Vec<KarpEntry>, String> {
    if n_max > MAX_KARP_N {
        return Err(format!("n_max is capped at {MAX_KARP_N} in the browser"));
    }
    let member: fn(u64) -> bool = match language {
        "L0" => member_l0,
        "LAM" => member_lam,
        "coLAM" => member_colam,
        _ => return Err(format!("unknown language {language:?}")),
    };
    let bits = UnaryBits::from_fn(n_max, member);
    Ok(karp_rows(&bits, 0..=n_max)
        .into_iter()
        .map(|r| KarpEntry {
            n: r.n,
            min_dfa: r.min_dfa,
            bound: r.bound,
            witness: r.is_witness(),
        })
        .collect())
}

/// Profiles `resource`/`measure` at the powers of two `2^lo..=2^hi`.
pub fn profile_points(
    name: &str,
    resource: &str,
    measure: &str,
    lo: u32,
    hi: u32,
) -> Result<Vec<ProfilePoint>, String> {
    if lo > hi || (1usize << hi.min(30)) > MAX_N || hi > 30 {
        return Err(format!("exponents must satisfy lo <= hi and 2^hi <= {MAX_N}"));
    }
    let e = entry(name)?;
    let resource = Resource::parse(resource).ok_or("resource is time or crossing")?;
    let kind = MeasureKind::parse(measure).ok_or("measure is strong, accept or weak")?;
    let ns: Vec<usize> = (lo..=hi).map(|k| 1usize << k).take(MAX_PROFILE_POINTS).collect();
    let provider = |n: usize| e.script.and_then(|p| p(n as u64).ok());
    let runner = if e.spec.is_deterministic() {
        Runner::Enumerate(Budget {
            fuel: FUEL,
            max_branches: 1,
            max_inputs: 1,
        })
    } else if e.script.is_some() {
        Runner::Scripts {
            fuel: FUEL,
            provider: &provider,
        }
    } else {
        return Err(format!("{name} is nondeterministic and has no witness scripts"));
    };
    let rows = profile_range(&e.spec, &ns, resource, kind, &runner).map_err(|e| e.to_string())?;
    Ok(rows
        .into_iter()
        .map(|r| ProfilePoint {
            n: r.n,
            value: r.value,
            exactness: r.exactness.as_str().into(),
            outcome: r.outcome,
        })
        .collect())
}

fn json<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn machines() -> String {
    serde_json::to_string(&catalog::NAMES).expect("names serialize")
}

#[wasm_bindgen]
pub fn run_catalog(name: &str, n: usize) -> Result<String, JsError> {
    json(run_report(name, n))
}

#[wasm_bindgen]
pub fn karp_table(language: &str, n_max: usize) -> Result<String, JsError> {
    json(karp_entries(language, n_max))
}

#[wasm_bindgen]
pub fn profile(name: &str, resource: &str, measure: &str, lo: u32, hi: u32) -> Result<String, JsError> {
    json(profile_points(name, resource, measure, lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn runs_deterministic_and_scripted_machines() {
        let r = run_report("L0", 6).unwrap();
        assert_eq!(r.outcome, "accepted");
        assert!(!r.scripted);
        assert!(r.crossings.len() >= 8);
        assert_eq!(r.crossings.iter().max().copied(), Some(r.max_crossing));
        let r = run_report("coLAM", 12).unwrap();
        assert_eq!(r.outcome, "accepted");
        assert!(r.scripted);
        let r = run_report("coLAM", 6).unwrap();
        assert!(r.outcome.starts_with("rejected"));
        assert!(run_report("nope", 1).is_err());
        assert!(run_report("L0", MAX_N + 1).is_err());
    }

    #[test]
    fn karp_entries_flag_witnesses() {
        let rows = karp_entries("LAM", 12).unwrap();
        assert_eq!(rows.len(), 13);
        assert!(rows.iter().all(|r| r.witness == (r.min_dfa >= r.bound)));
        assert!(karp_entries("L1", 4).is_err());
        assert!(karp_entries("LAM", MAX_KARP_N + 1).is_err());
    }

    #[test]
    fn profiles_powers_of_two() {
        let pts = profile_points("mod3", "time", "strong", 1, 4).unwrap();
        assert_eq!(pts.iter().map(|p| p.n).collect::<Vec<_>>(), vec![2, 4, 8, 16]);
        assert!(pts.iter().all(|p| p.exactness == "exact"));
        let pts = profile_points("coLAM", "crossing", "weak", 2, 3).unwrap();
        assert!(pts.iter().all(|p| p.exactness == "upper-bound"));
        assert!(profile_points("mod3", "space", "strong", 1, 2).is_err());
        assert!(profile_points("mod3", "time", "strong", 3, 2).is_err());
    }
}
