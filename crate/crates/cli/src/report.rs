//! Ratio checks over profile rows and plot-script emission.

use std::fmt::Write as _;

use anyhow::{bail, Result};
use tmlab::metering::growth::{fit_envelope, fit_scale, Shape};
use tmlab::metering::ProfileRow;

#[derive(Debug, Clone, PartialEq)]
pub enum Fit {
    /// `value <= C * g(n)` with `C` taken at one length.
    Scale { at: usize },
    /// `value <= A * g(n) + B` enveloping every row with `n <= upto`.
    Envelope { upto: usize },
}

#[derive(Debug, Clone)]
pub struct CheckSpec {
    pub shape: Shape,
    pub fit: Fit,
    pub slack: f64,
    /// Also require `value / n` to increase strictly.
    pub increasing: bool,
}

#[derive(Debug, Clone, Default)]
pub struct CheckResult {
    pub a: f64,
    pub b: f64,
    pub violations: Vec<(usize, u64, f64)>,
    pub flat_steps: Vec<(usize, usize)>,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.flat_steps.is_empty()
    }
}

pub fn check(rows: &[ProfileRow], spec: &CheckSpec) -> Result<CheckResult> {
    if rows.is_empty() {
        bail!("no rows to check");
    }
    let g = |n: usize| spec.shape.eval(n as f64);
    let (a, b, fitted_upto) = match spec.fit {
        Fit::Scale { at } => {
            let Some(r) = rows.iter().find(|r| r.n == at) else {
                bail!("no row at n = {at} to fit against");
            };
            let c = fit_scale(at as f64, r.value as f64, spec.shape);
            if !c.is_finite() {
                bail!("shape vanishes at n = {at}; fit at a larger length");
            }
            (c, 0.0, at)
        }
        Fit::Envelope { upto } => {
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.n <= upto)
                .map(|r| (r.n as f64, r.value as f64))
                .collect();
            if pts.is_empty() {
                bail!("no rows with n <= {upto} to fit against");
            }
            let (a, b) = fit_envelope(&pts, spec.shape);
            (a, b, upto)
        }
    };
    let violations = rows
        .iter()
        .filter(|r| r.n > fitted_upto)
        .filter_map(|r| {
            let limit = spec.slack * (a * g(r.n) + b);
            (r.value as f64 > limit).then_some((r.n, r.value, limit))
        })
        .collect();
    let mut flat_steps = Vec::new();
    if spec.increasing {
        for w in rows.windows(2) {
            if w[1].value as f64 / w[1].n as f64 <= w[0].value as f64 / w[0].n as f64 {
                flat_steps.push((w[0].n, w[1].n));
            }
        }
    }
    Ok(CheckResult {
        a,
        b,
        violations,
        flat_steps,
    })
}

/// A gnuplot script plotting the CSV at `csv` against the fitted bound.
pub fn gnuplot(csv: &str, title: &str, check: Option<(&CheckSpec, &CheckResult)>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set title '{}'", title.replace('\'', ""));
    let _ = writeln!(s, "set xlabel 'n'");
    let _ = writeln!(s, "set ylabel 'value'");
    let _ = writeln!(s, "set key left top");
    let _ = writeln!(s, "set logscale x 2");
    let _ = write!(s, "plot '{csv}' using 1:4 skip 1 with linespoints title 'measured'");
    if let Some((spec, r)) = check {
        let g = match spec.shape {
            Shape::Constant => "1".to_string(),
            Shape::Linear => "x".to_string(),
            Shape::NLogN | Shape::KLogK => "x*log(x)/log(2)".to_string(),
            Shape::NLogLogN => "x*log(log(x)/log(2))/log(2)".to_string(),
            Shape::LogLogN => "log(log(x)/log(2))/log(2)".to_string(),
        };
        let _ = write!(
            s,
            ", {slack}*({a}*{g}+{b}) with lines title 'slack x bound'",
            slack = spec.slack,
            a = r.a,
            b = r.b
        );
    }
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use tmlab::metering::{Exactness, MeasureKind, Resource};

    fn rows(vals: &[(usize, u64)]) -> Vec<ProfileRow> {
        vals.iter()
            .map(|&(n, value)| ProfileRow {
                n,
                resource: Resource::Time,
                kind: MeasureKind::Strong,
                value,
                exactness: Exactness::Exact,
                outcome: "accepted".into(),
            })
            .collect()
    }

    #[test]
    fn linear_rows_fail_strict_increase_only() {
        let r = rows(&[(4, 8), (8, 16), (16, 32)]);
        let spec = CheckSpec {
            shape: Shape::NLogN,
            fit: Fit::Scale { at: 4 },
            slack: 2.0,
            increasing: true,
        };
        let out = check(&r, &spec).unwrap();
        assert!(out.violations.is_empty());
        assert_eq!(out.flat_steps, vec![(4, 8), (8, 16)]);
    }

    #[test]
    fn quadratic_rows_break_the_bound() {
        let r = rows(&[(4, 16), (64, 4096)]);
        let spec = CheckSpec {
            shape: Shape::NLogN,
            fit: Fit::Scale { at: 4 },
            slack: 2.0,
            increasing: false,
        };
        let out = check(&r, &spec).unwrap();
        assert_eq!(out.violations.len(), 1);
        assert!(!out.passed());
    }

    #[test]
    fn envelope_fit_and_missing_anchor() {
        let r = rows(&[(4, 5), (16, 7), (256, 9), (65536, 11)]);
        let spec = CheckSpec {
            shape: Shape::LogLogN,
            fit: Fit::Envelope { upto: 256 },
            slack: 2.0,
            increasing: false,
        };
        assert!(check(&r, &spec).unwrap().passed());
        let bad = CheckSpec {
            fit: Fit::Scale { at: 5 },
            ..spec
        };
        assert!(check(&r, &bad).is_err());
    }

    #[test]
    fn plot_script_mentions_csv() {
        let s = gnuplot("out.csv", "L0 time", None);
        assert!(s.contains("'out.csv'"));
        assert!(s.ends_with('\n'));
    }
}
