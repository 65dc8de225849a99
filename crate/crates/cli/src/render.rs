//! Text, JSON and CSV renderings of each command's result.

use crate::Format;
use anyhow::Result;
use proxbound::check::CheckReport;
use proxbound::fmt::fmt_f64;
use proxbound::numerics::{write_csv, Grid};
use proxbound::{ExtReal, NumericEstimate, ThresholdBound, ThresholdResult};
use serde_json::{json, Value};
use std::io::Write;

pub enum Output {
    Threshold { expr: String, result: ThresholdResult },
    Envelope { exprs: Vec<String>, r: f64, function_only: bool, grid: Grid },
    Prox { expr: String, r: f64, x: Vec<f64>, value: f64, points: Vec<Vec<f64>> },
    Conjugate { expr: String, y: Vec<f64>, value: ExtReal },
    Estimate { expr: String, liminf: Option<NumericEstimate>, bisection: Option<NumericEstimate>, disagreement: bool },
    Check { target: String, seed: u64, report: CheckReport, symbolic: Option<ThresholdBound>, numeric: Option<NumericEstimate> },
}

/// JSON number, or the string form of a non-finite value.
fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(fmt_f64(v))
    }
}

fn nums(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|x| num(*x)).collect())
}

fn point(p: &[f64]) -> String {
    p.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(",")
}

fn estimate_line(name: &str, e: &NumericEstimate) -> String {
    match e.estimate {
        Some(v) => format!("{name}: {} ({})", fmt_f64(v), e.result.bound),
        None => format!("{name}: {}", e.result.bound),
    }
}

impl Output {
    pub fn write(&self, format: Format, out: &mut Vec<u8>) -> Result<()> {
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut *out, &self.json())?;
                out.push(b'\n');
            }
            Format::Text => out.write_all(self.text().as_bytes())?,
            Format::Csv => self.csv(out)?,
        }
        Ok(())
    }

    fn json(&self) -> Value {
        match self {
            Output::Threshold { expr, result } => json!({ "command": "threshold", "expr": expr, "result": result }),
            Output::Envelope { exprs, r, function_only, grid } => json!({
                "command": "envelope",
                "exprs": exprs,
                "r": r,
                "function_only": function_only,
                "axes": grid.axes,
                "columns": grid.columns,
                "points": grid.points,
                "values": grid.values.iter().map(|v| nums(v)).collect::<Vec<_>>(),
            }),
            Output::Prox { expr, r, x, value, points } => json!({
                "command": "prox", "expr": expr, "r": r, "x": x, "value": num(*value), "points": points,
            }),
            Output::Conjugate { expr, y, value } => json!({
                "command": "conjugate", "expr": expr, "y": y, "value": value,
            }),
            Output::Estimate { expr, liminf, bisection, disagreement } => json!({
                "command": "estimate", "expr": expr, "liminf": liminf, "bisection": bisection, "disagreement": disagreement,
            }),
            Output::Check { target, seed, report, symbolic, numeric } => json!({
                "command": "check",
                "target": target,
                "seed": seed,
                "passed": report.passed(),
                "symbolic": symbolic,
                "numeric": numeric,
                "suites": report.suites,
            }),
        }
    }

    fn text(&self) -> String {
        let mut s = String::new();
        match self {
            Output::Threshold { expr, result } => {
                s += &format!("expr: {expr}\nthreshold: {}\ntrace:\n", result.bound);
                for t in &result.trace {
                    s += &format!("  [{}] {}: {}  <- {}\n", t.paper_id, t.rule, t.bound, t.inputs.join("; "));
                }
            }
            Output::Envelope { grid, .. } => {
                s += &format!("{}\n", grid.axes.iter().chain(&grid.columns).cloned().collect::<Vec<_>>().join("\t"));
                for (p, v) in grid.points.iter().zip(&grid.values) {
                    let row: Vec<String> = p.iter().chain(v).map(|x| fmt_f64(*x)).collect();
                    s += &format!("{}\n", row.join("\t"));
                }
            }
            Output::Prox { expr, r, x, value, points } => {
                s += &format!("expr: {expr}\nr: {}\nx: {}\nenvelope: {}\n", fmt_f64(*r), point(x), fmt_f64(*value));
                for p in points {
                    s += &format!("prox point: {}\n", point(p));
                }
            }
            Output::Conjugate { expr, y, value } => {
                s += &format!("expr: {expr}\ny: {}\nconjugate: {value}\n", point(y));
            }
            Output::Estimate { expr, liminf, bisection, disagreement } => {
                s += &format!("expr: {expr}\n");
                if let Some(e) = liminf {
                    s += &(estimate_line("liminf", e) + "\n");
                }
                if let Some(e) = bisection {
                    s += &(estimate_line("bisection", e) + "\n");
                }
                if *disagreement {
                    s += "warning: estimators differ by more than 0.1\n";
                }
            }
            Output::Check { target, report, symbolic, numeric, .. } => {
                s += &format!("target: {target}\n");
                if let Some(b) = symbolic {
                    s += &format!("symbolic: {b}\n");
                }
                if let Some(e) = numeric {
                    s += &(estimate_line("numeric", e) + "\n");
                }
                for suite in &report.suites {
                    let status = if suite.passed() { "pass" } else { "FAIL" };
                    s += &format!("{status} {} ({} checks", suite.name, suite.checks);
                    if let Some(d) = suite.max_deviation {
                        s += &format!(", max deviation {d:.3e}");
                    }
                    s += ")\n";
                    for f in &suite.failures {
                        s += &format!("    witness: {} :: {}\n", f.input, f.detail);
                    }
                    for n in &suite.notes {
                        s += &format!("    note: {n}\n");
                    }
                }
                s += if report.passed() { "all suites passed\n" } else { "some suites failed\n" };
            }
        }
        s
    }

    fn csv(&self, out: &mut Vec<u8>) -> Result<()> {
        if let Output::Envelope { grid, .. } = self {
            write_csv(grid, &mut *out)?;
            return Ok(());
        }
        let mut w = csv::Writer::from_writer(&mut *out);
        match self {
            Output::Threshold { result, .. } => {
                w.write_record(["rule", "paper_id", "bound", "inputs"])?;
                for t in &result.trace {
                    w.write_record([t.rule.as_str(), &t.paper_id, &t.bound.to_string(), &t.inputs.join("; ")])?;
                }
            }
            Output::Prox { points, x, .. } => {
                w.write_record(["x", "y"].iter().take(x.len()))?;
                for p in points {
                    w.write_record(p.iter().map(|v| fmt_f64(*v)))?;
                }
            }
            Output::Conjugate { y, value, .. } => {
                let mut header: Vec<&str> = ["x", "y"].iter().take(y.len()).copied().collect();
                header.push("value");
                w.write_record(header)?;
                w.write_record(y.iter().map(|v| fmt_f64(*v)).chain(std::iter::once(fmt_f64(value.to_f64()))))?;
            }
            Output::Estimate { liminf, bisection, .. } => {
                w.write_record(["method", "estimate", "bound"])?;
                for (name, e) in [("liminf", liminf), ("bisection", bisection)] {
                    if let Some(e) = e {
                        let est = e.estimate.map(fmt_f64).unwrap_or_default();
                        w.write_record([name, &est, &e.result.bound.to_string()])?;
                    }
                }
            }
            Output::Check { report, .. } => {
                w.write_record(["suite", "checks", "failures", "max_deviation"])?;
                for s in &report.suites {
                    let dev = s.max_deviation.map(fmt_f64).unwrap_or_default();
                    w.write_record([s.name, &s.checks.to_string(), &s.failures.len().to_string(), &dev])?;
                }
            }
            Output::Envelope { .. } => unreachable!("handled above"),
        }
        w.flush()?;
        Ok(())
    }
}
