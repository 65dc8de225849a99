//! `proxbound`: thresholds of prox-boundedness from the command line.

mod render;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use proxbound::check::{check_expression, run_corpus};
use proxbound::numerics::{
    envelope_sweep, estimate_threshold_bisection, estimate_threshold_liminf, fenchel_conjugate, function_sweep,
    prox_points, sweep_points, Grid,
};
use proxbound::{compute_threshold, parse_expr, to_dsl, EnvelopeValue, FuncExpr, NumericsError, ParseError, SolverConfig, ThresholdBound};
use render::Output;
use serde_json::json;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_NOT_PROX_BOUNDED: u8 = 3;
const EXIT_UNKNOWN: u8 = 4;

#[derive(Parser)]
#[command(name = "proxbound", version, about = "Thresholds of prox-boundedness, symbolic and numeric")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Output format; `envelope` defaults to csv, everything else to text.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write output to this file (atomically) instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for the generated corpus of `check --corpus`.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Largest search radius for the numeric minimizer [default: 1e6]
    #[arg(long, global = true)]
    max_radius: Option<f64>,
    /// Objective values below minus this count as -inf [default: 1e12]
    #[arg(long, global = true)]
    divergence_bound: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Liminf,
    Bisection,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Derive the threshold from the calculus rules, with the rule trace.
    Threshold {
        /// DSL expression or path to a file containing one.
        #[arg(allow_hyphen_values = true)]
        expr: String,
    },
    /// Moreau envelope on a grid.
    Envelope {
        #[arg(allow_hyphen_values = true)]
        expr: String,
        /// Further expressions, one extra column each.
        #[arg(long, allow_hyphen_values = true)]
        overlay: Vec<String>,
        /// Envelope parameter.
        #[arg(long, required_unless_present = "function_only")]
        r: Option<f64>,
        /// `a:b` or `a:b,c:d`.
        #[arg(long, allow_hyphen_values = true)]
        range: String,
        #[arg(long, default_value_t = 101)]
        steps: usize,
        /// Tabulate the functions themselves instead of their envelopes.
        #[arg(long)]
        function_only: bool,
    },
    /// Proximal points at `x`.
    Prox {
        #[arg(allow_hyphen_values = true)]
        expr: String,
        #[arg(long)]
        r: f64,
        /// Point, `a` or `a,b`.
        #[arg(long, allow_hyphen_values = true)]
        x: String,
    },
    /// Fenchel conjugate at the point given by `--x`.
    Conjugate {
        #[arg(allow_hyphen_values = true)]
        expr: String,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
    },
    /// Numeric threshold estimates.
    Estimate {
        #[arg(allow_hyphen_values = true)]
        expr: String,
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
    },
    /// Property suites for one expression or the built-in corpus.
    Check {
        #[arg(allow_hyphen_values = true, required_unless_present = "corpus")]
        expr: Option<String>,
        #[arg(long, conflicts_with = "expr")]
        corpus: bool,
    },
}

/// A failure with its exit code and message.
#[derive(Debug)]
struct Exit {
    code: u8,
    message: String,
    json: serde_json::Value,
}

impl std::fmt::Display for Exit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Exit {}

fn fail(code: u8, kind: &str, message: impl Into<String>) -> anyhow::Error {
    let message = message.into();
    let json = json!({ "error": { "kind": kind, "message": message } });
    Exit { code, message, json }.into()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.common.format.unwrap_or(match cli.command {
        Command::Envelope { .. } => Format::Csv,
        _ => Format::Text,
    });
    let result = run(&cli, format);
    let (output, code) = match result {
        Ok(pair) => pair,
        Err(err) => {
            let exit = err.downcast::<Exit>().unwrap_or_else(|other| {
                let message = format!("{other:#}");
                Exit { code: 1, json: json!({ "error": { "kind": "error", "message": message } }), message }
            });
            eprintln!("error: {}", exit.message);
            if format == Format::Json {
                println!("{}", exit.json);
            }
            return ExitCode::from(exit.code);
        }
    };
    if let Err(err) = emit(&output, format, cli.common.out.as_deref()) {
        eprintln!("error: {err:#}");
        return ExitCode::from(1);
    }
    ExitCode::from(code)
}

fn parse_error(src: &str, e: &ParseError) -> anyhow::Error {
    let caret = format!("{}^", " ".repeat(src[..e.position.min(src.len())].chars().count()));
    let message = format!("parse error ({:?}) at position {}: {}\n  {src}\n  {caret}", e.kind, e.position, e.message);
    let json = json!({
        "error": { "kind": "parse", "message": e.message, "position": e.position, "category": format!("{:?}", e.kind).to_lowercase() }
    });
    Exit { code: EXIT_PARSE, message, json }.into()
}

/// Reads the expression from a file when the argument names one.
fn load_expr(arg: &str) -> Result<FuncExpr> {
    let src = if Path::new(arg).is_file() {
        std::fs::read_to_string(arg).with_context(|| format!("reading {arg}"))?.trim().to_string()
    } else {
        arg.to_string()
    };
    parse_expr(&src).map_err(|e| parse_error(&src, &e))
}

fn solver_config(common: &Common) -> Result<SolverConfig> {
    let mut cfg = SolverConfig::default();
    if let Some(v) = common.max_radius {
        cfg.max_radius = v;
    }
    if let Some(v) = common.divergence_bound {
        cfg.divergence_bound = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn parse_point(s: &str) -> Result<Vec<f64>> {
    let p: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| anyhow!("bad coordinate {t:?} in {s:?}")))
        .collect::<Result<_>>()?;
    if p.is_empty() || p.len() > 2 || p.iter().any(|v| !v.is_finite()) {
        bail!("a point has one or two finite coordinates, got {s:?}");
    }
    Ok(p)
}

fn parse_ranges(s: &str) -> Result<Vec<(f64, f64)>> {
    let ranges: Vec<(f64, f64)> = s
        .split(',')
        .map(|part| {
            let (a, b) = part.split_once(':').ok_or_else(|| anyhow!("range {part:?} is not of the form a:b"))?;
            let a: f64 = a.trim().parse().map_err(|_| anyhow!("bad range start {a:?}"))?;
            let b: f64 = b.trim().parse().map_err(|_| anyhow!("bad range end {b:?}"))?;
            if !(a.is_finite() && b.is_finite() && a <= b) {
                bail!("range {part:?} needs finite a <= b");
            }
            Ok((a, b))
        })
        .collect::<Result<_>>()?;
    if ranges.len() > 2 {
        bail!("at most two ranges");
    }
    Ok(ranges)
}

fn numerics_error(e: NumericsError) -> anyhow::Error {
    match e {
        NumericsError::ProxUndefined => fail(EXIT_NOT_PROX_BOUNDED, "prox_undefined", "prox undefined: r below threshold"),
        other => anyhow!(other),
    }
}

fn bound_code(b: &ThresholdBound) -> u8 {
    match b {
        ThresholdBound::NotProxBounded => EXIT_NOT_PROX_BOUNDED,
        ThresholdBound::Unknown => EXIT_UNKNOWN,
        _ => 0,
    }
}

fn run(cli: &Cli, format: Format) -> Result<(Output, u8)> {
    let cfg = solver_config(&cli.common)?;
    match &cli.command {
        Command::Threshold { expr } => {
            let f = load_expr(expr)?;
            let result = compute_threshold(&f)?;
            let code = bound_code(&result.bound);
            Ok((Output::Threshold { expr: to_dsl(&f), result }, code))
        }
        Command::Envelope { expr, overlay, r, range, steps, function_only } => {
            let r = r.unwrap_or(0.0);
            if !(r >= 0.0 && r.is_finite()) {
                bail!("--r must be finite and nonnegative");
            }
            if *steps < 2 {
                bail!("--steps must be at least 2");
            }
            let fs = std::iter::once(expr).chain(overlay).map(|e| load_expr(e)).collect::<Result<Vec<_>>>()?;
            let ranges = parse_ranges(range)?;
            if let Some(f) = fs.iter().find(|f| f.dim() > ranges.len()) {
                bail!("{} needs {} coordinates but --range gives {}", to_dsl(f), f.dim(), ranges.len());
            }
            let points = sweep_points(&ranges, *steps);
            let mut columns_values: Vec<Vec<f64>> = Vec::with_capacity(fs.len());
            let mut inconclusive = 0;
            for f in &fs {
                if *function_only {
                    columns_values.push(function_sweep(f, &points));
                    continue;
                }
                let res = envelope_sweep(f, r, &points, &cfg).map_err(numerics_error)?;
                if res.iter().all(|e| matches!(e.value, EnvelopeValue::NegInfinity { .. })) {
                    return Err(fail(
                        EXIT_NOT_PROX_BOUNDED,
                        "below_threshold",
                        format!("r below threshold: the envelope of {} is -inf at every probed point", to_dsl(f)),
                    ));
                }
                inconclusive += res.iter().filter(|e| matches!(e.value, EnvelopeValue::Inconclusive { .. })).count();
                columns_values.push(res.iter().map(|e| e.value.to_f64()).collect());
            }
            if inconclusive > 0 {
                eprintln!("warning: {inconclusive} grid points were inconclusive (written as nan)");
            }
            let columns: Vec<String> = if fs.len() == 1 {
                vec![if *function_only { "f".into() } else { "value".into() }]
            } else {
                let stem = if *function_only { "f" } else { "value" };
                (1..=fs.len()).map(|i| format!("{stem}_{i}")).collect()
            };
            let values = (0..points.len()).map(|i| columns_values.iter().map(|c| c[i]).collect()).collect();
            let grid = Grid::new(points, columns, values);
            let exprs = fs.iter().map(to_dsl).collect();
            Ok((Output::Envelope { exprs, r, function_only: *function_only, grid }, 0))
        }
        Command::Prox { expr, r, x } => {
            let f = load_expr(expr)?;
            let x = parse_point(x)?;
            let points = prox_points(&f, *r, &x, &cfg).map_err(numerics_error)?;
            let env = proxbound::numerics::moreau_envelope(&f, *r, &x, &cfg).map_err(numerics_error)?;
            let value = env.value.finite().unwrap_or(f64::NAN);
            Ok((Output::Prox { expr: to_dsl(&f), r: *r, x, value, points }, 0))
        }
        Command::Conjugate { expr, x } => {
            let f = load_expr(expr)?;
            let y = parse_point(x)?;
            let value = fenchel_conjugate(&f, &y, &cfg).map_err(numerics_error)?;
            Ok((Output::Conjugate { expr: to_dsl(&f), y, value }, 0))
        }
        Command::Estimate { expr, method } => {
            let f = load_expr(expr)?;
            let liminf = matches!(method, Method::Liminf | Method::Both).then(|| estimate_threshold_liminf(&f, &cfg));
            let bisection =
                matches!(method, Method::Bisection | Method::Both).then(|| estimate_threshold_bisection(&f, &cfg));
            let estimates: Vec<_> = liminf.iter().chain(&bisection).collect();
            let disagreement = match (&liminf, &bisection) {
                (Some(a), Some(b)) => match (a.estimate, b.estimate) {
                    (Some(x), Some(y)) => (x - y).abs() > 0.1,
                    (None, None) => a.result.bound != b.result.bound,
                    _ => true,
                },
                _ => false,
            };
            if disagreement && format != Format::Json {
                eprintln!("warning: the estimators disagree by more than 0.1");
            }
            let code = if estimates.iter().all(|e| e.result.bound == ThresholdBound::NotProxBounded) {
                EXIT_NOT_PROX_BOUNDED
            } else if estimates.iter().all(|e| e.estimate.is_none()) {
                EXIT_UNKNOWN
            } else {
                0
            };
            Ok((Output::Estimate { expr: to_dsl(&f), liminf, bisection, disagreement }, code))
        }
        Command::Check { expr, corpus } => {
            let (target, report, symbolic, numeric) = if *corpus {
                ("corpus".to_string(), run_corpus(cli.common.seed, &cfg), None, None)
            } else {
                let f = load_expr(expr.as_deref().expect("clap requires an expression"))?;
                let symbolic = compute_threshold(&f).map(|r| r.bound).unwrap_or(ThresholdBound::Unknown);
                let numeric = estimate_threshold_liminf(&f, &cfg);
                (to_dsl(&f), check_expression(&f, &cfg), Some(symbolic), Some(numeric))
            };
            let code = if report.passed() { 0 } else { EXIT_CHECK_FAILED };
            Ok((Output::Check { target, seed: cli.common.seed, report, symbolic, numeric }, code))
        }
    }
}

/// Writes to stdout, or atomically to `out` through a temporary file in the
/// same directory.
fn emit(output: &Output, format: Format, out: Option<&Path>) -> Result<()> {
    let mut buf = Vec::new();
    output.write(format, &mut buf)?;
    match out {
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(&buf)?;
            stdout.flush()?;
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating a file in {}", dir.display()))?;
            tmp.write_all(&buf)?;
            tmp.as_file().sync_all()?;
            tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
        }
    }
    Ok(())
}
