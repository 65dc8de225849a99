//! Property suites tying the symbolic rules to the numeric oracles.
//!
//! [`run_corpus`] runs every suite over a fixed corpus plus seeded random
//! families; [`check_expression`] runs the suites that make sense for one
//! user-supplied function.

use crate::expr::{parse_expr, to_dsl, FuncExpr, Region, RegionPartition};
use crate::fmt::fmt_f64;
use crate::numerics::{
    envelope_via_conjugate, estimate_threshold_bisection, estimate_threshold_liminf, moreau_envelope, sweep_points,
    EnvelopeValue, SolverConfig,
};
use crate::threshold::{compute_threshold, ThresholdBound};
use crate::ExtReal;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Basic,
    Quadratic,
    Piecewise,
}

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub expr: FuncExpr,
    /// Finite and continuous everywhere.
    pub continuous: bool,
    pub family: Family,
}

impl CorpusEntry {
    fn parsed(src: &str, continuous: bool, family: Family) -> Self {
        CorpusEntry { expr: parse_expr(src).expect("corpus entries parse"), continuous, family }
    }

    fn name(&self) -> String {
        to_dsl(&self.expr)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub input: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub name: &'static str,
    pub checks: usize,
    pub max_deviation: Option<f64>,
    pub failures: Vec<Failure>,
    pub notes: Vec<String>,
}

impl SuiteReport {
    fn new(name: &'static str) -> Self {
        SuiteReport { name, checks: 0, max_deviation: None, failures: Vec::new(), notes: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn deviation(&mut self, d: f64) {
        self.max_deviation = Some(self.max_deviation.map_or(d, |m| m.max(d)));
    }

    fn record(&mut self, ok: bool, input: impl FnOnce() -> String, detail: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(Failure { input: input(), detail: detail() });
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub suites: Vec<SuiteReport>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteReport::passed)
    }

    pub fn failure_count(&self) -> usize {
        self.suites.iter().map(|s| s.failures.len()).sum()
    }
}

/// Hand-picked functions with known thresholds.
pub fn base_corpus() -> Vec<CorpusEntry> {
    use Family::*;
    let f1 = "piecewise{x < 0: x^2; x >= 0: -(x^2)}";
    let f2 = "piecewise{x < 0: -(x^2); x >= 0: x^2}";
    let glued = format!("piecewise{{x < 0: {f1}; x >= 0: {f2}}}");
    let swapped = format!("piecewise{{x < 0: {f2}; x >= 0: {f1}}}");
    vec![
        CorpusEntry::parsed("abs(x)", true, Basic),
        CorpusEntry::parsed("x^2", true, Quadratic),
        CorpusEntry::parsed("max(x, 0)", true, Basic),
        CorpusEntry::parsed(&glued, true, Piecewise),
        CorpusEntry::parsed(&swapped, true, Piecewise),
        CorpusEntry::parsed(f1, true, Piecewise),
        CorpusEntry::parsed(f2, true, Piecewise),
        CorpusEntry::parsed("sin(x)", true, Basic),
        CorpusEntry::parsed("atan(x)", true, Basic),
        CorpusEntry::parsed("-abs(x)", true, Basic),
        CorpusEntry::parsed("-(x^2)", true, Quadratic),
        CorpusEntry::parsed("0.5*x^2 - 3*x + 1", true, Quadratic),
        CorpusEntry::parsed("-(1/2)*x^2 + sin(x)", true, Basic),
        CorpusEntry::parsed("-(1/2)*x^2 + (2*x + 3)", true, Quadratic),
        CorpusEntry::parsed("abs(x)^1.5", true, Basic),
        CorpusEntry::parsed("x^4 - 3*x^2", true, Basic),
        CorpusEntry::parsed("compose(-(1/2)*u^2, -2*x)", true, Quadratic),
        CorpusEntry::parsed("compose(-2*u, -(1/2)*x^2)", true, Quadratic),
        CorpusEntry::parsed("ind[0, inf)", false, Basic),
        CorpusEntry::parsed("piecewise{x < 1: abs(x - 1); x >= 1: 2*x}", false, Piecewise),
        CorpusEntry::parsed("-x^4", true, Basic),
        CorpusEntry::parsed("x^3", true, Basic),
    ]
}

/// Random quadratics `-(c/2)x² + bx + d` and two-piece quadratic
/// piecewise functions.
pub fn generated_corpus(seed: u64, count: usize) -> Vec<CorpusEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(2 * count);
    for _ in 0..count {
        let c = round3(rng.random_range(0.0..4.0));
        let b = round3(rng.random_range(-2.0..2.0));
        let d = round3(rng.random_range(-2.0..2.0));
        out.push(CorpusEntry { expr: FuncExpr::quadratic_1d(-c, b, d), continuous: true, family: Family::Quadratic });
    }
    for _ in 0..count {
        out.push(CorpusEntry { expr: random_piecewise(&mut rng), continuous: false, family: Family::Piecewise });
    }
    out
}

fn round3(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

fn random_piecewise(rng: &mut ChaCha8Rng) -> FuncExpr {
    let s = round3(rng.random_range(-2.0..2.0));
    let mut piece = || FuncExpr::quadratic_1d(round3(rng.random_range(-3.0..3.0)), round3(rng.random_range(-2.0..2.0)), 0.0);
    let pieces = vec![piece(), piece()];
    let partition = RegionPartition::new(vec![
        Region::interval(f64::NEG_INFINITY, false, s, false),
        Region::interval(s, true, f64::INFINITY, false),
    ]);
    FuncExpr::piecewise(partition, pieces).expect("two cells, two pieces")
}

/// `λ f` pairs for the scaling suite.
fn scaling_pairs(rng: &mut ChaCha8Rng, count: usize) -> Vec<(f64, FuncExpr)> {
    (0..count)
        .map(|i| {
            let lambda = round3(rng.random_range(0.0..5.0));
            let f = if i % 2 == 0 {
                FuncExpr::quadratic_1d(-round3(rng.random_range(0.0..4.0)), 0.0, 0.0)
            } else {
                random_piecewise(rng)
            };
            (lambda, f)
        })
        .collect()
}

/// Quadratic pairs with `f1 <= f2` by construction.
fn ordered_pairs(rng: &mut ChaCha8Rng, count: usize) -> Vec<(FuncExpr, FuncExpr)> {
    (0..count)
        .map(|_| {
            let c2 = round3(rng.random_range(-2.0..3.0));
            let c1 = c2 + round3(rng.random_range(0.0..2.0));
            let b = round3(rng.random_range(-2.0..2.0));
            let d2 = round3(rng.random_range(-2.0..2.0));
            let d1 = d2 - round3(rng.random_range(0.0..2.0));
            (FuncExpr::quadratic_1d(-c1, b, d1), FuncExpr::quadratic_1d(-c2, b, d2))
        })
        .collect()
}

fn hand_ordered_pairs() -> Vec<(FuncExpr, FuncExpr)> {
    [
        ("-abs(x)", "abs(x)"),
        ("x^2 - 1", "x^2"),
        ("sin(x) - 2", "cos(x) + 2"),
        ("-(x^2)", "piecewise{x < 0: -(x^2); x >= 0: x^2}"),
        ("max(x, 0) - 1", "abs(x)"),
    ]
    .iter()
    .map(|(a, b)| (parse_expr(a).expect("parses"), parse_expr(b).expect("parses")))
    .collect()
}

fn symbolic(f: &FuncExpr) -> ThresholdBound {
    compute_threshold(f).map(|r| r.bound).unwrap_or(ThresholdBound::Unknown)
}

/// An upper bound on the threshold, symbolic if possible.
fn threshold_ceiling(f: &FuncExpr, cfg: &SolverConfig) -> Option<f64> {
    if let Some((_, hi)) = symbolic(f).range().filter(|r| r.1.is_finite()) {
        return Some(hi);
    }
    estimate_threshold_liminf(f, cfg).result.bound.range().map(|r| r.1)
}

fn envelope_value(f: &FuncExpr, r: f64, x: &[f64], cfg: &SolverConfig) -> Result<EnvelopeValue, String> {
    moreau_envelope(f, r, x, cfg).map(|e| e.value).map_err(|e| e.to_string())
}

fn at(x: &[f64]) -> String {
    x.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(",")
}

fn probes(dim: usize, lo: f64, hi: f64, steps_1d: usize, steps_2d: usize) -> Vec<Vec<f64>> {
    if dim <= 1 {
        sweep_points(&[(lo, hi)], steps_1d)
    } else {
        sweep_points(&[(lo, hi), (lo, hi)], steps_2d)
    }
}

/// Direct and conjugate-path envelopes agree within 1e-3.
fn suite_fenchel(entries: &[CorpusEntry], shifts: &[f64], cfg: &SolverConfig) -> SuiteReport {
    let mut rep = SuiteReport::new("fenchel_identity");
    for e in entries {
        let Some(base) = threshold_ceiling(&e.expr, cfg) else {
            rep.notes.push(format!("skipped {}: no finite threshold bound", e.name()));
            continue;
        };
        let xs = probes(e.expr.dim(), -5.0, 5.0, 101, 5);
        for &s in shifts {
            let r = base + s;
            let rows: Vec<(Vec<f64>, Result<EnvelopeValue, String>, Result<ExtReal, String>)> = xs
                .par_iter()
                .map(|x| {
                    let direct = envelope_value(&e.expr, r, x, cfg);
                    let via = envelope_via_conjugate(&e.expr, r, x, cfg).map_err(|err| err.to_string());
                    (x.clone(), direct, via)
                })
                .collect();
            for (x, direct, via) in rows {
                let input = || format!("{} r={} x={}", e.name(), fmt_f64(r), at(&x));
                match (direct, via) {
                    (Ok(EnvelopeValue::Finite { value }), Ok(ExtReal::Finite(v))) => {
                        let d = (value - v).abs();
                        rep.deviation(d);
                        rep.record(d <= 1e-3, input, || format!("direct {} vs conjugate {}", fmt_f64(value), fmt_f64(v)));
                    }
                    (Ok(EnvelopeValue::NegInfinity { .. }), Ok(ExtReal::NegInf)) => rep.record(true, input, String::new),
                    (d, v) => rep.record(false, input, || format!("direct {d:?} vs conjugate {v:?}")),
                }
            }
        }
    }
    rep
}

/// `e_r f(x) <= f(x)` wherever the envelope is finite.
fn suite_minorization(entries: &[CorpusEntry], rs: &[f64], cfg: &SolverConfig) -> SuiteReport {
    let mut rep = SuiteReport::new("minorization");
    for e in entries {
        let xs = probes(e.expr.dim(), -5.0, 5.0, 21, 3);
        for &r in rs {
            let vals: Vec<_> = xs.par_iter().map(|x| envelope_value(&e.expr, r, x, cfg)).collect();
            for (x, v) in xs.iter().zip(vals) {
                let fx = e.expr.value_at(x);
                let input = || format!("{} r={} x={}", e.name(), fmt_f64(r), at(x));
                match v {
                    Ok(EnvelopeValue::Finite { value }) => {
                        rep.record(value <= fx, input, || format!("envelope {} above f = {}", fmt_f64(value), fmt_f64(fx)))
                    }
                    Ok(_) => {}
                    Err(err) => rep.record(false, input, || err),
                }
            }
        }
    }
    rep
}

/// `r1 < r2` implies `e_{r1} f <= e_{r2} f + 1e-8`.
fn suite_monotone(entries: &[CorpusEntry], shifts: &[f64], cfg: &SolverConfig) -> SuiteReport {
    let mut rep = SuiteReport::new("monotone_in_r");
    for e in entries {
        let Some(base) = threshold_ceiling(&e.expr, cfg) else {
            rep.notes.push(format!("skipped {}: no finite threshold bound", e.name()));
            continue;
        };
        let xs = probes(e.expr.dim(), -5.0, 5.0, 21, 3);
        for x in &xs {
            let vals: Vec<_> = shifts.par_iter().map(|s| envelope_value(&e.expr, base + s, x, cfg)).collect();
            let vals: Vec<f64> = match vals.into_iter().collect::<Result<Vec<_>, _>>() {
                Ok(v) => v.iter().map(EnvelopeValue::to_f64).collect(),
                Err(err) => {
                    rep.record(false, || format!("{} x={}", e.name(), at(x)), || err);
                    continue;
                }
            };
            for (i, w) in vals.windows(2).enumerate() {
                let ok = !w[0].is_nan() && !w[1].is_nan() && w[0] <= w[1] + 1e-8;
                rep.record(
                    ok,
                    || format!("{} x={} r={},{}", e.name(), at(x), fmt_f64(base + shifts[i]), fmt_f64(base + shifts[i + 1])),
                    || format!("{} > {}", fmt_f64(w[0]), fmt_f64(w[1])),
                );
            }
        }
    }
    rep
}

/// Sampled `f1 <= f2` implies `e_r f1 <= e_r f2 + 1e-8` beyond both thresholds.
fn suite_envelope_ordering(pairs: &[(FuncExpr, FuncExpr)], cfg: &SolverConfig) -> SuiteReport {
    let mut rep = SuiteReport::new("envelope_ordering");
    let grid = sweep_points(&[(-10.0, 10.0)], 201);
    let xs = sweep_points(&[(-5.0, 5.0)], 21);
    for (f1, f2) in pairs {
        let name = || format!("{} <= {}", to_dsl(f1), to_dsl(f2));
        if grid.iter().any(|x| f1.value_at(x) > f2.value_at(x)) {
            rep.notes.push(format!("skipped {}: not ordered on samples", name()));
            continue;
        }
        let (Some(a), Some(b)) = (threshold_ceiling(f1, cfg), threshold_ceiling(f2, cfg)) else {
            continue;
        };
        let r = a.max(b) + 1.0;
        let rows: Vec<_> = xs
            .par_iter()
            .map(|x| (envelope_value(f1, r, x, cfg), envelope_value(f2, r, x, cfg)))
            .collect();
        for (x, (e1, e2)) in xs.iter().zip(rows) {
            let input = || format!("{} r={} x={}", name(), fmt_f64(r), at(x));
            match (e1, e2) {
                (Ok(v1), Ok(v2)) => {
                    let (v1, v2) = (v1.to_f64(), v2.to_f64());
                    rep.record(v1 <= v2 + 1e-8, input, || format!("{} > {}", fmt_f64(v1), fmt_f64(v2)));
                }
                (Err(err), _) | (_, Err(err)) => rep.record(false, input, || err),
            }
        }
    }
    rep
}

/// `|e_1000 f(x) − f(x)| <= 1e-2` on `[-1, 1]` for continuous functions.
/// For smooth `f` the gap is about `f'(x)²/2000`, so the corpus keeps
/// slopes below 4 on the probes.
fn suite_convergence(entries: &[CorpusEntry], cfg: &SolverConfig) -> SuiteReport {
    let mut rep = SuiteReport::new("convergence");
    let r = 1000.0;
    for e in entries.iter().filter(|e| e.continuous) {
        let xs = probes(e.expr.dim(), -1.0, 1.0, 21, 3);
        let vals: Vec<_> = xs.par_iter().map(|x| envelope_value(&e.expr, r, x, cfg)).collect();
        for (x, v) in xs.iter().zip(vals) {
            let fx = e.expr.value_at(x);
            let input = || format!("{} x={}", e.name(), at(x));
            match v {
                Ok(EnvelopeValue::Finite { value }) => {
                    let d = (value - fx).abs();
                    rep.deviation(d);
                    rep.record(d <= 1e-2, input, || format!("e_1000 = {} vs f = {}", fmt_f64(value), fmt_f64(fx)));
                }
                Ok(other) => rep.record(false, input, || format!("{other:?}")),
                Err(err) => rep.record(false, input, || err),
            }
        }
    }
    rep
}

/// Every prox point attains the envelope value within 1e-6 relative.
fn suite_prox(entries: &[CorpusEntry], cfg: &SolverConfig) -> SuiteReport {
    let mut rep = SuiteReport::new("prox_consistency");
    for e in entries {
        let Some(base) = threshold_ceiling(&e.expr, cfg) else {
            continue;
        };
        let r = base + 1.0;
        let xs = probes(e.expr.dim(), -5.0, 5.0, 11, 3);
        let results: Vec<_> = xs.par_iter().map(|x| moreau_envelope(&e.expr, r, x, cfg)).collect();
        for (x, res) in xs.iter().zip(results) {
            let input = || format!("{} r={} x={}", e.name(), fmt_f64(r), at(x));
            let res = match res {
                Ok(res) => res,
                Err(err) => {
                    rep.record(false, input, || err.to_string());
                    continue;
                }
            };
            let Some(value) = res.value.finite() else {
                rep.record(false, input, || format!("{:?}", res.value));
                continue;
            };
            rep.record(!res.minimizers.is_empty(), input, || "no minimizer".into());
            for p in &res.minimizers {
                let obj = e.expr.value_at(p) + 0.5 * r * p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
                let d = (obj - value).abs();
                rep.deviation(d);
                rep.record(d <= 1e-6 * (1.0 + value.abs()), input, || {
                    format!("prox point {} gives {} vs {}", at(p), fmt_f64(obj), fmt_f64(value))
                });
            }
        }
    }
    rep
}

/// Whether a numeric liminf estimate is consistent with a symbolic claim.
pub fn estimate_consistent(symbolic: ThresholdBound, numeric: ThresholdBound, estimate: Option<f64>) -> Option<bool> {
    match symbolic {
        ThresholdBound::Exact { value } => {
            Some(estimate.is_some_and(|v| (v - value).abs() <= 0.05f64.max(0.02 * value)))
        }
        ThresholdBound::Interval { lo, hi } => Some(estimate.is_some_and(|v| v >= lo - 0.05 && v <= hi + 0.05)),
        ThresholdBound::NotProxBounded => Some(numeric == ThresholdBound::NotProxBounded),
        ThresholdBound::Unknown => None,
    }
}

fn suite_symbolic_vs_numeric(entries: &[CorpusEntry], cfg: &SolverConfig) -> SuiteReport {
    let mut rep = SuiteReport::new("symbolic_vs_numeric");
    for e in entries {
        let sym = match compute_threshold(&e.expr) {
            Ok(r) => r.bound,
            Err(err) => {
                rep.record(false, || e.name(), || err.to_string());
                continue;
            }
        };
        let num = estimate_threshold_liminf(&e.expr, cfg);
        match estimate_consistent(sym, num.result.bound, num.estimate) {
            Some(ok) => rep.record(ok, || e.name(), || format!("symbolic {sym} vs numeric {}", num.result.bound)),
            None => rep.notes.push(format!("{}: symbolic unknown, numeric {}", e.name(), num.result.bound)),
        }
    }
    rep
}

fn suite_estimator_agreement(entries: &[CorpusEntry], cfg: &SolverConfig) -> SuiteReport {
    let mut rep = SuiteReport::new("estimator_agreement");
    for e in entries.iter().filter(|e| e.family != Family::Basic) {
        let a = estimate_threshold_liminf(&e.expr, cfg);
        let b = estimate_threshold_bisection(&e.expr, cfg);
        let ok = match (a.estimate, b.estimate) {
            (Some(x), Some(y)) => {
                rep.deviation((x - y).abs());
                (x - y).abs() <= 0.1
            }
            (None, None) => a.result.bound == b.result.bound,
            _ => false,
        };
        rep.record(ok, || e.name(), || format!("liminf {} vs bisection {}", a.result.bound, b.result.bound));
    }
    rep
}

fn suite_scaling(pairs: &[(f64, FuncExpr)]) -> SuiteReport {
    let mut rep = SuiteReport::new("scaling_homogeneity");
    for (lambda, f) in pairs {
        let Some(v) = symbolic(f).exact_value() else {
            rep.notes.push(format!("skipped {}: not exact", to_dsl(f)));
            continue;
        };
        let scaled = FuncExpr::scale(*lambda, f.clone()).expect("nonnegative factor");
        let got = symbolic(&scaled);
        rep.record(
            got == ThresholdBound::exact(lambda * v),
            || to_dsl(&scaled),
            || format!("{got} vs {}", fmt_f64(lambda * v)),
        );
    }
    rep
}

fn suite_threshold_ordering(pairs: &[(FuncExpr, FuncExpr)]) -> SuiteReport {
    let mut rep = SuiteReport::new("threshold_ordering");
    let grid = sweep_points(&[(-10.0, 10.0)], 201);
    for (f1, f2) in pairs {
        if grid.iter().any(|x| f1.value_at(x) > f2.value_at(x)) {
            continue;
        }
        if let (Some(r1), Some(r2)) = (symbolic(f1).exact_value(), symbolic(f2).exact_value()) {
            rep.record(
                r1 >= r2,
                || format!("{} <= {}", to_dsl(f1), to_dsl(f2)),
                || format!("r1 = {} < r2 = {}", fmt_f64(r1), fmt_f64(r2)),
            );
        }
    }
    rep
}

/// Exact piecewise thresholds equal the largest constrained-piece threshold
/// and match the liminf estimate.
fn suite_piecewise_max(entries: &[CorpusEntry], cfg: &SolverConfig) -> SuiteReport {
    let mut rep = SuiteReport::new("piecewise_max");
    for e in entries {
        let FuncExpr::Piecewise { pieces, .. } = &e.expr else { continue };
        let Some(v) = symbolic(&e.expr).exact_value() else { continue };
        let constrained: Option<Vec<f64>> = (0..pieces.len())
            .map(|i| e.expr.constrained_piece(i).ok().and_then(|p| symbolic(&p).exact_value()))
            .collect();
        let Some(constrained) = constrained else { continue };
        let max = constrained.iter().copied().fold(0.0, f64::max);
        rep.record(v == max, || e.name(), || format!("{} vs max of pieces {}", fmt_f64(v), fmt_f64(max)));
        let num = estimate_threshold_liminf(&e.expr, cfg);
        rep.record(
            estimate_consistent(ThresholdBound::exact(v), num.result.bound, num.estimate) == Some(true),
            || e.name(),
            || format!("symbolic {} vs brute force {}", fmt_f64(v), num.result.bound),
        );
    }
    rep
}

/// Every suite over the fixed corpus and the families generated from `seed`.
pub fn run_corpus(seed: u64, cfg: &SolverConfig) -> CheckReport {
    let base = base_corpus();
    let generated = generated_corpus(seed, 8);
    let all: Vec<CorpusEntry> = base.iter().chain(&generated).cloned().collect();
    let prox_bounded: Vec<CorpusEntry> = all
        .iter()
        .filter(|e| symbolic(&e.expr).range().is_some_and(|r| r.1.is_finite()))
        .cloned()
        .collect();
    let base_count = prox_bounded.iter().take_while(|e| base.iter().any(|b| b.expr == e.expr)).count();
    let identity: Vec<CorpusEntry> = ["abs(x)", "x^2", "max(x, 0)"]
        .iter()
        .map(|s| CorpusEntry::parsed(s, true, Family::Basic))
        .chain(std::iter::once(base[3].clone()))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let scaling = scaling_pairs(&mut rng, 10);
    let mut ordered = ordered_pairs(&mut rng, 20);
    let mut env_pairs = hand_ordered_pairs();
    env_pairs.extend(ordered.iter().take(5).cloned());
    ordered.extend(hand_ordered_pairs());
    CheckReport {
        suites: vec![
            suite_fenchel(&identity, &[0.5, 1.0, 2.0, 5.0], cfg),
            suite_minorization(&prox_bounded, &[0.0, 0.5, 2.0, 5.0], cfg),
            suite_monotone(&prox_bounded, &[0.25, 0.5, 1.0, 2.0, 5.0, 10.0], cfg),
            suite_envelope_ordering(&env_pairs, cfg),
            suite_convergence(&prox_bounded[..base_count], cfg),
            suite_prox(&prox_bounded, cfg),
            suite_symbolic_vs_numeric(&all, cfg),
            suite_estimator_agreement(&all, cfg),
            suite_scaling(&scaling),
            suite_threshold_ordering(&ordered),
            suite_piecewise_max(&all, cfg),
        ],
    }
}

fn has_piecewise(f: &FuncExpr) -> bool {
    match f {
        FuncExpr::Piecewise { .. } => true,
        FuncExpr::Sum { terms } | FuncExpr::Max { terms } => terms.iter().any(has_piecewise),
        FuncExpr::Scale { inner, .. } => has_piecewise(inner),
        FuncExpr::Compose { outer, inner } => has_piecewise(outer) || has_piecewise(inner),
        _ => false,
    }
}

/// The suites that apply to a single function.
pub fn check_expression(f: &FuncExpr, cfg: &SolverConfig) -> CheckReport {
    let entry = CorpusEntry {
        expr: f.clone(),
        continuous: f.is_finite_valued() && !has_piecewise(f),
        family: if has_piecewise(f) { Family::Piecewise } else { Family::Basic },
    };
    let one = std::slice::from_ref(&entry);
    let mut suites = vec![suite_symbolic_vs_numeric(one, cfg)];
    if threshold_ceiling(f, cfg).is_some() && f.dim() <= 2 {
        suites.push(suite_fenchel(one, &[0.5, 1.0, 2.0, 5.0], cfg));
        suites.push(suite_minorization(one, &[0.5, 2.0], cfg));
        suites.push(suite_monotone(one, &[0.5, 1.0, 2.0, 5.0], cfg));
        suites.push(suite_convergence(one, cfg));
        suites.push(suite_prox(one, cfg));
    }
    let mut agreement = suite_estimator_agreement(
        &[CorpusEntry { family: Family::Quadratic, ..entry.clone() }],
        cfg,
    );
    agreement.name = "estimator_agreement";
    suites.push(agreement);
    CheckReport { suites }
}
