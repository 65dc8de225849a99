//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Tolerances and time limits are fixed here, not tuned.

use proxbound::check::run_corpus;
use proxbound::numerics::{
    check_quadratic_minorant, envelope_via_conjugate, estimate_threshold_bisection, estimate_threshold_liminf,
    moreau_envelope, sweep_points,
};
use proxbound::{compute_threshold, parse_expr, FuncExpr, SolverConfig, ThresholdBound};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::process::ExitCode;
use std::time::{Duration, Instant};

const F1: &str = "piecewise{x < 0: x^2; x >= 0: -(x^2)}";
const F2: &str = "piecewise{x < 0: -(x^2); x >= 0: x^2}";

fn p(s: &str) -> FuncExpr {
    parse_expr(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

fn glued() -> String {
    format!("piecewise{{x < 0: {F1}; x >= 0: {F2}}}")
}

fn swapped() -> String {
    format!("piecewise{{x < 0: {F2}; x >= 0: {F1}}}")
}

/// Collects failed conditions for one criterion.
#[derive(Default)]
struct Criterion {
    problems: Vec<String>,
    notes: Vec<String>,
}

impl Criterion {
    fn require(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.problems.push(what());
        }
    }

    fn note(&mut self, s: String) {
        self.notes.push(s);
    }

    fn within(&mut self, started: Instant, limit: Duration) {
        let took = started.elapsed();
        self.note(format!("{:.2}s", took.as_secs_f64()));
        self.require(took < limit, || format!("took {took:?}, limit {limit:?}"));
    }
}

fn symbolic(s: &str) -> proxbound::ThresholdResult {
    compute_threshold(&p(s)).unwrap_or_else(|e| panic!("{s}: {e}"))
}

fn estimates(f: &FuncExpr, cfg: &SolverConfig) -> [(&'static str, Option<f64>); 2] {
    [
        ("liminf", estimate_threshold_liminf(f, cfg).estimate),
        ("bisection", estimate_threshold_bisection(f, cfg).estimate),
    ]
}

fn glued_pieces(cfg: &SolverConfig) -> Criterion {
    let mut c = Criterion::default();
    let started = Instant::now();
    for s in [F1, F2] {
        let b = symbolic(s).bound;
        c.require(b == ThresholdBound::exact(2.0), || format!("{s}: symbolic {b}"));
        for (name, est) in estimates(&p(s), cfg) {
            c.require(est.is_some_and(|v| (v - 2.0).abs() <= 0.05), || format!("{s}: {name} {est:?}"));
        }
    }
    let f = glued();
    let b = symbolic(&f).bound;
    c.require(b == ThresholdBound::exact(0.0), || format!("glued: symbolic {b}"));
    for (name, est) in estimates(&p(&f), cfg) {
        c.require(est.is_some_and(|v| (0.0..=0.05).contains(&v)), || format!("glued: {name} {est:?}"));
    }
    c.within(started, Duration::from_secs(2));
    c
}

fn swapped_gluing(cfg: &SolverConfig) -> Criterion {
    let mut c = Criterion::default();
    let f = swapped();
    let r = symbolic(&f);
    c.require(r.bound == ThresholdBound::exact(2.0), || format!("symbolic {}", r.bound));
    c.require(r.cites("Thm3.3"), || "trace does not cite Thm3.3".into());
    for (name, est) in estimates(&p(&f), cfg) {
        c.require(est.is_some_and(|v| (v - 2.0).abs() <= 0.05), || format!("{name} {est:?}"));
    }
    c
}

fn composition_table(cfg: &SolverConfig) -> Criterion {
    let mut c = Criterion::default();
    for (a, b) in [(1.0, 1.0), (1.0, 2.0), (2.0, 1.0), (0.5, 3.0)] {
        // inner -b x, outer -(a/2) u²
        let outer_first = format!("compose(-({a}/2)*u^2, -{b}*x)");
        let want = a * b * b;
        let got = symbolic(&outer_first).bound;
        c.require(got == ThresholdBound::exact(want), || format!("{outer_first}: symbolic {got}, want {want}"));
        for (name, est) in estimates(&p(&outer_first), cfg) {
            c.require(est.is_some_and(|v| (v - want).abs() <= 0.05 * want), || {
                format!("{outer_first}: {name} {est:?}, want {want}")
            });
        }
        let inner_first = format!("compose(-{b}*u, -({a}/2)*x^2)");
        let got = symbolic(&inner_first).bound;
        c.require(got == ThresholdBound::exact(0.0), || format!("{inner_first}: symbolic {got}"));
        for (name, est) in estimates(&p(&inner_first), cfg) {
            c.require(est.is_some_and(|v| v <= 0.05), || format!("{inner_first}: {name} {est:?}"));
        }
    }
    c
}

fn quartics(cfg: &SolverConfig) -> Criterion {
    let mut c = Criterion::default();
    let neg = estimate_threshold_liminf(&p("-x^4"), cfg);
    c.require(neg.result.bound == ThresholdBound::NotProxBounded, || format!("-x^4: {}", neg.result.bound));
    let pos = estimate_threshold_liminf(&p("x^4"), cfg);
    c.require(pos.estimate.is_some_and(|v| v.abs() <= 0.05), || format!("x^4: {:?}", pos.estimate));
    c
}

/// Envelopes with known closed forms.
fn closed_form(name: &str, r: f64, x: f64) -> f64 {
    match name {
        "abs(x)" if x.abs() <= 1.0 / r => 0.5 * r * x * x,
        "abs(x)" => x.abs() - 0.5 / r,
        "x^2" | "glued" => r / (r + 2.0) * x * x,
        "max(x, 0)" if x <= 0.0 => 0.0,
        "max(x, 0)" if x < 1.0 / r => 0.5 * r * x * x,
        "max(x, 0)" => x - 0.5 / r,
        _ => unreachable!("{name}"),
    }
}

fn conjugate_identity(cfg: &SolverConfig) -> Criterion {
    let mut c = Criterion::default();
    let started = Instant::now();
    let glued = glued();
    let fs = [("abs(x)", "abs(x)"), ("x^2", "x^2"), ("max(x, 0)", "max(x, 0)"), ("glued", glued.as_str())];
    let points = sweep_points(&[(-5.0, 5.0)], 101);
    let (mut identity_dev, mut oracle_dev) = (0.0_f64, 0.0_f64);
    for (name, src) in fs {
        let f = p(src);
        let rbar = symbolic(src).bound.exact_value().expect("exact threshold");
        for r in [0.5, 1.0, 2.0, 5.0].into_iter().filter(|r| *r > rbar) {
            for x in &points {
                let direct = moreau_envelope(&f, r, x, cfg).unwrap().value.to_f64();
                let via = envelope_via_conjugate(&f, r, x, cfg).unwrap().to_f64();
                let d = (direct - via).abs();
                identity_dev = identity_dev.max(if d.is_nan() { f64::INFINITY } else { d });
                let o = (direct - closed_form(name, r, x[0])).abs();
                oracle_dev = oracle_dev.max(if o.is_nan() { f64::INFINITY } else { o });
            }
        }
    }
    c.note(format!("identity deviation {identity_dev:.2e}, closed-form deviation {oracle_dev:.2e}"));
    c.require(identity_dev <= 1e-3, || format!("identity deviation {identity_dev}"));
    c.require(oracle_dev <= 1e-3, || format!("closed-form deviation {oracle_dev}"));
    c.within(started, Duration::from_secs(30));
    c
}

fn sum_rules(cfg: &SolverConfig) -> Criterion {
    let mut c = Criterion::default();
    let cases = [
        ("-(1/2)*x^2 + sin(x)", ThresholdBound::exact(1.0), (0.95, 1.05)),
        ("-(1/2)*x^2 + (2*x + 3)", ThresholdBound::exact(1.0), (0.95, 1.05)),
        ("-(1/2)*x^2 + (-(x^2))", ThresholdBound::Interval { lo: 0.0, hi: 3.0 }, (-0.05, 3.05)),
    ];
    for (s, want, (lo, hi)) in cases {
        let got = symbolic(s).bound;
        c.require(got == want, || format!("{s}: symbolic {got}, want {want}"));
        for (name, est) in estimates(&p(s), cfg) {
            c.require(est.is_some_and(|v| v >= lo && v <= hi), || format!("{s}: {name} {est:?}"));
            if let Some(v) = est {
                c.note(format!("{name} {v:.4}"));
            }
        }
    }
    c
}

fn scaling(cfg: &SolverConfig) -> Criterion {
    let mut c = Criterion::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let lambda: f64 = rng.random_range(0.0..=5.0);
        let curv: f64 = rng.random_range(0.1..=4.0);
        let f = FuncExpr::scale(lambda, FuncExpr::quadratic_1d(-curv, 0.0, 0.0)).unwrap();
        let want = lambda * curv;
        let got = compute_threshold(&f).unwrap().bound;
        c.require(got == ThresholdBound::exact(want), || format!("λ={lambda}, c={curv}: symbolic {got}"));
        for (name, est) in estimates(&f, cfg) {
            c.require(est.is_some_and(|v| (v - want).abs() <= 0.05 * want), || {
                format!("λ={lambda}, c={curv}: {name} {est:?}, want {want}")
            });
        }
    }
    c
}

fn ordering() -> Criterion {
    let mut c = Criterion::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut probes: Vec<f64> = (-100..=100).map(f64::from).collect();
    probes.extend([-1e6, -1e3, 1e3, 1e6]);
    let quad = |rng: &mut ChaCha8Rng| {
        let q: f64 = rng.random_range(-4.0..=3.0);
        let b: f64 = rng.random_range(-2.0..=2.0);
        let k: f64 = rng.random_range(-3.0..=3.0);
        FuncExpr::quadratic_1d(q, b, k)
    };
    let (mut pairs, mut tries, mut violations) = (0, 0, 0);
    while pairs < 20 && tries < 100_000 {
        tries += 1;
        let (f1, f2) = (quad(&mut rng), quad(&mut rng));
        if !probes.iter().all(|x| f1.value_at(&[*x]) <= f2.value_at(&[*x])) {
            continue;
        }
        pairs += 1;
        let r1 = compute_threshold(&f1).unwrap().bound.exact_value();
        let r2 = compute_threshold(&f2).unwrap().bound.exact_value();
        match (r1, r2) {
            (Some(r1), Some(r2)) if r1 >= r2 => {}
            _ => violations += 1,
        }
    }
    c.note(format!("{pairs} pairs, {violations} violations"));
    c.require(pairs == 20, || format!("only {pairs} ordered pairs found"));
    c.require(violations == 0, || format!("{violations} violations"));
    c
}

fn minorants(cfg: &SolverConfig) -> Criterion {
    let mut c = Criterion::default();
    let m = check_quadratic_minorant(&p("-(x^2)"), 2.0, cfg).unwrap();
    c.require(m.holds && m.m.is_some_and(|v| v.abs() <= 1e-6), || format!("-x^2, r=2: {m:?}"));
    let m = check_quadratic_minorant(&p("-abs(x)"), 0.0, cfg).unwrap();
    c.require(!m.holds && m.witness.is_some(), || format!("-|x|, r=0: {m:?}"));
    let m = check_quadratic_minorant(&p("-abs(x)"), 0.1, cfg).unwrap();
    c.require(m.holds && m.m.is_some_and(|v| (v + 5.0).abs() <= 1e-3), || format!("-|x|, r=0.1: {m:?}"));
    c
}

fn property_suites(cfg: &SolverConfig) -> Criterion {
    let mut c = Criterion::default();
    let started = Instant::now();
    let report = run_corpus(0, cfg);
    for s in &report.suites {
        c.require(s.passed(), || format!("{}: {} failures", s.name, s.failures.len()));
    }
    c.note(format!("{} suites", report.suites.len()));
    c.within(started, Duration::from_secs(60));
    c
}

fn main() -> ExitCode {
    let cfg = SolverConfig::default();
    let criteria: Vec<(&str, Box<dyn Fn() -> Criterion>)> = vec![
        ("glued pieces", Box::new(|| glued_pieces(&cfg))),
        ("swapped gluing", Box::new(|| swapped_gluing(&cfg))),
        ("composition table", Box::new(|| composition_table(&cfg))),
        ("quartics", Box::new(|| quartics(&cfg))),
        ("conjugate identity", Box::new(|| conjugate_identity(&cfg))),
        ("sum rules", Box::new(|| sum_rules(&cfg))),
        ("scaling", Box::new(|| scaling(&cfg))),
        ("ordering", Box::new(ordering)),
        ("minorant checker", Box::new(|| minorants(&cfg))),
        ("property suites", Box::new(|| property_suites(&cfg))),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let c = run();
        let status = if c.problems.is_empty() { "PASS" } else { "FAIL" };
        let mut line = format!("{status} {:>2} {name}", i + 1);
        if !c.notes.is_empty() {
            line += &format!(" ({})", c.notes.join("; "));
        }
        println!("{line}");
        for problem in &c.problems {
            println!("       {problem}");
        }
        failed += usize::from(!c.problems.is_empty());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
