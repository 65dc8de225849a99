//! Threshold estimators and the bounded-below probe.

use super::search::{Outcome, Search};
use super::{NumericsError, SolverConfig};
use crate::expr::FuncExpr;
use crate::fmt::fmt_f64;
use crate::threshold::{ThresholdBound, ThresholdResult, TraceEntry};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// A numeric threshold estimate: the point value (absent when the function
/// looks not prox-bounded) and the claimed range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NumericEstimate {
    pub estimate: Option<f64>,
    pub result: ThresholdResult,
}

impl NumericEstimate {
    fn new(estimate: Option<f64>, rule: &str, id: &str, inputs: Vec<String>, bound: ThresholdBound) -> Self {
        NumericEstimate {
            estimate,
            result: ThresholdResult { bound, trace: vec![TraceEntry::new(rule, id, inputs, bound)] },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub bounded: bool,
    /// Smallest sampled value.
    pub minimum: f64,
    /// Where the function kept decreasing; set on `false` answers.
    pub witness: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinorantCheck {
    pub holds: bool,
    /// `inf f + (r/2)‖·‖²` when the minorant holds.
    pub m: Option<f64>,
    pub witness: Option<Vec<f64>>,
}

fn last_quarter(len: usize) -> usize {
    (len / 4).max(2).min(len - 1)
}

fn sphere(dim: usize, radius: f64, cfg: &SolverConfig) -> Vec<Vec<f64>> {
    if dim <= 1 {
        let s = cfg.sphere_samples_1d.max(2);
        return (0..s).map(|i| vec![if i % 2 == 0 { radius } else { -radius }]).collect();
    }
    let s = cfg.sphere_samples_2d;
    (0..s)
        .map(|i| {
            let t = TAU * i as f64 / s as f64;
            vec![radius * t.cos(), radius * t.sin()]
        })
        .collect()
}

fn probe_objective(obj: &(dyn Fn(&[f64]) -> f64 + Sync), dim: usize, cfg: &SolverConfig) -> ProbeResult {
    let search = Search::new(obj, cfg);
    let origin = vec![0.0; dim.max(1)];
    let mut running = f64::INFINITY;
    let mut arg = origin.clone();
    let mut history = Vec::new();
    for radius in cfg.radii() {
        let (points, _) = search.grid(&origin, radius);
        let values = search.eval_all(&points);
        for (p, v) in points.iter().zip(&values) {
            if *v < running {
                running = *v;
                arg = p.clone();
            }
        }
        if running < -cfg.divergence_bound {
            return ProbeResult { bounded: false, minimum: running, witness: Some(arg) };
        }
        history.push(running);
    }
    let q = last_quarter(history.len());
    let tail = &history[history.len() - q - 1..];
    let settled = tail.windows(2).all(|w| w[0] - w[1] < 0.01 * (1.0 + w[1].abs()));
    ProbeResult { bounded: settled, minimum: running, witness: (!settled).then_some(arg) }
}

/// Heuristic test of whether `g` is bounded below. A `false` answer carries
/// the point where the sampled minimum was still decreasing.
pub fn bounded_below_probe(g: &FuncExpr, cfg: &SolverConfig) -> ProbeResult {
    probe_objective(&|x: &[f64]| g.value_at(x), g.dim(), cfg)
}

fn shifted<'a>(f: &'a FuncExpr, r: f64) -> impl Fn(&[f64]) -> f64 + Sync + 'a {
    move |x: &[f64]| f.value_at(x) + 0.5 * r * x.iter().map(|v| v * v).sum::<f64>()
}

/// Liminf of `f(x)/‖x‖²` from sphere samples at radii `2^k`.
pub fn estimate_threshold_liminf(f: &FuncExpr, cfg: &SolverConfig) -> NumericEstimate {
    let dim = f.dim();
    if dim > 2 {
        return NumericEstimate { estimate: None, result: ThresholdResult::unknown() };
    }
    let k_max = cfg.liminf_radii;
    let mut ratios = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let radius = 2f64.powi(k as i32);
        let m = sphere(dim, radius, cfg)
            .iter()
            .map(|x| f.value_at(x) / (radius * radius))
            .filter(|v| !v.is_nan())
            .fold(f64::INFINITY, f64::min);
        if m < -cfg.divergence_bound {
            let inputs = vec![format!("R = 2^{k}"), format!("m = {}", fmt_f64(m))];
            return NumericEstimate::new(None, "liminf_divergence", "Fact4.3.iv", inputs, ThresholdBound::NotProxBounded);
        }
        ratios.push(m);
    }
    let q = last_quarter(ratios.len());
    let tail = &ratios[ratios.len() - q - 1..];
    let (first, last) = (tail[0], tail[q]);
    // Ratios still growing without bound: 50% more negative across the
    // last quarter of the radii.
    if last < 0.0 && first.is_finite() && last <= 1.5 * first.min(0.0) && last <= -1.0 {
        let inputs = vec![format!("m_first = {}", fmt_f64(first)), format!("m_last = {}", fmt_f64(last))];
        return NumericEstimate::new(None, "liminf_divergence", "Fact4.3.iv", inputs, ThresholdBound::NotProxBounded);
    }
    let liminf = tail[1..].iter().copied().fold(f64::INFINITY, f64::min);
    if !liminf.is_finite() {
        // Nowhere finite on the samples: nothing to measure.
        return NumericEstimate { estimate: None, result: ThresholdResult::unknown() };
    }
    let v = (-2.0 * liminf).max(0.0);
    let tol = 0.05 * (1.0 + v);
    let inputs = vec![format!("L = {}", fmt_f64(liminf)), format!("K = {k_max}")];
    NumericEstimate::new(Some(v), "liminf_estimator", "Fact4.3.iv", inputs, ThresholdBound::interval(v - tol, v + tol))
}

/// Bisection on `r` for the smallest `f + (r/2)‖·‖²` that the probe finds
/// bounded below.
pub fn estimate_threshold_bisection(f: &FuncExpr, cfg: &SolverConfig) -> NumericEstimate {
    let dim = f.dim();
    if dim > 2 {
        return NumericEstimate { estimate: None, result: ThresholdResult::unknown() };
    }
    let bounded = |r: f64| probe_objective(&shifted(f, r), dim, cfg).bounded;
    let tol = cfg.bisection_tol;
    if bounded(0.0) {
        let inputs = vec!["bounded below at r = 0".to_string()];
        return NumericEstimate::new(Some(0.0), "bisection_estimator", "Fact4.3.iii", inputs, ThresholdBound::interval(0.0, tol));
    }
    let mut hi = 1.0;
    while !bounded(hi) {
        hi *= 2.0;
        if hi > 2f64.powi(20) {
            let inputs = vec!["no bounded shift up to r = 2^20".to_string()];
            return NumericEstimate::new(None, "bisection_divergence", "Fact4.3.iii", inputs, ThresholdBound::NotProxBounded);
        }
    }
    let mut lo = if hi == 1.0 { 0.0 } else { hi / 2.0 };
    while hi - lo > tol * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if bounded(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let inputs = vec![format!("r_lo = {}", fmt_f64(lo)), format!("r_hi = {}", fmt_f64(hi))];
    NumericEstimate::new(
        Some(0.5 * (lo + hi)),
        "bisection_estimator",
        "Fact4.3.iii",
        inputs,
        ThresholdBound::Interval { lo, hi },
    )
}

/// Whether `f ≥ −(r/2)‖·‖² + m` for some `m`, with the best sampled `m`.
pub fn check_quadratic_minorant(f: &FuncExpr, r: f64, cfg: &SolverConfig) -> Result<MinorantCheck, NumericsError> {
    cfg.validate()?;
    if !(r >= 0.0 && r.is_finite()) {
        return Err(NumericsError::Parameter("finite and nonnegative"));
    }
    let dim = f.dim();
    if dim > 2 {
        return Err(NumericsError::Dimension(dim));
    }
    let obj = shifted(f, r);
    let probe = probe_objective(&obj, dim, cfg);
    if !probe.bounded {
        return Ok(MinorantCheck { holds: false, m: None, witness: probe.witness });
    }
    let origin = vec![0.0; dim.max(1)];
    Ok(match Search::new(&obj, cfg).minimize(&origin) {
        Outcome::Finite { value, .. } => MinorantCheck { holds: true, m: Some(value.min(probe.minimum)), witness: None },
        Outcome::Unbounded { witness, .. } | Outcome::Inconclusive { best: witness, .. } => {
            MinorantCheck { holds: false, m: None, witness: Some(witness) }
        }
        Outcome::Improper => return Err(NumericsError::Improper),
    })
}
