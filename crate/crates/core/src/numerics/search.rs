//! Expanding-ball grid search with local refinement.

use super::SolverConfig;
use rayon::prelude::*;
use std::sync::atomic::{AtomicU64, Ordering};

/// Grids at least this large are evaluated in parallel.
const PARALLEL_GRID: usize = 4096;
/// Grid candidates kept per radius, and refined overall.
const PER_RADIUS: usize = 4;
const REFINED: usize = 8;
/// Radii without improvement before a two-dimensional search stops early.
const PATIENCE_2D: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Outcome {
    /// Minimum value and the refined points attaining it (best first).
    Finite { value: f64, minimizers: Vec<(Vec<f64>, f64)> },
    Unbounded { witness: Vec<f64>, value: f64 },
    Inconclusive { best: Vec<f64>, value: f64 },
    Improper,
}

pub(crate) struct Search<'a> {
    obj: &'a (dyn Fn(&[f64]) -> f64 + Sync),
    cfg: &'a SolverConfig,
    evals: AtomicU64,
}

#[derive(Debug, Clone)]
struct Candidate {
    point: Vec<f64>,
    value: f64,
    spacing: f64,
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

impl<'a> Search<'a> {
    pub(crate) fn new(obj: &'a (dyn Fn(&[f64]) -> f64 + Sync), cfg: &'a SolverConfig) -> Self {
        Search { obj, cfg, evals: AtomicU64::new(0) }
    }

    pub(crate) fn evaluations(&self) -> u64 {
        self.evals.load(Ordering::Relaxed)
    }

    /// Objective value with NaN read as `+inf`.
    pub(crate) fn eval(&self, p: &[f64]) -> f64 {
        self.evals.fetch_add(1, Ordering::Relaxed);
        let v = (self.obj)(p);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }

    /// Points of the grid over the box of half-width `radius` around `center`.
    pub(crate) fn grid(&self, center: &[f64], radius: f64) -> (Vec<Vec<f64>>, f64) {
        let n = self.cfg.odd_grid();
        let h = 2.0 * radius / (n - 1) as f64;
        let axis = |c: f64| -> Vec<f64> { (0..n).map(|i| c + (i as f64 - ((n - 1) / 2) as f64) * h).collect() };
        let points = match center.len() {
            1 => axis(center[0]).into_iter().map(|x| vec![x]).collect(),
            _ => {
                let xs = axis(center[0]);
                let ys = axis(center[1]);
                let mut pts = Vec::with_capacity(n * n);
                for x in &xs {
                    for y in &ys {
                        pts.push(vec![*x, *y]);
                    }
                }
                pts
            }
        };
        (points, h)
    }

    pub(crate) fn eval_all(&self, points: &[Vec<f64>]) -> Vec<f64> {
        if points.len() >= PARALLEL_GRID {
            points.par_iter().map(|p| self.eval(p)).collect()
        } else {
            points.iter().map(|p| self.eval(p)).collect()
        }
    }

    /// Grid local minima, best first, at most `PER_RADIUS`.
    fn local_minima(&self, points: &[Vec<f64>], values: &[f64], dim: usize, h: f64) -> Vec<Candidate> {
        let n = self.cfg.odd_grid();
        let mut found: Vec<usize> = Vec::new();
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                continue;
            }
            let neighbours: Vec<usize> = if dim == 1 {
                [i.checked_sub(1), (i + 1 < n).then_some(i + 1)].into_iter().flatten().collect()
            } else {
                let (r, c) = (i / n, i % n);
                let mut nb = Vec::with_capacity(4);
                if r > 0 {
                    nb.push(i - n);
                }
                if r + 1 < n {
                    nb.push(i + n);
                }
                if c > 0 {
                    nb.push(i - 1);
                }
                if c + 1 < n {
                    nb.push(i + 1);
                }
                nb
            };
            if neighbours.iter().all(|&j| v <= values[j]) {
                found.push(i);
            }
        }
        found.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        found
            .into_iter()
            .take(PER_RADIUS)
            .map(|i| Candidate { point: points[i].clone(), value: values[i], spacing: h })
            .collect()
    }

    /// Golden-section search on `[p - h, p + h]` followed by a shrinking
    /// compass polish.
    fn refine_1d(&self, c: &Candidate) -> (Vec<f64>, f64) {
        let phi = 0.5 * (5.0_f64.sqrt() - 1.0);
        let (mut a, mut b) = (c.point[0] - c.spacing, c.point[0] + c.spacing);
        let mut x1 = b - phi * (b - a);
        let mut x2 = a + phi * (b - a);
        let mut f1 = self.eval(&[x1]);
        let mut f2 = self.eval(&[x2]);
        while b - a > self.cfg.arg_tol {
            if f1 <= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - phi * (b - a);
                f1 = self.eval(&[x1]);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + phi * (b - a);
                f2 = self.eval(&[x2]);
            }
            if x1 == x2 {
                break;
            }
        }
        let mut best = (c.point[0], c.value);
        for (x, v) in [(x1, f1), (x2, f2)] {
            if v < best.1 {
                best = (x, v);
            }
        }
        self.compass(vec![best.0], best.1, c.spacing / 4.0)
    }

    /// Pattern search over the axis and diagonal directions.
    fn compass(&self, mut p: Vec<f64>, mut v: f64, mut step: f64) -> (Vec<f64>, f64) {
        let dirs: Vec<Vec<f64>> = if p.len() == 1 {
            vec![vec![1.0], vec![-1.0]]
        } else {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            vec![
                vec![1.0, 0.0],
                vec![-1.0, 0.0],
                vec![0.0, 1.0],
                vec![0.0, -1.0],
                vec![s, s],
                vec![-s, -s],
                vec![s, -s],
                vec![-s, s],
            ]
        };
        while step > self.cfg.arg_tol {
            let mut moved = false;
            for d in &dirs {
                let q: Vec<f64> = p.iter().zip(d).map(|(x, e)| x + step * e).collect();
                let w = self.eval(&q);
                if w < v {
                    p = q;
                    v = w;
                    moved = true;
                    break;
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        (p, v)
    }

    fn refine(&self, c: &Candidate) -> (Vec<f64>, f64) {
        if c.point.len() == 1 {
            self.refine_1d(c)
        } else {
            self.compass(c.point.clone(), c.value, c.spacing)
        }
    }

    /// Follows the ray from `center` through `p` outwards, doubling the
    /// distance, until the objective certifies `-inf` or stops decreasing.
    fn ray_probe(&self, center: &[f64], p: &[f64], value: f64) -> Outcome {
        let r0 = dist(center, p);
        let d: Vec<f64> = p.iter().zip(center).map(|(a, c)| (a - c) / r0).collect();
        let (mut best, mut best_v) = (p.to_vec(), value);
        let mut t = r0;
        while t < 1e300 {
            t *= 2.0;
            let q: Vec<f64> = center.iter().zip(&d).map(|(c, e)| c + t * e).collect();
            let v = self.eval(&q);
            if v < -self.cfg.divergence_bound {
                return Outcome::Unbounded { witness: q, value: v };
            }
            if v >= best_v {
                break;
            }
            best = q;
            best_v = v;
        }
        Outcome::Inconclusive { best, value: best_v }
    }

    /// Global minimization of the objective around `center`.
    pub(crate) fn minimize(&self, center: &[f64]) -> Outcome {
        let dim = center.len();
        let mut candidates: Vec<Candidate> = Vec::new();
        let mut best: Option<Candidate> = None;
        let mut last_improved = 0;
        let mut on_edge = false;
        let radii = self.cfg.radii();
        for (k, &radius) in radii.iter().enumerate() {
            let (points, h) = self.grid(center, radius);
            let values = self.eval_all(&points);
            if let Some(i) = values.iter().position(|v| *v < -self.cfg.divergence_bound) {
                return Outcome::Unbounded { witness: points[i].clone(), value: values[i] };
            }
            let local = self.local_minima(&points, &values, dim, h);
            if let Some(top) = local.first() {
                if best.as_ref().is_none_or(|b| top.value < b.value) {
                    best = Some(top.clone());
                    last_improved = k;
                }
            }
            // The global grid minimum on the outer boundary is not a local minimum
            // in the interior sense, so track it separately.
            let (imin, vmin) = values
                .iter()
                .enumerate()
                .fold((0, f64::INFINITY), |acc, (i, v)| if *v < acc.1 { (i, *v) } else { acc });
            if vmin.is_finite() && best.as_ref().is_none_or(|b| vmin < b.value) {
                best = Some(Candidate { point: points[imin].clone(), value: vmin, spacing: h });
                last_improved = k;
            }
            on_edge = best.as_ref().is_some_and(|b| dist(&b.point, center) >= radius * (1.0 - 1e-12));
            candidates.extend(local);
            if dim > 1 && k >= last_improved + PATIENCE_2D && !on_edge {
                break;
            }
        }
        let Some(best) = best else {
            return Outcome::Improper;
        };
        if on_edge && dist(&best.point, center) >= radii.last().copied().unwrap_or(1.0) * (1.0 - 1e-12) {
            return self.ray_probe(center, &best.point, best.value);
        }
        candidates.push(best);
        candidates.sort_by(|a, b| a.value.total_cmp(&b.value));
        let mut chosen: Vec<Candidate> = Vec::new();
        for c in candidates {
            if chosen.len() == REFINED {
                break;
            }
            if !chosen.iter().any(|o| dist(&o.point, &c.point) < o.spacing.min(c.spacing)) {
                chosen.push(c);
            }
        }
        let refined: Vec<(Vec<f64>, f64)> = chosen.iter().map(|c| self.refine(c)).collect();
        let value = refined.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
        if value < -self.cfg.divergence_bound {
            let r = refined.into_iter().find(|r| r.1 == value).expect("minimum is attained");
            return Outcome::Unbounded { witness: r.0, value };
        }
        let tol = 1e-6 * (1.0 + value.abs());
        let mut minimizers: Vec<(Vec<f64>, f64)> = Vec::new();
        let mut ordered = refined;
        ordered.sort_by(|a, b| a.1.total_cmp(&b.1));
        for (p, v) in ordered {
            if v <= value + tol && !minimizers.iter().any(|(q, _)| dist(q, &p) <= 1e-6) {
                minimizers.push((p, v));
            }
        }
        Outcome::Finite { value, minimizers }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shifted_quadratic() {
        let cfg = SolverConfig::default();
        let obj = |p: &[f64]| (p[0] - 3.0).powi(2) + 1.0;
        let s = Search::new(&obj, &cfg);
        let Outcome::Finite { value, minimizers } = s.minimize(&[0.0]) else { panic!() };
        assert!((value - 1.0).abs() < 1e-12);
        assert!((minimizers[0].0[0] - 3.0).abs() < 1e-6);
    }

    #[test]
    fn two_dimensional_kink() {
        let cfg = SolverConfig::default();
        let obj = |p: &[f64]| (p[0] - 1.0).abs() + (p[1] + 2.0).abs();
        let s = Search::new(&obj, &cfg);
        let Outcome::Finite { value, minimizers } = s.minimize(&[0.0, 0.0]) else { panic!() };
        assert!(value.abs() < 1e-7, "{value}");
        assert!(dist(&minimizers[0].0, &[1.0, -2.0]) < 1e-6);
    }

    #[test]
    fn linear_objective_diverges_along_a_ray() {
        let cfg = SolverConfig::default();
        let obj = |p: &[f64]| -p[0];
        let s = Search::new(&obj, &cfg);
        assert!(matches!(s.minimize(&[0.0]), Outcome::Unbounded { .. }));
    }

    #[test]
    fn nowhere_finite_is_improper() {
        let cfg = SolverConfig::default();
        let obj = |_: &[f64]| f64::INFINITY;
        assert_eq!(Search::new(&obj, &cfg).minimize(&[0.0]), Outcome::Improper);
    }
}
