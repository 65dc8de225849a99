//! Polyhedral regions and the cell partitions of piecewise functions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// `normal · x <= offset`, or `<` when `strict`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
    pub strict: bool,
}

impl Halfspace {
    /// Builds a halfspace, scaling one-dimensional constraints to a unit
    /// normal so that `2x <= 3` and `x <= 1.5` are the same set and the same
    /// value.
    pub fn new(mut normal: Vec<f64>, mut offset: f64, strict: bool) -> Self {
        while normal.len() > 1 && normal.last() == Some(&0.0) {
            normal.pop();
        }
        if normal.len() == 1 && normal[0] != 0.0 {
            let scale = normal[0].abs();
            normal[0] /= scale;
            offset /= scale;
        }
        Halfspace { normal, offset, strict }
    }

    fn lhs(&self, x: &[f64]) -> f64 {
        self.normal
            .iter()
            .enumerate()
            .map(|(i, a)| a * x.get(i).copied().unwrap_or(0.0))
            .sum()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let v = self.lhs(x);
        if self.strict {
            v < self.offset
        } else {
            v <= self.offset
        }
    }

    /// Membership in the topological interior.
    pub fn interior_contains(&self, x: &[f64]) -> bool {
        if self.normal.iter().all(|a| *a == 0.0) {
            return self.contains(x);
        }
        self.lhs(x) < self.offset
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }
}

/// Intersection of finitely many halfspaces. The empty list is all of `R^n`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Region {
    pub halfspaces: Vec<Halfspace>,
}

impl Region {
    pub fn full() -> Self {
        Region::default()
    }

    pub fn new(halfspaces: Vec<Halfspace>) -> Self {
        Region { halfspaces }
    }

    /// One-dimensional interval; infinite endpoints contribute no constraint.
    pub fn interval(lo: f64, lo_closed: bool, hi: f64, hi_closed: bool) -> Self {
        let mut halfspaces = Vec::new();
        if lo.is_finite() {
            halfspaces.push(Halfspace::new(vec![-1.0], -lo, !lo_closed));
        }
        if hi.is_finite() {
            halfspaces.push(Halfspace::new(vec![1.0], hi, !hi_closed));
        }
        Region { halfspaces }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.halfspaces.iter().all(|h| h.contains(x))
    }

    pub fn interior_contains(&self, x: &[f64]) -> bool {
        self.halfspaces.iter().all(|h| h.interior_contains(x))
    }

    pub fn dim(&self) -> usize {
        self.halfspaces.iter().map(Halfspace::dim).max().unwrap_or(0)
    }

    pub fn is_full(&self) -> bool {
        self.halfspaces.is_empty()
    }

    /// For a one-dimensional region, its closure as `[lo, hi]` (possibly
    /// infinite, possibly empty with `lo > hi`).
    pub fn interval_hull(&self) -> Option<(f64, f64)> {
        if self.dim() > 1 {
            return None;
        }
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for h in &self.halfspaces {
            match h.normal.first().copied().unwrap_or(0.0) {
                a if a > 0.0 => hi = hi.min(h.offset / a),
                a if a < 0.0 => lo = lo.max(h.offset / a),
                _ => {
                    if !(0.0 < h.offset || (!h.strict && h.offset == 0.0)) {
                        return Some((1.0, -1.0));
                    }
                }
            }
        }
        Some((lo, hi))
    }

    /// Whether `t * d` stays in the region for every large `t`: the
    /// recession-cone test `normal · d <= 0` for every constraint.
    pub fn recedes_along(&self, d: &[f64]) -> bool {
        self.halfspaces.iter().all(|h| {
            let dot: f64 = h
                .normal
                .iter()
                .enumerate()
                .map(|(i, a)| a * d.get(i).copied().unwrap_or(0.0))
                .sum();
            dot <= 1e-12
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PartitionError {
    #[error("cells do not cover the space: no cell contains {0:?}")]
    Uncovered(Vec<f64>),
    #[error("cell {inside} meets the interior of cell {interior} at {point:?}")]
    Overlap {
        inside: usize,
        interior: usize,
        point: Vec<f64>,
    },
    #[error("a partition needs at least one cell")]
    Empty,
}

/// Cells `S_1..S_m` of a piecewise definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionPartition {
    pub cells: Vec<Region>,
}

/// Samples per axis for partition validation, spread over `[-100, 100]`.
pub const PARTITION_SAMPLES: usize = 1000;
pub const PARTITION_EXTENT: f64 = 100.0;

impl RegionPartition {
    pub fn new(cells: Vec<Region>) -> Self {
        RegionPartition { cells }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Index of the first cell containing `x`: ties on shared boundaries go to
    /// the lowest index.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        self.cells.iter().position(|c| c.contains(x))
    }

    pub fn dim(&self) -> usize {
        self.cells.iter().map(Region::dim).max().unwrap_or(0)
    }

    /// Sample-checks coverage and `S_i ∩ int S_j = ∅` on a grid over
    /// `[-100, 100]^n`. In one dimension every constraint breakpoint and its
    /// neighbours are added to the samples so that gaps at a single point are
    /// caught.
    pub fn validate(&self, dim: usize) -> Result<(), PartitionError> {
        if self.cells.is_empty() {
            return Err(PartitionError::Empty);
        }
        let axis: Vec<f64> = (0..PARTITION_SAMPLES)
            .map(|i| {
                -PARTITION_EXTENT
                    + 2.0 * PARTITION_EXTENT * i as f64 / (PARTITION_SAMPLES - 1) as f64
            })
            .collect();
        let check = |x: &[f64]| -> Result<(), PartitionError> {
            let mut any = false;
            for (i, ci) in self.cells.iter().enumerate() {
                if !ci.contains(x) {
                    continue;
                }
                any = true;
                for (j, cj) in self.cells.iter().enumerate() {
                    if i != j && cj.interior_contains(x) {
                        return Err(PartitionError::Overlap {
                            inside: i,
                            interior: j,
                            point: x.to_vec(),
                        });
                    }
                }
            }
            if any {
                Ok(())
            } else {
                Err(PartitionError::Uncovered(x.to_vec()))
            }
        };
        match dim {
            0 | 1 => {
                let mut samples = axis;
                for cell in &self.cells {
                    for h in &cell.halfspaces {
                        if let Some(&a) = h.normal.first() {
                            if a != 0.0 {
                                let b = h.offset / a;
                                let eps = 1e-9 * (1.0 + b.abs());
                                samples.extend([b - eps, b, b + eps]);
                            }
                        }
                    }
                }
                samples.iter().try_for_each(|&t| check(&[t]))
            }
            _ => {
                let mut point = vec![0.0; dim];
                for &a in &axis {
                    for &b in &axis {
                        point[0] = a;
                        point[1] = b;
                        check(&point)?;
                    }
                }
                Ok(())
            }
        }
    }
}
