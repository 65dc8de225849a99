//! Grid sweeps and their CSV form.

use super::envelope::{moreau_envelope, EnvelopeResult};
use super::{NumericsError, SolverConfig};
use crate::expr::FuncExpr;
use crate::fmt::fmt_f64;
use rayon::prelude::*;
use serde::Serialize;
use std::io::{Read, Write};

/// Values on a rectangular grid, one column per named series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    /// Coordinate names, `x` or `x, y`.
    pub axes: Vec<String>,
    pub points: Vec<Vec<f64>>,
    pub columns: Vec<String>,
    /// `values[i][j]` is column `j` at point `i`.
    pub values: Vec<Vec<f64>>,
}

/// Evenly spaced points over the box, row-major (last coordinate fastest).
pub fn sweep_points(ranges: &[(f64, f64)], steps: usize) -> Vec<Vec<f64>> {
    let axis = |(a, b): (f64, f64)| -> Vec<f64> {
        if steps < 2 {
            return vec![a];
        }
        (0..steps).map(|i| if i + 1 == steps { b } else { a + (b - a) * i as f64 / (steps - 1) as f64 }).collect()
    };
    let mut out: Vec<Vec<f64>> = vec![Vec::new()];
    for &range in ranges {
        let xs = axis(range);
        out = out.into_iter().flat_map(|p| xs.iter().map(move |x| [p.clone(), vec![*x]].concat())).collect();
    }
    out
}

/// Envelope at every point, computed in parallel. Order matches `points`.
pub fn envelope_sweep(
    f: &FuncExpr,
    r: f64,
    points: &[Vec<f64>],
    cfg: &SolverConfig,
) -> Result<Vec<EnvelopeResult>, NumericsError> {
    points.par_iter().map(|x| moreau_envelope(f, r, x, cfg)).collect()
}

/// Function values at every point.
pub fn function_sweep(f: &FuncExpr, points: &[Vec<f64>]) -> Vec<f64> {
    points.iter().map(|x| f.value_at(x)).collect()
}

impl Grid {
    pub fn new(points: Vec<Vec<f64>>, columns: Vec<String>, values: Vec<Vec<f64>>) -> Self {
        let dim = points.first().map_or(1, Vec::len);
        let axes = ["x", "y"].iter().take(dim).map(|s| s.to_string()).collect();
        Grid { axes, points, columns, values }
    }
}

/// Writes the header `x[,y],<columns>` and one row per point. Numbers use
/// the shortest round-trip form; `-inf` and `nan` are literal.
pub fn write_csv<W: Write>(grid: &Grid, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(grid.axes.iter().chain(&grid.columns))?;
    for (p, vals) in grid.points.iter().zip(&grid.values) {
        w.write_record(p.iter().chain(vals).map(|v| fmt_f64(*v)))?;
    }
    w.flush()?;
    Ok(())
}

/// Inverse of [`write_csv`].
pub fn read_csv<R: Read>(input: R) -> csv::Result<Grid> {
    let mut rdr = csv::Reader::from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let dim = header.iter().take_while(|h| *h == "x" || *h == "y").count();
    let mut points = Vec::new();
    let mut values = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let nums: Vec<f64> = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| csv::Error::from(std::io::Error::new(std::io::ErrorKind::InvalidData, e))))
            .collect::<Result<_, _>>()?;
        points.push(nums[..dim].to_vec());
        values.push(nums[dim..].to_vec());
    }
    Ok(Grid { axes: header[..dim].to_vec(), points, columns: header[dim..].to_vec(), values })
}
