//! Symmetric eigenvalue helpers for quadratic atoms.

use nalgebra::DMatrix;

fn to_dmatrix(q: &[Vec<f64>]) -> DMatrix<f64> {
    let n = q.len();
    DMatrix::from_fn(n, n, |i, j| q[i][j])
}

fn scale_of(q: &[Vec<f64>]) -> f64 {
    q.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs())).max(1.0)
}

/// Smallest eigenvalue of a symmetric matrix. Exact for `1x1`.
pub fn min_eigenvalue(q: &[Vec<f64>]) -> f64 {
    match q.len() {
        0 => 0.0,
        1 => q[0][0],
        _ => to_dmatrix(q).symmetric_eigenvalues().min(),
    }
}

/// Eigenpairs `(λ, v)` sorted by ascending eigenvalue.
pub fn symmetric_eigen(q: &[Vec<f64>]) -> Vec<(f64, Vec<f64>)> {
    if q.len() == 1 {
        return vec![(q[0][0], vec![1.0])];
    }
    let eig = to_dmatrix(q).symmetric_eigen();
    let mut pairs: Vec<(f64, Vec<f64>)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(k, &lam)| (lam, eig.eigenvectors.column(k).iter().copied().collect()))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs
}

/// Whether `½ xᵀQx + bᵀx` is bounded below: `Q ⪰ 0` and `b ⟂ ker Q`.
pub fn quadratic_bounded_below(q: &[Vec<f64>], b: &[f64]) -> bool {
    let tol = 1e-12 * scale_of(q);
    let pairs = symmetric_eigen(q);
    for (lam, v) in pairs {
        if lam < -tol {
            return false;
        }
        if lam.abs() <= tol {
            let dot: f64 = v.iter().zip(b).map(|(a, c)| a * c).sum();
            if dot.abs() > 1e-12 * (1.0 + b.iter().fold(0.0_f64, |m, x| m.max(x.abs()))) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_eigenvalues() {
        let q = vec![vec![2.0, 1.0], vec![1.0, 2.0]];
        assert!((min_eigenvalue(&q) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bounded_below_needs_range_condition() {
        assert!(quadratic_bounded_below(&[vec![2.0]], &[5.0]));
        assert!(!quadratic_bounded_below(&[vec![-2.0]], &[0.0]));
        let q = vec![vec![2.0, 0.0], vec![0.0, 0.0]];
        assert!(quadratic_bounded_below(&q, &[1.0, 0.0]));
        assert!(!quadratic_bounded_below(&q, &[0.0, 1.0]));
    }
}
