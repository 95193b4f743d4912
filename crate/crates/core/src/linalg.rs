//! Small dense helpers: a rank-revealing null space and least squares.

use nalgebra::{DMatrix, DVector};

/// Relative pivot tolerance used by [`null_space`] callers in this crate.
pub const PIVOT_TOLERANCE: f64 = 1e-10;

/// Basis of the null space of the `rows.len() x ncols` matrix given by `rows`.
///
/// Gauss-Jordan elimination with partial pivoting per column. A column whose
/// best remaining pivot is below `rel_tol` times the largest column norm is
/// treated as free.
pub fn null_space(rows: &[Vec<f64>], ncols: usize, rel_tol: f64) -> Vec<Vec<f64>> {
    let mut a: Vec<Vec<f64>> = rows.to_vec();
    let scale = (0..ncols)
        .map(|c| a.iter().map(|r| r[c] * r[c]).sum::<f64>().sqrt())
        .fold(0.0_f64, f64::max);
    if scale == 0.0 {
        return (0..ncols).map(|c| unit(ncols, c)).collect();
    }
    let tol = rel_tol * scale;

    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut free = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        let best = (row..a.len()).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()));
        let Some(best) = best.filter(|&b| a[b][col].abs() > tol) else {
            free.push(col);
            continue;
        };
        a.swap(row, best);
        let p = a[row][col];
        for v in a[row].iter_mut() {
            *v /= p;
        }
        for r in 0..a.len() {
            if r != row && a[r][col] != 0.0 {
                let f = a[r][col];
                for c in 0..ncols {
                    a[r][c] -= f * a[row][c];
                }
            }
        }
        pivots.push((row, col));
        row += 1;
    }

    free.iter()
        .map(|&f| {
            let mut x = vec![0.0; ncols];
            x[f] = 1.0;
            for &(r, c) in &pivots {
                x[c] = -a[r][f];
            }
            x
        })
        .collect()
}

/// Least-squares solution of `a x = b` and the residual norm `|a x - b|`.
pub fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, f64) {
    let svd = a.clone().svd(true, true);
    let eps = 1e-12 * svd.singular_values.max().max(f64::MIN_POSITIVE);
    let x = svd
        .solve(b, eps)
        .unwrap_or_else(|_| DVector::zeros(a.ncols()));
    let residual = (a * &x - b).norm();
    (x, residual)
}

fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}
