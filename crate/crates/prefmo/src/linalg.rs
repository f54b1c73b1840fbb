//! Small dense linear algebra: solve, invert and condition estimates via
//! Gaussian elimination with partial pivoting. Matrices are row-major
//! `Vec<Vec<f64>>` at desk scale.

use crate::error::{Error, Result};

pub fn inf_norm(m: &[Vec<f64>]) -> f64 {
    m.iter()
        .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Solves A x = b. Fails when a pivot falls below `rel_tol * ||A||_inf`.
pub fn solve(a: &[Vec<f64>], b: &[f64], rel_tol: f64) -> Result<Vec<f64>> {
    let n = a.len();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    let norm = inf_norm(a).max(f64::MIN_POSITIVE);
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();

    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        if m[pivot_row][col].abs() < rel_tol * norm {
            return Err(Error::Numerical(format!(
                "singular or near-singular matrix (pivot {:.3e} at column {col})",
                m[pivot_row][col].abs()
            )));
        }
        m.swap(col, pivot_row);
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = m[row][col] / m[col][col];
            if factor != 0.0 {
                let (pivot, target) = if row < col {
                    let (lo, hi) = m.split_at_mut(col);
                    (&hi[0], &mut lo[row])
                } else {
                    let (lo, hi) = m.split_at_mut(row);
                    (&lo[col], &mut hi[0])
                };
                for k in col..=n {
                    target[k] -= factor * pivot[k];
                }
            }
        }
    }
    Ok((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

/// Inverts A column by column. Same pivot threshold semantics as [`solve`].
pub fn invert(a: &[Vec<f64>], rel_tol: f64) -> Result<Vec<Vec<f64>>> {
    let n = a.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        cols.push(solve(a, &e, rel_tol)?);
    }
    // cols[j] is the j-th column of the inverse; transpose into rows.
    Ok((0..n)
        .map(|i| (0..n).map(|j| cols[j][i]).collect())
        .collect())
}

pub fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let m = b[0].len();
    let inner = b.len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..inner).map(|k| a[i][k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

/// Condition number estimate in the infinity norm.
pub fn condition(a: &[Vec<f64>], a_inv: &[Vec<f64>]) -> f64 {
    inf_norm(a) * inf_norm(a_inv)
}

pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_2x2() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let x = solve(&a, &[5.0, 10.0], 1e-12).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_singular() {
        let a = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(solve(&a, &[1.0, 2.0], 1e-10).is_err());
    }

    #[test]
    fn inverse_residual() {
        let a = vec![
            vec![4.0, 1.0, 0.0],
            vec![1.0, 3.0, 1.0],
            vec![0.0, 1.0, 2.0],
        ];
        let inv = invert(&a, 1e-12).unwrap();
        let prod = mat_mul(&a, &inv);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((prod[i][j] - expect).abs() < 1e-12);
            }
        }
    }
}
