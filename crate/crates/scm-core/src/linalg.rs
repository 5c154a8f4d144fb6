//! Small dense linear algebra: just enough for the cross-weight system
//! and the adjustment regression. Matrices are row-major `Vec<f64>` and
//! dimensions stay single digits, so plain Gaussian elimination with
//! partial pivoting is both adequate and easy to audit.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Singular {
    pub det: f64,
}

impl fmt::Display for Singular {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "matrix is singular to working precision (det = {:e})", self.det)
    }
}

impl core::error::Error for Singular {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankDeficient;

impl fmt::Display for RankDeficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "design matrix is rank deficient")
    }
}

impl core::error::Error for RankDeficient {}

/// LU decomposition with partial pivoting, kept for repeated solves
/// against the same matrix.
pub struct Lu {
    n: usize,
    lu: Vec<f64>,
    pivots: Vec<usize>,
    det: f64,
}

impl Lu {
    /// `a` is row-major `n x n`. Fails when a pivot vanishes; `det`
    /// carries the (possibly zero) determinant either way.
    pub fn factor(a: &[f64], n: usize) -> Result<Lu, Singular> {
        assert_eq!(a.len(), n * n);
        let mut lu = a.to_vec();
        let mut pivots = vec![0usize; n];
        let mut det = 1.0;
        for col in 0..n {
            let mut best = col;
            let mut best_abs = lu[col * n + col].abs();
            for row in col + 1..n {
                let v = lu[row * n + col].abs();
                if v > best_abs {
                    best = row;
                    best_abs = v;
                }
            }
            pivots[col] = best;
            if best != col {
                for k in 0..n {
                    lu.swap(col * n + k, best * n + k);
                }
                det = -det;
            }
            let pivot = lu[col * n + col];
            det *= pivot;
            if pivot == 0.0 {
                return Err(Singular { det: 0.0 });
            }
            for row in col + 1..n {
                let factor = lu[row * n + col] / pivot;
                lu[row * n + col] = factor;
                for k in col + 1..n {
                    lu[row * n + k] -= factor * lu[col * n + k];
                }
            }
        }
        Ok(Lu { n, lu, pivots, det })
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let mut x = b.to_vec();
        for col in 0..n {
            x.swap(col, self.pivots[col]);
            for row in col + 1..n {
                x[row] -= self.lu[row * n + col] * x[col];
            }
        }
        for col in (0..n).rev() {
            x[col] /= self.lu[col * n + col];
            for row in 0..col {
                x[row] -= self.lu[row * n + col] * x[col];
            }
        }
        x
    }

    /// 1-norm condition number `||A||_1 * ||A^-1||_1`, computed by
    /// explicit inverse; fine at these sizes.
    pub fn condition_1(&self, a: &[f64]) -> f64 {
        let n = self.n;
        let mut inv_norm = 0.0_f64;
        let mut e = vec![0.0; n];
        let mut col_sums = vec![0.0; n];
        for col in 0..n {
            e[col] = 1.0;
            let x = self.solve(&e);
            e[col] = 0.0;
            col_sums[col] = x.iter().map(|v| v.abs()).sum();
        }
        for &s in &col_sums {
            inv_norm = if s > inv_norm { s } else { inv_norm };
        }
        let mut a_norm = 0.0_f64;
        for col in 0..n {
            let s: f64 = (0..n).map(|row| a[row * n + col].abs()).sum();
            a_norm = if s > a_norm { s } else { a_norm };
        }
        a_norm * inv_norm
    }
}

/// Ordinary least squares `min_b ||X b - y||^2` via normal equations.
/// `x` is row-major `rows x cols`. Near-zero pivots in the Gram matrix
/// signal collinear columns.
pub fn ols(x: &[f64], rows: usize, cols: usize, y: &[f64]) -> Result<Vec<f64>, RankDeficient> {
    assert_eq!(x.len(), rows * cols);
    assert_eq!(y.len(), rows);
    assert!(cols > 0 && rows > 0);

    let mut gram = vec![0.0; cols * cols];
    let mut xty = vec![0.0; cols];
    for r in 0..rows {
        let row = &x[r * cols..(r + 1) * cols];
        for a in 0..cols {
            xty[a] += row[a] * y[r];
            for b in a..cols {
                gram[a * cols + b] += row[a] * row[b];
            }
        }
    }
    for a in 0..cols {
        for b in 0..a {
            gram[a * cols + b] = gram[b * cols + a];
        }
    }

    let scale = gram.iter().fold(0.0_f64, |m, v| if v.abs() > m { v.abs() } else { m });
    if scale == 0.0 {
        return Err(RankDeficient);
    }
    let lu = Lu::factor(&gram, cols).map_err(|_| RankDeficient)?;
    // Pivot magnitudes live on the LU diagonal after factorization.
    for d in 0..cols {
        if lu.lu[d * cols + d].abs() < 1e-10 * scale {
            return Err(RankDeficient);
        }
    }
    Ok(lu.solve(&xty))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_known_system() {
        // [[2, 1], [1, 3]] x = [5, 10] -> x = [1, 3]
        let a = [2.0, 1.0, 1.0, 3.0];
        let lu = Lu::factor(&a, 2).unwrap();
        let x = lu.solve(&[5.0, 10.0]);
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 3.0).abs() < 1e-12);
        assert!((lu.det() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn cross_weight_hand_case() {
        // (I - W) e = g with W = [[0, 0.4], [0.5, 0]], g = (3, 1):
        // e = (4.25, 3.125), so the first component is 4.25.
        let a = [1.0, -0.4, -0.5, 1.0];
        let lu = Lu::factor(&a, 2).unwrap();
        let e = lu.solve(&[3.0, 1.0]);
        assert!((e[0] - 4.25).abs() < 1e-9);
        assert!((e[1] - 3.125).abs() < 1e-9);
    }

    #[test]
    fn pivoting_handles_zero_leading_entry() {
        // Leading zero forces a row swap.
        let a = [0.0, 1.0, 1.0, 0.0];
        let lu = Lu::factor(&a, 2).unwrap();
        let x = lu.solve(&[2.0, 3.0]);
        assert!((x[0] - 3.0).abs() < 1e-12);
        assert!((x[1] - 2.0).abs() < 1e-12);
        assert!((lu.det() - (-1.0)).abs() < 1e-12);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = [1.0, 2.0, 2.0, 4.0];
        assert!(Lu::factor(&a, 2).is_err());
    }

    #[test]
    fn condition_of_identity_is_one() {
        let a = [1.0, 0.0, 0.0, 1.0];
        let lu = Lu::factor(&a, 2).unwrap();
        assert!((lu.condition_1(&a) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ols_recovers_line() {
        // y = 2 + 3 x, design [1, x]
        let x = [1.0, 0.0, 1.0, 1.0, 1.0, 2.0, 1.0, 3.0];
        let y = [2.0, 5.0, 8.0, 11.0];
        let beta = ols(&x, 4, 2, &y).unwrap();
        assert!((beta[0] - 2.0).abs() < 1e-10);
        assert!((beta[1] - 3.0).abs() < 1e-10);
    }

    #[test]
    fn ols_intercept_only_is_mean() {
        let x = [1.0, 1.0, 1.0, 1.0];
        let y = [2.0, 4.0, 6.0, 0.0];
        let beta = ols(&x, 4, 1, &y).unwrap();
        assert!((beta[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn ols_rejects_collinear_design() {
        // second column is 2x the first
        let x = [1.0, 2.0, 1.0, 2.0, 1.0, 2.0];
        let y = [1.0, 2.0, 3.0];
        assert_eq!(ols(&x, 3, 2, &y), Err(RankDeficient));
    }
}
