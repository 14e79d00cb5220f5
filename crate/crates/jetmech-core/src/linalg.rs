//! Dense row-major matrices and the small decompositions the crate needs.
//!
//! Every matrix in this crate is tiny (at most `3 + 4n` rows for small fiber
//! dimension `n`), so the implementations favour determinism and clarity:
//! one-sided Jacobi for singular values / null spaces and Gaussian
//! elimination with partial pivoting for square solves.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        debug_assert!(rows.iter().all(|row| row.len() == c));
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            data.extend_from_slice(row);
        }
        Self {
            rows: r,
            cols: c,
            data,
        }
    }

    /// Columns given as vectors; all must share a length.
    pub fn from_columns(cols: &[Vec<f64>]) -> Self {
        let c = cols.len();
        let r = cols.first().map_or(0, Vec::len);
        let mut m = Self::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            debug_assert_eq!(col.len(), r);
            for (i, &x) in col.iter().enumerate() {
                m[(i, j)] = x;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, rhs: &Mat) -> Mat {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = Mat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "matvec dimension mismatch");
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            let mut s = 0.0;
            for j in 0..self.cols {
                s += self[(i, j)] * x[j];
            }
            out[i] = s;
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &x| m.max(x.abs()))
    }

    /// `[A | B]` with matching row counts.
    pub fn hstack(&self, rhs: &Mat) -> Mat {
        assert_eq!(self.rows, rhs.rows, "hstack row mismatch");
        let mut out = Mat::zeros(self.rows, self.cols + rhs.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(i, j)];
            }
            for j in 0..rhs.cols {
                out[(i, self.cols + j)] = rhs[(i, j)];
            }
        }
        out
    }

    pub fn scale(&self, factor: f64) -> Mat {
        let mut out = self.clone();
        for x in &mut out.data {
            *x *= factor;
        }
        out
    }

    pub fn sub(&self, rhs: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut out = self.clone();
        for (x, y) in out.data.iter_mut().zip(&rhs.data) {
            *x -= y;
        }
        out
    }
}

impl core::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Singular values (descending) with right singular vectors; left vectors are
/// kept only for columns with a nonzero singular value.
pub struct Svd {
    pub singular_values: Vec<f64>,
    /// `rows x cols`; column `k` is the left singular vector for
    /// `singular_values[k]` (zero column when the value vanishes).
    pub u: Mat,
    /// `cols x cols` orthogonal.
    pub v: Mat,
}

/// One-sided Jacobi SVD. Rotations are applied in a fixed sweep order, so the
/// result is deterministic.
pub fn svd(a: &Mat) -> Svd {
    let m = a.rows();
    let n = a.cols();
    let mut w = a.clone();
    let mut v = Mat::identity(n);

    let max_sweeps = 60;
    for _ in 0..max_sweeps {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = 0.0;
                for i in 0..m {
                    let x = w[(i, p)];
                    let y = w[(i, q)];
                    app += x * x;
                    aqq += y * y;
                    apq += x * y;
                }
                if apq.abs() <= 1e-30 || apq.abs() <= 1e-16 * libm::sqrt(app * aqq) {
                    continue;
                }
                rotated = true;
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + libm::sqrt(1.0 + tau * tau))
                } else {
                    -1.0 / (-tau + libm::sqrt(1.0 + tau * tau))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                for i in 0..m {
                    let x = w[(i, p)];
                    let y = w[(i, q)];
                    w[(i, p)] = c * x - s * y;
                    w[(i, q)] = s * x + c * y;
                }
                for i in 0..n {
                    let x = v[(i, p)];
                    let y = v[(i, q)];
                    v[(i, p)] = c * x - s * y;
                    v[(i, q)] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sigma: Vec<f64> = (0..n)
        .map(|j| {
            let mut s = 0.0;
            for i in 0..m {
                s += w[(i, j)] * w[(i, j)];
            }
            libm::sqrt(s)
        })
        .collect();

    // Sort descending; ties keep their original column order.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].partial_cmp(&sigma[i]).unwrap().then(i.cmp(&j)));

    let mut u = Mat::zeros(m, n);
    let mut v_sorted = Mat::zeros(n, n);
    let mut sigma_sorted = vec![0.0; n];
    for (k, &j) in order.iter().enumerate() {
        sigma_sorted[k] = sigma[j];
        if sigma[j] > 0.0 {
            for i in 0..m {
                u[(i, k)] = w[(i, j)] / sigma[j];
            }
        }
        for i in 0..n {
            v_sorted[(i, k)] = v[(i, j)];
        }
    }
    sigma = sigma_sorted;

    Svd {
        singular_values: sigma,
        u,
        v: v_sorted,
    }
}

/// Threshold below which singular values count as zero: `tol` relative to the
/// largest singular value, or `tol` itself when the matrix vanishes.
fn zero_threshold(sigma: &[f64], tol: f64) -> f64 {
    let max = sigma.first().copied().unwrap_or(0.0);
    if max > 0.0 {
        tol * max
    } else {
        tol
    }
}

pub fn rank(a: &Mat, tol: f64) -> usize {
    let d = svd(a);
    let thresh = zero_threshold(&d.singular_values, tol);
    d.singular_values.iter().filter(|&&s| s > thresh).count()
}

/// Orthonormal basis of the null space (right singular vectors for the
/// vanishing singular values).
pub fn null_space(a: &Mat, tol: f64) -> Vec<Vec<f64>> {
    let d = svd(a);
    let thresh = zero_threshold(&d.singular_values, tol);
    (0..a.cols())
        .filter(|&k| d.singular_values[k] <= thresh)
        .map(|k| d.v.column(k))
        .collect()
}

/// Orthonormal basis of the column space.
pub fn column_space(a: &Mat, tol: f64) -> Vec<Vec<f64>> {
    let d = svd(a);
    let thresh = zero_threshold(&d.singular_values, tol);
    (0..a.cols())
        .filter(|&k| d.singular_values[k] > thresh)
        .map(|k| d.u.column(k))
        .collect()
}

/// `dim(U ∩ V) = dim U + dim V - rank [U V]` for full-column-rank bases.
pub fn intersection_dim(u: &[Vec<f64>], v: &[Vec<f64>], tol: f64) -> usize {
    if u.is_empty() || v.is_empty() {
        return 0;
    }
    let mut all: Vec<Vec<f64>> = Vec::with_capacity(u.len() + v.len());
    all.extend_from_slice(u);
    all.extend_from_slice(v);
    let stacked = Mat::from_columns(&all);
    u.len() + v.len() - rank(&stacked, tol)
}

/// Solve `A x = b` for square `A` by Gaussian elimination with partial
/// pivoting.
pub fn solve(a: &Mat, b: &[f64], context: &'static str) -> Result<Vec<f64>> {
    let n = a.rows();
    assert_eq!(a.cols(), n, "solve expects a square matrix");
    assert_eq!(b.len(), n, "solve rhs length mismatch");

    let mut aug = a.clone();
    let mut x: Vec<f64> = b.to_vec();
    let scale = aug.max_abs().max(1.0);

    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_val = aug[(col, col)].abs();
        for r in (col + 1)..n {
            let v = aug[(r, col)].abs();
            if v > pivot_val {
                pivot_val = v;
                pivot_row = r;
            }
        }
        if pivot_val <= 1e-13 * scale {
            return Err(CoreError::SingularSystem { context });
        }
        if pivot_row != col {
            for j in 0..n {
                let tmp = aug[(col, j)];
                aug[(col, j)] = aug[(pivot_row, j)];
                aug[(pivot_row, j)] = tmp;
            }
            x.swap(col, pivot_row);
        }
        for r in (col + 1)..n {
            let factor = aug[(r, col)] / aug[(col, col)];
            if factor == 0.0 {
                continue;
            }
            for j in col..n {
                aug[(r, j)] -= factor * aug[(col, j)];
            }
            x[r] -= factor * x[col];
        }
    }
    for col in (0..n).rev() {
        let mut s = x[col];
        for j in (col + 1)..n {
            s -= aug[(col, j)] * x[j];
        }
        x[col] = s / aug[(col, col)];
    }
    Ok(x)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
